#pragma once

// Bayesian process tomography over a discrete channel dictionary: Born-rule
// shot simulation, posterior updates, seeded round-robin experiments, and
// the Choi trace-distance diagnostic used to monitor convergence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chex/channels.hpp"
#include "chex/linalg.hpp"
#include "chex/random.hpp"
#include "chex/states.hpp"
#include "chex/tolerances.hpp"

namespace chex {

// A labeled measurement: positive effects summing to the identity.
class Povm {
 public:
  Povm(std::string id, std::vector<ComplexMatrix> effects)
      : id_(std::move(id)), effects_(std::move(effects)) {
    if (effects_.empty()) throw std::invalid_argument("Povm: no effects");
    const Index dim = effects_.front().rows();
    ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
    for (const ComplexMatrix& e : effects_) {
      if (e.rows() != dim || e.cols() != dim)
        throw std::invalid_argument("Povm: effect shape mismatch");
      if (!is_hermitian(e))
        throw std::invalid_argument("Povm: effect not Hermitian");
      if (hermitian_eigenvalues(e)(0) < -tol::psd)
        throw std::invalid_argument("Povm: effect not positive");
      sum += e;
    }
    if (max_abs(sum - ComplexMatrix(ComplexMatrix::Identity(dim, dim))) > tol::tp)
      throw std::invalid_argument("Povm: effects do not sum to identity");
  }

  // Projective measurement onto the columns of a unitary matrix.
  static Povm from_basis(std::string id, const ComplexMatrix& basis) {
    std::vector<ComplexMatrix> effects;
    for (Index k = 0; k < basis.cols(); ++k) {
      const ComplexVector v = basis.col(k);
      effects.push_back(v * v.adjoint());
    }
    return Povm(std::move(id), std::move(effects));
  }

  static Povm computational(Index d) {
    return from_basis("computational",
                      ComplexMatrix(ComplexMatrix::Identity(d, d)));
  }

  const std::string& id() const { return id_; }
  int size() const { return static_cast<int>(effects_.size()); }
  Index dim() const { return effects_.front().rows(); }
  const ComplexMatrix& effect(int k) const {
    return effects_.at(static_cast<size_t>(k));
  }
  const std::vector<ComplexMatrix>& effects() const { return effects_; }

 private:
  std::string id_;
  std::vector<ComplexMatrix> effects_;
};

struct TomographyRecord {
  std::string input_id;
  std::string povm_id;
  int outcome = 0;
};

// Named input states and measurements a schedule can reference.
struct Catalog {
  std::map<std::string, DensityOperator> inputs;
  std::map<std::string, Povm> povms;

  const DensityOperator& input(const std::string& id) const {
    const auto it = inputs.find(id);
    if (it == inputs.end())
      throw std::invalid_argument("Catalog: unknown input id '" + id + "'");
    return it->second;
  }
  const Povm& povm(const std::string& id) const {
    const auto it = povms.find(id);
    if (it == povms.end())
      throw std::invalid_argument("Catalog: unknown povm id '" + id + "'");
    return it->second;
  }
};

// Samples an outcome of measuring povm on truth(input) by the Born rule.
// The truth channel must be trace preserving so the outcome probabilities
// form a distribution; an effect probability below -tol_psd signals a
// corrupted POVM and throws.
inline int simulate_shot(const Channel& truth, const DensityOperator& input,
                         const Povm& povm, Rng& rng) {
  if (truth.n() != 1)
    throw std::invalid_argument("simulate_shot: truth must act on one system");
  if (!is_tp(truth).pass)
    throw std::invalid_argument("simulate_shot: truth not trace preserving");
  if (input.space().total_dim() != truth.system_dim() ||
      povm.dim() != truth.system_dim())
    throw std::invalid_argument("simulate_shot: dimension mismatch");

  const ComplexMatrix out = apply(truth, input);
  std::vector<double> probs(static_cast<size_t>(povm.size()));
  for (int k = 0; k < povm.size(); ++k) {
    const double p = (povm.effect(k) * out).trace().real();
    if (p < -tol::psd)
      throw std::runtime_error("simulate_shot: negative outcome probability " +
                               std::to_string(p));
    probs[static_cast<size_t>(k)] = std::max(p, 0.0);
  }
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (int k = 0; k < povm.size(); ++k) {
    cumulative += probs[static_cast<size_t>(k)];
    if (u < cumulative) return k;
  }
  return povm.size() - 1;
}

struct PosteriorUpdate {
  RealVector weights;
  bool zero_likelihood = false;  // record impossible under every member
};

// Bayes rule over the dictionary: w_i' proportional to w_i times the
// likelihood of the recorded outcome under member i. A record with zero
// total likelihood leaves the weights unchanged and sets the flag.
inline PosteriorUpdate posterior_update(const RealVector& weights,
                                        const std::vector<Channel>& dictionary,
                                        const TomographyRecord& record,
                                        const Catalog& catalog) {
  if (weights.size() != static_cast<Index>(dictionary.size()))
    throw std::invalid_argument("posterior_update: weight count mismatch");
  double sum = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (weights(i) < 0.0)
      throw std::invalid_argument("posterior_update: negative weight");
    sum += weights(i);
  }
  if (std::abs(sum - 1.0) > tol::trace)
    throw std::invalid_argument("posterior_update: weights do not sum to 1");

  const DensityOperator& input = catalog.input(record.input_id);
  const Povm& povm = catalog.povm(record.povm_id);
  if (record.outcome < 0 || record.outcome >= povm.size())
    throw std::invalid_argument("posterior_update: outcome out of range");

  RealVector updated(weights.size());
  double total = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    const double likelihood = std::max(
        (povm.effect(record.outcome) *
         apply(dictionary[static_cast<size_t>(i)], input))
            .trace()
            .real(),
        0.0);
    updated(i) = weights(i) * likelihood;
    total += updated(i);
  }
  if (total <= 0.0) return {weights, true};
  return {updated / total, false};
}

// (1/2) sum |eigenvalues of choi(a) - choi(b)|.
inline double choi_trace_distance(const Channel& a, const Channel& b) {
  if (a.d() != b.d() || a.n() != b.n())
    throw std::invalid_argument("choi_trace_distance: shape mismatch");
  const RealVector eig = hermitian_eigenvalues(a.choi() - b.choi());
  return 0.5 * eig.cwiseAbs().sum();
}

struct ScheduleEntry {
  std::string input_id;
  std::string povm_id;
};

struct ExperimentConfig {
  Channel truth;                    // n=1, TP
  std::vector<Channel> dictionary;  // n=1, common d
  RealVector prior;
  Catalog catalog;
  std::vector<ScheduleEntry> schedule;  // cycled round-robin
  int num_shots = 0;
  std::uint64_t seed = 0;
  int truth_index = -1;        // dictionary position of truth, -1 if unlisted
  double target_weight = 0.99; // reporting threshold when truth_index >= 0
};

struct PosteriorTrajectory {
  std::vector<TomographyRecord> records;  // one per shot
  std::vector<RealVector> weights;        // posterior after each shot
  std::vector<double> distances;          // posterior mean vs truth, per shot
  std::uint64_t seed = 0;
  int zero_likelihood_count = 0;
};

// Runs the full seeded experiment: cycle the schedule, sample a shot,
// update the posterior, and log the Choi trace distance between the
// posterior-mean channel and the truth. Deterministic for a fixed config.
inline PosteriorTrajectory run_experiment(const ExperimentConfig& config) {
  if (config.dictionary.empty())
    throw std::invalid_argument("run_experiment: empty dictionary");
  const Index d = config.truth.d();
  for (const Channel& c : config.dictionary)
    if (c.n() != 1 || c.d() != d)
      throw std::invalid_argument("run_experiment: dictionary shape mismatch");
  if (config.schedule.empty())
    throw std::invalid_argument("run_experiment: empty schedule");
  if (config.num_shots < 0)
    throw std::invalid_argument("run_experiment: negative shot count");
  if (config.truth_index >= static_cast<int>(config.dictionary.size()))
    throw std::invalid_argument("run_experiment: truth_index out of range");
  for (const ScheduleEntry& entry : config.schedule) {
    const DensityOperator& input = config.catalog.input(entry.input_id);
    const Povm& povm = config.catalog.povm(entry.povm_id);
    if (input.space().total_dim() != config.truth.system_dim() ||
        povm.dim() != config.truth.system_dim())
      throw std::invalid_argument("run_experiment: schedule dimension mismatch");
  }

  Rng rng(config.seed);
  RealVector w = config.prior;
  PosteriorTrajectory trajectory;
  trajectory.seed = config.seed;
  for (int shot = 0; shot < config.num_shots; ++shot) {
    const ScheduleEntry& entry =
        config.schedule[static_cast<size_t>(shot) % config.schedule.size()];
    TomographyRecord record;
    record.input_id = entry.input_id;
    record.povm_id = entry.povm_id;
    record.outcome = simulate_shot(config.truth, config.catalog.input(entry.input_id),
                                   config.catalog.povm(entry.povm_id), rng);

    const PosteriorUpdate update =
        posterior_update(w, config.dictionary, record, config.catalog);
    if (update.zero_likelihood) ++trajectory.zero_likelihood_count;
    w = update.weights;

    ComplexMatrix mean_choi = ComplexMatrix::Zero(d * d, d * d);
    for (size_t i = 0; i < config.dictionary.size(); ++i)
      mean_choi += w(static_cast<Index>(i)) * config.dictionary[i].choi();
    const Channel mean(d, 1, std::move(mean_choi));

    trajectory.records.push_back(std::move(record));
    trajectory.weights.push_back(w);
    trajectory.distances.push_back(choi_trace_distance(mean, config.truth));
  }
  return trajectory;
}

}  // namespace chex
