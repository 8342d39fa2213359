#pragma once

// Exchangeable channel sequences generated by finite mixtures: N-copy
// mixture powers, symmetry/extendibility verification across a prefix,
// the trace-moment scan that detects non-trace-preserving contamination,
// and simplex-constrained recovery of mixture weights from a target Choi
// matrix.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chex/channels.hpp"
#include "chex/linalg.hpp"
#include "chex/states.hpp"
#include "chex/tolerances.hpp"

namespace chex {

// A finite probability mixture of single-system channels with a common
// dimension. Members must be CP; trace preservation is enforced only when
// tp_required is set, so CP-only mixtures (the scan's quarry) are allowed.
class MixtureEnsemble {
 public:
  MixtureEnsemble(RealVector weights, std::vector<Channel> members,
                  bool tp_required)
      : weights_(std::move(weights)),
        members_(std::move(members)),
        tp_required_(tp_required) {
    if (members_.empty())
      throw std::invalid_argument("MixtureEnsemble: no members");
    if (weights_.size() != static_cast<Index>(members_.size()))
      throw std::invalid_argument("MixtureEnsemble: weight count mismatch");
    double sum = 0.0;
    for (Index i = 0; i < weights_.size(); ++i) {
      if (weights_(i) < 0.0)
        throw std::invalid_argument("MixtureEnsemble: negative weight");
      sum += weights_(i);
    }
    if (std::abs(sum - 1.0) > tol::trace)
      throw std::invalid_argument("MixtureEnsemble: weights do not sum to 1");
    const Index d = members_.front().d();
    for (const Channel& m : members_) {
      if (m.n() != 1)
        throw std::invalid_argument("MixtureEnsemble: members must act on one system");
      if (m.d() != d)
        throw std::invalid_argument("MixtureEnsemble: mixed dimensions");
      if (!is_cp(m).cp)
        throw std::invalid_argument("MixtureEnsemble: member not CP");
      if (tp_required_ && !is_tp(m).pass)
        throw std::invalid_argument("MixtureEnsemble: member not TP");
    }
  }

  Index d() const { return members_.front().d(); }
  int size() const { return static_cast<int>(members_.size()); }
  double weight(int i) const { return weights_(i); }
  const Channel& member(int i) const {
    return members_.at(static_cast<size_t>(i));
  }
  const RealVector& weights() const { return weights_; }
  const std::vector<Channel>& members() const { return members_; }
  bool tp_required() const { return tp_required_; }

 private:
  RealVector weights_;
  std::vector<Channel> members_;
  bool tp_required_;
};

// sum_i w_i Phi_i^(x)n.
inline Channel mixture_power(const MixtureEnsemble& ens, int n) {
  if (n < 1) throw std::invalid_argument("mixture_power: n < 1");
  if (int_pow(ens.d(), 2 * n) > kDimensionCap)
    throw std::invalid_argument("mixture_power: dimension cap exceeded");
  const Index dim = int_pow(ens.d(), 2 * n);
  ComplexMatrix choi = ComplexMatrix::Zero(dim, dim);
  for (int i = 0; i < ens.size(); ++i)
    choi += ens.weight(i) * kron_power(ens.member(i).choi(), n);
  return Channel(ens.d(), n, std::move(choi));
}

struct LevelReport {
  int n = 0;
  bool symmetric = false;
  double symmetry_deviation = 0.0;
};

struct PairReport {
  int lower_n = 0;  // checks the pair (lower_n, lower_n + 1)
  ChannelExtensionCheck extension;
};

struct ExchangeabilityReport {
  std::vector<LevelReport> levels;
  std::vector<PairReport> pairs;
  double tolerance = 0.0;
  bool pass = false;
};

// Builds the mixture powers for k = 1..n_max and checks the two defining
// conditions of an exchangeable prefix: each level invariant under copy
// permutations, each level the reduction of the next.
inline ExchangeabilityReport verify_exchangeable_prefix(
    const MixtureEnsemble& ens, int n_max, double tol = tol::sym) {
  if (n_max < 2)
    throw std::invalid_argument("verify_exchangeable_prefix: n_max < 2");
  if (int_pow(ens.d(), 2 * n_max) > kDimensionCap)
    throw std::invalid_argument(
        "verify_exchangeable_prefix: dimension cap exceeded");

  std::vector<Channel> powers;
  powers.reserve(static_cast<size_t>(n_max));
  for (int k = 1; k <= n_max; ++k) powers.push_back(mixture_power(ens, k));

  ExchangeabilityReport report;
  report.tolerance = tol;
  report.pass = true;
  for (int k = 1; k <= n_max; ++k) {
    const DeviationCheck sym =
        is_symmetric_channel(powers[static_cast<size_t>(k - 1)], tol);
    report.levels.push_back({k, sym.pass, sym.max_deviation});
    report.pass = report.pass && sym.pass;
  }
  for (int k = 1; k < n_max; ++k) {
    const ChannelExtensionCheck ext =
        is_channel_extension(powers[static_cast<size_t>(k - 1)],
                             powers[static_cast<size_t>(k)], tol);
    report.pass = report.pass && ext.pass && ext.choi_marginal_pass;
    report.pairs.push_back({k, ext});
  }
  return report;
}

// sum_i w_i (tr Phi_i(rho))^n. Coincides with the trace of the n-copy
// mixture applied to rho^(x)n; the moment grows geometrically in n for any
// member whose output trace on rho differs from one.
inline double moment_trace(const MixtureEnsemble& ens,
                           const DensityOperator& rho, int n) {
  if (n < 1) throw std::invalid_argument("moment_trace: n < 1");
  if (rho.space().total_dim() != ens.d())
    throw std::invalid_argument("moment_trace: state dimension mismatch");
  double total = 0.0;
  for (int i = 0; i < ens.size(); ++i) {
    const double t = apply(ens.member(i), rho).trace().real();
    double power = 1.0;
    for (int rep = 0; rep < n; ++rep) power *= t;
    total += ens.weight(i) * power;
  }
  return total;
}

// First n in 1..n_max where |moment_trace(ens, rho, n) - 1| exceeds the
// threshold, if any.
inline std::optional<int> tp_violation_scan(const MixtureEnsemble& ens,
                                            const DensityOperator& rho,
                                            int n_max, double threshold) {
  if (threshold <= 0.0)
    throw std::invalid_argument("tp_violation_scan: threshold must be > 0");
  for (int n = 1; n <= n_max; ++n)
    if (std::abs(moment_trace(ens, rho, n) - 1.0) > threshold)
      return n;
  return std::nullopt;
}

namespace detail {

// Real [Re; Im] stack of the vectorized n-copy Choi matrices, one column
// per dictionary member.
inline Eigen::MatrixXd stacked_dictionary(const std::vector<Channel>& dictionary,
                                          int n) {
  const size_t m = dictionary.size();
  const Index dim = int_pow(dictionary.front().d(), 2 * n);
  Eigen::MatrixXd a(2 * dim * dim, static_cast<Index>(m));
  for (size_t i = 0; i < m; ++i) {
    const ComplexMatrix choi = tensor_power(dictionary[i], n).choi();
    Index r = 0;
    for (Index row = 0; row < dim; ++row)
      for (Index col = 0; col < dim; ++col, ++r) {
        a(r, static_cast<Index>(i)) = choi(row, col).real();
        a(dim * dim + r, static_cast<Index>(i)) = choi(row, col).imag();
      }
  }
  return a;
}

// Euclidean projection onto the probability simplex (sort-based).
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const Index m = v.size();
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index i = 0; i < m; ++i) {
    cumsum += u[static_cast<size_t>(i)];
    const double candidate = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<size_t>(i)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

}  // namespace detail

struct WeightRecovery {
  RealVector weights;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Least-squares mixture weights on the probability simplex: minimizes
// ||A w - b||_2 over the simplex by projected gradient descent with the
// exact Lipschitz step 1/||A||_2^2, where the columns of A are the
// vectorized n-copy Choi matrices of the dictionary and b is the target's.
// Non-convergence within max_iterations is reported via the flag rather
// than thrown, so non-representability witnesses still carry a residual.
inline WeightRecovery extract_weights(const Channel& target,
                                      const std::vector<Channel>& dictionary,
                                      int n, int max_iterations = 10000,
                                      double move_tol = 1e-12) {
  if (dictionary.empty())
    throw std::invalid_argument("extract_weights: empty dictionary");
  if (target.n() != n)
    throw std::invalid_argument("extract_weights: target arity != n");
  for (const Channel& c : dictionary) {
    if (c.n() != 1 || c.d() != target.d())
      throw std::invalid_argument("extract_weights: dictionary shape mismatch");
    if (!is_cp(c).cp || !is_tp(c).pass)
      throw std::invalid_argument("extract_weights: dictionary member not CPTP");
  }

  const Eigen::MatrixXd a = detail::stacked_dictionary(dictionary, n);
  const Index m = a.cols();
  Eigen::VectorXd b(a.rows());
  {
    const ComplexMatrix& choi = target.choi();
    const Index dim = choi.rows();
    Index r = 0;
    for (Index row = 0; row < dim; ++row)
      for (Index col = 0; col < dim; ++col, ++r) {
        b(r) = choi(row, col).real();
        b(dim * dim + r) = choi(row, col).imag();
      }
  }

  const Eigen::MatrixXd ata = a.transpose() * a;
  const Eigen::VectorXd atb = a.transpose() * b;
  const double lipschitz =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ata, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  if (!(lipschitz > 0.0))
    throw std::runtime_error("extract_weights: degenerate dictionary matrix");
  const double step = 1.0 / lipschitz;

  Eigen::VectorXd w =
      Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  WeightRecovery result;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd gradient = ata * w - atb;
    const Eigen::VectorXd next = detail::project_simplex(w - step * gradient);
    const double move = (next - w).norm();
    w = next;
    result.iterations = it;
    if (move < move_tol) {
      result.converged = true;
      break;
    }
  }
  result.weights = w;
  result.residual = (a * w - b).norm();
  return result;
}

// True when the vectorized n-copy Choi matrices of the dictionary are
// linearly independent (singular values below rank_tol times the largest
// count as zero), i.e. when extract_weights has a unique minimizer.
inline bool uniqueness_probe(const std::vector<Channel>& dictionary, int n,
                             double rank_tol = tol::rank) {
  if (dictionary.empty()) return true;
  const Eigen::MatrixXd a = detail::stacked_dictionary(dictionary, n);
  const Eigen::VectorXd sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  const double cutoff = rank_tol * sigma(0);
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff) ++rank;
  return rank == a.cols();
}

}  // namespace chex
