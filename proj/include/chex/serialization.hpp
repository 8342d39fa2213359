#pragma once

// Structured-text (JSON) formats for channels, states, ensembles,
// experiment configs, and reports, plus CSV emitters for tabular reports.
// Every object carries a versioned "schema" field. Matrices are flat
// row-major lists of [re, im] pairs; doubles are written with shortest
// round-trip precision, so save/load is bit-exact and re-serialization of
// equal data is byte-identical.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "chex/channels.hpp"
#include "chex/definetti.hpp"
#include "chex/linalg.hpp"
#include "chex/states.hpp"
#include "chex/tomography.hpp"

namespace chex::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kChannelSchema = "chex.channel.v1";
inline constexpr const char* kStateSchema = "chex.state.v1";
inline constexpr const char* kEnsembleSchema = "chex.ensemble.v1";
inline constexpr const char* kExperimentSchema = "chex.experiment.v1";
inline constexpr const char* kTrajectorySchema = "chex.report.trajectory.v1";
inline constexpr const char* kExchangeabilitySchema =
    "chex.report.exchangeability.v1";

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double value) {
  char buf[32];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), value);
  if (r.ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, r.ptr);
}

inline void check_schema(const json& j, const char* expected) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != expected)
    throw std::invalid_argument(std::string("expected schema '") + expected +
                                "'");
}

inline json complex_matrix_to_json(const ComplexMatrix& m) {
  json entries = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      entries.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
  return entries;
}

inline ComplexMatrix complex_matrix_from_json(const json& entries, Index rows,
                                              Index cols) {
  if (!entries.is_array() || static_cast<Index>(entries.size()) != rows * cols)
    throw std::invalid_argument("matrix entry count mismatch");
  ComplexMatrix m(rows, cols);
  Index flat = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c, ++flat) {
      const json& e = entries.at(static_cast<size_t>(flat));
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("matrix entry is not an [re, im] pair");
      m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  return m;
}

inline json channel_to_json(const Channel& c) {
  json j;
  j["schema"] = kChannelSchema;
  j["d"] = c.d();
  j["n"] = c.n();
  j["choi"] = complex_matrix_to_json(c.choi());
  return j;
}

inline Channel channel_from_json(const json& j) {
  check_schema(j, kChannelSchema);
  const Index d = j.at("d").get<Index>();
  const int n = j.at("n").get<int>();
  const Index dim = int_pow(d, 2 * n);
  return Channel(d, n, complex_matrix_from_json(j.at("choi"), dim, dim));
}

inline json state_to_json(const DensityOperator& rho) {
  json j;
  j["schema"] = kStateSchema;
  j["dims"] = rho.space().factor_dims();
  j["matrix"] = complex_matrix_to_json(rho.matrix());
  return j;
}

inline DensityOperator state_from_json(const json& j) {
  check_schema(j, kStateSchema);
  TensorSpace space(j.at("dims").get<std::vector<Index>>());
  const Index dim = space.total_dim();
  return DensityOperator(space,
                         complex_matrix_from_json(j.at("matrix"), dim, dim));
}

inline json ensemble_to_json(const MixtureEnsemble& ens) {
  json j;
  j["schema"] = kEnsembleSchema;
  j["d"] = ens.d();
  j["tp_required"] = ens.tp_required();
  json members = json::array();
  for (int i = 0; i < ens.size(); ++i) {
    json m;
    m["weight"] = ens.weight(i);
    m["channel"] = channel_to_json(ens.member(i));
    members.push_back(std::move(m));
  }
  j["members"] = std::move(members);
  return j;
}

inline MixtureEnsemble ensemble_from_json(const json& j) {
  check_schema(j, kEnsembleSchema);
  const json& members = j.at("members");
  if (!members.is_array() || members.empty())
    throw std::invalid_argument("ensemble has no members");
  RealVector weights(static_cast<Index>(members.size()));
  std::vector<Channel> channels;
  for (size_t i = 0; i < members.size(); ++i) {
    weights(static_cast<Index>(i)) = members.at(i).at("weight").get<double>();
    channels.push_back(channel_from_json(members.at(i).at("channel")));
  }
  MixtureEnsemble ens(std::move(weights), std::move(channels),
                      j.at("tp_required").get<bool>());
  if (ens.d() != j.at("d").get<Index>())
    throw std::invalid_argument("ensemble 'd' field does not match members");
  return ens;
}

// Experiment config: dictionary plus named inputs/povms, a round-robin
// schedule, shot count, and seed. The truth channel is either a dictionary
// position ("truth_index") or an explicit channel object ("truth").
inline json experiment_to_json(const ExperimentConfig& config) {
  json j;
  j["schema"] = kExperimentSchema;
  j["d"] = config.truth.d();
  j["seed"] = config.seed;
  j["num_shots"] = config.num_shots;
  if (config.truth_index >= 0)
    j["truth_index"] = config.truth_index;
  else
    j["truth"] = channel_to_json(config.truth);
  j["target_weight"] = config.target_weight;
  json dict = json::array();
  for (const Channel& c : config.dictionary) dict.push_back(channel_to_json(c));
  j["dictionary"] = std::move(dict);
  json prior = json::array();
  for (Index i = 0; i < config.prior.size(); ++i) prior.push_back(config.prior(i));
  j["prior"] = std::move(prior);
  json inputs = json::object();
  for (const auto& [id, rho] : config.catalog.inputs)
    inputs[id] = complex_matrix_to_json(rho.matrix());
  j["inputs"] = std::move(inputs);
  json povms = json::object();
  for (const auto& [id, povm] : config.catalog.povms) {
    json effects = json::array();
    for (const ComplexMatrix& e : povm.effects())
      effects.push_back(complex_matrix_to_json(e));
    povms[id] = std::move(effects);
  }
  j["povms"] = std::move(povms);
  json schedule = json::array();
  for (const ScheduleEntry& entry : config.schedule)
    schedule.push_back(json{{"input", entry.input_id}, {"povm", entry.povm_id}});
  j["schedule"] = std::move(schedule);
  return j;
}

inline ExperimentConfig experiment_from_json(const json& j) {
  check_schema(j, kExperimentSchema);
  const Index d = j.at("d").get<Index>();

  std::vector<Channel> dictionary;
  for (const json& cj : j.at("dictionary"))
    dictionary.push_back(channel_from_json(cj));
  if (dictionary.empty())
    throw std::invalid_argument("experiment dictionary is empty");

  int truth_index = -1;
  if (j.contains("truth_index")) {
    truth_index = j.at("truth_index").get<int>();
    if (truth_index < 0 || truth_index >= static_cast<int>(dictionary.size()))
      throw std::invalid_argument("truth_index out of range");
  } else if (!j.contains("truth")) {
    throw std::invalid_argument("experiment needs 'truth' or 'truth_index'");
  }
  Channel truth = truth_index >= 0
                      ? dictionary[static_cast<size_t>(truth_index)]
                      : channel_from_json(j.at("truth"));
  if (truth.d() != d)
    throw std::invalid_argument("truth dimension does not match 'd'");

  const std::vector<double> prior_values =
      j.at("prior").get<std::vector<double>>();
  RealVector prior(static_cast<Index>(prior_values.size()));
  for (size_t i = 0; i < prior_values.size(); ++i)
    prior(static_cast<Index>(i)) = prior_values[i];

  Catalog catalog;
  const TensorSpace single(std::vector<Index>{d});
  for (const auto& [id, mj] : j.at("inputs").items())
    catalog.inputs.emplace(id,
                           DensityOperator(single, complex_matrix_from_json(mj, d, d)));
  for (const auto& [id, ej] : j.at("povms").items()) {
    std::vector<ComplexMatrix> effects;
    for (const json& mj : ej) effects.push_back(complex_matrix_from_json(mj, d, d));
    catalog.povms.emplace(id, Povm(id, std::move(effects)));
  }

  std::vector<ScheduleEntry> schedule;
  for (const json& sj : j.at("schedule"))
    schedule.push_back({sj.at("input").get<std::string>(),
                        sj.at("povm").get<std::string>()});

  return ExperimentConfig{std::move(truth),
                          std::move(dictionary),
                          std::move(prior),
                          std::move(catalog),
                          std::move(schedule),
                          j.at("num_shots").get<int>(),
                          j.at("seed").get<std::uint64_t>(),
                          truth_index,
                          j.value("target_weight", 0.99)};
}

inline json trajectory_to_json(const PosteriorTrajectory& t,
                               const ExperimentConfig& config) {
  json j;
  j["schema"] = kTrajectorySchema;
  j["seed"] = t.seed;
  j["num_shots"] = static_cast<int>(t.records.size());
  j["zero_likelihood_count"] = t.zero_likelihood_count;
  j["truth_index"] = config.truth_index;
  j["target_weight"] = config.target_weight;
  json final_weights = json::array();
  if (!t.weights.empty())
    for (Index i = 0; i < t.weights.back().size(); ++i)
      final_weights.push_back(t.weights.back()(i));
  j["final_weights"] = std::move(final_weights);
  j["final_distance"] = t.distances.empty() ? json() : json(t.distances.back());
  json shots = json::array();
  for (size_t s = 0; s < t.records.size(); ++s) {
    json shot;
    shot["shot"] = static_cast<int>(s + 1);
    shot["input"] = t.records[s].input_id;
    shot["povm"] = t.records[s].povm_id;
    shot["outcome"] = t.records[s].outcome;
    json w = json::array();
    for (Index i = 0; i < t.weights[s].size(); ++i) w.push_back(t.weights[s](i));
    shot["weights"] = std::move(w);
    shot["distance"] = t.distances[s];
    shots.push_back(std::move(shot));
  }
  j["shots"] = std::move(shots);
  return j;
}

inline std::string trajectory_to_csv(const PosteriorTrajectory& t) {
  std::ostringstream out;
  out << "shot,input,povm,outcome,distance";
  const Index m = t.weights.empty() ? 0 : t.weights.front().size();
  for (Index i = 0; i < m; ++i) out << ",w" << i;
  out << "\n";
  for (size_t s = 0; s < t.records.size(); ++s) {
    out << (s + 1) << "," << t.records[s].input_id << "," << t.records[s].povm_id
        << "," << t.records[s].outcome << "," << format_double(t.distances[s]);
    for (Index i = 0; i < m; ++i)
      out << "," << format_double(t.weights[s](i));
    out << "\n";
  }
  return out.str();
}

inline json exchangeability_report_to_json(const ExchangeabilityReport& r) {
  json j;
  j["schema"] = kExchangeabilitySchema;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  json levels = json::array();
  for (const LevelReport& level : r.levels) {
    json lj;
    lj["n"] = level.n;
    lj["symmetric"] = level.symmetric;
    lj["symmetry_deviation"] = level.symmetry_deviation;
    levels.push_back(std::move(lj));
  }
  j["levels"] = std::move(levels);
  json pairs = json::array();
  for (const PairReport& pair : r.pairs) {
    json pj;
    pj["lower_n"] = pair.lower_n;
    pj["pass"] = pair.extension.pass;
    pj["max_deviation"] = pair.extension.max_deviation;
    pj["choi_marginal_pass"] = pair.extension.choi_marginal_pass;
    pj["choi_marginal_deviation"] = pair.extension.choi_marginal_deviation;
    pairs.push_back(std::move(pj));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

inline std::string exchangeability_report_to_csv(const ExchangeabilityReport& r) {
  std::ostringstream out;
  out << "kind,n,deviation,pass\n";
  for (const LevelReport& level : r.levels)
    out << "symmetry," << level.n << ","
        << format_double(level.symmetry_deviation) << ","
        << (level.symmetric ? 1 : 0) << "\n";
  for (const PairReport& pair : r.pairs) {
    out << "extension," << pair.lower_n << ","
        << format_double(pair.extension.max_deviation) << ","
        << (pair.extension.pass ? 1 : 0) << "\n";
    out << "choi_marginal," << pair.lower_n << ","
        << format_double(pair.extension.choi_marginal_deviation) << ","
        << (pair.extension.choi_marginal_pass ? 1 : 0) << "\n";
  }
  return out.str();
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return json::parse(in);
}

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

inline void save_json(const std::string& path, const json& j) {
  save_text(path, j.dump(2) + "\n");
}

}  // namespace chex::io
