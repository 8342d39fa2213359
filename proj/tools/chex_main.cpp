// chex: command line front end for channel checks, exchangeability
// verification, mixture construction, weight recovery, trace-preservation
// scans, and seeded tomography experiments. All files are versioned JSON;
// reports print to stdout unless --out is given.
//
// Exit codes: 0 check passed / report written, 1 check failed or solver did
// not converge, 2 bad input (unreadable file, schema mismatch, bad flags).

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chex/chex.hpp"

namespace {

using chex::io::json;

constexpr const char* kCpReportSchema = "chex.report.check_cp.v1";
constexpr const char* kTpReportSchema = "chex.report.check_tp.v1";
constexpr const char* kWeightsReportSchema = "chex.report.weights.v1";
constexpr const char* kScanReportSchema = "chex.report.scan.v1";

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    chex::io::save_text(out_path, text);
}

void emit_report(const json& j, const std::string& csv,
                 const std::string& format, const std::string& out_path) {
  emit(format == "csv" ? csv : j.dump(2) + "\n", out_path);
}

// Two-column rendering for scalar reports; arrays are flattened to
// indexed keys (weights -> w0, w1, ...) by the caller.
std::string key_value_csv(const json& j) {
  std::ostringstream out;
  out << "field,value\n";
  for (const auto& [key, value] : j.items()) {
    if (key == "schema") continue;
    out << key << ",";
    if (value.is_boolean())
      out << (value.get<bool>() ? 1 : 0);
    else if (value.is_number_float())
      out << chex::io::format_double(value.get<double>());
    else if (value.is_number())
      out << value.dump();
    else if (value.is_string())
      out << value.get<std::string>();
    out << "\n";  // null prints as an empty cell
  }
  return out.str();
}

struct CommonArgs {
  std::string file;
  std::string out;
  std::string format = "json";
  double tol = 0.0;
};

void add_report_flags(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--out", args.out, "write the report to this path");
  sub->add_option("--format", args.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->default_str("json");
}

int run_check_cp(const CommonArgs& args) {
  const chex::Channel channel =
      chex::io::channel_from_json(chex::io::load_json(args.file));
  const chex::CpCheck check = chex::is_cp(channel, args.tol);
  json j;
  j["schema"] = kCpReportSchema;
  j["d"] = channel.d();
  j["n"] = channel.n();
  j["cp"] = check.cp;
  j["min_eigenvalue"] = check.min_eigenvalue;
  j["tolerance"] = args.tol;
  emit_report(j, key_value_csv(j), args.format, args.out);
  return check.cp ? 0 : 1;
}

int run_check_tp(const CommonArgs& args) {
  const chex::Channel channel =
      chex::io::channel_from_json(chex::io::load_json(args.file));
  const chex::DeviationCheck check = chex::is_tp(channel, args.tol);
  json j;
  j["schema"] = kTpReportSchema;
  j["d"] = channel.d();
  j["n"] = channel.n();
  j["trace_preserving"] = check.pass;
  j["max_deviation"] = check.max_deviation;
  j["tolerance"] = args.tol;
  emit_report(j, key_value_csv(j), args.format, args.out);
  return check.pass ? 0 : 1;
}

int run_check_exchangeable(const CommonArgs& args, int n_max) {
  const chex::MixtureEnsemble ens =
      chex::io::ensemble_from_json(chex::io::load_json(args.file));
  const chex::ExchangeabilityReport report =
      chex::verify_exchangeable_prefix(ens, n_max, args.tol);
  emit_report(chex::io::exchangeability_report_to_json(report),
              chex::io::exchangeability_report_to_csv(report), args.format,
              args.out);
  return report.pass ? 0 : 1;
}

int run_build_mixture(const CommonArgs& args, int n) {
  const chex::MixtureEnsemble ens =
      chex::io::ensemble_from_json(chex::io::load_json(args.file));
  const chex::Channel combined = chex::mixture_power(ens, n);
  emit(chex::io::channel_to_json(combined).dump(2) + "\n", args.out);
  return 0;
}

int run_extract_weights(const CommonArgs& args, const std::string& dict_path,
                        int n) {
  const chex::Channel target =
      chex::io::channel_from_json(chex::io::load_json(args.file));
  const chex::MixtureEnsemble dict_ens =
      chex::io::ensemble_from_json(chex::io::load_json(dict_path));
  const chex::WeightRecovery recovery =
      chex::extract_weights(target, dict_ens.members(), n);

  json j;
  j["schema"] = kWeightsReportSchema;
  j["n"] = n;
  j["converged"] = recovery.converged;
  j["iterations"] = recovery.iterations;
  j["residual"] = recovery.residual;
  json weights = json::array();
  for (chex::Index i = 0; i < recovery.weights.size(); ++i)
    weights.push_back(recovery.weights(i));
  j["weights"] = std::move(weights);

  json flat = j;
  flat.erase("weights");
  for (chex::Index i = 0; i < recovery.weights.size(); ++i)
    flat["w" + std::to_string(i)] = recovery.weights(i);
  emit_report(j, key_value_csv(flat), args.format, args.out);
  return recovery.converged ? 0 : 1;
}

int run_scan(const CommonArgs& args, const std::string& state_path,
             int basis_index, int n_max, double threshold) {
  const chex::MixtureEnsemble ens =
      chex::io::ensemble_from_json(chex::io::load_json(args.file));
  const chex::DensityOperator rho =
      state_path.empty()
          ? chex::DensityOperator::basis_state(ens.d(), basis_index)
          : chex::io::state_from_json(chex::io::load_json(state_path));
  const std::optional<int> first =
      chex::tp_violation_scan(ens, rho, n_max, threshold);

  json j;
  j["schema"] = kScanReportSchema;
  j["n_max"] = n_max;
  j["threshold"] = threshold;
  j["flagged"] = first.has_value();
  j["first_n"] = first.has_value() ? json(*first) : json();
  json moments = json::array();
  const int probed = first.has_value() ? *first : n_max;
  for (int level = 1; level <= probed; ++level)
    moments.push_back(chex::moment_trace(ens, rho, level));
  j["moments"] = std::move(moments);

  json flat = j;
  flat.erase("moments");
  for (int level = 1; level <= probed; ++level)
    flat["moment_" + std::to_string(level)] = j["moments"][level - 1];
  emit_report(j, key_value_csv(flat), args.format, args.out);
  return first.has_value() ? 1 : 0;
}

int run_tomography(const CommonArgs& args, std::optional<std::uint64_t> seed) {
  chex::ExperimentConfig config =
      chex::io::experiment_from_json(chex::io::load_json(args.file));
  if (seed.has_value()) config.seed = *seed;
  const chex::PosteriorTrajectory trajectory = chex::run_experiment(config);
  emit_report(chex::io::trajectory_to_json(trajectory, config),
              chex::io::trajectory_to_csv(trajectory), args.format, args.out);

  if (config.truth_index < 0) return 0;
  const double terminal =
      trajectory.weights.empty()
          ? config.prior(config.truth_index)
          : trajectory.weights.back()(config.truth_index);
  return terminal > config.target_weight ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum channel exchangeability toolkit"};
  app.require_subcommand(1);

  CommonArgs cp_args;
  cp_args.tol = chex::tol::psd;
  CLI::App* check_cp = app.add_subcommand(
      "check-cp", "test a channel file for complete positivity");
  check_cp->add_option("channel", cp_args.file, "channel file")->required();
  check_cp->add_option("--tol", cp_args.tol, "eigenvalue tolerance");
  add_report_flags(check_cp, cp_args);

  CommonArgs tp_args;
  tp_args.tol = chex::tol::tp;
  CLI::App* check_tp = app.add_subcommand(
      "check-tp", "test a channel file for trace preservation");
  check_tp->add_option("channel", tp_args.file, "channel file")->required();
  check_tp->add_option("--tol", tp_args.tol, "deviation tolerance");
  add_report_flags(check_tp, tp_args);

  CommonArgs ex_args;
  ex_args.tol = chex::tol::sym;
  int ex_n_max = 2;
  CLI::App* check_ex = app.add_subcommand(
      "check-exchangeable",
      "verify symmetry and extendibility of an ensemble's mixture prefix");
  check_ex->add_option("ensemble", ex_args.file, "ensemble file")->required();
  check_ex->add_option("--n-max", ex_n_max, "largest copy count to verify")
      ->check(CLI::Range(2, 32));
  check_ex->add_option("--tol", ex_args.tol, "deviation tolerance");
  add_report_flags(check_ex, ex_args);

  CommonArgs build_args;
  int build_n = 1;
  CLI::App* build = app.add_subcommand(
      "build-mixture", "write the n-copy mixture channel of an ensemble");
  build->add_option("ensemble", build_args.file, "ensemble file")->required();
  build->add_option("--n", build_n, "copy count")->required()
      ->check(CLI::Range(1, 32));
  build->add_option("--out", build_args.out, "write the channel to this path");

  CommonArgs weights_args;
  std::string dict_path;
  int weights_n = 1;
  CLI::App* weights = app.add_subcommand(
      "extract-weights",
      "recover mixture weights of a target channel over a dictionary");
  weights->add_option("target", weights_args.file, "target channel file")
      ->required();
  weights->add_option("dictionary", dict_path,
                      "ensemble file whose members form the dictionary")
      ->required();
  weights->add_option("--n", weights_n, "copy count of the target")
      ->required()
      ->check(CLI::Range(1, 32));
  add_report_flags(weights, weights_args);

  CommonArgs scan_args;
  std::string scan_state;
  int scan_basis = 0;
  int scan_n_max = 20;
  double scan_threshold = 0.25;
  CLI::App* scan = app.add_subcommand(
      "scan-tp-violation",
      "find the first copy count whose moment trace leaves 1");
  scan->add_option("ensemble", scan_args.file, "ensemble file")->required();
  CLI::Option* state_opt =
      scan->add_option("--state", scan_state, "probe state file");
  scan->add_option("--basis", scan_basis,
                   "probe with a computational basis state (default 0)")
      ->excludes(state_opt)
      ->check(CLI::NonNegativeNumber);
  scan->add_option("--n-max", scan_n_max, "largest copy count to scan")
      ->check(CLI::Range(1, 64));
  scan->add_option("--threshold", scan_threshold,
                   "flag when |moment - 1| exceeds this")
      ->required();
  add_report_flags(scan, scan_args);

  CommonArgs tomo_args;
  std::uint64_t tomo_seed = 0;
  CLI::App* tomo = app.add_subcommand(
      "tomography-run", "simulate a seeded Bayesian tomography experiment");
  tomo->add_option("experiment", tomo_args.file, "experiment config file")
      ->required();
  CLI::Option* seed_opt =
      tomo->add_option("--seed", tomo_seed, "override the config seed");
  add_report_flags(tomo, tomo_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(check_cp)) return run_check_cp(cp_args);
    if (app.got_subcommand(check_tp)) return run_check_tp(tp_args);
    if (app.got_subcommand(check_ex))
      return run_check_exchangeable(ex_args, ex_n_max);
    if (app.got_subcommand(build)) return run_build_mixture(build_args, build_n);
    if (app.got_subcommand(weights))
      return run_extract_weights(weights_args, dict_path, weights_n);
    if (app.got_subcommand(scan))
      return run_scan(scan_args, scan_state, scan_basis, scan_n_max,
                      scan_threshold);
    if (app.got_subcommand(tomo))
      return run_tomography(tomo_args,
                            seed_opt->count() > 0
                                ? std::optional<std::uint64_t>(tomo_seed)
                                : std::nullopt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
