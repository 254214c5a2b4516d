#ifndef MEDLI_CLI_HPP
#define MEDLI_CLI_HPP

// Command dispatch for the medli tool. run() never calls exit(), so the
// whole command surface can be driven in-process by tests.
//
// Exit codes: 0 certified / true, 2 input error, 3 uncertified or false,
// 4 internal numerical failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "medli/io.hpp"
#include "medli/medli.hpp"

namespace medli::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kUncertified = 3, kNumericalFailure = 4 };

/// Allowed deviation for the roundtrip command before it reports a failure.
inline constexpr double kRoundtripTolerance = 1e-7;

struct Options {
  std::string input;
  std::string povm;
  std::string out;
  std::uint64_t seed = 0;
  int restarts = 16;
  std::optional<double> tol_psd, tol_rank, tol_recon, tol_fixpoint;
  bool oracle = false;
  std::string direction = "forward";
  long dim = 0;
  std::string signature;
  bool fixed_point = false;
  bool quiet = false;

  [[nodiscard]] Tolerances tolerances() const {
    Tolerances t;
    if (tol_psd) t.tol_psd = *tol_psd;
    if (tol_rank) t.tol_rank = *tol_rank;
    if (tol_recon) t.tol_recon = *tol_recon;
    if (tol_fixpoint) t.tol_fixpoint = *tol_fixpoint;
    return t;
  }

  [[nodiscard]] SolveConfig solve_config() const {
    SolveConfig cfg;
    cfg.restarts = restarts;
    cfg.seed = seed;
    cfg.tol = tolerances();
    return cfg;
  }
};

namespace detail {

using io::Json;

/// Error raised while reading inputs; maps to exit code 2.
struct InputError {
  std::string message;
};

struct LoadedEnsemble {
  Ensemble ensemble;
  std::string digest;
};

inline LoadedEnsemble load_ensemble(const std::string& path, const Tolerances& tol) {
  try {
    const std::string text = io::read_file(path);
    return {io::ensemble_from_json(io::parse_text(text), tol), io::content_digest(text)};
  } catch (const Error& e) {
    throw InputError{path + ": " + e.what()};
  }
}

inline RankSignature parse_signature(const std::string& text) {
  RankSignature sig;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int r = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      sig.push_back(r);
    } catch (const std::exception&) {
      throw InputError{"--signature: '" + text + "' is not a comma-separated list of integers"};
    }
  }
  return sig;
}

inline Json residuals_json(const CertificationReport& r) {
  Json j;
  j["stationarity"] = r.stationarity_residual;
  j["min_slack_eig"] = r.min_slack_eig;
  j["positivity_min_eig"] = r.positivity_min_eig;
  j["hermiticity"] = r.hermiticity_residual;
  return j;
}

inline Json matrices_json(std::span<const HermitianMatrix> ms) {
  Json arr = Json::array();
  for (const auto& m : ms) arr.push_back(io::matrix_to_json(m.matrix()));
  return arr;
}

inline Json fixpoint_json(const FixpointResult& f) {
  Json j;
  j["is_fixed"] = f.is_fixed;
  j["c_estimate"] = f.c_estimate;
  j["residual"] = f.residual;
  return j;
}

inline Json command_json(const std::string& name, const Options& o) {
  Json j;
  j["name"] = name;
  j["seed"] = o.seed;
  j["restarts"] = o.restarts;
  const Tolerances t = o.tolerances();
  j["tolerances"] = {{"psd", t.tol_psd}, {"rank", t.tol_rank}, {"recon", t.tol_recon}, {"fixpoint", t.tol_fixpoint}};
  return j;
}

struct Outcome {
  Json report;
  int code = kOk;
};

inline Outcome cmd_solve(const Options& o) {
  const Tolerances tol = o.tolerances();
  const LoadedEnsemble in = load_ensemble(o.input, tol);
  SolveResult res;
  if (o.oracle) {
    OracleConfig oc;
    oc.tol = tol;
    res = solve_oracle(in.ensemble, oc);
  } else {
    res = solve(in.ensemble, o.solve_config());
  }
  Outcome out;
  Json& r = out.report;
  r["command"] = command_json("solve", o);
  r["command"]["oracle"] = o.oracle;
  r["input_digest"] = in.digest;
  r["success_prob"] = res.success_prob;
  r["dual_value"] = res.certificate.dual_value;
  r["verdict"] = to_string(res.report.verdict);
  r["certified"] = res.certified;
  r["residuals"] = residuals_json(res.report);
  r["measurement"] = matrices_json(res.measurement.projectors());
  r["fixed_point"] = fixpoint_json(fixpoint_check(in.ensemble, tol));
  r["timings"] = {{"iterations", res.iterations}, {"restarts_run", res.restarts_run}};
  out.code = res.certified ? kOk : kUncertified;
  return out;
}

inline Outcome cmd_certify(const Options& o) {
  const Tolerances tol = o.tolerances();
  const LoadedEnsemble in = load_ensemble(o.input, tol);
  std::vector<CMatrix> raw;
  GeneralPOVM povm;
  std::string povm_digest;
  try {
    const std::string text = io::read_file(o.povm);
    raw = io::measurement_from_json(io::parse_text(text));
    povm = GeneralPOVM::validate(raw, tol);
    povm_digest = io::content_digest(text);
  } catch (const Error& e) {
    throw InputError{o.povm + ": " + e.what()};
  }
  if (povm.size() != in.ensemble.size() || povm.dim() != in.ensemble.dim()) {
    throw InputError{"measurement does not match the ensemble in size or dimension"};
  }

  Outcome out;
  Json& r = out.report;
  r["command"] = command_json("certify", o);
  r["input_digest"] = in.digest;
  r["povm_digest"] = povm_digest;
  const CertificationReport full = certify_full(in.ensemble, povm, tol);
  r["success_prob"] = success_probability(in.ensemble, povm, tol);
  r["dual_value"] = full.dual_value;
  r["verdict"] = to_string(full.verdict);
  r["residuals"] = residuals_json(full);
  Json simplified;
  std::optional<Verdict> simplified_verdict;
  try {
    const ProjectiveMeasurement pm = validate_projective(raw, tol);
    const CertificationReport s = certify_simplified(in.ensemble, pm, tol);
    simplified["verdict"] = to_string(s.verdict);
    simplified["residuals"] = residuals_json(s);
    simplified_verdict = s.verdict;
  } catch (const Error& e) {
    simplified["error"] = std::string(to_string(e.code()));
    simplified["message"] = e.what();
  }
  r["simplified"] = std::move(simplified);
  if (simplified_verdict) {
    r["agreement"] = *simplified_verdict == full.verdict;
  } else {
    r["agreement"] = nullptr;
  }
  r["measurement"] = matrices_json(povm.elements());
  out.code = full.verdict == Verdict::Optimal ? kOk : kUncertified;
  return out;
}

inline Outcome cmd_map(const Options& o) {
  const Tolerances tol = o.tolerances();
  if (o.direction != "forward" && o.direction != "inverse") {
    throw InputError{"--direction must be 'forward' or 'inverse'"};
  }
  const LoadedEnsemble in = load_ensemble(o.input, tol);
  Outcome out;
  Json& r = out.report;
  r["command"] = command_json("map", o);
  r["command"]["direction"] = o.direction;
  r["input_digest"] = in.digest;
  if (o.direction == "forward") {
    const SolveResult res = solve(in.ensemble, o.solve_config());
    r["success_prob"] = res.success_prob;
    r["dual_value"] = res.certificate.dual_value;
    r["verdict"] = to_string(res.report.verdict);
    r["certified"] = res.certified;
    r["residuals"] = residuals_json(res.report);
    r["measurement"] = matrices_json(res.measurement.projectors());
    if (!res.certified) {
      r["image"] = nullptr;
      out.code = kUncertified;
      return out;
    }
    r["image"] = io::ensemble_to_json(forward_map(in.ensemble, res.measurement, res.certificate, tol));
    return out;
  }
  const InverseMapResult inv = inverse_map(in.ensemble, tol);
  const CertificationReport rep = certify_simplified(inv.ensemble, inv.measurement, tol);
  r["success_prob"] = success_probability(inv.ensemble, inv.measurement, tol);
  r["dual_value"] = inv.certificate.dual_value;
  r["verdict"] = to_string(rep.verdict);
  r["certified"] = rep.verdict == Verdict::Optimal;
  r["residuals"] = residuals_json(rep);
  r["measurement"] = matrices_json(inv.measurement.projectors());
  r["certificate"] = {{"z", io::matrix_to_json(inv.certificate.z.matrix())},
                      {"slack_min_eigs", inv.certificate.slack_min_eigs}};
  r["image"] = io::ensemble_to_json(inv.ensemble);
  out.code = rep.verdict == Verdict::Optimal ? kOk : kUncertified;
  return out;
}

inline Outcome cmd_roundtrip(const Options& o) {
  const Tolerances tol = o.tolerances();
  const LoadedEnsemble in = load_ensemble(o.input, tol);
  const SolveConfig cfg = o.solve_config();
  Outcome out;
  Json& r = out.report;
  r["command"] = command_json("roundtrip", o);
  r["input_digest"] = in.digest;
  const RoundtripReport rt = roundtrip_check(in.ensemble, [&](const Ensemble& e) { return solve(e, cfg); }, tol);
  r["inverse_after_forward"] = rt.inverse_after_forward;
  r["forward_after_inverse"] = rt.forward_after_inverse;
  const bool ok = rt.inverse_after_forward <= kRoundtripTolerance && rt.forward_after_inverse <= kRoundtripTolerance;
  r["tolerance"] = kRoundtripTolerance;
  r["within_tolerance"] = ok;
  out.code = ok ? kOk : kNumericalFailure;
  return out;
}

inline Outcome cmd_gen(const Options& o) {
  const Tolerances tol = o.tolerances();
  const RankSignature sig = parse_signature(o.signature);
  Ensemble e;
  try {
    check_signature(static_cast<Index>(o.dim), sig);
  } catch (const Error& err) {
    throw InputError{err.what()};
  }
  const Index d = static_cast<Index>(o.dim);
  e = o.fixed_point ? generate_fixed_point(d, sig, o.seed, tol) : random_ensemble(d, sig, o.seed, tol);
  const std::string label = std::string(o.fixed_point ? "fixed-point" : "random") + " d=" + std::to_string(o.dim) +
                            " signature=" + signature_string(sig) + " seed=" + std::to_string(o.seed);
  return {io::ensemble_to_json(e, label), kOk};
}

inline Outcome cmd_fixpoint(const Options& o) {
  const Tolerances tol = o.tolerances();
  const LoadedEnsemble in = load_ensemble(o.input, tol);
  const FixpointResult f = fixpoint_check(in.ensemble, tol);
  const ProjectiveMeasurement m = pgm(in.ensemble, tol);
  Outcome out;
  Json& r = out.report;
  r["command"] = command_json("fixpoint", o);
  r["input_digest"] = in.digest;
  r["fixed_point"] = fixpoint_json(f);
  r["detection_profile"] = detection_profile(in.ensemble, m);
  r["signature"] = in.ensemble.signature();
  r["measurement"] = matrices_json(m.projectors());
  out.code = f.is_fixed ? kOk : kUncertified;
  return out;
}

}  // namespace detail

/// Parses argv, runs one subcommand, writes the report to `out` (or --out)
/// and diagnostics to `err`. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Minimum-error discrimination for linearly independent ensembles", "medli"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", o.out, "Write the report to this path instead of stdout");
  app.add_option("--seed", o.seed, "Random seed (default 0)");
  app.add_option("--restarts", o.restarts, "Solver restarts (default 16)")->check(CLI::PositiveNumber);
  app.add_option("--tol-psd", o.tol_psd, "Positivity tolerance")->check(CLI::NonNegativeNumber);
  app.add_option("--tol-rank", o.tol_rank, "Relative rank cutoff")->check(CLI::NonNegativeNumber);
  app.add_option("--tol-recon", o.tol_recon, "Reconstruction tolerance")->check(CLI::NonNegativeNumber);
  app.add_option("--tol-fixpoint", o.tol_fixpoint, "Fixed-point residual tolerance")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", o.quiet, "Suppress diagnostics on stderr");

  auto* solve_cmd = app.add_subcommand("solve", "Find and certify the optimal measurement");
  solve_cmd->add_option("input", o.input, "Ensemble file")->required();
  solve_cmd->add_flag("--oracle", o.oracle, "Use the exhaustive reference solver (d <= 4, m <= 3)");

  auto* certify_cmd = app.add_subcommand("certify", "Certify a candidate measurement");
  certify_cmd->add_option("input", o.input, "Ensemble file")->required();
  certify_cmd->add_option("povm", o.povm, "Measurement file")->required();

  auto* map_cmd = app.add_subcommand("map", "Apply the forward map R or its inverse");
  map_cmd->add_option("input", o.input, "Ensemble file")->required();
  map_cmd->add_option("--direction", o.direction, "forward or inverse (default forward)");

  auto* roundtrip_cmd = app.add_subcommand("roundtrip", "Compose R and its inverse in both orders");
  roundtrip_cmd->add_option("input", o.input, "Ensemble file")->required();

  auto* gen_cmd = app.add_subcommand("gen", "Generate a random or fixed-point ensemble");
  gen_cmd->add_option("--dim", o.dim, "Hilbert space dimension")->required();
  gen_cmd->add_option("--signature", o.signature, "Comma-separated state ranks")->required();
  gen_cmd->add_flag("--fixed-point", o.fixed_point, "Generate an ensemble whose PGM is optimal");

  auto* fixpoint_cmd = app.add_subcommand("fixpoint", "Test whether the PGM is optimal");
  fixpoint_cmd->add_option("input", o.input, "Ensemble file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  if (!o.tolerances().valid()) {
    err << "error: tolerances must be finite and >= 0\n";
    return kInputError;
  }

  const auto start = std::chrono::steady_clock::now();
  detail::Outcome outcome;
  std::string name;
  try {
    if (solve_cmd->parsed()) {
      name = "solve";
      outcome = detail::cmd_solve(o);
    } else if (certify_cmd->parsed()) {
      name = "certify";
      outcome = detail::cmd_certify(o);
    } else if (map_cmd->parsed()) {
      name = "map";
      outcome = detail::cmd_map(o);
    } else if (roundtrip_cmd->parsed()) {
      name = "roundtrip";
      outcome = detail::cmd_roundtrip(o);
    } else if (gen_cmd->parsed()) {
      name = "gen";
      outcome = detail::cmd_gen(o);
    } else {
      name = "fixpoint";
      outcome = detail::cmd_fixpoint(o);
    }
  } catch (const detail::InputError& e) {
    err << "error: " << e.message << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::SolverFailed || e.code() == ErrorCode::NoConvergence ? kUncertified
                                                                                         : kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }

  const std::string text = io::dump(outcome.report);
  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream file(o.out, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << o.out << "'\n";
      return kInputError;
    }
    file << text;
  }
  if (!o.quiet) {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << name << ": exit " << outcome.code << " in " << seconds << " s\n";
  }
  return outcome.code;
}

}  // namespace medli::cli

#endif  // MEDLI_CLI_HPP
