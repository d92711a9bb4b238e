#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "tensoralt/alternative.hpp"
#include "tensoralt/popt.hpp"
#include "tensoralt/problem_io.hpp"
#include "tensoralt/sos.hpp"

namespace {

using nlohmann::json;
using namespace tensoralt;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitIndeterminate = 3;

struct CommonOptions {
  std::string file;
  double tol = 1e-8;
  int max_iter = 200;
  int starts = 64;
  std::optional<int> grid;
  std::uint64_t seed = 20240801;
  std::string format = "text";
  std::string dump_sdp;

  SdpSettings sdp() const {
    SdpSettings s;
    s.tol = tol;
    s.max_iter = max_iter;
    return s;
  }
  bool json_output() const { return format == "json"; }
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_starts = false,
                bool with_grid = false) {
  cmd->add_option("FILE", opt.file, "problem file (text or JSON)")->required();
  cmd->add_option("--tol", opt.tol, "solver tolerance (default 1e-8)");
  cmd->add_option("--max-iter", opt.max_iter, "interior-point iteration cap");
  if (with_starts) cmd->add_option("--starts", opt.starts, "search starts");
  if (with_grid) cmd->add_option("--grid", opt.grid, "grid resolution per axis (n <= 3)");
  cmd->add_option("--seed", opt.seed, "search seed (TENSORALT_SEED overrides)");
  cmd->add_option("--format", opt.format, "output format: text|json")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--dump-sdp", opt.dump_sdp, "write the assembled SDP to this path");
}

std::uint64_t effective_seed(const CommonOptions& opt) {
  if (const char* env = std::getenv("TENSORALT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring unparsable TENSORALT_SEED='" << env << "'\n";
    }
  }
  return opt.seed;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json vec_to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

std::string vec_to_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += fmt(v[i]);
  }
  return s;
}

json moments_to_json(const MomentVector& y) {
  json entries = json::array();
  for (const auto& [a, v] : y.y) entries.push_back({{"exps", a.values()}, {"value", v}});
  return entries;
}

int cmd_classify(const CommonOptions& opt) {
  ProblemFile pf = parse_problem_file(opt.file);
  json out;
  out["command"] = "classify";
  out["tolerance"] = opt.tol;
  json polys = json::array();
  auto classify_one = [&](const std::string& name, const Polynomial& f) {
    const bool enp = has_enp_coefficients(f, pf.m);
    json entry;
    entry["name"] = name;
    entry["enp"] = enp;
    json offending = json::array();
    for (const Exponent& a : enp_violations(f, pf.m)) offending.push_back(a.values());
    entry["offending_exponents"] = offending;
    polys.push_back(entry);
    if (!opt.json_output()) {
      std::cout << name << ": " << (enp ? "ENP" : "NOT_ENP");
      if (!enp) {
        std::cout << "  offending:";
        for (const Exponent& a : enp_violations(f, pf.m)) std::cout << ' ' << a.to_string();
      }
      std::cout << '\n';
    }
  };
  if (!opt.json_output())
    std::cout << "classify " << opt.file << " (n=" << pf.n << ", m=" << pf.m
              << ", tol=" << fmt(opt.tol) << ")\n";
  classify_one("objective", pf.objective);
  for (std::size_t l = 0; l < pf.constraints.size(); ++l)
    classify_one("constraint_" + std::to_string(l + 1), pf.constraints[l]);
  out["polynomials"] = polys;
  if (opt.json_output()) std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_sos(const CommonOptions& opt) {
  ProblemFile pf = parse_problem_file(opt.file);
  std::optional<std::string> dump;
  if (!opt.dump_sdp.empty()) dump = opt.dump_sdp;
  auto r = sos_check(pf.objective, pf.m, opt.sdp(), 1e-6, dump);

  json out;
  out["command"] = "sos";
  out["tolerance"] = opt.tol;
  out["status"] = to_string(r.status);
  out["gamma_star"] = r.gamma_star;
  out["boundary"] = r.boundary;
  if (!opt.json_output()) {
    std::cout << "sos " << opt.file << " (n=" << pf.n << ", m=" << pf.m
              << ", tol=" << fmt(opt.tol) << ")\n";
    std::cout << "verdict: " << to_string(r.status) << '\n';
    std::cout << "gamma_star: " << fmt(r.gamma_star) << '\n';
  }
  if (r.certificate) {
    json squares = json::array();
    for (const Polynomial& g : r.certificate->squares) squares.push_back(g.to_string());
    out["squares"] = squares;
    out["residual"] = r.certificate->residual;
    if (!opt.json_output()) {
      std::cout << "residual: " << fmt(r.certificate->residual) << '\n';
      for (const Polynomial& g : r.certificate->squares)
        std::cout << "square: " << g.to_string() << '\n';
    }
  }
  if (r.moment_witness && r.status == SosStatus::NotSos) {
    const MomentVector& y = *r.moment_witness;
    out["moment_pairing"] = y.pairing(pf.objective);
    out["moments"] = moments_to_json(y);
    if (!opt.json_output())
      std::cout << "moment_pairing: " << fmt(y.pairing(pf.objective)) << '\n';
  }
  if (!r.message.empty()) {
    out["message"] = r.message;
    if (!opt.json_output()) std::cout << "note: " << r.message << '\n';
  }
  if (opt.json_output()) std::cout << out.dump(2) << '\n';
  return r.status == SosStatus::Indeterminate ? kExitIndeterminate : kExitOk;
}

int cmd_alt(const CommonOptions& opt) {
  ProblemFile pf = parse_problem_file(opt.file);
  std::vector<Polynomial> polys;
  polys.push_back(pf.objective);
  for (const auto& c : pf.constraints) polys.push_back(c);
  std::vector<SymmetricTensor> tensors;
  for (const auto& f : polys) {
    if (!f.is_homogeneous(pf.m))
      throw std::invalid_argument("alt requires homogeneous polynomials of degree m");
    tensors.push_back(tensor_from_polynomial(f, pf.m));
  }

  AltSettings settings;
  settings.sdp = opt.sdp();
  settings.witness_starts = opt.starts;
  settings.seed = effective_seed(opt);
  if (!opt.dump_sdp.empty()) settings.dump_sdp_path = opt.dump_sdp;

  AltCertificate cert = yuan_alternative(tensors, pf.transform, settings);

  json out;
  out["command"] = "alt";
  out["tolerance"] = opt.tol;
  out["outcome"] = to_string(cert.outcome);
  out["gamma_star"] = cert.margin;
  if (!opt.json_output()) {
    std::cout << "alt " << opt.file << " (n=" << pf.n << ", m=" << pf.m
              << ", tol=" << fmt(opt.tol) << ")\n";
    std::cout << "outcome: " << to_string(cert.outcome) << '\n';
    std::cout << "gamma_star: " << fmt(cert.margin) << '\n';
  }
  if (cert.outcome == AltOutcome::StatementII) {
    out["lambda"] = vec_to_json(cert.lambda);
    out["sos_residual"] = cert.sos->residual;
    if (!opt.json_output()) {
      std::cout << "lambda: " << vec_to_text(cert.lambda) << '\n';
      std::cout << "sos_residual: " << fmt(cert.sos->residual) << '\n';
      for (const Polynomial& g : cert.sos->squares)
        std::cout << "square: " << g.to_string() << '\n';
    }
  }
  if (cert.outcome == AltOutcome::StatementI) {
    out["witness"] = vec_to_json(cert.witness);
    double worst = -1e300;
    for (const auto& t : tensors) worst = std::max(worst, evaluate(t, cert.witness));
    out["witness_max_value"] = worst;
    if (!opt.json_output()) {
      std::cout << "witness: " << vec_to_text(cert.witness) << '\n';
      std::cout << "witness_max_value: " << fmt(worst) << '\n';
    }
  }
  if (!cert.message.empty()) {
    out["message"] = cert.message;
    if (!opt.json_output()) std::cout << "note: " << cert.message << '\n';
  }
  if (opt.json_output()) std::cout << out.dump(2) << '\n';

  switch (cert.outcome) {
    case AltOutcome::AssumptionViolated:
      return kExitPrecondition;
    case AltOutcome::Indeterminate:
      return kExitIndeterminate;
    default:
      return kExitOk;
  }
}

int cmd_solve(const CommonOptions& opt) {
  ProblemFile pf = parse_problem_file(opt.file);
  // The sign-structure gate is reported rather than enforced here so that
  // counterexample runs can demonstrate the relaxation gap.
  PopInstance inst =
      PopInstance::make(pf.n, pf.m, pf.objective, pf.constraints, /*allow_non_enp=*/true);

  PopSettings settings;
  settings.sdp = opt.sdp();
  settings.oracle.starts = opt.starts;
  settings.oracle.grid = opt.grid;
  settings.oracle.seed = effective_seed(opt);
  settings.slater_point = pf.slater;
  if (!opt.dump_sdp.empty()) settings.dump_sdp_path = opt.dump_sdp;

  PopReport report = solve_exact_sos(inst, settings);

  json out;
  out["command"] = "solve";
  out["tolerance"] = opt.tol;
  out["enp"] = inst.enp_verified;
  out["solver_status"] = to_string(report.solver_status);
  out["validation"] = to_string(report.validation);
  out["bound"] = report.bound;
  out["multipliers"] = vec_to_json(report.multipliers);
  out["slater_verified"] = report.slater_verified;
  out["gap"] = report.gap_flag;
  if (report.sigma) out["sigma_residual"] = report.sigma->residual;
  if (report.recovered) {
    out["recovered"] = vec_to_json(*report.recovered);
    out["objective_at_recovered"] = inst.objective.evaluate(*report.recovered);
  }
  if (report.oracle_value) out["oracle_value"] = *report.oracle_value;
  if (report.oracle_point) out["oracle_point"] = vec_to_json(*report.oracle_point);
  out["moments"] = moments_to_json(report.moments);
  if (!report.message.empty()) out["message"] = report.message;

  if (opt.json_output()) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "solve " << opt.file << " (n=" << pf.n << ", m=" << pf.m
              << ", p=" << pf.constraints.size() << ", tol=" << fmt(opt.tol) << ")\n";
    if (!inst.enp_verified)
      std::cout << "warning: coefficients are not essentially nonpositive; "
                   "the bound may be strictly below the minimum\n";
    std::cout << "solver_status: " << to_string(report.solver_status) << '\n';
    std::cout << "bound: " << fmt(report.bound) << '\n';
    std::cout << "multipliers: " << vec_to_text(report.multipliers) << '\n';
    if (report.sigma) std::cout << "sigma_residual: " << fmt(report.sigma->residual) << '\n';
    if (report.recovered) {
      std::cout << "recovered: " << vec_to_text(*report.recovered) << '\n';
      std::cout << "objective_at_recovered: "
                << fmt(inst.objective.evaluate(*report.recovered)) << '\n';
    }
    std::cout << "validation: " << to_string(report.validation) << '\n';
    if (report.oracle_value) std::cout << "oracle_value: " << fmt(*report.oracle_value) << '\n';
    std::cout << "slater_verified: " << (report.slater_verified ? "true" : "false") << '\n';
    std::cout << "gap: " << (report.gap_flag ? "GAP" : "none") << '\n';
    if (!report.message.empty()) std::cout << "note: " << report.message << '\n';
  }
  return report.validation == PopValidation::Indeterminate ? kExitIndeterminate : kExitOk;
}

int cmd_oracle(const CommonOptions& opt) {
  ProblemFile pf = parse_problem_file(opt.file);
  PopInstance inst =
      PopInstance::make(pf.n, pf.m, pf.objective, pf.constraints, /*allow_non_enp=*/true);
  OracleBudget budget;
  budget.starts = opt.starts;
  budget.grid = opt.grid;
  budget.seed = effective_seed(opt);
  OracleResult r = oracle_minimize(inst, budget);

  json out;
  out["command"] = "oracle";
  out["tolerance"] = opt.tol;
  out["found"] = r.found;
  if (r.found) {
    out["value"] = r.value;
    out["point"] = vec_to_json(r.point);
  }
  if (opt.json_output()) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "oracle " << opt.file << " (starts=" << opt.starts
              << ", seed=" << effective_seed(opt) << ", tol=" << fmt(opt.tol) << ")\n";
    if (r.found) {
      std::cout << "value: " << fmt(r.value) << '\n';
      std::cout << "point: " << vec_to_text(r.point) << '\n';
    } else {
      std::cout << "NO_FEASIBLE_POINT\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor alternative theorems and exact SOS relaxations"};
  app.require_subcommand(1);

  CommonOptions classify_opt, sos_opt, alt_opt, solve_opt, oracle_opt;
  auto* classify = app.add_subcommand("classify", "coefficient sign structure per polynomial");
  add_common(classify, classify_opt);
  auto* sos = app.add_subcommand("sos", "sum-of-squares membership of the objective");
  add_common(sos, sos_opt);
  auto* alt = app.add_subcommand("alt", "tensor alternative-theorem decision");
  add_common(alt, alt_opt, /*with_starts=*/true);
  auto* solve = app.add_subcommand("solve", "exact SOS relaxation with recovery");
  add_common(solve, solve_opt, /*with_starts=*/true, /*with_grid=*/true);
  auto* oracle = app.add_subcommand("oracle", "multi-start local minimization");
  add_common(oracle, oracle_opt, /*with_starts=*/true, /*with_grid=*/true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (classify->parsed()) return cmd_classify(classify_opt);
    if (sos->parsed()) return cmd_sos(sos_opt);
    if (alt->parsed()) return cmd_alt(alt_opt);
    if (solve->parsed()) return cmd_solve(solve_opt);
    if (oracle->parsed()) return cmd_oracle(oracle_opt);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "precondition violation: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::domain_error& e) {
    std::cerr << "precondition violation: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "numerical trouble: " << e.what() << '\n';
    return kExitIndeterminate;
  }
  return kExitOk;
}
