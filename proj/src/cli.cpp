#include "qtester/cli.hpp"

#include <iostream>

#include "CLI11.hpp"
#include "qtester/io.hpp"
#include "qtester/scenarios.hpp"
#include "qtester/spectral.hpp"

namespace qtester::cli {

namespace {

using scenarios::format_fixed6;

struct CliConfig {
  std::string format = "table";  // table | json
  double feas_tol = 1e-7;
  double gap_tol = 1e-7;
  double bisect_tol = 1e-6;
  bool degrees = false;
};

sdp::SolveOptions solve_options(const CliConfig& cfg) {
  sdp::SolveOptions opt;
  opt.feas_tol = cfg.feas_tol;
  opt.gap_tol = cfg.gap_tol;
  return opt;
}

double to_radians(double angle, const CliConfig& cfg) {
  return cfg.degrees ? angle * M_PI / 180.0 : angle;
}

void print_json_or(std::ostream& out, const CliConfig& cfg, const io::Json& j,
                   const std::string& table) {
  if (cfg.format == "json")
    out << j.dump(2) << "\n";
  else
    out << table;
}

std::string flags_table(const StructuralFlags& f) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::string s;
  s += std::string("commuting:        ") + b(f.commuting) + "\n";
  s += std::string("orthogonal:       ") + b(f.orthogonal) + "\n";
  s += std::string("jointly_diagonal: ") + b(f.jointly_diagonal) + "\n";
  s += std::string("comparable:       ") + b(f.comparable) + "\n";
  return s;
}

std::string verdict_table(const CompatibilityVerdict& v) {
  std::string s = std::string("verdict: ") + (v.compatible ? "compatible" : "incompatible") + "\n";
  if (!v.compatible) {
    s += "reason:  " + to_string(v.reason) + "\n";
    if (v.reason == IncompatibilityReason::NormalizationMismatch)
      s += "||rho - sigma||: " + format_fixed6(v.normalization_distance) + "\n";
  }
  if (v.margin) s += "margin:  " + format_fixed6(*v.margin) + "\n";
  return s;
}

int cmd_validate(const std::string& path, const CliConfig& cfg, std::ostream& out) {
  auto obj = io::load_object_file(path);
  std::string table = "kind: " + obj.kind + "\nvalid: true\n";
  io::Json j{{"kind", obj.kind}, {"valid", true}};
  if (obj.tester) {
    auto rho = obj.tester->normalization();
    table += "outcomes: " + std::to_string(obj.tester->num_outcomes()) + "\n";
    table += "dims: [" + std::to_string(obj.tester->d1()) + "," +
             std::to_string(obj.tester->d0()) + "]\n";
    j["normalization"] = io::operator_to_json(rho.op());
    auto dec = ancilla_free_decomposition(*obj.tester);
    table += std::string("ancilla_free: ") + (dec ? "true" : "false") + "\n";
    j["ancilla_free"] = static_cast<bool>(dec);
  } else if (obj.povm) {
    table += "outcomes: " + std::to_string(obj.povm->num_outcomes()) + "\n";
    table += "dim: " + std::to_string(obj.povm->dim()) + "\n";
  } else if (obj.comb) {
    table += "steps: " + std::to_string(obj.comb->steps) + "\n";
  } else if (obj.ntester) {
    table += "steps: " + std::to_string(obj.ntester->steps) + "\n";
    table += "outcomes: " + std::to_string(obj.ntester->elements.size()) + "\n";
  }
  print_json_or(out, cfg, j, table);
  return kExitSuccess;
}

int cmd_compat(const std::vector<std::string>& paths, const CliConfig& cfg, std::ostream& out) {
  std::vector<io::LoadedObject> objs;
  for (const auto& p : paths) objs.push_back(io::load_object_file(p));
  bool all_povm = true, all_tester = true;
  for (const auto& o : objs) {
    all_povm = all_povm && o.povm.has_value();
    all_tester = all_tester && o.tester.has_value();
  }
  CompatibilityVerdict v;
  if (all_povm) {
    std::vector<Povm> povms;
    for (auto& o : objs) povms.push_back(*o.povm);
    v = povm_compatibility(povms, solve_options(cfg));
  } else if (all_tester) {
    std::vector<Tester> testers;
    for (auto& o : objs) testers.push_back(*o.tester);
    v = tester_compatibility(testers, solve_options(cfg));
  } else {
    throw Error("compat needs files that are all POVMs or all testers");
  }
  print_json_or(out, cfg, io::verdict_to_json(v), verdict_table(v));
  return v.compatible ? kExitSuccess : kExitNegative;
}

int cmd_robustness(const std::string& kind, const std::vector<std::string>& paths,
                   const std::string& method, const CliConfig& cfg, std::ostream& out) {
  if (paths.size() != 2) throw Error("robustness expects exactly two input files");
  auto opts = solve_options(cfg);
  RobustnessResult r;
  if (kind == "state") {
    auto a = io::load_object_file(paths[0]);
    auto b = io::load_object_file(paths[1]);
    if (!a.state || !b.state) throw Error("robustness state expects state files");
    r = state_robustness(*a.state, *b.state);
  } else if (kind == "povm") {
    auto a = io::load_object_file(paths[0]);
    auto b = io::load_object_file(paths[1]);
    if (!a.povm || !b.povm) throw Error("robustness povm expects povm files");
    r = measurement_robustness(*a.povm, *b.povm, opts);
  } else if (kind == "tester") {
    auto a = io::load_object_file(paths[0]);
    auto b = io::load_object_file(paths[1]);
    if (!a.tester || !b.tester) throw Error("robustness tester expects tester files");
    if (method == "bisection")
      r = tester_robustness_bisection(*a.tester, *b.tester, cfg.bisect_tol, opts);
    else
      r = tester_robustness_two_outcome(*a.tester, *b.tester, opts);
  } else {
    throw Error("robustness kind must be state, povm or tester");
  }
  std::string table = "lambda: " + format_fixed6(r.lambda) + "\n" +
                      "method: " + to_string(r.method) + "\n";
  print_json_or(out, cfg, io::robustness_to_json(r), table);
  return kExitSuccess;
}

int cmd_sweep(int theta_steps, int phi_steps, const std::string& out_path, const CliConfig& cfg,
              std::ostream& out) {
  auto rows = scenarios::sweep(scenarios::angle_grid(theta_steps),
                               scenarios::angle_grid(phi_steps), solve_options(cfg));
  std::string csv = scenarios::sweep_csv(rows);
  for (const auto& r : rows)
    if (!r.error.empty())
      std::cerr << "sweep: row (" << format_fixed6(r.theta) << ", " << format_fixed6(r.phi)
                << ") failed: " << r.error << "\n";
  if (out_path.empty())
    out << csv;
  else
    io::write_text_file(out_path, csv);
  return kExitSuccess;
}

int demo_pair(const Tester& a, const Tester& b, const CliConfig& cfg, std::ostream& out) {
  auto opts = solve_options(cfg);
  auto flags = structural_predicates(a, b);
  auto verdict = tester_compatibility({a, b}, opts);
  auto rob = tester_robustness_two_outcome(a, b, opts);
  auto bnd = bounds(a, b, opts);
  if (cfg.format == "json") {
    io::Json j;
    j["flags"] = io::flags_to_json(flags);
    j["verdict"] = io::verdict_to_json(verdict);
    j["robustness"] = io::robustness_to_json(rob);
    j["bounds"] = io::bounds_to_json(bnd);
    out << j.dump(2) << "\n";
  } else {
    out << flags_table(flags) << verdict_table(verdict);
    out << "lambda = " << format_fixed6(rob.lambda) << "\n";
    out << "state_lower = " << format_fixed6(bnd.state_lower)
        << ", trivial_upper = " << format_fixed6(bnd.trivial_upper) << "\n";
    if (bnd.measurement_upper)
      out << "measurement_upper = " << format_fixed6(*bnd.measurement_upper) << "\n";
  }
  return kExitSuccess;
}

int cmd_demo(const std::string& name, double p, double q, double theta, double phi, int d0,
             int d1, const CliConfig& cfg, std::ostream& out) {
  scenarios::NamedParams params;
  params.p = p;
  params.q = q;
  params.d0 = d0;
  params.d1 = d1;
  if (name == "tv-th") {
    auto tv = scenarios::named_testers("t_v").testers.front();
    auto th = scenarios::named_testers("t_h").testers.front();
    out << "T_V versus T_H\n";
    return demo_pair(tv, th, cfg, out);
  }
  if (name == "polarization") {
    double th_r = to_radians(theta, cfg), ph_r = to_radians(phi, cfg);
    auto pair = scenarios::polarization_pair(th_r, ph_r);
    auto query = scenarios::region_m(th_r, ph_r);
    out << "polarization pair theta=" << format_fixed6(th_r) << " phi=" << format_fixed6(ph_r)
        << "\n";
    out << "in_region_m: " << (query.member ? "true" : "false") << "\n";
    if (query.closed_form_lambda)
      out << "closed_form_lambda = " << format_fixed6(*query.closed_form_lambda) << "\n";
    if (query.member) {
      auto witness = scenarios::region_m_witness(th_r, ph_r);
      out << "analytic_witness_checks: " << (witness.all_checks_pass ? "pass" : "fail") << "\n";
    }
    return demo_pair(pair.a, pair.b, cfg, out);
  }
  if (name == "busch") {
    auto objs = scenarios::named_testers("busch", params);
    auto opts = solve_options(cfg);
    auto verdict = povm_compatibility({objs.povms[0], objs.povms[1]}, opts);
    auto rob = measurement_robustness(objs.povms[0], objs.povms[1], opts);
    out << objs.description << "\n";
    out << "p^2 + q^2 = " << format_fixed6(p * p + q * q) << "\n";
    out << verdict_table(verdict);
    out << "lambda = " << format_fixed6(rob.lambda) << "\n";
    return kExitSuccess;
  }
  if (name == "mub") {
    auto objs = scenarios::named_testers("mub_testers", params);
    auto opts = solve_options(cfg);
    const auto& a = objs.testers[0];
    const auto& b = objs.testers[1];
    auto rm = measurement_robustness(canonical_povm_on_support(a), canonical_povm_on_support(b),
                                     opts);
    double bound = 0.5 * (1.0 - 1.0 / std::sqrt(double(d0) * d1));
    out << objs.description << "\n";
    out << "measurement_upper = " << format_fixed6(rm.lambda) << "\n";
    out << "mub_bound = " << format_fixed6(bound) << "  (conjectured maximum, not asserted)\n";
    return kExitSuccess;
  }
  std::string canonical = name;
  if (name == "classical-ancilla") canonical = "classical_ancilla_example";
  auto objs = scenarios::named_testers(canonical, params);
  out << objs.description << "\n";
  for (const auto& t : objs.testers) {
    out << "tester with " << t.num_outcomes() << " outcomes, dims [" << t.d1() << ","
        << t.d0() << "]\n";
    auto dec = ancilla_free_decomposition(t);
    out << "ancilla_free: " << (dec ? "true" : "false") << "\n";
    if (cfg.format == "json") out << io::tester_to_json(t).dump(2) << "\n";
  }
  return kExitSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"quantum process-tester compatibility and robustness toolkit"};
  app.require_subcommand(1);
  CliConfig cfg;
  app.add_option("--format", cfg.format, "output format: table or json")
      ->check(CLI::IsMember({"table", "json"}));
  app.add_option("--feas-tol", cfg.feas_tol, "solver feasibility tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--gap-tol", cfg.gap_tol, "solver gap tolerance")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "validate a tester/povm/comb file");
  std::string validate_path;
  validate->add_option("file", validate_path)->required();

  auto* compat = app.add_subcommand("compat", "decide compatibility of two or more objects");
  std::vector<std::string> compat_paths;
  compat->add_option("files", compat_paths)->expected(-2);

  auto* rob = app.add_subcommand("robustness", "robustness of incompatibility");
  std::string rob_kind, rob_method = "sdp";
  std::vector<std::string> rob_paths;
  rob->add_option("kind", rob_kind, "state | povm | tester")->required();
  rob->add_option("files", rob_paths)->expected(-2);
  rob->add_option("--method", rob_method, "tester solver: sdp or bisection")
      ->check(CLI::IsMember({"sdp", "bisection"}));
  rob->add_option("--bisect-tol", cfg.bisect_tol, "bisection tolerance")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "polarization-family robustness scan (CSV)");
  int theta_steps = 16, phi_steps = 16;
  std::string sweep_out;
  sweep->add_option("--theta-steps", theta_steps)->check(CLI::PositiveNumber);
  sweep->add_option("--phi-steps", phi_steps)->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "write CSV to this path instead of stdout");

  auto* demo = app.add_subcommand("demo", "named worked examples");
  std::string demo_name;
  double demo_p = 0.8, demo_q = 0.8, demo_theta = M_PI / 2, demo_phi = M_PI / 2;
  int demo_d0 = 2, demo_d1 = 2;
  demo->add_option("name", demo_name,
                   "tv-th | unitality | entangled | classical-ancilla | busch | mub | "
                   "polarization")
      ->required();
  demo->add_option("--p", demo_p);
  demo->add_option("--q", demo_q);
  demo->add_option("--theta", demo_theta);
  demo->add_option("--phi", demo_phi);
  demo->add_option("--d0", demo_d0);
  demo->add_option("--d1", demo_d1);
  demo->add_flag("--degrees", cfg.degrees, "interpret angles as degrees");

  std::vector<std::string> argv = args;
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return kExitSuccess;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(validate)) return cmd_validate(validate_path, cfg, out);
    if (app.got_subcommand(compat)) return cmd_compat(compat_paths, cfg, out);
    if (app.got_subcommand(rob)) return cmd_robustness(rob_kind, rob_paths, rob_method, cfg, out);
    if (app.got_subcommand(sweep)) return cmd_sweep(theta_steps, phi_steps, sweep_out, cfg, out);
    if (app.got_subcommand(demo))
      return cmd_demo(demo_name, demo_p, demo_q, demo_theta, demo_phi, demo_d0, demo_d1, cfg,
                      out);
  } catch (const nlohmann::json::parse_error& e) {
    err << "malformed JSON: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "invalid object: " << e.what() << "\n";
    return kExitNegative;
  } catch (const sdp::SolverError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace qtester::cli
