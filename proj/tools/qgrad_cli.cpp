// qgrad: batch front end for the solver, sweeps, checks and transforms.
//
// Exit codes: 0 ok, 2 non-convergence, 3 invalid spec or config, 4 I/O.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qgrad/checks.hpp"
#include "qgrad/config.hpp"
#include "qgrad/error.hpp"
#include "qgrad/json_io.hpp"
#include "qgrad/linear.hpp"
#include "qgrad/transforms.hpp"

namespace fs = std::filesystem;
using namespace qgrad;

namespace {

enum Exit { kOk = 0, kNoConvergence = 2, kInvalid = 3, kIo = 4 };

struct Common {
  std::string config_path;
  std::string preset;
  std::vector<std::string> sets;
  std::string out = "qgrad-out";
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

struct Loaded {
  RunConfig cfg;
  Json resolved;
  std::string source;
  const Preset* preset = nullptr;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot read " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::invalid_spec, path + ": not valid JSON");
  return j;
}

Loaded load(const Common& c) {
  Loaded l;
  Json doc;
  if (!c.preset.empty()) {
    if (!c.config_path.empty()) throw Error(ErrorKind::invalid_spec, "give a config file or --preset, not both");
    l.preset = find_preset(c.preset);
    if (!l.preset) throw Error(ErrorKind::invalid_spec, "unknown preset '" + c.preset + "'");
    doc = l.preset->config;
    l.source = "preset:" + c.preset;
  } else if (!c.config_path.empty()) {
    doc = read_json_file(c.config_path);
    l.source = c.config_path;
  } else {
    throw Error(ErrorKind::invalid_spec, "no config: pass a JSON file or --preset NAME");
  }
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::invalid_spec, "--set expects path=value, got '" + s + "'");
    apply_override(doc, s.substr(0, eq), s.substr(eq + 1));
  }
  l.cfg = run_config_from_json(doc);
  l.resolved = to_json(l.cfg);
  return l;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::io_error, "write failed: " + path.string());
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Output directory plus the manifest. `options` holds every subcommand flag
// that changes results; it is part of the hashed document.
class Run {
 public:
  Run(const Common& c, const Loaded& l, std::string command, Json options)
      : dir_(c.out), loaded_(l), command_(std::move(command)), options_(std::move(options)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::io_error, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& body) const { write_text(dir_ / name, body); }

  std::string hash() const {
    Json h;
    h["command"] = command_;
    h["config"] = loaded_.resolved;
    h["options"] = options_;
    return hex64(fnv1a(dump(h)));
  }

  void manifest() const {
    Json m;
    m["command"] = command_;
    m["config_path"] = loaded_.source;
    m["config_hash"] = hash();
    if (loaded_.preset) {
      m["preset"] = {{"name", loaded_.preset->name},
                     {"theorem", loaded_.preset->theorem},
                     {"expected", loaded_.preset->expected}};
    }
    m["options"] = options_;
    m["resolved_config"] = loaded_.resolved;
    m["output_dir"] = dir_.string();
    m["timestamp"] = timestamp();
    write("manifest.json", dump(m));
  }

 private:
  fs::path dir_;
  const Loaded& loaded_;
  std::string command_;
  Json options_;
};

int status_exit(const SolveReport& r) { return r.converged() ? kOk : kNoConvergence; }

std::string field_text(const DiscreteField& u) {
  std::ostringstream os;
  write_field(os, u);
  return os.str();
}

SolveReport run_solver(const RunConfig& cfg, const MeshPtr& mesh, Json* extra) {
  if (cfg.method == Method::newton) return solve(cfg.problem, mesh, cfg.solver);
  const FixedPointResult fp = fixed_point_K(cfg.problem, initial_guess(cfg.problem, mesh, cfg.solver), cfg.solver);
  if (extra) {
    Json hist = Json::array();
    for (const auto& s : fp.history) {
      hist.push_back({{"step", s.step}, {"residual", s.residual}, {"inner_iterations", s.inner_iterations}});
    }
    (*extra)["fixed_point_history"] = hist;
  }
  return fp.report;
}

// ---- subcommands ------------------------------------------------------------

int cmd_solve(const Common& c) {
  const Loaded l = load(c);
  const MeshPtr mesh = l.cfg.mesh();
  Run run(c, l, "solve", Json::object());
  Json extra = Json::object();
  const SolveReport rep = run_solver(l.cfg, mesh, &extra);
  Json j = to_json(rep);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  run.write("report.json", dump(j));
  if (rep.solution) run.write("solution.txt", field_text(*rep.solution));
  run.manifest();
  std::cout << to_string(rep.status) << " sup_norm " << rep.sup_norm << " iterations " << rep.iterations << '\n';
  if (!rep.diagnostics.empty()) std::cout << rep.diagnostics << '\n';
  return status_exit(rep);
}

std::vector<double> resolve_grid(const RunConfig& cfg, const std::optional<std::string>& grid_flag) {
  if (!grid_flag) return cfg.grid;
  std::vector<double> g;
  std::stringstream ss(*grid_flag);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorKind::invalid_spec, "--grid: '" + item + "' is not a number");
    g.push_back(v);
  }
  return g;
}

int cmd_sweep(const Common& c, bool lambda, const std::optional<std::string>& grid_flag) {
  const Loaded l = load(c);
  const std::vector<double> grid = resolve_grid(l.cfg, grid_flag);
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error(ErrorKind::invalid_spec, "grid must ascend");
  const MeshPtr mesh = l.cfg.mesh();
  Run run(c, l, lambda ? "sweep-lambda" : "sweep-t", {{"grid", grid}});
  Json verdict;
  std::string csv;
  if (lambda) {
    const AprioriResult a = apriori_scaled_sweep(l.cfg.problem, mesh, grid, l.cfg.solver);
    csv = a.table.to_csv();
    verdict = to_json(a.verdict);
    verdict["max_over_median"] = a.max_over_median;
  } else {
    const TSweepResult t = continuation_t(l.cfg.problem, mesh, grid, l.cfg.solver);
    csv = t.table.to_csv();
    verdict["name"] = "t-sweep";
    verdict["t_fail"] = t.t_fail ? Json(*t.t_fail) : Json(nullptr);
  }
  run.write("sweep.csv", csv);
  run.write("verdict.json", dump(verdict));
  run.manifest();
  std::cout << csv;
  return kOk;
}

struct CheckFlags {
  std::string name;
  double L = 1.0;
  double anchor = 1.0;
  double alpha = 0.5;
  std::optional<double> q;
  std::string field = "solution";
  bool interval = false;
};

Json check_options(const CheckFlags& f) {
  Json o;
  o["name"] = f.name;
  o["L"] = f.L;
  o["anchor"] = f.anchor;
  o["alpha"] = f.alpha;
  o["q"] = f.q ? Json(*f.q) : Json(nullptr);
  o["field"] = f.field;
  o["interval"] = f.interval;
  return o;
}

int cmd_check(const Common& c, const CheckFlags& f) {
  static const std::vector<std::string> names = {"psi-decreasing", "validate", "eigen",          "comparison",
                                                 "pohozaev",       "holder",   "power-transform", "roundtrip"};
  if (std::find(names.begin(), names.end(), f.name) == names.end()) {
    throw Error(ErrorKind::invalid_spec, "unknown check '" + f.name + "'");
  }
  const Loaded l = load(c);
  const ProblemSpec& spec = l.cfg.problem;
  const MeshPtr mesh = l.cfg.mesh();
  Run run(c, l, "check", check_options(f));
  Json out;
  int code = kOk;

  if (f.name == "psi-decreasing") {
    PsiCheckOptions opt;
    opt.L = f.L;
    opt.anchor = f.anchor;
    const Point x0 = spec.domain.radial() ? Point{0.0, 0.0} : Point{spec.domain.width / 2, spec.domain.height / 2};
    out = to_json(check_psi_decreasing(spec.g, spec.domain, x0, spec.f.p, spec.domain.dimension, opt));
  } else if (f.name == "validate") {
    const ValidationReport rep = validate_spec(spec);
    out["name"] = "validate";
    out["pass"] = rep.ok();
    Json conds = Json::array();
    for (const auto& cr : rep.conditions) {
      Json e;
      e["name"] = cr.name;
      e["satisfied"] = cr.satisfied;
      e["witness_s"] = cr.witness_s ? Json(*cr.witness_s) : Json(nullptr);
      e["witness_x"] = cr.witness_x ? Json::array({cr.witness_x->x, cr.witness_x->y}) : Json(nullptr);
      e["margin"] = cr.margin;
      e["detail"] = cr.detail;
      conds.push_back(e);
    }
    out["conditions"] = conds;
  } else if (f.name == "eigen") {
    // On the interval (0, R) or the configured domain, M and 2M.
    const MeshPtr coarse = f.interval
                               ? make_mesh(RadialMesh::interval(spec.domain.outer_radius, l.cfg.resolution))
                               : mesh;
    const EigenPair a = principal_eigenpair(coarse);
    const EigenPair b = principal_eigenpair(refine(*coarse));
    out["name"] = "eigen";
    out["coarse"] = a.lambda1;
    out["fine"] = b.lambda1;
    out["richardson"] = richardson_eigenvalue(a.lambda1, b.lambda1);
  } else if (f.name == "comparison") {
    // Scaled pair v = phi1, u = 0.9 v, h = A(v).
    const DiscreteField v = cached_eigenpair(mesh).phi1;
    DiscreteField u = v;
    for (double& x : u.values()) x *= 0.9;
    const DiscreteField hv = gradient_operator(spec.g, spec.domain, v);
    out = to_json(comparison_check(u, v, hv.values(), spec.g, spec.domain));
  } else if (f.name == "pohozaev") {
    const double q = f.q.value_or(spec.f.p);
    DiscreteField v;
    if (f.field == "manufactured") {
      v = DiscreteField::sample(mesh, [&](Point p) {
        const double r = p.x / spec.domain.outer_radius;
        return 1.0 - r * r;
      });
    } else if (f.field == "solution") {
      const SolveReport rep = pohozaev_solve(mesh, q, l.cfg.solver);
      out["solve"] = to_json(rep);
      if (!rep.converged()) code = kNoConvergence;
      v = *rep.solution;
    } else {
      throw Error(ErrorKind::invalid_spec, "--field must be solution or manufactured");
    }
    out["name"] = "pohozaev";
    out["q"] = q;
    out["defect"] = pohozaev_defect(v, q);
  } else if (f.name == "holder") {
    const SolveReport rep = run_solver(l.cfg, mesh, nullptr);
    out["name"] = "holder";
    out["solve"] = to_json(rep);
    out["alpha"] = f.alpha;
    out["quotient"] = holder_quotient(*rep.solution, f.alpha);
    code = status_exit(rep);
  } else if (f.name == "power-transform") {
    if (spec.g.kind != GKind::model_singular || !spec.g.mu.is_constant() || spec.g.gamma != 1.0 ||
        spec.g.delta != 0.0) {
      throw Error(ErrorKind::unsupported_transform, "power transform needs g = mu/s with constant mu");
    }
    const SolveReport rep = run_solver(l.cfg, mesh, nullptr);
    out["name"] = "power-transform";
    out["solve"] = to_json(rep);
    code = status_exit(rep);
    if (rep.converged()) {
      const PowerTransformDefect d = power_transform_check(*rep.solution, spec.g.mu.value, spec.lambda, spec.f.p);
      out["c"] = d.c;
      out["exponent"] = d.exponent;
      out["defect"] = d.defect;
    }
  } else {  // roundtrip
    const TransformedProblem tp = semilinearize(spec);
    const SolveReport direct = run_solver(l.cfg, mesh, nullptr);
    const SolveReport semi = solve(tp.spec, mesh, l.cfg.solver);
    out["name"] = "roundtrip";
    out["direct"] = to_json(direct);
    out["semilinear"] = to_json(semi);
    if (direct.converged() && semi.converged()) {
      const DiscreteField back = tp.map_inverse(*semi.solution);
      double diff = 0.0;
      for (std::size_t i = 0; i < back.size(); ++i) diff = std::max(diff, std::abs(back[i] - (*direct.solution)[i]));
      out["max_difference"] = diff;
    } else {
      code = kNoConvergence;
    }
  }
  run.write("verdict.json", dump(out));
  run.manifest();
  std::cout << dump(out);
  return code;
}

int cmd_probe(const Common& c) {
  const Loaded l = load(c);
  ProbeOptions opt = l.cfg.probe;
  opt.workers = c.workers;
  Run run(c, l, "probe-nonexist", Json::object());
  const NonexistenceReport rep = nonexistence_probe(l.cfg.problem, opt, l.cfg.solver);
  std::ostringstream csv;
  rep.write_csv(csv);
  run.write("probe.json", dump(to_json(rep)));
  run.write("probe.csv", csv.str());
  run.manifest();
  std::cout << (rep.degenerate ? "degenerate" : "not degenerate") << ": " << rep.detail << '\n';
  return rep.degenerate ? kNoConvergence : kOk;
}

struct TransformFlags {
  std::string kind;
  std::optional<double> gamma, b, s0, delta_t;
};

int cmd_transform(const Common& c, const TransformFlags& f) {
  const Loaded l = load(c);
  Json opts;
  opts["kind"] = f.kind;
  opts["gamma"] = f.gamma ? Json(*f.gamma) : Json(nullptr);
  opts["b"] = f.b ? Json(*f.b) : Json(nullptr);
  opts["s0"] = f.s0 ? Json(*f.s0) : Json(nullptr);
  opts["delta_t"] = f.delta_t ? Json(*f.delta_t) : Json(nullptr);
  auto need = [](const std::optional<double>& v, const char* flag) {
    if (!v) throw Error(ErrorKind::invalid_spec, std::string("missing ") + flag);
    return *v;
  };
  TransformedProblem tp;
  if (f.kind == "psi") tp = semilinearize(l.cfg.problem);
  else if (f.kind == "gamma") tp = gamma_transform(l.cfg.problem, need(f.gamma, "--gamma"), f.b);
  else if (f.kind == "truncate-s0") tp = truncate_at_s0(l.cfg.problem, need(f.s0, "--s0"));
  else if (f.kind == "truncate-delta") tp = truncate_at_delta(l.cfg.problem, need(f.delta_t, "--delta-t"));
  else throw Error(ErrorKind::invalid_spec, "unknown transform '" + f.kind + "'");
  Run run(c, l, "transform", opts);
  run.write("transformed.json", dump(to_json(tp)));
  run.manifest();
  std::cout << tp.meta.name << " written to " << c.out << "/transformed.json\n";
  return kOk;
}

int cmd_eigen(const Common& c, bool interval) {
  const Loaded l = load(c);
  MeshPtr coarse = interval ? make_mesh(RadialMesh::interval(l.cfg.problem.domain.outer_radius, l.cfg.resolution))
                            : l.cfg.mesh();
  MeshPtr fine = refine(*coarse);
  Run run(c, l, "eigen", {{"interval", interval}});
  const EigenPair a = principal_eigenpair(coarse);
  const EigenPair b = principal_eigenpair(fine);
  Json out;
  out["coarse"] = to_json(a);
  out["fine"] = to_json(b);
  out["richardson"] = richardson_eigenvalue(a.lambda1, b.lambda1);
  run.write("eigen.json", dump(out));
  run.manifest();
  std::cout << dump(out);
  return kOk;
}

int cmd_presets() {
  for (const auto& p : presets()) {
    std::cout << p.name << "  [" << p.command << "]\n  " << p.theorem << "\n  expected: " << p.expected << '\n';
  }
  return kOk;
}

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::invalid_dimension:
    case ErrorKind::invalid_spec:
    case ErrorKind::invalid_table:
    case ErrorKind::unsupported_transform: return kInvalid;
    case ErrorKind::io_error: return kIo;
    default: return kNoConvergence;
  }
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("config", c.config_path, "experiment config (JSON)");
  app->add_option("--preset", c.preset, "built-in preset instead of a config file");
  app->add_option("--set", c.sets, "override a config leaf: dotted.path=value")->take_all();
  app->add_option("--out", c.out, "output directory");
  app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgrad: quasilinear elliptic problems with quadratic gradient terms"};
  app.require_subcommand(1);
  Common common;

  auto* solve_cmd = app.add_subcommand("solve", "solve one problem; writes report.json, solution.txt");
  add_common(solve_cmd, common);

  std::optional<std::string> grid;
  auto* sl = app.add_subcommand("sweep-lambda", "continuation in lambda; writes sweep.csv, verdict.json");
  add_common(sl, common);
  sl->add_option("--grid", grid, "comma-separated ascending values (overrides config grid)");
  auto* st = app.add_subcommand("sweep-t", "continuation in t; writes sweep.csv, verdict.json with t_fail");
  add_common(st, common);
  st->add_option("--grid", grid, "comma-separated ascending values (overrides config grid)");

  CheckFlags cf;
  auto* ck = app.add_subcommand("check", "run one check; writes verdict.json");
  add_common(ck, common);
  ck->add_option("--name", cf.name,
                 "psi-decreasing | validate | eigen | comparison | pohozaev | holder | power-transform | roundtrip")
      ->required();
  ck->add_option("--L", cf.L, "psi-decreasing: scale L");
  ck->add_option("--anchor", cf.anchor, "psi-decreasing: anchor of the inner integral");
  ck->add_option("--alpha", cf.alpha, "holder: exponent");
  ck->add_option("--q", cf.q, "pohozaev: exponent (default f.p)");
  ck->add_option("--field", cf.field, "pohozaev: solution | manufactured");
  ck->add_flag("--interval", cf.interval, "eigen: use the interval (0, outer_radius)");

  auto* pr = app.add_subcommand("probe-nonexist", "nonexistence probe; writes probe.json, probe.csv");
  add_common(pr, common);

  TransformFlags tf;
  auto* tr = app.add_subcommand("transform", "apply a transform; writes transformed.json");
  add_common(tr, common);
  tr->add_option("--kind", tf.kind, "psi | gamma | truncate-s0 | truncate-delta")->required();
  tr->add_option("--gamma", tf.gamma);
  tr->add_option("--b", tf.b);
  tr->add_option("--s0", tf.s0);
  tr->add_option("--delta-t", tf.delta_t);

  bool interval = false;
  auto* eg = app.add_subcommand("eigen", "principal eigenvalue at M and 2M with extrapolation; writes eigen.json");
  add_common(eg, common);
  eg->add_flag("--interval", interval, "use the interval (0, outer_radius) instead of the domain");

  app.add_subcommand("presets", "list built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(common);
    if (sl->parsed()) return cmd_sweep(common, true, grid);
    if (st->parsed()) return cmd_sweep(common, false, grid);
    if (ck->parsed()) return cmd_check(common, cf);
    if (pr->parsed()) return cmd_probe(common);
    if (tr->parsed()) return cmd_transform(common, tf);
    if (eg->parsed()) return cmd_eigen(common, interval);
    return cmd_presets();
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoConvergence;
  }
}
