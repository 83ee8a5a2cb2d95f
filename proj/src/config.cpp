#include "qgrad/config.hpp"

#include "qgrad/error.hpp"

namespace qgrad {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::invalid_spec, what); }

int int_field(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path + ": expected an integer");
  return j.get<int>();
}

}  // namespace

RunConfig run_config_from_json(const Json& doc) {
  if (!doc.is_object()) bad("config: expected an object");
  RunConfig cfg;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    if (key == "problem") {
      cfg.problem = problem_from_json(v);
    } else if (key == "mesh") {
      if (!v.is_object()) bad("mesh: expected an object");
      for (auto m = v.begin(); m != v.end(); ++m) {
        if (m.key() != "resolution") bad("mesh." + m.key() + ": unknown field");
        cfg.resolution = int_field(m.value(), "mesh.resolution");
      }
    } else if (key == "solver") {
      cfg.solver = solver_from_json(v);
    } else if (key == "method") {
      if (v == "newton") cfg.method = Method::newton;
      else if (v == "fixed-point") cfg.method = Method::fixed_point;
      else bad("method: expected \"newton\" or \"fixed-point\"");
    } else if (key == "grid") {
      if (!v.is_array()) bad("grid: expected an array");
      for (const Json& x : v) {
        if (!x.is_number()) bad("grid: entries must be numbers");
        cfg.grid.push_back(x.get<double>());
      }
    } else if (key == "probe") {
      if (!v.is_object()) bad("probe: expected an object");
      for (auto m = v.begin(); m != v.end(); ++m) {
        if (m.key() == "base_resolution") cfg.probe.base_resolution = int_field(m.value(), "probe.base_resolution");
        else if (m.key() == "levels") cfg.probe.levels = int_field(m.value(), "probe.levels");
        else bad("probe." + m.key() + ": unknown field");
      }
    } else {
      bad(key + ": unknown field");
    }
  }
  cfg.problem.validate();
  if (cfg.resolution < 8) bad("mesh.resolution must be at least 8");
  if (cfg.probe.levels < 1 || cfg.probe.base_resolution < 16) bad("probe: levels >= 1 and base_resolution >= 16");
  return cfg;
}

Json to_json(const RunConfig& cfg) {
  Json j;
  j["problem"] = to_json(cfg.problem);
  j["mesh"] = {{"resolution", cfg.resolution}};
  j["solver"] = to_json(cfg.solver);
  j["method"] = cfg.method == Method::newton ? "newton" : "fixed-point";
  j["grid"] = cfg.grid;
  j["probe"] = {{"base_resolution", cfg.probe.base_resolution}, {"levels", cfg.probe.levels}};
  return j;
}

namespace {

Json ball(int N = 3) { return {{"kind", "radial-ball"}, {"dimension", N}, {"outer_radius", 1.0}}; }

Json singular(double gamma, double delta, Json mu) {
  return {{"kind", "model-singular"}, {"gamma", gamma}, {"delta", delta}, {"mu", std::move(mu)}};
}

Json piecewise(double inner, double outer, double r_hi = 0.5) {
  return {{"kind", "piecewise"},
          {"inner_value", inner},
          {"outer_value", outer},
          {"omega", {{"r_lo", 0.0}, {"r_hi", r_hi}}}};
}

Json power(double p) { return {{"kind", "pure-power"}, {"p", p}}; }

Json bump() { return {{"kind", "bump"}, {"amplitude", 1.0}, {"radius", 0.25}}; }

Json problem(Json g, double p, double lambda, Json source = {{"kind", "none"}}) {
  return {{"domain", ball()}, {"lambda", lambda}, {"f", power(p)}, {"g", std::move(g)},
          {"t", 0.0},         {"sigma_t", 0.5},   {"source", std::move(source)}};
}

std::vector<Preset> build() {
  std::vector<Preset> out;
  const char* none = "no asserted outcome";

  // mu sign-changing: 0.4 at the center down to -0.1 at the boundary.
  Json mu_profile = {{"kind", "radial-profile"},
                     {"profile", {{"x", {0.0, 0.25, 0.5, 0.75, 1.0}}, {"y", {0.4, 0.275, 0.15, 0.025, -0.1}}}}};

  out.push_back({"thm1.1-unique",
                 "thm 1.1 (1): -Delta u + mu |grad u|^2/u = h with ||mu||_inf < 1 has a unique finite energy solution",
                 "converged solve", "solve",
                 {{"problem", problem(singular(1.0, 0.0, piecewise(0.3, 0.6)), 2.0, 0.0, bump())},
                  {"mesh", {{"resolution", 400}}}}});
  out.push_back({"thm1.1-nonexist",
                 "thm 1.1 (2): mu >= tau > 1 and h = 0 outside omega gives no solution",
                 "non-convergence (exit 2) and a positive degeneration verdict", "probe-nonexist",
                 {{"problem", problem(singular(1.0, 0.0, piecewise(0.3, 2.0)), 2.0, 0.0, bump())},
                  {"mesh", {{"resolution", 400}}},
                  {"method", "fixed-point"},
                  {"probe", {{"base_resolution", 200}, {"levels", 3}}}}});
  out.push_back({"thm1.2-gamma1",
                 "thm 1.2 (1): gamma = 1, 2 sigma - 1 < tau <= mu <= sigma < sigma_1 gives a solution for every lambda",
                 "converged solve", "solve",
                 {{"problem", problem(singular(1.0, 0.0, mu_profile), 2.0, 1.0)}, {"mesh", {{"resolution", 400}}}}});
  out.push_back({"thm1.2-nonexist",
                 "thm 1.2 (2): gamma = 1, delta = 0, mu >= tau > 1 outside omega gives no solution for any lambda",
                 "non-convergence (exit 2)", "solve",
                 {{"problem", problem(singular(1.0, 0.0, piecewise(0.3, 2.0)), 2.0, 1.0)},
                  {"mesh", {{"resolution", 400}}},
                  {"method", "fixed-point"},
                  {"probe", {{"base_resolution", 200}, {"levels", 3}}}}});
  out.push_back({"thm1.3-exist",
                 "thm 1.3 (1): gamma > 1, delta > 0, 2 ||mu+|| + ||mu-|| < delta^(gamma-1) gives a solution for every lambda",
                 "converged solve", "solve",
                 {{"problem", problem(singular(2.0, 1.0, Json{{"kind", "constant"}, {"value", 0.3}}), 3.0, 1.0)},
                  {"mesh", {{"resolution", 400}}}}});
  out.push_back({"thm1.3-nonexist",
                 "thm 1.3 (2): gamma > 1, delta = 0, mu >= tau > 0 outside omega gives no solution for any lambda",
                 "non-convergence (exit 2)", "solve",
                 {{"problem", problem(singular(2.0, 0.0, piecewise(0.0, 0.5)), 3.0, 1.0)},
                  {"mesh", {{"resolution", 400}}},
                  {"method", "fixed-point"},
                  {"probe", {{"base_resolution", 200}, {"levels", 3}}}}});
  out.push_back({"thm1.4-small-p",
                 "thm 1.4 (1): p < (N+1)/(N-1), bounded mu: solutions for large lambda with ||u|| -> 0",
                 "sup norm decreasing to 0 along the lambda grid", "sweep-lambda",
                 {{"problem", problem(singular(0.5, 0.0, piecewise(-0.5, 1.0)), 1.5, 100.0)},
                  {"mesh", {{"resolution", 1000}}},
                  {"grid", {100.0, 1000.0, 10000.0}}}});
  out.push_back({"thm1.4-nonneg-mu",
                 "thm 1.4 (2): p < 2*-1, continuous mu >= 0: solutions for large lambda with ||u|| -> 0",
                 "sup norm decreasing to 0 along the lambda grid", "sweep-lambda",
                 {{"problem", problem(singular(0.5, 0.0, Json{{"kind", "constant"}, {"value", 0.5}}), 2.0, 10.0)},
                  {"mesh", {{"resolution", 2000}}},
                  {"grid", {10.0, 100.0, 1000.0}}}});
  out.push_back({"open-gamma1-delta0-mu1", "open problem: gamma = 1, delta = 0, mu = 1", none, "solve",
                 {{"problem", problem(singular(1.0, 0.0, Json{{"kind", "constant"}, {"value", 1.0}}), 2.0, 1.0)},
                  {"mesh", {{"resolution", 400}}}}});
  out.push_back({"open-gamma1-delta-pos-intermediate",
                 "open problem: gamma = 1, delta > 0, sigma_1 <= mu < p, small lambda", none, "solve",
                 {{"problem", problem(singular(1.0, 0.5, Json{{"kind", "constant"}, {"value", 1.0}}), 2.0, 0.1)},
                  {"mesh", {{"resolution", 400}}}}});

  Json scaling = problem({{"kind", "constant-over-s"}, {"coefficient", 0.4}, {"tau", 0.4}, {"sigma", 0.4}}, 3.0, 1.0);
  out.push_back({"sweep-scaling",
                 "exact scaling: f = s^p, g = sigma/s gives lambda^(1/(p-1)) ||u_lambda|| independent of lambda",
                 "scaled_norm constant along the grid", "sweep-lambda",
                 {{"problem", scaling}, {"mesh", {{"resolution", 2000}}}, {"grid", {0.1, 1.0, 10.0, 100.0}}}});
  Json tfam = scaling;
  tfam["sigma_t"] = 0.4;
  Json tgrid = Json::array();
  for (int k = 0; k <= 20; ++k) tgrid.push_back(static_cast<double>(k));
  out.push_back({"sweep-t", "a priori bound on t: solutions of the t-problem stop existing at a finite t",
                 "finite t_fail", "sweep-t", {{"problem", tfam}, {"mesh", {{"resolution", 1000}}}, {"grid", tgrid}}});
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace qgrad
