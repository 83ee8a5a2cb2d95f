#include "qgrad/json_io.hpp"

#include <cstdio>
#include <set>

#include "qgrad/error.hpp"

namespace qgrad {
namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::invalid_spec, path + ": " + what);
}

// Reader over one JSON object that remembers which keys were consumed.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  std::string at(const char* key) const { return path_ + "." + key; }

  const Json* get(const char* key) {
    seen_.insert(key);
    return has(key) ? &j_.at(key) : nullptr;
  }

  void num(const char* key, double& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number()) bad(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  void opt(const char* key, std::optional<double>& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number()) bad(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  void integer(const char* key, int& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number_integer()) bad(at(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void flag(const char* key, bool& out) {
    if (const Json* v = get(key)) {
      if (!v->is_boolean()) bad(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  std::optional<std::string> text(const char* key) {
    const Json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) bad(at(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) bad(path_ + "." + it.key(), "unknown field");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E, std::size_t K>
E parse_enum(const std::string& path, const std::string& s, const std::pair<E, const char*> (&names)[K]) {
  for (const auto& [e, n] : names) {
    if (s == n) return e;
  }
  std::string opts;
  for (const auto& [e, n] : names) opts += std::string(opts.empty() ? "" : ", ") + n;
  bad(path, "unknown kind '" + s + "' (expected " + opts + ")");
}

template <class E, std::size_t K>
const char* enum_name(E e, const std::pair<E, const char*> (&names)[K]) {
  for (const auto& [v, n] : names) {
    if (v == e) return n;
  }
  return "?";
}

constexpr std::pair<DomainKind, const char*> kDomain[] = {
    {DomainKind::radial_ball, "radial-ball"},
    {DomainKind::radial_annulus, "radial-annulus"},
    {DomainKind::rectangle, "rectangle"}};
constexpr std::pair<MuKind, const char*> kMu[] = {
    {MuKind::constant, "constant"}, {MuKind::radial_profile, "radial-profile"}, {MuKind::piecewise, "piecewise"}};
constexpr std::pair<FKind, const char*> kF[] = {{FKind::pure_power, "pure-power"},
                                                {FKind::shifted_power, "shifted-power"},
                                                {FKind::table, "table"},
                                                {FKind::semilinearized, "semilinearized"},
                                                {FKind::truncated, "truncated"}};
constexpr std::pair<GKind, const char*> kG[] = {{GKind::model_singular, "model-singular"},
                                                {GKind::constant_over_s, "constant-over-s"},
                                                {GKind::table, "table"},
                                                {GKind::truncated, "truncated"}};
constexpr std::pair<SourceSpec::Kind, const char*> kSource[] = {{SourceSpec::Kind::none, "none"},
                                                                {SourceSpec::Kind::bump, "bump"}};
constexpr std::pair<FreezeMode, const char*> kFreeze[] = {{FreezeMode::coefficient_only, "coefficient-only"},
                                                          {FreezeMode::full, "full"}};

Json table_json(const MonotoneTable& t) {
  Json j;
  j["x"] = t.xs();
  j["y"] = t.ys();
  return j;
}

MonotoneTable table_from(const Json& j, const std::string& path) {
  Fields f(j, path);
  const Json* x = f.get("x");
  const Json* y = f.get("y");
  f.finish();
  if (!x || !y || !x->is_array() || !y->is_array()) bad(path, "a table needs arrays x and y");
  std::vector<double> xs, ys;
  try {
    xs = x->get<std::vector<double>>();
    ys = y->get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    bad(path, "table entries must be numbers");
  }
  try {
    return MonotoneTable(std::move(xs), std::move(ys));
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_table, path + ": " + e.what());
  }
}

void put_opt(Json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

// ---- domain / mu / source ---------------------------------------------------

Json domain_json(const DomainSpec& d) {
  Json j;
  j["kind"] = enum_name(d.kind, kDomain);
  j["dimension"] = d.dimension;
  if (d.kind == DomainKind::rectangle) {
    j["width"] = d.width;
    j["height"] = d.height;
  } else {
    j["outer_radius"] = d.outer_radius;
    if (d.kind == DomainKind::radial_annulus) j["inner_radius"] = d.inner_radius;
  }
  return j;
}

DomainSpec domain_from(const Json& j, const std::string& path) {
  Fields f(j, path);
  DomainSpec d;
  if (auto k = f.text("kind")) d.kind = parse_enum(f.at("kind"), *k, kDomain);
  if (d.kind == DomainKind::rectangle) d.dimension = 2;
  f.integer("dimension", d.dimension);
  f.num("outer_radius", d.outer_radius);
  f.num("inner_radius", d.inner_radius);
  f.num("width", d.width);
  f.num("height", d.height);
  f.finish();
  return d;
}

Json omega_json(const InnerRegion& w, const DomainSpec& d) {
  Json j;
  if (d.radial()) {
    j["r_lo"] = w.r_lo;
    j["r_hi"] = w.r_hi;
  } else {
    j["x_lo"] = w.x_lo;
    j["x_hi"] = w.x_hi;
    j["y_lo"] = w.y_lo;
    j["y_hi"] = w.y_hi;
  }
  return j;
}

InnerRegion omega_from(const Json& j, const std::string& path) {
  Fields f(j, path);
  InnerRegion w;
  f.num("r_lo", w.r_lo);
  f.num("r_hi", w.r_hi);
  f.num("x_lo", w.x_lo);
  f.num("x_hi", w.x_hi);
  f.num("y_lo", w.y_lo);
  f.num("y_hi", w.y_hi);
  f.finish();
  return w;
}

Json mu_json(const MuFieldSpec& m, const DomainSpec& d) {
  Json j;
  j["kind"] = enum_name(m.kind, kMu);
  switch (m.kind) {
    case MuKind::constant: j["value"] = m.value; break;
    case MuKind::radial_profile: j["profile"] = table_json(m.profile); break;
    case MuKind::piecewise:
      j["inner_value"] = m.inner_value;
      j["outer_value"] = m.outer_value;
      j["omega"] = omega_json(m.omega, d);
      break;
  }
  return j;
}

MuFieldSpec mu_from(const Json& j, const std::string& path) {
  MuFieldSpec m;
  if (j.is_number()) {
    m.value = j.get<double>();
    return m;
  }
  Fields f(j, path);
  if (auto k = f.text("kind")) m.kind = parse_enum(f.at("kind"), *k, kMu);
  f.num("value", m.value);
  if (const Json* p = f.get("profile")) m.profile = table_from(*p, f.at("profile"));
  f.num("inner_value", m.inner_value);
  f.num("outer_value", m.outer_value);
  if (const Json* w = f.get("omega")) m.omega = omega_from(*w, f.at("omega"));
  f.finish();
  return m;
}

Json source_json(const SourceSpec& s) {
  Json j;
  j["kind"] = enum_name(s.kind, kSource);
  if (s.kind == SourceSpec::Kind::bump) {
    j["amplitude"] = s.amplitude;
    j["radius"] = s.radius;
  }
  return j;
}

SourceSpec source_from(const Json& j, const std::string& path) {
  Fields f(j, path);
  SourceSpec s;
  if (auto k = f.text("kind")) s.kind = parse_enum(f.at("kind"), *k, kSource);
  f.num("amplitude", s.amplitude);
  f.num("radius", s.radius);
  f.finish();
  return s;
}

// ---- f ----------------------------------------------------------------------

Json f_json(const NonlinearitySpec& f) {
  Json j;
  j["kind"] = enum_name(f.kind, kF);
  j["p"] = f.p;
  switch (f.kind) {
    case FKind::pure_power: break;
    case FKind::shifted_power:
      j["a"] = f.a;
      j["shift"] = f.shift;
      break;
    case FKind::table:
      j["a"] = f.a;
      j["table"] = table_json(f.table);
      break;
    case FKind::semilinearized:
      j["psi"] = {{"mu", f.psi.mu}, {"delta", f.psi.delta}, {"gamma", f.psi.gamma}, {"anchor", f.psi.anchor}};
      j["scale"] = f.scale;
      break;
    case FKind::truncated: j["threshold"] = f.threshold; break;
  }
  put_opt(j, "L", f.limit_L);
  if (f.declares_f_star) j["declares_f_star"] = true;
  if (f.declares_f_zero) j["declares_f_zero"] = true;
  if (f.base) j["base"] = f_json(*f.base);
  return j;
}

NonlinearitySpec f_from(const Json& j, const std::string& path) {
  Fields r(j, path);
  NonlinearitySpec f;
  if (auto k = r.text("kind")) f.kind = parse_enum(r.at("kind"), *k, kF);
  r.num("p", f.p);
  r.num("a", f.a);
  r.num("shift", f.shift);
  r.opt("L", f.limit_L);
  r.flag("declares_f_star", f.declares_f_star);
  r.flag("declares_f_zero", f.declares_f_zero);
  if (const Json* t = r.get("table")) f.table = table_from(*t, r.at("table"));
  if (const Json* p = r.get("psi")) {
    Fields q(*p, r.at("psi"));
    q.num("mu", f.psi.mu);
    q.num("delta", f.psi.delta);
    q.num("gamma", f.psi.gamma);
    q.num("anchor", f.psi.anchor);
    q.finish();
  }
  r.num("scale", f.scale);
  r.num("threshold", f.threshold);
  if (const Json* b = r.get("base")) f.base = std::make_shared<NonlinearitySpec>(f_from(*b, r.at("base")));
  r.finish();
  return f;
}

// ---- g ----------------------------------------------------------------------

Json g_json(const GradientCoefSpec& g, const DomainSpec& d) {
  Json j;
  j["kind"] = enum_name(g.kind, kG);
  switch (g.kind) {
    case GKind::model_singular:
      j["gamma"] = g.gamma;
      j["delta"] = g.delta;
      j["mu"] = mu_json(g.mu, d);
      break;
    case GKind::constant_over_s: j["coefficient"] = g.coefficient; break;
    case GKind::table:
      j["delta"] = g.delta;
      j["offset"] = g.offset;
      j["mu"] = mu_json(g.mu, d);
      if (!g.table_mu.empty()) j["table_mu"] = table_json(g.table_mu);
      if (!g.table_free.empty()) j["table_free"] = table_json(g.table_free);
      break;
    case GKind::truncated:
      j["gamma"] = g.gamma;
      j["delta"] = g.delta;
      j["threshold"] = g.threshold;
      break;
  }
  put_opt(j, "tau", g.tau);
  put_opt(j, "sigma", g.sigma);
  if (g.declares_nonnegative) j["declares_nonnegative"] = true;
  if (g.declares_g_infinity) j["declares_g_infinity"] = true;
  if (g.declares_monotone_sg) j["declares_monotone_sg"] = true;
  if (!g.majorant.empty()) {
    j["majorant"] = table_json(g.majorant);
    j["majorant_s0"] = g.majorant_s0;
  }
  if (g.base) j["base"] = g_json(*g.base, d);
  return j;
}

GradientCoefSpec g_from(const Json& j, const std::string& path) {
  Fields r(j, path);
  GradientCoefSpec g;
  if (auto k = r.text("kind")) g.kind = parse_enum(r.at("kind"), *k, kG);
  r.num("gamma", g.gamma);
  r.num("delta", g.delta);
  if (const Json* m = r.get("mu")) g.mu = mu_from(*m, r.at("mu"));
  r.num("coefficient", g.coefficient);
  if (const Json* t = r.get("table_mu")) g.table_mu = table_from(*t, r.at("table_mu"));
  if (const Json* t = r.get("table_free")) g.table_free = table_from(*t, r.at("table_free"));
  r.num("offset", g.offset);
  r.num("threshold", g.threshold);
  r.opt("tau", g.tau);
  r.opt("sigma", g.sigma);
  r.flag("declares_nonnegative", g.declares_nonnegative);
  r.flag("declares_g_infinity", g.declares_g_infinity);
  r.flag("declares_monotone_sg", g.declares_monotone_sg);
  if (const Json* t = r.get("majorant")) g.majorant = table_from(*t, r.at("majorant"));
  r.num("majorant_s0", g.majorant_s0);
  if (const Json* b = r.get("base")) g.base = std::make_shared<GradientCoefSpec>(g_from(*b, r.at("base")));
  r.finish();
  return g;
}

}  // namespace

// ---- problem ----------------------------------------------------------------

Json to_json(const ProblemSpec& s) {
  Json j;
  j["domain"] = domain_json(s.domain);
  j["lambda"] = s.lambda;
  j["f"] = f_json(s.f);
  j["g"] = g_json(s.g, s.domain);
  j["t"] = s.t;
  j["sigma_t"] = s.sigma_t;
  j["source"] = source_json(s.source);
  return j;
}

ProblemSpec problem_from_json(const Json& j) {
  Fields r(j, "problem");
  ProblemSpec s;
  if (const Json* d = r.get("domain")) s.domain = domain_from(*d, r.at("domain"));
  r.num("lambda", s.lambda);
  if (const Json* f = r.get("f")) s.f = f_from(*f, r.at("f"));
  if (const Json* g = r.get("g")) s.g = g_from(*g, r.at("g"));
  r.num("t", s.t);
  r.num("sigma_t", s.sigma_t);
  if (const Json* h = r.get("source")) s.source = source_from(*h, r.at("source"));
  r.finish();
  return s;
}

// ---- solver -----------------------------------------------------------------

Json to_json(const SolverConfig& c) {
  Json j;
  j["residual_tol"] = c.residual_tol;
  j["step_tol"] = c.step_tol;
  j["max_newton"] = c.max_newton;
  j["backtrack"] = c.backtrack;
  j["armijo"] = c.armijo;
  j["max_backtracks"] = c.max_backtracks;
  j["eps_pos"] = c.eps_pos;
  j["theta"] = c.theta;
  j["max_fixed_point"] = c.max_fixed_point;
  j["freeze"] = enum_name(c.freeze, kFreeze);
  j["line_search_points"] = c.line_search_points;
  j["max_starts"] = c.max_starts;
  return j;
}

SolverConfig solver_from_json(const Json& j) {
  Fields r(j, "solver");
  SolverConfig c;
  r.num("residual_tol", c.residual_tol);
  r.num("step_tol", c.step_tol);
  r.integer("max_newton", c.max_newton);
  r.num("backtrack", c.backtrack);
  r.num("armijo", c.armijo);
  r.integer("max_backtracks", c.max_backtracks);
  r.num("eps_pos", c.eps_pos);
  r.num("theta", c.theta);
  r.integer("max_fixed_point", c.max_fixed_point);
  if (auto k = r.text("freeze")) c.freeze = parse_enum(r.at("freeze"), *k, kFreeze);
  r.integer("line_search_points", c.line_search_points);
  r.integer("max_starts", c.max_starts);
  r.finish();
  c.validate();
  return c;
}

// ---- results ----------------------------------------------------------------

Json to_json(const TransformedProblem& tp) {
  Json j = to_json(tp.spec);
  const TransformMetadata& m = tp.meta;
  Json t;
  t["name"] = m.name;
  put_opt(t, "mu", m.mu);
  put_opt(t, "delta", m.delta);
  put_opt(t, "gamma", m.gamma);
  put_opt(t, "sigma", m.sigma);
  put_opt(t, "b", m.b);
  put_opt(t, "c", m.c);
  put_opt(t, "p_gamma", m.p_gamma);
  put_opt(t, "threshold", m.threshold);
  put_opt(t, "anchor", m.anchor);
  put_opt(t, "lambda_factor", m.lambda_factor);
  if (m.b_grid_limited) t["b_grid_limited"] = true;
  j["transform"] = t;
  return j;
}

Json to_json(const SolveReport& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["threshold"] = r.threshold;
  j["sup_norm"] = r.sup_norm;
  j["positivity_margin"] = r.positivity_margin;
  j["holder_half"] = r.holder_half;
  j["floor_nodes"] = r.floor_nodes;
  j["diagnostics"] = r.diagnostics;
  return j;
}

Json to_json(const CheckVerdict& v) {
  Json j;
  j["name"] = v.name;
  j["pass"] = v.pass;
  j["precondition_violated"] = v.precondition_violated;
  j["witness_param"] = v.witness_param ? Json(*v.witness_param) : Json(nullptr);
  j["witness_node"] = v.witness_node ? Json(*v.witness_node) : Json(nullptr);
  j["margin"] = v.margin;
  j["detail"] = v.detail;
  return j;
}

Json to_json(const NonexistenceReport& rep) {
  Json j;
  j["degenerate"] = rep.degenerate;
  j["trivial_instance"] = rep.trivial_instance;
  j["max_ih_change"] = rep.max_ih_change;
  j["detail"] = rep.detail;
  Json levels = Json::array();
  for (const auto& l : rep.levels) {
    Json e;
    e["resolution"] = l.resolution;
    e["status"] = to_string(l.status);
    e["iterations"] = l.iterations;
    e["residual"] = l.residual;
    e["integral_h_over_u"] = l.integral_h_over_u;
    e["min_u_outer"] = l.min_u_outer;
    e["diagnostics"] = l.diagnostics;
    levels.push_back(e);
  }
  j["levels"] = levels;
  return j;
}

Json to_json(const EigenPair& ep) {
  Json j;
  j["lambda1"] = ep.lambda1;
  j["iterations"] = ep.iterations;
  j["residual"] = ep.residual;
  return j;
}

// ---- plumbing ---------------------------------------------------------------

void apply_override(Json& doc, std::string_view path, const std::string& value) {
  if (path.empty()) bad("--set", "empty path");
  Json* node = &doc;
  std::string walked;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key(path.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos));
    if (key.empty()) bad(std::string(path), "empty path component");
    if (node->is_null()) *node = Json::object();
    if (!node->is_object()) bad(walked.empty() ? std::string(path) : walked, "not an object");
    walked += (walked.empty() ? "" : ".") + key;
    node = &(*node)[key];
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  Json parsed = Json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? Json(value) : parsed;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace qgrad
