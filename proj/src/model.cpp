#include "qgrad/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qgrad/error.hpp"

namespace qgrad {
namespace {

[[noreturn]] void bad_spec(const std::string& what) { throw Error(ErrorKind::invalid_spec, what); }

bool same_ptr_value(const auto& a, const auto& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

}  // namespace

// ---- domain --------------------------------------------------------------

double DomainSpec::center_distance(Point pt) const noexcept {
  if (radial()) return pt.x;
  return std::hypot(pt.x - 0.5 * width, pt.y - 0.5 * height);
}

void DomainSpec::validate() const {
  if (radial()) {
    if (dimension < 3) throw Error(ErrorKind::invalid_dimension, "radial domains need N >= 3");
    if (!(outer_radius > 0.0) || !std::isfinite(outer_radius)) bad_spec("outer radius must be positive");
    if (kind == DomainKind::radial_annulus && !(inner_radius >= 0.0 && inner_radius < outer_radius)) {
      bad_spec("annulus needs 0 <= a < R");
    }
  } else {
    if (dimension != 2) throw Error(ErrorKind::invalid_dimension, "rectangles are two-dimensional");
    if (!(width > 0.0) || !(height > 0.0)) bad_spec("rectangle sides must be positive");
  }
}

bool InnerRegion::contains(const DomainSpec& domain, Point pt) const noexcept {
  if (domain.radial()) return pt.x >= r_lo && pt.x < r_hi;
  return pt.x >= x_lo && pt.x <= x_hi && pt.y >= y_lo && pt.y <= y_hi;
}

bool InnerRegion::strictly_interior(const DomainSpec& domain) const noexcept {
  if (domain.radial()) {
    const double a = domain.kind == DomainKind::radial_annulus ? domain.inner_radius : 0.0;
    const bool lo_ok = domain.kind == DomainKind::radial_ball ? r_lo >= 0.0 : r_lo > a;
    return lo_ok && r_hi > r_lo && r_hi < domain.outer_radius;
  }
  return 0.0 < x_lo && x_lo < x_hi && x_hi < domain.width && 0.0 < y_lo && y_lo < y_hi &&
         y_hi < domain.height;
}

double MuFieldSpec::operator()(const DomainSpec& domain, Point pt) const {
  switch (kind) {
    case MuKind::constant: return value;
    case MuKind::radial_profile: return profile(domain.center_distance(pt));
    case MuKind::piecewise: return omega.contains(domain, pt) ? inner_value : outer_value;
  }
  return value;
}

void MuFieldSpec::validate(const DomainSpec& domain) const {
  if (kind == MuKind::piecewise && !omega.strictly_interior(domain)) {
    bad_spec("piecewise mu: omega must lie strictly inside the domain");
  }
  if (kind == MuKind::radial_profile) {
    if (profile.empty()) bad_spec("radial mu profile is empty");
    const double far = domain.radial() ? domain.outer_radius
                                       : 0.5 * std::hypot(domain.width, domain.height);
    const double near = domain.kind == DomainKind::radial_annulus ? domain.inner_radius : 0.0;
    if (profile.min_x() > near || profile.max_x() < far) {
      throw Error(ErrorKind::invalid_table, "mu profile does not cover the domain");
    }
  }
}

double SourceSpec::operator()(const DomainSpec& domain, Point pt) const noexcept {
  if (kind == Kind::none) return 0.0;
  const double q = domain.center_distance(pt) / radius;
  if (q >= 1.0) return 0.0;
  return amplitude * std::exp(1.0 - 1.0 / (1.0 - q * q));
}

bool operator==(const NonlinearitySpec& a, const NonlinearitySpec& b) {
  return a.kind == b.kind && a.p == b.p && a.a == b.a && a.shift == b.shift && a.limit_L == b.limit_L &&
         a.declares_f_star == b.declares_f_star && a.declares_f_zero == b.declares_f_zero &&
         a.table == b.table && a.psi == b.psi && a.scale == b.scale && a.threshold == b.threshold &&
         same_ptr_value(a.base, b.base);
}

bool operator==(const GradientCoefSpec& a, const GradientCoefSpec& b) {
  return a.kind == b.kind && a.gamma == b.gamma && a.delta == b.delta && a.mu == b.mu &&
         a.coefficient == b.coefficient && a.table_mu == b.table_mu && a.table_free == b.table_free &&
         a.offset == b.offset && a.threshold == b.threshold && same_ptr_value(a.base, b.base) &&
         a.tau == b.tau && a.sigma == b.sigma && a.declares_nonnegative == b.declares_nonnegative &&
         a.declares_g_infinity == b.declares_g_infinity &&
         a.declares_monotone_sg == b.declares_monotone_sg && a.majorant == b.majorant &&
         a.majorant_s0 == b.majorant_s0;
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
  return a.domain == b.domain && a.lambda == b.lambda && a.f == b.f && a.g == b.g && a.t == b.t &&
         a.sigma_t == b.sigma_t && a.source == b.source;
}

// ---- structural validation -----------------------------------------------

namespace {

void validate_f(const NonlinearitySpec& f) {
  if (!(f.p > 1.0)) bad_spec("f: p must exceed 1");
  switch (f.kind) {
    case FKind::pure_power: break;
    case FKind::shifted_power:
      if (!(f.a >= 1.0)) bad_spec("f: a must be >= 1");
      if (!(f.shift >= 0.0)) bad_spec("f: shift must be >= 0");
      break;
    case FKind::table:
      if (f.table.empty()) bad_spec("f: table variant without samples");
      break;
    case FKind::semilinearized:
    case FKind::truncated:
      if (!f.base) bad_spec("f: derived variant without base");
      validate_f(*f.base);
      if (f.kind == FKind::truncated && !(f.threshold > 0.0)) bad_spec("f: truncation threshold must be positive");
      break;
  }
  if (f.limit_L && !(*f.limit_L > 0.0)) bad_spec("f: L must be positive");
}

void validate_g(const GradientCoefSpec& g, const DomainSpec& domain) {
  if (!(g.gamma > 0.0)) bad_spec("g: gamma must be positive");
  if (!(g.delta >= 0.0)) bad_spec("g: delta must be >= 0");
  switch (g.kind) {
    case GKind::model_singular:
    case GKind::table:
      g.mu.validate(domain);
      if (g.kind == GKind::table && !(g.offset >= 0.0)) bad_spec("g: table offset must be >= 0");
      break;
    case GKind::constant_over_s: break;
    case GKind::truncated:
      if (!g.base) bad_spec("g: truncated variant without base");
      if (!(g.threshold > 0.0)) bad_spec("g: truncation threshold must be positive");
      validate_g(*g.base, domain);
      break;
  }
  if (g.sigma && !(*g.sigma < 1.0)) bad_spec("g: declared sigma must be < 1");
  if (g.tau && g.sigma && !(*g.tau <= *g.sigma)) bad_spec("g: declared tau exceeds sigma");
}

}  // namespace

void ProblemSpec::validate() const {
  domain.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) bad_spec("lambda must be finite and >= 0");
  if (!(t >= 0.0) || !std::isfinite(t)) bad_spec("t must be finite and >= 0");
  if (!(sigma_t > 0.0 && sigma_t < 1.0)) bad_spec("sigma_t must lie in (0, 1)");
  validate_f(f);
  validate_g(g, domain);
  if (t > 0.0 && g.sigma && std::abs(*g.sigma - sigma_t) > 1e-12) {
    bad_spec("sigma_t must equal the declared sigma of g when t > 0");
  }
  if (source.kind == SourceSpec::Kind::bump && !(source.radius > 0.0)) bad_spec("source radius must be positive");
}

// ---- thresholds ----------------------------------------------------------

double two_star(int N) {
  if (N < 3) throw Error(ErrorKind::invalid_dimension, "2* needs N >= 3");
  return 2.0 * N / (N - 2.0);
}

Thresholds thresholds(int N, double p) {
  if (!(p > 1.0)) bad_spec("thresholds need p > 1");
  Thresholds th;
  th.two_star = two_star(N);
  th.sigma1 = (th.two_star - 1.0 - p) / (th.two_star - 2.0);
  th.sigma2 = (N - (N - 2.0) * p) / 2.0;
  th.sigma3 = (N + 1.0 - (N - 1.0) * p) / 2.0;
  return th;
}

// ---- point evaluation ----------------------------------------------------

double eval_f(const NonlinearitySpec& f, double s) {
  switch (f.kind) {
    case FKind::pure_power: return s > 0.0 ? std::pow(s, f.p) : 0.0;
    case FKind::shifted_power: return f.a * std::pow(std::max(s, 0.0) + f.shift, f.p);
    case FKind::table: return f.table(s);
    case FKind::semilinearized: {
      if (s <= 0.0) return f.scale * eval_f(*f.base, 0.0);
      const double r = psi_inverse(f.psi, s);
      return psi_derivative(f.psi, r) * f.scale * eval_f(*f.base, r);
    }
    case FKind::truncated: {
      if (s <= f.threshold) return eval_f(*f.base, s);
      return eval_f(*f.base, f.threshold) * std::pow(s / f.threshold, f.base->p);
    }
  }
  return 0.0;
}

double eval_df(const NonlinearitySpec& f, double s) {
  switch (f.kind) {
    case FKind::pure_power: return s > 0.0 ? f.p * std::pow(s, f.p - 1.0) : 0.0;
    case FKind::shifted_power: return f.a * f.p * std::pow(std::max(s, 0.0) + f.shift, f.p - 1.0);
    case FKind::table: return f.table.derivative(s);
    case FKind::semilinearized: {
      // d/dt [psi'(r) f(r)] with r = psi^{-1}(t): (f'(r) - k(r) f(r)).
      const double r = s > 0.0 ? psi_inverse(f.psi, s) : 0.0;
      return f.scale * (eval_df(*f.base, r) - psi_kernel(f.psi, r) * eval_f(*f.base, r));
    }
    case FKind::truncated: {
      if (s <= f.threshold) return eval_df(*f.base, s);
      const double q = f.base->p;
      return eval_f(*f.base, f.threshold) * q * std::pow(s, q - 1.0) / std::pow(f.threshold, q);
    }
  }
  return 0.0;
}

double eval_g(const GradientCoefSpec& g, const DomainSpec& domain, Point x, double s) {
  switch (g.kind) {
    case GKind::model_singular: {
      const double mu = g.mu(domain, x);
      if (mu == 0.0) return 0.0;
      const double base = s + g.delta;
      if (!(base > 0.0)) throw Error(ErrorKind::domain_error, "singular g evaluated at s + delta <= 0");
      return mu / std::pow(base, g.gamma);
    }
    case GKind::constant_over_s:
      if (g.coefficient == 0.0) return 0.0;
      if (!(s > 0.0)) throw Error(ErrorKind::domain_error, "sigma/s evaluated at s <= 0");
      return g.coefficient / s;
    case GKind::table: {
      const double den = s + g.offset;
      if (!(den > 0.0)) throw Error(ErrorKind::domain_error, "table g evaluated at s + offset <= 0");
      double num = 0.0;
      if (!g.table_mu.empty()) num += g.mu(domain, x) * g.table_mu(s);
      if (!g.table_free.empty()) num += g.table_free(s);
      return num / den;
    }
    case GKind::truncated:
      if (s <= g.threshold) return eval_g(*g.base, domain, x, s);
      return g.threshold * eval_g(*g.base, domain, x, g.threshold) / s;
  }
  return 0.0;
}

double eval_dg(const GradientCoefSpec& g, const DomainSpec& domain, Point x, double s) {
  switch (g.kind) {
    case GKind::model_singular: {
      const double mu = g.mu(domain, x);
      if (mu == 0.0) return 0.0;
      const double base = s + g.delta;
      if (!(base > 0.0)) throw Error(ErrorKind::domain_error, "singular g evaluated at s + delta <= 0");
      return -g.gamma * mu / std::pow(base, g.gamma + 1.0);
    }
    case GKind::constant_over_s:
      if (g.coefficient == 0.0) return 0.0;
      if (!(s > 0.0)) throw Error(ErrorKind::domain_error, "sigma/s evaluated at s <= 0");
      return -g.coefficient / (s * s);
    case GKind::table: {
      const double den = s + g.offset;
      if (!(den > 0.0)) throw Error(ErrorKind::domain_error, "table g evaluated at s + offset <= 0");
      double num = 0.0;
      double dnum = 0.0;
      if (!g.table_mu.empty()) {
        const double mu = g.mu(domain, x);
        num += mu * g.table_mu(s);
        dnum += mu * g.table_mu.derivative(s);
      }
      if (!g.table_free.empty()) {
        num += g.table_free(s);
        dnum += g.table_free.derivative(s);
      }
      return dnum / den - num / (den * den);
    }
    case GKind::truncated:
      if (s <= g.threshold) return eval_dg(*g.base, domain, x, s);
      return -g.threshold * eval_g(*g.base, domain, x, g.threshold) / (s * s);
  }
  return 0.0;
}

double eval_sg(const GradientCoefSpec& g, const DomainSpec& domain, Point x, double s) {
  if (g.kind == GKind::model_singular && g.gamma == 1.0) return g.mu(domain, x);
  if (g.kind == GKind::constant_over_s && g.delta == 0.0) return g.coefficient;
  return (s + g.delta) * eval_g(g, domain, x, s);
}

double eval_f(const ProblemSpec& spec, double s) { return eval_f(spec.f, s); }
double eval_g(const ProblemSpec& spec, Point x, double s) { return eval_g(spec.g, spec.domain, x, s); }
double eval_sg(const ProblemSpec& spec, Point x, double s) { return eval_sg(spec.g, spec.domain, x, s); }

SgSplit split_sg(const GradientCoefSpec& g, double s) {
  switch (g.kind) {
    case GKind::model_singular: return {std::pow(s + g.delta, 1.0 - g.gamma), 0.0};
    case GKind::constant_over_s: return {0.0, g.coefficient * (s + g.delta) / s};
    case GKind::table: {
      const double w = (s + g.delta) / (s + g.offset);
      return {g.table_mu.empty() ? 0.0 : w * g.table_mu(s), g.table_free.empty() ? 0.0 : w * g.table_free(s)};
    }
    case GKind::truncated: {
      const GradientCoefSpec& b = *g.base;
      if (s <= g.threshold) {
        SgSplit in = split_sg(b, s);
        const double w = (s + g.delta) / (s + b.delta);
        return {w * in.alpha, w * in.beta};
      }
      SgSplit at = split_sg(b, g.threshold);
      const double w = (s + g.delta) / s * g.threshold / (g.threshold + b.delta);
      return {w * at.alpha, w * at.beta};
    }
  }
  return {};
}

const MuFieldSpec& split_mu(const GradientCoefSpec& g) {
  if (g.kind == GKind::truncated) return split_mu(*g.base);
  return g.mu;
}

// ---- sampled condition checks --------------------------------------------

bool ValidationReport::ok() const noexcept {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.satisfied; });
}

const ConditionResult* ValidationReport::find(const std::string& name) const noexcept {
  for (const auto& c : conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<double> condition_sample_grid() {
  std::vector<double> s;
  s.reserve(161);
  for (int k = 0; k <= 160; ++k) s.push_back(std::pow(10.0, -8.0 + k / 10.0));
  return s;
}

std::vector<Point> domain_sample_points(const DomainSpec& domain) {
  std::vector<Point> pts;
  if (domain.radial()) {
    const double a = domain.kind == DomainKind::radial_annulus ? domain.inner_radius : 0.0;
    for (int i = 0; i <= 64; ++i) pts.push_back({a + (domain.outer_radius - a) * i / 64.0, 0.0});
  } else {
    for (int j = 0; j <= 16; ++j) {
      for (int i = 0; i <= 16; ++i) pts.push_back({domain.width * i / 16.0, domain.height * j / 16.0});
    }
  }
  return pts;
}

namespace {

// Restricts the s-grid to where a table-backed function is defined.
bool in_support(const NonlinearitySpec& f, double s) {
  switch (f.kind) {
    case FKind::table: return s >= f.table.min_x() && s <= f.table.max_x();
    case FKind::semilinearized:
      return s < psi_supremum(f.psi) && in_support(*f.base, std::min(s, 1e300));
    case FKind::truncated: return in_support(*f.base, std::min(s, f.threshold));
    default: return true;
  }
}

bool in_support(const GradientCoefSpec& g, double s) {
  auto covers = [s](const MonotoneTable& t) { return t.empty() || (s >= t.min_x() && s <= t.max_x()); };
  switch (g.kind) {
    case GKind::table: return covers(g.table_mu) && covers(g.table_free);
    case GKind::truncated: return in_support(*g.base, std::min(s, g.threshold));
    default: return true;
  }
}

std::string fmt_witness(double s) {
  std::ostringstream os;
  os.precision(6);
  os << "violated at s = " << s;
  return os.str();
}

ConditionResult check_f_star(const ProblemSpec& spec, const std::vector<double>& grid) {
  ConditionResult r{"f_star", true, std::nullopt, std::nullopt, std::numeric_limits<double>::infinity(), ""};
  const double p = spec.f.p;
  const double a = spec.f.a;
  const double delta = spec.g.delta;
  for (double s : grid) {
    if (!in_support(spec.f, s)) continue;
    const double fs = eval_f(spec.f, s);
    const double lo = std::pow(s, p);
    const double hi = a * std::pow(s + delta, p);
    // Relative slack of the tighter side.
    const double slack = std::min((fs - lo) / lo, (hi - fs) / hi);
    r.margin = std::min(r.margin, slack);
    if (r.satisfied && slack < -1e-12) {
      r.satisfied = false;
      r.witness_s = s;
      r.detail = fmt_witness(s) + (fs < lo ? " (f below s^p)" : " (f above a(s+delta)^p)");
    }
  }
  return r;
}

ConditionResult check_f_zero(const ProblemSpec& spec, const std::vector<double>& grid) {
  ConditionResult r{"f_zero", true, std::nullopt, std::nullopt, 0.0, ""};
  if (!in_support(spec.f, 0.0) || eval_f(spec.f, 0.0) != 0.0) {
    r.satisfied = false;
    r.witness_s = 0.0;
    r.detail = "f(0) != 0";
    r.margin = -1.0;
    return r;
  }
  // f(s)/s must shrink toward 0 over the first two decades.
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 20; k-- > 0;) {
    const double s = grid[k];
    const double q = eval_f(spec.f, s) / s;
    if (q > prev * (1.0 + 1e-12)) {
      r.satisfied = false;
      r.witness_s = s;
      r.detail = fmt_witness(s) + " (f(s)/s not decreasing toward 0)";
      break;
    }
    prev = q;
  }
  r.margin = -eval_f(spec.f, grid.front()) / grid.front();
  return r;
}

ConditionResult check_f_infinity(const ProblemSpec& spec, const std::vector<double>& grid) {
  ConditionResult r{"f_infinity", true, std::nullopt, std::nullopt, 0.0, ""};
  const double L = *spec.f.limit_L;
  double s = grid.back();
  while (s > 1.0 && !in_support(spec.f, s)) s /= 10.0;
  const double ratio = eval_f(spec.f, s) / std::pow(s, spec.f.p);
  const double dev = std::abs(ratio / L - 1.0);
  r.margin = 1e-3 - dev;
  if (dev > 1e-3) {
    r.satisfied = false;
    r.witness_s = s;
    r.detail = fmt_witness(s) + " (f(s)/s^p far from L)";
  }
  return r;
}

}  // namespace

ValidationReport validate_spec(const ProblemSpec& spec) {
  spec.validate();
  const auto grid = condition_sample_grid();
  const auto xs = domain_sample_points(spec.domain);
  ValidationReport rep;

  if (spec.f.declares_f_star) rep.conditions.push_back(check_f_star(spec, grid));
  if (spec.f.declares_f_zero) rep.conditions.push_back(check_f_zero(spec, grid));
  if (spec.f.limit_L) rep.conditions.push_back(check_f_infinity(spec, grid));

  const GradientCoefSpec& g = spec.g;
  if (g.tau || g.sigma) {
    ConditionResult r{"g_star", true, std::nullopt, std::nullopt, std::numeric_limits<double>::infinity(), ""};
    const double tau = g.tau.value_or(-std::numeric_limits<double>::infinity());
    const double sigma = g.sigma.value_or(std::numeric_limits<double>::infinity());
    if (g.tau && g.sigma && !(2.0 * sigma - 1.0 < tau && tau <= sigma && sigma < 1.0)) {
      r.satisfied = false;
      r.detail = "declared bounds violate 2 sigma - 1 < tau <= sigma < 1";
      r.margin = std::min(tau - (2.0 * sigma - 1.0), 1.0 - sigma);
    }
    for (const Point& x : xs) {
      for (double s : grid) {
        if (!in_support(g, s)) continue;
        const double v = eval_sg(g, spec.domain, x, s);
        const double slack = std::min(v - tau, sigma - v);
        r.margin = std::min(r.margin, slack);
        if (r.satisfied && slack < -1e-12) {
          r.satisfied = false;
          r.witness_x = x;
          r.witness_s = s;
          r.detail = fmt_witness(s) + " ((s+delta) g outside [tau, sigma])";
        }
      }
    }
    rep.conditions.push_back(r);
  }

  if (g.declares_nonnegative) {
    ConditionResult r{"g_nonnegative", true, std::nullopt, std::nullopt, std::numeric_limits<double>::infinity(), ""};
    for (const Point& x : xs) {
      for (double s : grid) {
        if (!in_support(g, s)) continue;
        const double v = eval_g(g, spec.domain, x, s);
        r.margin = std::min(r.margin, v);
        if (r.satisfied && v < 0.0) {
          r.satisfied = false;
          r.witness_x = x;
          r.witness_s = s;
          r.detail = fmt_witness(s) + " (g < 0)";
        }
      }
    }
    rep.conditions.push_back(r);
  }

  if (g.declares_g_infinity) {
    ConditionResult r{"g_infinity", true, std::nullopt, std::nullopt, std::numeric_limits<double>::infinity(), ""};
    if (!spec.domain.radial()) {
      r.satisfied = false;
      r.detail = "threshold needs N >= 3";
      r.margin = -1.0;
    } else {
      const double s1 = thresholds(spec.domain.dimension, spec.f.p).sigma1;
      double s_hi = grid.back();
      while (s_hi > 1.0 && !in_support(g, s_hi)) s_hi /= 10.0;
      for (const Point& x : xs) {
        const double lim = s_hi * eval_g(g, spec.domain, x, s_hi);
        const double prev = (s_hi / 10.0) * eval_g(g, spec.domain, x, s_hi / 10.0);
        const double slack = s1 - lim;
        r.margin = std::min(r.margin, slack);
        if (r.satisfied && (slack <= 0.0 || std::abs(lim - prev) > 1e-3)) {
          r.satisfied = false;
          r.witness_x = x;
          r.witness_s = s_hi;
          r.detail = slack <= 0.0 ? "limit of s g reaches (2*-1-p)/(2*-2)" : "s g has no limit on the grid";
        }
      }
    }
    rep.conditions.push_back(r);
  }

  if (!g.majorant.empty()) {
    ConditionResult r{"G_majorant", true, std::nullopt, std::nullopt, std::numeric_limits<double>::infinity(), ""};
    for (const Point& x : xs) {
      for (double s : grid) {
        if (s >= g.majorant_s0 || s < g.majorant.min_x() || s > g.majorant.max_x() || !in_support(g, s)) continue;
        const double v = eval_g(g, spec.domain, x, s);
        const double G = g.majorant(s);
        const double slack = std::min(v, G - v);
        r.margin = std::min(r.margin, slack);
        if (r.satisfied && slack < 0.0) {
          r.satisfied = false;
          r.witness_x = x;
          r.witness_s = s;
          r.detail = fmt_witness(s) + " (0 <= g <= G fails)";
        }
      }
    }
    rep.conditions.push_back(r);
  }

  if (g.declares_monotone_sg) {
    ConditionResult r{"sg_nondecreasing", true, std::nullopt, std::nullopt, std::numeric_limits<double>::infinity(), ""};
    for (const Point& x : xs) {
      double prev = -std::numeric_limits<double>::infinity();
      for (double s : grid) {
        if (!in_support(g, s)) continue;
        const double v = s * eval_g(g, spec.domain, x, s);
        if (std::isfinite(prev)) r.margin = std::min(r.margin, v - prev);
        if (r.satisfied && v < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
          r.satisfied = false;
          r.witness_x = x;
          r.witness_s = s;
          r.detail = fmt_witness(s) + " (s g decreases)";
        }
        prev = v;
      }
    }
    rep.conditions.push_back(r);
  }

  for (auto& c : rep.conditions) {
    if (!std::isfinite(c.margin)) c.margin = 0.0;
  }
  return rep;
}

}  // namespace qgrad
