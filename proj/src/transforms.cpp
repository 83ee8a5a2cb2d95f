#include "qgrad/transforms.hpp"

#include <cmath>
#include <limits>

#include "qgrad/error.hpp"
#include "qgrad/psi.hpp"
#include "qgrad/table.hpp"

namespace qgrad {
namespace {

[[noreturn]] void unsupported(const std::string& what) { throw Error(ErrorKind::unsupported_transform, what); }

DiscreteField map_nodes(const DiscreteField& u, const std::function<double(double)>& fn) {
  DiscreteField out = u;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = is_boundary(u.mesh(), static_cast<int>(i)) && u[i] == 0.0 ? fn(0.0) : fn(u[i]);
  }
  return out;
}

double identity(double s) { return s; }

}  // namespace

DiscreteField TransformedProblem::map_forward(const DiscreteField& u) const { return map_nodes(u, forward); }
DiscreteField TransformedProblem::map_inverse(const DiscreteField& v) const { return map_nodes(v, inverse); }

// ---- psi -----------------------------------------------------------------

TransformedProblem semilinearize(const ProblemSpec& spec) {
  spec.validate();
  const GradientCoefSpec& g = spec.g;
  if (g.kind != GKind::model_singular) unsupported("semilinearize needs a model-singular g");
  if (!g.mu.is_constant()) unsupported("semilinearize needs a constant mu: a variable mu(x) leaves a gradient term");
  if (spec.t != 0.0) unsupported("semilinearize needs t = 0");
  if (spec.source.kind != SourceSpec::Kind::none) unsupported("semilinearize does not map a source term");

  TransformedProblem tp;
  tp.meta.name = "psi";
  tp.meta.mu = g.mu.value;
  tp.meta.delta = g.delta;
  tp.meta.gamma = g.gamma;
  if (g.mu.value == 0.0) {
    tp.spec = spec;
    tp.forward = identity;
    tp.inverse = identity;
    tp.meta.anchor = 0.0;
    return tp;
  }
  PsiParams psi{g.mu.value, g.delta, g.gamma, 0.0};
  if (!(g.delta > 0.0 || g.gamma < 1.0)) psi.anchor = 1.0;
  tp.meta.anchor = psi.anchor;
  // Probe the domain errors up front.
  (void)psi_forward(psi, 1.0);

  auto base = std::make_shared<NonlinearitySpec>(spec.f);
  NonlinearitySpec f;
  f.kind = FKind::semilinearized;
  f.psi = psi;
  f.scale = spec.lambda;
  f.base = base;
  f.p = (g.gamma == 1.0 && g.mu.value < 1.0) ? (spec.f.p - g.mu.value) / (1.0 - g.mu.value) : spec.f.p;
  f.declares_f_zero = spec.f.declares_f_zero;

  tp.spec = spec;
  tp.spec.lambda = 1.0;
  tp.spec.f = f;
  tp.spec.g = GradientCoefSpec{};
  tp.spec.g.gamma = g.gamma;
  tp.spec.g.delta = g.delta;
  tp.forward = [psi](double s) { return psi_forward(psi, s); };
  tp.inverse = [psi](double y) { return psi_inverse(psi, y); };
  return tp;
}

PowerTransformDefect power_transform_check(const DiscreteField& u, double mu, double lambda, double p) {
  if (!(mu < 1.0)) throw Error(ErrorKind::invalid_spec, "power transform needs mu < 1");
  if (!(p > 1.0) || !(lambda > 0.0)) throw Error(ErrorKind::invalid_spec, "power transform needs p > 1, lambda > 0");
  PowerTransformDefect out;
  out.c = std::pow((1.0 - mu) * lambda, (1.0 - mu) / (p - 1.0));
  out.exponent = (p - mu) / (1.0 - mu);
  out.v = u;
  for (std::size_t i = 0; i < u.size(); ++i) out.v[i] = u[i] > 0.0 ? out.c * std::pow(u[i], 1.0 - mu) : 0.0;
  const DiscreteField lap = laplacian(out.v);
  const int n = num_unknowns(u.mesh());
  for (int k = 0; k < n; ++k) {
    const int node = unknown_node(u.mesh(), k);
    out.defect = std::max(out.defect, std::abs(-lap[node] - std::pow(out.v[node], out.exponent)));
  }
  return out;
}

// ---- gamma ---------------------------------------------------------------

TransformedProblem gamma_transform(const ProblemSpec& spec, double gamma, std::optional<double> b,
                                   const GammaTableOptions& opt) {
  if (!(gamma > 1.0)) unsupported("gamma transform needs gamma > 1");
  spec.validate();
  if (spec.t != 0.0) unsupported("gamma transform needs t = 0");
  if (spec.source.kind != SourceSpec::Kind::none) unsupported("gamma transform does not map a source term");
  const double delta = spec.g.delta;
  const double dg = std::pow(delta, gamma);
  const double p = spec.f.p;
  const double pg = (gamma - 1.0 + p) / gamma;

  // u = (s + delta^gamma)^{1/gamma} - delta without cancellation.
  auto back = [=](double s) {
    if (delta == 0.0) return std::pow(s, 1.0 / gamma);
    return delta * std::expm1(std::log1p(s / dg) / gamma);
  };
  auto fwd = [=](double u) {
    if (delta == 0.0) return std::pow(u, gamma);
    return dg * std::expm1(gamma * std::log1p(u / delta));
  };
  auto f_unscaled = [&](double s) { return std::pow(s + dg, (gamma - 1.0) / gamma) * eval_f(spec.f, back(s)); };

  TransformedProblem tp;
  tp.meta.name = "gamma";
  tp.meta.gamma = gamma;
  tp.meta.delta = delta;
  tp.meta.p_gamma = pg;
  if (spec.g.sigma) tp.meta.sigma = *spec.g.sigma;

  double bb;
  if (b) {
    if (!(*b > 0.0)) throw Error(ErrorKind::invalid_spec, "b must be positive");
    bb = *b;
  } else {
    double sup = 0.0;
    for (double s : condition_sample_grid()) {
      const double fu = f_unscaled(s);
      if (fu > 0.0) sup = std::max(sup, std::pow(s, pg) / fu);
    }
    bb = 1.01 * sup;
    tp.meta.b_grid_limited = delta > 0.0;
  }
  tp.meta.b = bb;
  tp.meta.lambda_factor = gamma / bb;

  std::vector<double> xs;
  const double decades = std::log10(opt.s_max / opt.s_min);
  const int n = static_cast<int>(std::ceil(decades * opt.per_decade));
  xs.reserve(n + 2);
  xs.push_back(0.0);
  for (int k = 0; k <= n; ++k) xs.push_back(opt.s_min * std::pow(opt.s_max / opt.s_min, static_cast<double>(k) / n));

  std::vector<double> fy(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) fy[k] = bb * f_unscaled(xs[k]);

  // (s + delta^gamma) g_gamma = (mu alpha(u) + beta(u) + gamma - 1) / gamma.
  bool finite_at_zero = true;
  std::vector<double> ay(xs.size()), by(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double u = back(xs[k]);
    SgSplit sp;
    try {
      sp = split_sg(spec.g, u);
    } catch (const Error&) {
      sp = {std::numeric_limits<double>::infinity(), 0.0};
    }
    ay[k] = sp.alpha / gamma;
    by[k] = (sp.beta + gamma - 1.0) / gamma;
    if (k == 0 && !(std::isfinite(ay[0]) && std::isfinite(by[0]))) finite_at_zero = false;
  }
  std::vector<double> gx = xs;
  if (!finite_at_zero) {
    gx.erase(gx.begin());
    ay.erase(ay.begin());
    by.erase(by.begin());
  }

  NonlinearitySpec f;
  f.kind = FKind::table;
  f.p = pg;
  f.a = spec.f.a * bb * gamma;
  if (spec.f.limit_L) f.limit_L = bb * *spec.f.limit_L;
  f.declares_f_zero = spec.f.declares_f_zero;
  f.table = MonotoneTable(xs, fy);

  GradientCoefSpec g;
  g.kind = GKind::table;
  g.gamma = 1.0;
  g.delta = dg;
  g.offset = dg;
  g.mu = split_mu(spec.g);
  bool any_mu = false;
  for (double v : ay) any_mu = any_mu || v != 0.0;
  if (any_mu) g.table_mu = MonotoneTable(gx, ay);
  g.table_free = MonotoneTable(gx, by);
  if (spec.g.tau) g.tau = (*spec.g.tau + gamma - 1.0) / gamma;
  if (spec.g.sigma) g.sigma = (*spec.g.sigma + gamma - 1.0) / gamma;

  tp.spec = spec;
  tp.spec.f = std::move(f);
  tp.spec.g = std::move(g);
  tp.spec.lambda = spec.lambda * gamma / bb;
  if (spec.g.sigma) tp.spec.sigma_t = *tp.spec.g.sigma;
  tp.forward = fwd;
  tp.inverse = back;
  return tp;
}

// ---- truncations ---------------------------------------------------------

namespace {

GradientCoefSpec truncate_g(const GradientCoefSpec& g, double at) {
  if (g.kind == GKind::constant_over_s) return g;
  GradientCoefSpec out;
  out.kind = GKind::truncated;
  out.gamma = g.gamma;
  out.delta = g.delta;
  out.threshold = at;
  out.base = std::make_shared<GradientCoefSpec>(g);
  out.tau = g.tau;
  out.sigma = g.sigma;
  out.declares_nonnegative = g.declares_nonnegative;
  return out;
}

}  // namespace

TransformedProblem truncate_at_s0(const ProblemSpec& spec, double s0) {
  if (!(s0 > 0.0 && s0 < 1.0)) throw Error(ErrorKind::invalid_spec, "s0 must lie in (0, 1)");
  TransformedProblem tp;
  tp.meta.name = "truncate-s0";
  tp.meta.threshold = s0;
  tp.spec = spec;
  tp.spec.g = truncate_g(spec.g, s0);
  if (spec.f.kind != FKind::pure_power) {
    NonlinearitySpec f;
    f.kind = FKind::truncated;
    f.p = spec.f.p;
    f.a = spec.f.a;
    f.threshold = s0;
    f.base = std::make_shared<NonlinearitySpec>(spec.f);
    f.limit_L = eval_f(spec.f, s0) / std::pow(s0, spec.f.p);
    tp.spec.f = f;
  }
  tp.forward = identity;
  tp.inverse = identity;
  return tp;
}

TransformedProblem truncate_at_delta(const ProblemSpec& spec, double delta_t) {
  if (!(delta_t > 0.0)) throw Error(ErrorKind::invalid_spec, "truncation level must be positive");
  TransformedProblem tp;
  tp.meta.name = "truncate-delta";
  tp.meta.threshold = delta_t;
  tp.spec = spec;
  tp.spec.g = truncate_g(spec.g, delta_t);
  tp.forward = identity;
  tp.inverse = identity;
  return tp;
}

// ---- blow-up -------------------------------------------------------------

BlowupProfile blowup_rescale(const DiscreteField& u, double p, double window, int samples) {
  if (!(p > 1.0) || !(window > 0.0) || samples < 2) throw Error(ErrorKind::invalid_spec, "bad blow-up parameters");
  BlowupProfile out;
  const Mesh& mesh = u.mesh();
  double umax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > umax) {
      umax = u[i];
      out.argmax = static_cast<int>(i);
    }
  }
  if (!(umax > 0.0)) throw Error(ErrorKind::domain_error, "blow-up needs a positive maximum");
  out.eta = std::pow(umax, -(p - 1.0) / 2.0);
  const double amp = std::pow(out.eta, 2.0 / (p - 1.0));

  // 1-D line through the maximum.
  std::vector<double> xs, vs;
  double x0;
  bool reflect = false;
  if (const auto* m = std::get_if<RadialMesh>(&mesh)) {
    for (int i = 0; i <= m->M; ++i) {
      xs.push_back(m->r(i));
      vs.push_back(u[i]);
    }
    x0 = m->r(out.argmax);
    reflect = m->kind == RadialKind::ball;
    const int a = out.argmax;
    if (a == m->M || a == m->M - 1 || (m->kind == RadialKind::annulus && a <= 1)) out.clipped = true;
  } else {
    const auto& g = std::get<Grid2D>(mesh);
    const int j = out.argmax / (g.nx + 2);
    const int i0 = out.argmax % (g.nx + 2);
    for (int i = 0; i <= g.nx + 1; ++i) {
      xs.push_back(node_point(mesh, g.node(i, j)).x);
      vs.push_back(u[g.node(i, j)]);
    }
    x0 = xs[i0];
    if (i0 <= 1 || i0 >= g.nx || j <= 1 || j >= g.ny) out.clipped = true;
  }
  const MonotoneTable line(xs, vs);
  for (int k = 0; k < samples; ++k) {
    const double y = -window + 2.0 * window * k / (samples - 1);
    double x = x0 + out.eta * y;
    if (reflect && x < 0.0) x = -x;
    if (x < xs.front() || x > xs.back()) {
      out.clipped = true;
      x = std::clamp(x, xs.front(), xs.back());
    }
    out.y.push_back(y);
    out.values.push_back(y == 0.0 ? 1.0 : amp * line(x));
  }
  return out;
}

}  // namespace qgrad
