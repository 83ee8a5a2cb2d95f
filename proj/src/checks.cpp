#include "qgrad/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "qgrad/error.hpp"

namespace qgrad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int_a^b f(r) dr for 0 < a, b, in the variable y = ln r with panels of
// ratio at most e^0.03.
template <class F>
double log_integral(F&& f, double a, double b) {
  if (a == b) return 0.0;
  const double la = std::log(a);
  const double lb = std::log(b);
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(lb - la) / 0.03)));
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double y0 = la + (lb - la) * k / n;
    const double y1 = la + (lb - la) * (k + 1) / n;
    total += boost::math::quadrature::gauss<double, 8>::integrate(
        [&](double y) {
          const double r = std::exp(y);
          return f(r) * r;
        },
        y0, y1);
  }
  return total;
}

double omega_sphere(int N) { return 2.0 * std::pow(M_PI, N / 2.0) / boost::math::tgamma(N / 2.0); }

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

// ---- psi-decreasing ------------------------------------------------------

CheckVerdict check_psi_decreasing(const GradientCoefSpec& g, const DomainSpec& domain, Point x0, double p, int N,
                                  const PsiCheckOptions& opt) {
  CheckVerdict v;
  v.name = "psi-decreasing";
  if (!(opt.L > 0.0) || !(opt.anchor > 0.0) || !(opt.s_min > 0.0) || !(opt.s_max > opt.s_min) || opt.points < 2) {
    throw Error(ErrorKind::invalid_spec, "psi check options out of range");
  }
  const double crit = two_star(N) - 1.0;
  auto gx = [&](double r) { return eval_g(g, domain, x0, r); };
  const double L = opt.L;

  const int P = opt.points;
  std::vector<double> s(P), tau(P), I(P), psi(P);
  for (int k = 0; k < P; ++k) {
    s[k] = opt.s_min * std::pow(opt.s_max / opt.s_min, static_cast<double>(k) / (P - 1));
    tau[k] = s[k] / L;
  }

  // Below s_lo the inner integral is extended by s g(s) ~ kappa.
  const double s_lo = opt.s_min * 1e-10;
  const double tau_lo = s_lo / L;
  const double I_lo = log_integral(gx, opt.anchor, tau_lo);
  const double kappa = tau_lo * gx(tau_lo);
  if (!(kappa < 1.0)) {
    throw Error(ErrorKind::domain_error, "psi diverges at 0: s g(s) >= 1 near s = 0");
  }
  double acc = std::exp(-I_lo) * s_lo / (1.0 - kappa);
  // Cumulative psi from s_lo up to s_min over log-spaced steps.
  auto psi_step = [&](double a, double b, double I_a) {
    return log_integral([&](double t) { return std::exp(-(I_a + log_integral(gx, a / L, t / L))); }, a, b);
  };
  {
    double a = s_lo;
    double Ia = I_lo;
    const int steps = 400;
    for (int k = 1; k <= steps; ++k) {
      const double b = s_lo * std::pow(opt.s_min / s_lo, static_cast<double>(k) / steps);
      acc += psi_step(a, b, Ia);
      Ia += log_integral(gx, a / L, b / L);
      a = b;
    }
    I[0] = Ia;
  }
  psi[0] = acc;
  for (int k = 1; k < P; ++k) {
    psi[k] = psi[k - 1] + psi_step(s[k - 1], s[k], I[k - 1]);
    I[k] = I[k - 1] + log_integral(gx, tau[k - 1], tau[k]);
  }

  double margin = kInf;
  int first_bad = -1;
  std::vector<double> logH(P);
  for (int k = 0; k < P; ++k) {
    const double dpsi = std::exp(-I[k]);
    const double lhs = (p - tau[k] * gx(tau[k])) * psi[k];
    const double rhs = crit * s[k] * dpsi;
    const double m = (rhs - lhs) / std::abs(rhs);
    margin = std::min(margin, m);
    if (!(lhs < rhs) && first_bad < 0) first_bad = k;
    logH[k] = -I[k] + p * std::log(s[k]) - crit * std::log(psi[k]);
  }
  int first_rise = -1;
  for (int k = 0; k + 1 < P; ++k) {
    if (!(logH[k + 1] < logH[k])) {
      first_rise = k + 1;
      break;
    }
  }
  v.pass = first_bad < 0;
  v.margin = margin;
  if (!v.pass) {
    v.witness_param = s[first_bad];
    v.detail = fmt("(p - s g) psi < (2*-1) s psi' fails at s = %.6g", s[first_bad]);
  } else {
    v.detail = "H decreasing on the grid";
  }
  if ((first_rise < 0) != v.pass) {
    v.detail += fmt("; sampled H monotonicity disagrees (first rise at index %.0f)", first_rise);
  }
  return v;
}

// ---- comparison ----------------------------------------------------------

DiscreteField gradient_operator(const GradientCoefSpec& g, const DomainSpec& domain, const DiscreteField& w) {
  ProblemSpec spec;
  spec.domain = domain;
  spec.lambda = 0.0;
  spec.g = g;
  return residual_quasilinear(spec, w);
}

CheckVerdict comparison_check(const DiscreteField& u, const DiscreteField& v, const std::vector<double>& h,
                              const GradientCoefSpec& g, const DomainSpec& domain) {
  require_same_mesh(u, v);
  if (h.size() != u.size()) throw Error(ErrorKind::mesh_mismatch, "h does not match the mesh");
  CheckVerdict out;
  out.name = "comparison";
  const Mesh& mesh = u.mesh();

  auto violate = [&](const std::string& why, std::optional<int> node) {
    out.pass = false;
    out.precondition_violated = true;
    out.witness_node = node;
    out.detail = "precondition violated: " + why;
    return out;
  };

  // Structural: s g nondecreasing in s and bounded by some sigma < 1.
  double sg_max = -kInf;
  for (const Point& x : domain_sample_points(domain)) {
    double prev = -kInf;
    for (double s : condition_sample_grid()) {
      const double q = s * eval_g(g, domain, x, s);
      if (q < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
        out.witness_param = s;
        return violate("s g(x,s) decreases", std::nullopt);
      }
      prev = q;
      sg_max = std::max(sg_max, q);
    }
  }
  if (!(sg_max < 1.0)) return violate("s g(x,s) reaches 1", std::nullopt);

  for (std::size_t i = 0; i < u.size(); ++i) {
    if (is_boundary(mesh, static_cast<int>(i)) && u[i] > v[i]) {
      return violate("u > v on the boundary", static_cast<int>(i));
    }
  }
  DiscreteField Au, Av;
  try {
    Au = gradient_operator(g, domain, u);
    Av = gradient_operator(g, domain, v);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::domain_error) throw;
    return violate(e.what(), e.node() ? std::optional<int>(static_cast<int>(*e.node())) : std::nullopt);
  }
  const int n = num_unknowns(mesh);
  for (int k = 0; k < n; ++k) {
    const int node = unknown_node(mesh, k);
    const double slack = 1e-10 * std::max(1.0, std::abs(h[node]));
    if (Au[node] > h[node] + slack) return violate("u is not a subsolution", node);
    if (h[node] > Av[node] + slack) return violate("v is not a supersolution", node);
  }

  double worst = -kInf;
  int worst_node = -1;
  out.margin = kInf;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    if (d > worst) {
      worst = d;
      worst_node = static_cast<int>(i);
    }
    out.margin = std::min(out.margin, v[i] - u[i]);
  }
  out.pass = worst <= 1e-10;
  if (!out.pass) {
    out.witness_node = worst_node;
    out.detail = fmt("u exceeds v by %.3e", worst);
  } else {
    out.detail = "u <= v at every node";
  }
  return out;
}

// ---- Pohozaev ------------------------------------------------------------

double pohozaev_defect(const DiscreteField& v, double q) {
  const auto* m = std::get_if<RadialMesh>(&v.mesh());
  if (!m || m->kind != RadialKind::ball) {
    throw Error(ErrorKind::domain_error, "Pohozaev defect needs a ball (starshaped) mesh");
  }
  const int N = m->dimension;
  const int M = m->M;
  const double h = m->h();
  // Nodal v': central inside, 0 at the center, 3-point one-sided at r = R.
  // Not gradient_sq: its product stencil cancels a gradient held in one cell.
  auto dv_at = [&](int i) {
    if (i == 0) return 0.0;
    if (i == M) return (3.0 * v[M] - 4.0 * v[M - 1] + v[M - 2]) / (2.0 * h);
    return (v[i + 1] - v[i - 1]) / (2.0 * h);
  };
  double e_grad = 0.0;
  double e_pow = 0.0;
  for (int i = 0; i <= M; ++i) {
    const double w = (i == 0 || i == M) ? 0.5 * h : h;
    const double rn = std::pow(m->r(i), N - 1);
    const double d = dv_at(i);
    e_grad += w * rn * d * d;
    e_pow += w * rn * std::pow(std::abs(v[i]), q + 1.0);
  }
  const double om = omega_sphere(N);
  const double R = m->outer;
  const double dv = dv_at(M);
  const double boundary = 0.5 * om * std::pow(R, N) * dv * dv;
  return om * ((N - 2) / 2.0 * e_grad - N / (q + 1.0) * e_pow) + boundary;
}

// ---- Holder quotient -----------------------------------------------------

SolveReport pohozaev_solve(const MeshPtr& mesh, double q, const SolverConfig& cfg) {
  const auto* rm = std::get_if<RadialMesh>(mesh.get());
  if (!rm || rm->kind != RadialKind::ball) throw Error(ErrorKind::domain_error, "pohozaev solve needs a ball mesh");
  ProblemSpec spec;
  spec.domain.dimension = rm->dimension;
  spec.domain.outer_radius = rm->outer;
  spec.f.p = q;
  spec.g.mu.value = 0.0;
  spec.lambda = 1.0;
  SolveReport first = solve(spec, mesh, cfg);
  if (first.converged()) return first;
  const double h = rm->outer / rm->M;
  const double R = rm->outer;
  for (double k : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    const double e = k * h;
    const DiscreteField shape = DiscreteField::sample(mesh, [&](Point pt) {
      return 1.0 / std::sqrt(1.0 + pt.x * pt.x / (e * e)) - 1.0 / std::sqrt(1.0 + R * R / (e * e));
    });
    for (double A : {1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4, 3e4}) {
      DiscreteField u = shape;
      for (double& v : u.values()) v *= A;
      SolveReport rep = newton_solve(spec, ResidualKind::quasilinear(), u, cfg);
      const bool spike = rep.status == SolveStatus::floor_degenerate && rep.residual <= rep.threshold &&
                         rep.sup_norm > kTrivialFactor * cfg.eps_pos;
      if (rep.converged() || spike) {
        std::ostringstream os;
        os << "concentrated start e = " << k << " h, amplitude " << A;
        rep.diagnostics = os.str();
        return rep;
      }
    }
  }
  first.diagnostics += "; no concentrated start converged";
  return first;
}

double holder_quotient(const DiscreteField& u, double alpha, int pairs_2d) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::invalid_spec, "Holder exponent must lie in (0,1)");
  double best = 0.0;
  if (const auto* m = std::get_if<RadialMesh>(&u.mesh())) {
    const int n = m->num_nodes();
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = m->r(i);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double d = std::abs(u[i] - u[j]);
        if (d == 0.0) continue;
        best = std::max(best, d / std::pow(x[j] - x[i], alpha));
      }
    }
    return best;
  }
  const auto& g = std::get<Grid2D>(u.mesh());
  // R_4 additive recurrence: alpha_k = phi^{-k}, phi^5 = phi + 1.
  const double phi = 1.1673039782614187;
  double a[4];
  for (int k = 0; k < 4; ++k) a[k] = std::pow(phi, -(k + 1));
  const int sx = g.nx + 2;
  const int sy = g.ny + 2;
  for (int n = 1; n <= pairs_2d; ++n) {
    double z[4];
    for (int k = 0; k < 4; ++k) {
      const double t = 0.5 + n * a[k];
      z[k] = t - std::floor(t);
    }
    const int i1 = std::min(sx - 1, static_cast<int>(z[0] * sx));
    const int j1 = std::min(sy - 1, static_cast<int>(z[1] * sy));
    const int i2 = std::min(sx - 1, static_cast<int>(z[2] * sx));
    const int j2 = std::min(sy - 1, static_cast<int>(z[3] * sy));
    if (i1 == i2 && j1 == j2) continue;
    const Point p1 = node_point(u.mesh(), g.node(i1, j1));
    const Point p2 = node_point(u.mesh(), g.node(i2, j2));
    const double d = std::abs(u[g.node(i1, j1)] - u[g.node(i2, j2)]);
    if (d == 0.0) continue;
    best = std::max(best, d / std::pow(std::hypot(p1.x - p2.x, p1.y - p2.y), alpha));
  }
  return best;
}

// ---- a priori sweep ------------------------------------------------------

AprioriResult apriori_scaled_sweep(const ProblemSpec& spec, const MeshPtr& mesh, const std::vector<double>& grid,
                                   const SolverConfig& cfg) {
  AprioriResult out;
  out.table = continuation_lambda(spec, mesh, grid, cfg);
  out.verdict.name = "apriori-scaled";
  std::vector<double> scaled;
  for (const auto& r : out.table.records) {
    if (r.status != SolveStatus::converged) {
      out.verdict.pass = false;
      out.verdict.witness_param = r.param;
      out.verdict.detail = std::string("solve failed (") + to_string(r.status) + ")";
      return out;
    }
    scaled.push_back(r.scaled_norm);
  }
  if (scaled.empty()) {
    out.verdict.detail = "empty grid";
    return out;
  }
  std::vector<double> sorted = scaled;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const double mx = sorted.back();
  out.max_over_median = mx / median;
  out.verdict.margin = 1.05 - out.max_over_median;
  out.verdict.pass = mx <= 1.05 * median;
  if (!out.verdict.pass) {
    for (const auto& r : out.table.records) {
      if (r.scaled_norm == mx) out.verdict.witness_param = r.param;
    }
    out.verdict.detail = fmt("max/median scaled norm %.6g exceeds 1.05", out.max_over_median);
  } else {
    out.verdict.detail = fmt("max/median scaled norm %.12g", out.max_over_median);
  }
  return out;
}

// ---- nonexistence probe --------------------------------------------------

namespace {

ProbeLevel run_level(const ProblemSpec& spec, const MeshPtr& mesh, const SolverConfig& cfg) {
  ProbeLevel lv;
  lv.resolution = std::visit([](const auto& m) {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, RadialMesh>) return m.M;
    else return m.nx;
  }, *mesh);
  const DiscreteField guess = initial_guess(spec, mesh, cfg);
  const FixedPointResult fp = fixed_point_K(spec, guess, cfg);
  lv.status = fp.report.status;
  lv.iterations = fp.report.iterations;
  lv.residual = fp.report.residual;
  lv.diagnostics = fp.report.diagnostics;
  if (!fp.report.solution) return lv;
  const DiscreteField& u = *fp.report.solution;
  const Mesh& m = u.mesh();
  const InnerRegion& omega = split_mu(spec.g).omega;
  lv.min_u_outer = kInf;
  double ih = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const int node = static_cast<int>(i);
    const Point x = node_point(m, node);
    if (!is_boundary(m, node) && !omega.contains(spec.domain, x)) lv.min_u_outer = std::min(lv.min_u_outer, u[i]);
    const double hv = spec.source(spec.domain, x);
    if (hv == 0.0) continue;
    if (const auto* rm = std::get_if<RadialMesh>(&m)) {
      const double w = (i == 0 || node == rm->M) ? 0.5 * rm->h() : rm->h();
      ih += w * std::pow(x.x, rm->dimension - 1) * hv / u[i];
    } else {
      const auto& g = std::get<Grid2D>(m);
      ih += g.hx() * g.hy() * hv / u[i];
    }
  }
  if (const auto* rm = std::get_if<RadialMesh>(&m)) ih *= omega_sphere(rm->dimension);
  lv.integral_h_over_u = ih;
  if (!std::isfinite(lv.min_u_outer)) lv.min_u_outer = 0.0;
  return lv;
}

}  // namespace

NonexistenceReport nonexistence_probe(const ProblemSpec& spec, const ProbeOptions& opt, const SolverConfig& cfg) {
  if (opt.levels < 1 || opt.base_resolution < 1) throw Error(ErrorKind::invalid_spec, "probe needs levels >= 1");
  NonexistenceReport rep;
  if (spec.source.kind == SourceSpec::Kind::none || spec.source.amplitude == 0.0) {
    rep.trivial_instance = true;
    rep.detail = "h = 0: u = 0 is the only candidate (trivial instance)";
    return rep;
  }
  std::vector<MeshPtr> meshes{mesh_for(spec.domain, opt.base_resolution)};
  for (int l = 1; l < opt.levels; ++l) meshes.push_back(refine(*meshes.back()));

  rep.levels.resize(meshes.size());
  if (opt.workers > 1) {
    std::vector<std::future<ProbeLevel>> jobs;
    for (const auto& m : meshes) jobs.push_back(std::async(std::launch::async, run_level, spec, m, cfg));
    for (std::size_t l = 0; l < jobs.size(); ++l) rep.levels[l] = jobs[l].get();
  } else {
    for (std::size_t l = 0; l < meshes.size(); ++l) rep.levels[l] = run_level(spec, meshes[l], cfg);
  }

  auto failed = [](const ProbeLevel& l) { return l.status != SolveStatus::converged; };
  bool degenerate = true;
  std::ostringstream why;
  for (std::size_t l = 1; l < rep.levels.size(); ++l) {
    const auto& a = rep.levels[l - 1];
    const auto& b = rep.levels[l];
    if (!failed(b) && !failed(a)) {
      const double growth = b.integral_h_over_u / a.integral_h_over_u;
      rep.max_ih_change = std::max(rep.max_ih_change, std::abs(growth - 1.0));
      if (growth < 1.5) {
        degenerate = false;
        why << "level " << l << ": I_h ratio " << growth << " < 1.5; ";
      }
    } else if (!failed(b)) {
      degenerate = false;
      why << "level " << l << " converges after a failed coarser level; ";
    }
  }
  if (rep.levels.size() == 1 && !failed(rep.levels[0])) degenerate = false;
  rep.degenerate = degenerate;
  if (degenerate) {
    int nf = 0;
    for (const auto& l : rep.levels) nf += failed(l);
    why << nf << " of " << rep.levels.size() << " levels fail to converge; converged refinements grow I_h >= 1.5x";
  }
  rep.detail = why.str();
  return rep;
}

void NonexistenceReport::write_csv(std::ostream& os) const {
  os << "level,resolution,status,iterations,residual,integral_h_over_u,min_u_outer\n";
  char buf[96];
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& lv = levels[l];
    os << l << ',' << lv.resolution << ',' << to_string(lv.status) << ',' << lv.iterations << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", lv.residual, lv.integral_h_over_u, lv.min_u_outer);
    os << buf << '\n';
  }
}

}  // namespace qgrad
