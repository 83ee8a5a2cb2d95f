#include "qgrad/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "qgrad/checks.hpp"
#include "qgrad/error.hpp"

namespace qgrad {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double norm2(const DiscreteField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s);
}

double sup_diff(const DiscreteField& a, const DiscreteField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Largest diagonal entry of -Delta_h.
double laplacian_scale(const Mesh& mesh) {
  if (const auto* m = std::get_if<RadialMesh>(&mesh)) {
    const double h2 = m->h() * m->h();
    return std::max(2.0, 2.0 * m->dimension) / h2 + (m->dimension - 1) / (m->r(1) * m->h());
  }
  const auto& g = std::get<Grid2D>(mesh);
  return 2.0 / (g.hx() * g.hx()) + 2.0 / (g.hy() * g.hy());
}

void zero_boundary(DiscreteField& u) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (is_boundary(u.mesh(), static_cast<int>(i))) u[i] = 0.0;
  }
}

void clip(DiscreteField& u, const DiscreteField& floor) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!is_boundary(u.mesh(), static_cast<int>(i)) && !(u[i] >= floor[i])) u[i] = floor[i];
  }
}

int count_floor(const DiscreteField& u, const DiscreteField& floor, double factor = 1.0 + 1e-9) {
  int c = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!is_boundary(u.mesh(), static_cast<int>(i)) && u[i] <= floor[i] * factor) ++c;
  }
  return c;
}

double positivity_margin(const DiscreteField& u, const DiscreteField& phi) {
  double m = std::numeric_limits<double>::infinity();
  const int n = num_unknowns(u.mesh());
  for (int k = 0; k < n; ++k) {
    const int node = unknown_node(u.mesh(), k);
    m = std::min(m, u[node] / phi[node]);
  }
  return m;
}


// Smallest interior local minimum of u relative to ||u||_inf (infinity if none).
// Neighbors include boundary nodes, so a local minimum is never next to the boundary.
double interior_dip(const DiscreteField& u) {
  const double top = u.sup_norm();
  double dip = std::numeric_limits<double>::infinity();
  if (!(top > 0.0)) return dip;
  const Mesh& mesh = u.mesh();
  const int n = num_unknowns(mesh);
  for (int k = 0; k < n; ++k) {
    const int node = unknown_node(mesh, k);
    bool low = true;
    if (const auto* m = std::get_if<RadialMesh>(&mesh)) {
      if (node > 0) low = low && u[node] <= u[node - 1];
      if (node < m->M) low = low && u[node] <= u[node + 1];
    } else {
      const auto& g = std::get<Grid2D>(mesh);
      const int w = g.nx + 2;
      for (int nb : {node - 1, node + 1, node - w, node + w}) low = low && u[node] <= u[nb];
    }
    if (low) dip = std::min(dip, u[node] / top);
  }
  return dip;
}

// Residual that reports evaluation failures as nullopt.
std::optional<DiscreteField> try_residual(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& u,
                                          std::string* why = nullptr) {
  try {
    DiscreteField F = residual(spec, kind, u);
    for (double v : F.values()) {
      if (!std::isfinite(v)) {
        if (why) *why = "non-finite residual";
        return std::nullopt;
      }
    }
    return F;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::domain_error) throw;
    if (why) *why = e.what();
    return std::nullopt;
  }
}

void finish(SolveReport& rep, const ProblemSpec& spec, const DiscreteField& u, const DiscreteField& phi,
            const DiscreteField& floor) {
  rep.sup_norm = u.sup_norm();
  rep.positivity_margin = positivity_margin(u, phi);
  rep.floor_nodes = count_floor(u, floor, kTrivialFactor);
  rep.holder_half = holder_quotient(u, 0.5);
  const int n = num_unknowns(u.mesh());
  const bool trivial = rep.sup_norm <= kTrivialFactor * floor.sup_norm();
  if ((rep.floor_nodes * 100 >= n && rep.floor_nodes > 0) || trivial) {
    rep.status = SolveStatus::floor_degenerate;
    std::ostringstream os;
    if (trivial) os << "collapsed to the trivial solution (sup " << rep.sup_norm << ")";
    else os << rep.floor_nodes << " of " << n << " interior nodes within " << kTrivialFactor << " floor heights of zero";
    if (!rep.diagnostics.empty()) os << "; " << rep.diagnostics;
    rep.diagnostics = os.str();
  } else if (rep.status == SolveStatus::converged) {
    // A positive solution stays away from zero inside the domain; an interior
    // minimum near zero is an artifact of the singular term on the mesh.
    const double dip = interior_dip(u);
    if (dip < kInteriorDip) {
      rep.status = SolveStatus::interior_degenerate;
      std::ostringstream os;
      os << "interior local minimum at " << dip << " of the sup norm";
      if (!rep.diagnostics.empty()) os << "; " << rep.diagnostics;
      rep.diagnostics = os.str();
    }
  }
  rep.solution = u;
  (void)spec;
}

}  // namespace

void SolverConfig::validate() const {
  const bool ok = residual_tol > 0 && step_tol > 0 && max_newton > 0 && backtrack > 0 && backtrack < 1 &&
                  armijo > 0 && armijo < 0.5 && max_backtracks > 0 && eps_pos > 0 && theta > 0 && theta <= 1 &&
                  max_fixed_point > 0 && line_search_points >= 2 && max_starts > 0;
  if (!ok) throw Error(ErrorKind::invalid_spec, "solver configuration out of range");
}

const char* to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::max_iterations: return "max-iterations";
    case SolveStatus::floor_degenerate: return "floor-degenerate";
    case SolveStatus::interior_degenerate: return "interior-degenerate";
  }
  return "unknown";
}

double convergence_threshold(const ProblemSpec& spec, const DiscreteField& u, double tol) {
  double scale = 1.0;
  const int n = num_unknowns(u.mesh());
  for (int k = 0; k < n; ++k) {
    const int node = unknown_node(u.mesh(), k);
    const double s = u[node];
    const Point x = node_point(u.mesh(), node);
    double r = spec.lambda * eval_f(spec.f, s) + spec.source(spec.domain, x);
    if (spec.t > 0.0 && s > 0.0) r += spec.t * std::pow(s, spec.sigma_t);
    scale = std::max(scale, std::abs(r));
  }
  // -Delta_h u cannot be evaluated more accurately than this.
  const double rounding = 8.0 * kEps * laplacian_scale(u.mesh()) * u.sup_norm();
  return tol * scale + rounding;
}

const EigenPair& cached_eigenpair(const MeshPtr& mesh) {
  static std::mutex mtx;
  static std::vector<std::pair<Mesh, std::unique_ptr<EigenPair>>> cache;
  {
    std::lock_guard<std::mutex> lock(mtx);
    for (const auto& [m, ep] : cache) {
      if (m == *mesh) return *ep;
    }
  }
  auto ep = std::make_unique<EigenPair>(principal_eigenpair(mesh));
  std::lock_guard<std::mutex> lock(mtx);
  for (const auto& [m, e] : cache) {
    if (m == *mesh) return *e;
  }
  cache.emplace_back(*mesh, std::move(ep));
  return *cache.back().second;
}

double reference_amplitude(const ProblemSpec& spec, double lambda1) {
  auto gain = [&](double c) {
    double v = spec.lambda * eval_f(spec.f, c) / c;
    if (spec.t > 0.0) v += spec.t * std::pow(c, spec.sigma_t - 1.0);
    return v - lambda1;
  };
  // Scan for a sign change from below to above lambda_1.
  double prev_c = 1e-8;
  double prev = gain(prev_c);
  for (int k = 1; k <= 160; ++k) {
    const double c = std::pow(10.0, -8.0 + k * 0.1);
    double cur;
    try {
      cur = gain(c);
    } catch (const Error&) {
      break;
    }
    if (prev < 0.0 && cur >= 0.0) {
      double lo = prev_c, hi = c;
      for (int it = 0; it < 100; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (gain(mid) < 0.0) lo = mid; else hi = mid;
      }
      return std::sqrt(lo * hi);
    }
    prev = cur;
    prev_c = c;
  }
  return 1.0;
}

namespace {

double amplitude_score(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& shape, double c) {
  DiscreteField u = shape;
  for (double& v : u.values()) v *= c;
  auto F = try_residual(spec, kind, u);
  if (!F) return std::numeric_limits<double>::infinity();
  return norm2(*F) / c;
}

// (score, c) over a logarithmic grid, best first.
std::vector<std::pair<double, double>> ranked_amplitudes(const ProblemSpec& spec, const ResidualKind& kind,
                                                         const DiscreteField& shape, double lo, double hi,
                                                         int points) {
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k < points; ++k) {
    const double c = lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
    out.emplace_back(amplitude_score(spec, kind, shape, c), c);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace

double line_search_amplitude(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& shape,
                             double c_lo, double c_hi, int points) {
  const double c1 = ranked_amplitudes(spec, kind, shape, c_lo, c_hi, points).front().second;
  const double ratio = std::pow(c_hi / c_lo, 1.0 / (points - 1));
  return ranked_amplitudes(spec, kind, shape, c1 / ratio, c1 * ratio, points).front().second;
}

DiscreteField initial_guess(const ProblemSpec& spec, const MeshPtr& mesh, const SolverConfig& cfg) {
  const EigenPair& ep = cached_eigenpair(mesh);
  const double c0 = reference_amplitude(spec, ep.lambda1);
  const double c = line_search_amplitude(spec, ResidualKind::quasilinear(), ep.phi1, c0 / 100.0, c0 * 100.0,
                                         cfg.line_search_points);
  DiscreteField u = ep.phi1;
  for (double& v : u.values()) v *= c;
  return u;
}

SolveReport solve(const ProblemSpec& spec, const MeshPtr& mesh, const SolverConfig& cfg) {
  cfg.validate();
  const EigenPair& ep = cached_eigenpair(mesh);
  SolveReport first = newton_solve(spec, ResidualKind::quasilinear(), initial_guess(spec, mesh, cfg), cfg);
  if (first.converged()) return first;
  const double c0 = reference_amplitude(spec, ep.lambda1);
  const auto ranked = ranked_amplitudes(spec, ResidualKind::quasilinear(), ep.phi1, c0 / 100.0, c0 * 100.0,
                                        cfg.line_search_points);
  int starts = 1;
  for (const auto& [score, c] : ranked) {
    if (starts >= cfg.max_starts) break;
    if (!std::isfinite(score)) continue;
    ++starts;
    DiscreteField u = ep.phi1;
    for (double& v : u.values()) v *= c;
    SolveReport rep = newton_solve(spec, ResidualKind::quasilinear(), u, cfg);
    if (rep.converged()) {
      rep.diagnostics = "converged from restart " + std::to_string(starts) + " (amplitude " + std::to_string(c) + ")";
      return rep;
    }
  }
  first.diagnostics += "; " + std::to_string(starts) + " starts failed";
  return first;
}

SolveReport newton_solve(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& u0,
                         const SolverConfig& cfg) {
  cfg.validate();
  const EigenPair& ep = cached_eigenpair(u0.mesh_ptr());
  if (!u0.same_mesh(ep.phi1)) throw Error(ErrorKind::mesh_mismatch, "eigenpair mesh mismatch");
  DiscreteField floor = ep.phi1;
  for (double& v : floor.values()) v *= cfg.eps_pos;

  SolveReport rep;
  DiscreteField u = u0;
  zero_boundary(u);
  clip(u, floor);

  std::string why;
  auto F = try_residual(spec, kind, u, &why);
  if (!F) {
    rep.status = SolveStatus::diverged;
    rep.diagnostics = "initial residual not evaluable: " + why;
    finish(rep, spec, u, ep.phi1, floor);
    return rep;
  }
  double phi0 = 0.5 * norm2(*F) * norm2(*F);
  // Steps may not clip more nodes to the floor than already sit there (plus
  // 1%); otherwise u = 0 attracts the merit function under singular g.
  const int floor_slack = std::max(1, num_unknowns(u.mesh()) / 100);
  int on_floor = count_floor(u, floor);
  bool polished = false;
  for (int it = 0;; ++it) {
    rep.iterations = it;
    rep.residual = F->sup_norm();
    rep.threshold = convergence_threshold(spec, u, cfg.residual_tol);
    const bool small = rep.residual <= rep.threshold;
    if (small && polished) {
      rep.status = SolveStatus::converged;
      break;
    }
    if (it >= cfg.max_newton) {
      rep.status = small ? SolveStatus::converged : SolveStatus::max_iterations;
      break;
    }
    std::vector<double> dx;
    try {
      const Jacobian J = jacobian(spec, kind, u);
      std::vector<double> rhs = F->unknowns();
      for (double& v : rhs) v = -v;
      dx = jacobian_solve(J, rhs);
    } catch (const Error& e) {
      if (small) {
        rep.status = SolveStatus::converged;
        break;
      }
      rep.status = SolveStatus::diverged;
      rep.diagnostics = std::string("linear solve failed (") + to_string(e.kind()) + "): " + e.what();
      break;
    }
    const DiscreteField step = DiscreteField::from_unknowns(u.mesh_ptr(), dx);
    double alpha = 1.0;
    bool accepted = false;
    DiscreteField trial = u;
    std::optional<DiscreteField> Ft;
    for (int b = 0; b <= cfg.max_backtracks; ++b, alpha *= cfg.backtrack) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + alpha * step[i];
      clip(trial, floor);
      if (count_floor(trial, floor) > on_floor + floor_slack) continue;
      Ft = try_residual(spec, kind, trial);
      if (!Ft) continue;
      const double n2 = norm2(*Ft);
      const double phit = 0.5 * n2 * n2;
      if (phit <= (1.0 - 2.0 * cfg.armijo * alpha) * phi0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (small) {
        rep.status = SolveStatus::converged;
        break;
      }
      rep.status = SolveStatus::diverged;
      std::ostringstream os;
      os << "line search failed at iteration " << it << ", residual " << rep.residual;
      rep.diagnostics = os.str();
      break;
    }
    const double moved = sup_diff(trial, u);
    u = trial;
    on_floor = count_floor(u, floor);
    F = std::move(Ft);
    phi0 = 0.5 * norm2(*F) * norm2(*F);
    // One extra step past the threshold takes the quadratic phase to rounding level.
    if (small) polished = true;
    if (moved <= cfg.step_tol * std::max(1.0, u.sup_norm())) polished = true;
  }
  rep.residual = F->sup_norm();
  finish(rep, spec, u, ep.phi1, floor);
  return rep;
}

FixedPointResult fixed_point_K(const ProblemSpec& spec, const DiscreteField& u0, const SolverConfig& cfg) {
  cfg.validate();
  FixedPointResult out;
  const EigenPair& ep = cached_eigenpair(u0.mesh_ptr());
  DiscreteField floor = ep.phi1;
  for (double& v : floor.values()) v *= cfg.eps_pos;

  DiscreteField u = u0;
  zero_boundary(u);
  if (u.sup_norm() == 0.0) {
    // K(0) = 0: the frozen right-hand side vanishes.
    out.report.status = SolveStatus::floor_degenerate;
    out.report.solution = u;
    out.report.floor_nodes = num_unknowns(u.mesh());
    out.report.diagnostics = "K(0) = 0: trivial fixed point";
    return out;
  }
  std::optional<DiscreteField> before;
  SolveReport& rep = out.report;
  for (int k = 1; k <= cfg.max_fixed_point; ++k) {
    const SolveReport inner = newton_solve(spec, ResidualKind::frozen(u, cfg.freeze), u, cfg);
    if (!inner.converged()) {
      rep = inner;
      rep.iterations = k;
      rep.diagnostics = "frozen solve failed at outer iteration " + std::to_string(k) + ": " + inner.diagnostics;
      return out;
    }
    DiscreteField next = *inner.solution;
    if (cfg.theta < 1.0) {
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = (1.0 - cfg.theta) * u[i] + cfg.theta * next[i];
    }
    FixedPointStep st;
    st.step = sup_diff(next, u);
    st.inner_iterations = inner.iterations;
    auto Fq = try_residual(spec, ResidualKind::quasilinear(), next);
    st.residual = Fq ? Fq->sup_norm() : std::numeric_limits<double>::infinity();
    out.history.push_back(st);
    const double scale = std::max(1.0, next.sup_norm());
    const double thr = convergence_threshold(spec, next, cfg.residual_tol);
    rep.iterations = k;
    rep.residual = st.residual;
    rep.threshold = thr;
    if (before && sup_diff(next, *before) <= cfg.step_tol * scale && st.step > 100.0 * cfg.step_tol * scale) {
      rep.status = SolveStatus::diverged;
      std::ostringstream os;
      os << "period-2 cycle detected at outer iteration " << k << ", amplitude " << st.step;
      rep.diagnostics = os.str();
      finish(rep, spec, next, ep.phi1, floor);
      return out;
    }
    before = u;
    u = std::move(next);
    if (st.step <= cfg.step_tol * scale || st.residual <= thr) {
      rep.status = st.residual <= 10.0 * thr ? SolveStatus::converged : SolveStatus::diverged;
      if (!rep.converged()) rep.diagnostics = "iteration stalled away from a quasilinear solution";
      finish(rep, spec, u, ep.phi1, floor);
      return out;
    }
    if (!std::isfinite(st.step) || u.sup_norm() > 1e150) {
      rep.status = SolveStatus::diverged;
      rep.diagnostics = "iterates blew up";
      finish(rep, spec, u, ep.phi1, floor);
      return out;
    }
  }
  rep.status = SolveStatus::max_iterations;
  finish(rep, spec, u, ep.phi1, floor);
  return out;
}

// ---- sweeps --------------------------------------------------------------

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

SweepRecord record_of(double param, double lambda, double p, const SolveReport& r) {
  SweepRecord rec;
  rec.param = param;
  rec.status = r.status;
  rec.iterations = r.iterations;
  rec.residual = r.residual;
  rec.sup_norm = r.solution ? r.solution->sup_norm() : 0.0;
  rec.scaled_norm = std::pow(lambda, 1.0 / (p - 1.0)) * rec.sup_norm;
  return rec;
}

SolveReport solve_from(const ProblemSpec& spec, const DiscreteField& guess, const SolverConfig& cfg) {
  return newton_solve(spec, ResidualKind::quasilinear(), guess, cfg);
}

DiscreteField scaled(const DiscreteField& shape, double c) {
  DiscreteField u = shape;
  for (double& v : u.values()) v *= c;
  return u;
}

DiscreteField warm_guess(const ProblemSpec& spec, const DiscreteField& prev, const SolverConfig& cfg) {
  const double c = line_search_amplitude(spec, ResidualKind::quasilinear(), prev, 0.01, 100.0, cfg.line_search_points);
  return scaled(prev, c);
}

}  // namespace

void SweepTable::write_csv(std::ostream& os) const {
  os << "param,sup_norm,scaled_norm,status,iterations,residual\n";
  for (const auto& r : records) {
    put(os, r.param);
    os << ',';
    put(os, r.sup_norm);
    os << ',';
    put(os, r.scaled_norm);
    os << ',' << to_string(r.status) << ',' << r.iterations << ',';
    put(os, r.residual);
    os << '\n';
  }
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

SweepTable continuation_lambda(const ProblemSpec& spec, const MeshPtr& mesh, const std::vector<double>& grid,
                               const SolverConfig& cfg) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error(ErrorKind::invalid_spec, "lambda grid must ascend");
  SweepTable table;
  table.parameter = "lambda";
  std::optional<DiscreteField> last;
  for (double lam : grid) {
    ProblemSpec s = spec;
    s.lambda = lam;
    SolveReport r;
    if (last) {
      r = solve_from(s, warm_guess(s, *last, cfg), cfg);
      if (!r.converged()) r = solve(s, mesh, cfg);
    } else {
      r = solve(s, mesh, cfg);
    }
    if (r.converged()) last = *r.solution;
    table.records.push_back(record_of(lam, lam, spec.f.p, r));
    table.reports.push_back(std::move(r));
  }
  return table;
}

TSweepResult continuation_t(const ProblemSpec& spec, const MeshPtr& mesh, const std::vector<double>& grid,
                            const SolverConfig& cfg) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error(ErrorKind::invalid_spec, "t grid must ascend");
  TSweepResult out;
  out.table.parameter = "t";
  const EigenPair& ep = cached_eigenpair(mesh);
  std::optional<DiscreteField> last;
  for (double t : grid) {
    ProblemSpec s = spec;
    s.t = t;
    SolveReport r;
    bool ok = false;
    if (last) {
      r = solve_from(s, warm_guess(s, *last, cfg), cfg);
      ok = r.converged();
    }
    if (!ok) {
      const double c0 = reference_amplitude(s, ep.lambda1);
      for (double f : {0.1, 1.0, 10.0}) {
        SolveReport attempt = solve_from(s, scaled(ep.phi1, f * c0), cfg);
        const bool first = !last && f == 0.1;
        if (attempt.converged() || first) r = attempt;
        if (attempt.converged()) {
          ok = true;
          break;
        }
      }
    }
    if (ok) last = *r.solution;
    else if (!out.t_fail) out.t_fail = t;
    out.table.records.push_back(record_of(t, spec.lambda, spec.f.p, r));
    out.table.reports.push_back(std::move(r));
  }
  return out;
}

}  // namespace qgrad
