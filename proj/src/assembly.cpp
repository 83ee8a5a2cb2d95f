#include "qgrad/assembly.hpp"

#include <cmath>
#include <sstream>

#include "qgrad/error.hpp"

namespace qgrad {
namespace {

// Local view of one unknown: -Delta_h u = diag u_c + sum w_k u_{nb_k};
// each gradient component squared is (u_plus - u_c)(u_c - u_minus) gw.
struct Stencil {
  int node = 0;
  double diag = 0.0;
  int nnb = 0;
  int nb[4]{};
  double w[4]{};
  int ng = 0;
  int gp[2]{}, gm[2]{};
  double gw[2]{};
};

Stencil stencil_at(const Mesh& mesh, int k) {
  Stencil s;
  if (const auto* m = std::get_if<RadialMesh>(&mesh)) {
    const int i = m->first_unknown() + k;
    const double h = m->h();
    const double h2 = h * h;
    s.node = i;
    if (i == 0) {
      s.diag = 2.0 * m->dimension / h2;
      s.nnb = 1;
      s.nb[0] = 1;
      s.w[0] = -s.diag;
      return s;
    }
    const double adv = (m->dimension - 1) / m->r(i) / (2.0 * h);
    s.diag = 2.0 / h2;
    s.nnb = 2;
    s.nb[0] = i - 1;
    s.w[0] = -(1.0 / h2 - adv);
    s.nb[1] = i + 1;
    s.w[1] = -(1.0 / h2 + adv);
    s.ng = 1;
    s.gp[0] = i + 1;
    s.gm[0] = i - 1;
    s.gw[0] = 1.0 / h2;
    return s;
  }
  const auto& g = std::get<Grid2D>(mesh);
  const int i = 1 + k % g.nx;
  const int j = 1 + k / g.nx;
  const int c = g.node(i, j);
  const int st = g.nx + 2;
  const double cx = 1.0 / (g.hx() * g.hx());
  const double cy = 1.0 / (g.hy() * g.hy());
  s.node = c;
  s.diag = 2.0 * cx + 2.0 * cy;
  s.nnb = 4;
  s.nb[0] = c - 1;
  s.w[0] = -cx;
  s.nb[1] = c + 1;
  s.w[1] = -cx;
  s.nb[2] = c - st;
  s.w[2] = -cy;
  s.nb[3] = c + st;
  s.w[3] = -cy;
  s.ng = 2;
  s.gp[0] = c + 1;
  s.gm[0] = c - 1;
  s.gw[0] = cx;
  s.gp[1] = c + st;
  s.gm[1] = c - st;
  s.gw[1] = cy;
  return s;
}

int unknown_of(const Mesh& mesh, int node) {
  if (const auto* m = std::get_if<RadialMesh>(&mesh)) {
    if (node < m->first_unknown() || node >= m->M) return -1;
    return node - m->first_unknown();
  }
  const auto& g = std::get<Grid2D>(mesh);
  const int i = node % (g.nx + 2);
  const int j = node / (g.nx + 2);
  if (i < 1 || j < 1 || i > g.nx || j > g.ny) return -1;
  return (i - 1) + (j - 1) * g.nx;
}

[[noreturn]] void node_error(const std::string& what, int node) {
  throw Error(ErrorKind::domain_error, what, static_cast<std::size_t>(node));
}

int num_rows(const Tridiagonal& t) { return static_cast<int>(t.size()); }
int num_rows(const SparseMatrix& a) { return a.n; }

double power_term(double s, double sigma) { return s > 0.0 ? std::pow(s, sigma) : 0.0; }
double power_term_d(double s, double sigma) { return s > 0.0 ? sigma * std::pow(s, sigma - 1.0) : 0.0; }

// Per-node coefficient data shared by residual and Jacobian.
struct NodeTerms {
  double coef = 0.0;    // multiplies |grad u|^2
  double dcoef = 0.0;   // d coef / d u_c
  double rhs = 0.0;     // lambda f + t u^sigma + h + extra
  double drhs = 0.0;    // d rhs / d u_c
};

NodeTerms node_terms(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& u, int node,
                     bool want_derivative) {
  NodeTerms nt;
  const Point x = node_point(u.mesh(), node);
  const double uc = u[node];
  const double h = spec.source(spec.domain, x) +
                   (kind.extra_source.empty() ? 0.0 : kind.extra_source[static_cast<std::size_t>(node)]);
  try {
    if (kind.kind == ResidualKind::Kind::quasilinear) {
      nt.coef = eval_g(spec.g, spec.domain, x, uc);
      if (want_derivative && nt.coef != 0.0) nt.dcoef = eval_dg(spec.g, spec.domain, x, uc);
    } else {
      const double vc = (*kind.frozen_at)[node];
      const double sg = eval_sg(spec.g, spec.domain, x, vc);
      if (sg != 0.0) {
        const double den = uc + spec.g.delta;
        if (!(den > 0.0)) node_error("frozen coefficient needs u + delta > 0", node);
        nt.coef = sg / den;
        nt.dcoef = -sg / (den * den);
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::domain_error && !e.node()) {
      std::ostringstream msg;
      msg << e.what() << " (node " << node << ", u = " << uc << ")";
      node_error(msg.str(), node);
    }
    throw;
  }
  const bool implicit_rhs = kind.kind == ResidualKind::Kind::quasilinear || kind.mode == FreezeMode::coefficient_only;
  const double s = implicit_rhs ? uc : (*kind.frozen_at)[node];
  nt.rhs = spec.lambda * eval_f(spec.f, s) + spec.t * power_term(s, spec.sigma_t) + h;
  if (want_derivative && implicit_rhs) {
    nt.drhs = spec.lambda * eval_df(spec.f, uc) + spec.t * power_term_d(uc, spec.sigma_t);
  }
  return nt;
}

void check_inputs(const ResidualKind& kind, const DiscreteField& u) {
  if (kind.kind == ResidualKind::Kind::frozen) {
    if (!kind.frozen_at) throw Error(ErrorKind::invalid_spec, "frozen residual without v");
    require_same_mesh(*kind.frozen_at, u);
  }
  if (!kind.extra_source.empty() && kind.extra_source.size() != u.size()) {
    throw Error(ErrorKind::mesh_mismatch, "extra source size does not match mesh");
  }
}

}  // namespace

ResidualKind ResidualKind::quasilinear() { return ResidualKind{}; }

ResidualKind ResidualKind::frozen(DiscreteField v, FreezeMode mode) {
  ResidualKind k;
  k.kind = Kind::frozen;
  k.frozen_at = std::move(v);
  k.mode = mode;
  return k;
}

DiscreteField residual(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& u) {
  check_inputs(kind, u);
  DiscreteField F(u.mesh_ptr());
  const Mesh& mesh = u.mesh();
  const int n = num_unknowns(mesh);
  for (int k = 0; k < n; ++k) {
    const Stencil s = stencil_at(mesh, k);
    double lap = s.diag * u[s.node];
    for (int q = 0; q < s.nnb; ++q) lap += s.w[q] * u[s.nb[q]];
    double grad2 = 0.0;
    for (int q = 0; q < s.ng; ++q) grad2 += (u[s.gp[q]] - u[s.node]) * (u[s.node] - u[s.gm[q]]) * s.gw[q];
    const NodeTerms nt = node_terms(spec, kind, u, s.node, false);
    F[s.node] = lap + nt.coef * grad2 - nt.rhs;
  }
  return F;
}

DiscreteField residual_quasilinear(const ProblemSpec& spec, const DiscreteField& u) {
  return residual(spec, ResidualKind::quasilinear(), u);
}

DiscreteField residual_frozen(const ProblemSpec& spec, const DiscreteField& v, const DiscreteField& u,
                              FreezeMode mode) {
  return residual(spec, ResidualKind::frozen(v, mode), u);
}

Jacobian jacobian(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& u) {
  check_inputs(kind, u);
  const Mesh& mesh = u.mesh();
  const int n = num_unknowns(mesh);
  const bool radial = std::holds_alternative<RadialMesh>(mesh);
  Tridiagonal tri(radial ? n : 0);
  std::vector<SparseMatrix::Triplet> trip;
  if (!radial) trip.reserve(5 * n);
  auto add = [&](int row, int node, double v) {
    const int colk = unknown_of(mesh, node);
    if (colk < 0) return;
    if (radial) {
      if (colk == row) tri.diag[row] += v;
      else if (colk == row - 1) tri.lower[row] += v;
      else tri.upper[row] += v;
    } else {
      trip.push_back({row, colk, v});
    }
  };
  for (int k = 0; k < n; ++k) {
    const Stencil s = stencil_at(mesh, k);
    const NodeTerms nt = node_terms(spec, kind, u, s.node, true);
    const double uc = u[s.node];
    double grad2 = 0.0;
    double dgrad2 = 0.0;  // d grad2 / d u_c
    for (int q = 0; q < s.ng; ++q) {
      const double up = u[s.gp[q]] - uc;
      const double dn = uc - u[s.gm[q]];
      grad2 += up * dn * s.gw[q];
      dgrad2 += (up - dn) * s.gw[q];
      if (nt.coef != 0.0) {
        add(k, s.gp[q], nt.coef * dn * s.gw[q]);
        add(k, s.gm[q], -nt.coef * up * s.gw[q]);
      }
    }
    add(k, s.node, s.diag + nt.dcoef * grad2 + nt.coef * dgrad2 - nt.drhs);
    for (int q = 0; q < s.nnb; ++q) add(k, s.nb[q], s.w[q]);
  }
  if (radial) return tri;
  return SparseMatrix::from_triplets(n, std::move(trip));
}

std::vector<double> jacobian_apply(const Jacobian& j, const std::vector<double>& x) {
  return std::visit([&](const auto& a) { return a.apply(x); }, j);
}

std::vector<double> jacobian_solve(const Jacobian& j, const std::vector<double>& rhs) {
  if (const auto* t = std::get_if<Tridiagonal>(&j)) return tridiag_solve(*t, rhs);
  const auto& a = std::get<SparseMatrix>(j);
  try {
    return krylov_solve(a, rhs, 1e-13, 4 * a.n + 100);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::breakdown && e.kind() != ErrorKind::max_iterations) throw;
  }
  return BandedLU(a.to_banded()).solve(rhs);
}

std::vector<double> jacobian_column(const Jacobian& j, int k) {
  const std::size_t n = std::visit([](const auto& a) { return static_cast<std::size_t>(num_rows(a)); }, j);
  std::vector<double> e(n, 0.0);
  e.at(static_cast<std::size_t>(k)) = 1.0;
  return jacobian_apply(j, e);
}

}  // namespace qgrad
