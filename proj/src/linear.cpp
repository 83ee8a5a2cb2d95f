#include "qgrad/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "qgrad/error.hpp"

namespace qgrad {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double sup(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::vector<double> Tridiagonal::apply(const std::vector<double>& x) const {
  const std::size_t n = size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += lower[i] * x[i - 1];
    if (i + 1 < n) v += upper[i] * x[i + 1];
    y[i] = v;
  }
  return y;
}

// ---- banded --------------------------------------------------------------

BandedSystem::BandedSystem(int n_, int kl_, int ku_) : n(n_), kl(kl_), ku(ku_) {
  if (n < 1 || kl < 0 || ku < 0 || kl + ku < 1) throw Error(ErrorKind::invalid_spec, "bad band shape");
  band.assign(static_cast<std::size_t>(n) * (kl + ku + 1), 0.0);
  rhs.assign(n, 0.0);
}

double& BandedSystem::at(int i, int j) {
  if (!in_band(i, j)) throw Error(ErrorKind::invalid_spec, "band index out of range");
  return band[static_cast<std::size_t>(i) * (kl + ku + 1) + (j - i + kl)];
}

double BandedSystem::at(int i, int j) const {
  if (!in_band(i, j)) return 0.0;
  return band[static_cast<std::size_t>(i) * (kl + ku + 1) + (j - i + kl)];
}

BandedLU::BandedLU(const BandedSystem& a) : n_(a.n), kl_(a.kl), ku_(a.ku), width_(2 * a.kl + a.ku + 1) {
  work_.assign(static_cast<std::size_t>(n_) * width_, 0.0);
  pivot_.assign(n_, 0);
  double scale = 0.0;
  for (int i = 0; i < n_; ++i) {
    for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) {
      w(i, j) = a.at(i, j);
      scale = std::max(scale, std::abs(w(i, j)));
    }
  }
  if (scale == 0.0) throw Error(ErrorKind::singular_system, "zero matrix");
  const int reach = kl_ + ku_;
  for (int k = 0; k < n_; ++k) {
    const int last_row = std::min(n_ - 1, k + kl_);
    int p = k;
    for (int i = k + 1; i <= last_row; ++i) {
      if (std::abs(w(i, k)) > std::abs(w(p, k))) p = i;
    }
    if (std::abs(w(p, k)) <= 1e-14 * scale) {
      std::ostringstream msg;
      msg << "singular band matrix: pivot " << w(p, k) << " at column " << k;
      throw Error(ErrorKind::singular_system, msg.str(), static_cast<std::size_t>(k));
    }
    pivot_[k] = p;
    const int last_col = std::min(n_ - 1, k + reach);
    if (p != k) {
      for (int j = k; j <= last_col; ++j) std::swap(w(k, j), w(p, j));
    }
    const double piv = w(k, k);
    for (int i = k + 1; i <= last_row; ++i) {
      const double l = w(i, k) / piv;
      w(i, k) = l;
      if (l == 0.0) continue;
      for (int j = k + 1; j <= last_col; ++j) w(i, j) -= l * w(k, j);
    }
  }
}

std::vector<double> BandedLU::solve(std::vector<double> b) const {
  if (static_cast<int>(b.size()) != n_) throw Error(ErrorKind::invalid_spec, "rhs size mismatch");
  for (int k = 0; k < n_; ++k) {
    if (pivot_[k] != k) std::swap(b[k], b[pivot_[k]]);
    const int last_row = std::min(n_ - 1, k + kl_);
    for (int i = k + 1; i <= last_row; ++i) b[i] -= w(i, k) * b[k];
  }
  const int reach = kl_ + ku_;
  for (int k = n_ - 1; k >= 0; --k) {
    double s = b[k];
    for (int j = k + 1; j <= std::min(n_ - 1, k + reach); ++j) s -= w(k, j) * b[j];
    b[k] = s / w(k, k);
  }
  return b;
}

std::vector<double> banded_solve(const BandedSystem& system) { return BandedLU(system).solve(system.rhs); }

std::vector<double> tridiag_solve(const Tridiagonal& a, const std::vector<double>& rhs, TridiagReport* report) {
  const std::size_t n = a.size();
  if (rhs.size() != n || n == 0) throw Error(ErrorKind::invalid_spec, "tridiagonal size mismatch");
  if (report) report->used_fallback = false;
  std::vector<double> c(n), d(n);
  bool breakdown = false;
  double denom = a.diag[0];
  for (std::size_t i = 0; i < n && !breakdown; ++i) {
    const double lo = i > 0 ? a.lower[i] : 0.0;
    const double up = i + 1 < n ? a.upper[i] : 0.0;
    const double scale = std::max({std::abs(lo), std::abs(a.diag[i]), std::abs(up)});
    denom = a.diag[i] - (i > 0 ? lo * c[i - 1] : 0.0);
    if (!(std::abs(denom) >= 1e-14 * scale) || scale == 0.0) {
      breakdown = true;
      break;
    }
    c[i] = up / denom;
    d[i] = (rhs[i] - (i > 0 ? lo * d[i - 1] : 0.0)) / denom;
  }
  if (!breakdown) {
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  }
  if (report) report->used_fallback = true;
  if (n == 1) throw Error(ErrorKind::singular_system, "singular 1x1 system");
  BandedSystem b(static_cast<int>(n), 1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int ii = static_cast<int>(i);
    b.at(ii, ii) = a.diag[i];
    if (i > 0) b.at(ii, ii - 1) = a.lower[i];
    if (i + 1 < n) b.at(ii, ii + 1) = a.upper[i];
    b.rhs[i] = rhs[i];
  }
  return banded_solve(b);
}

// ---- sparse --------------------------------------------------------------

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  SparseMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Triplet& e = entries[k];
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) throw Error(ErrorKind::invalid_spec, "triplet out of range");
    if (!m.col.empty() && k > 0 && entries[k - 1].i == e.i && entries[k - 1].j == e.j) {
      m.val.back() += e.v;
      continue;
    }
    m.col.push_back(e.j);
    m.val.push_back(e.v);
    m.row_ptr[e.i + 1]++;
  }
  for (int i = 0; i < n; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
  return m;
}

std::vector<double> SparseMatrix::apply(const std::vector<double>& x) const {
  std::vector<double> y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
  return y;
}

double SparseMatrix::at(int i, int j) const {
  for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
    if (col[k] == j) return val[k];
  }
  return 0.0;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

BandedSystem SparseMatrix::to_banded() const {
  int bw = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) bw = std::max(bw, std::abs(col[k] - i));
  }
  BandedSystem b(n, std::max(bw, 1), std::max(bw, 1));
  for (int i = 0; i < n; ++i) {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) b.at(i, col[k]) += val[k];
  }
  return b;
}

// ---- Krylov --------------------------------------------------------------

namespace {

enum class Outcome { converged, breakdown, exhausted };

Outcome bicgstab(const LinearOperator& op, const std::vector<double>& minv, const std::vector<double>& b,
                 std::vector<double>& x, double tol, int max_it, int& its, double& relres, std::string& why) {
  const std::size_t n = b.size();
  const double bnorm = norm2(b);
  std::vector<double> r(n), ax(n);
  op(x, ax);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
  relres = norm2(r) / bnorm;
  if (relres <= tol) return Outcome::converged;
  const std::vector<double> rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  std::vector<double> v(n, 0.0), p(n, 0.0), y(n), s(n), z(n), t(n);
  const double tiny = 1e-300;
  while (its < max_it) {
    ++its;
    const double rho_new = dot(rhat, r);
    if (std::abs(rho_new) <= 1e-30 * norm2(rhat) * norm2(r) + tiny) {
      why = "rho vanished";
      return Outcome::breakdown;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) y[i] = minv[i] * p[i];
    op(y, v);
    const double rv = dot(rhat, v);
    if (std::abs(rv) <= 1e-30 * norm2(rhat) * norm2(v) + tiny) {
      why = "<rhat, A p> vanished";
      return Outcome::breakdown;
    }
    alpha = rho_new / rv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    const double snorm = norm2(s);
    if (snorm / bnorm <= tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * y[i];
      relres = snorm / bnorm;
      return Outcome::converged;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = minv[i] * s[i];
    op(z, t);
    const double tt = dot(t, t);
    if (tt <= tiny) {
      why = "A s vanished";
      return Outcome::breakdown;
    }
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * y[i] + omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    relres = norm2(r) / bnorm;
    if (relres <= tol) return Outcome::converged;
    if (omega == 0.0) {
      why = "omega vanished";
      return Outcome::breakdown;
    }
  }
  return Outcome::exhausted;
}

}  // namespace

std::vector<double> krylov_solve(const LinearOperator& op, const std::vector<double>& diag,
                                 const std::vector<double>& rhs, double tol, int max_iterations,
                                 KrylovReport* report) {
  const std::size_t n = rhs.size();
  std::vector<double> x(n, 0.0);
  KrylovReport rep;
  if (norm2(rhs) == 0.0) {
    if (report) *report = rep;
    return x;
  }
  std::vector<double> minv(n, 1.0);
  for (std::size_t i = 0; i < n && i < diag.size(); ++i) {
    if (diag[i] != 0.0 && std::isfinite(diag[i])) minv[i] = 1.0 / diag[i];
  }
  std::string why;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const Outcome out = bicgstab(op, minv, rhs, x, tol, max_iterations, rep.iterations, rep.relative_residual, why);
    if (out == Outcome::converged) {
      if (report) *report = rep;
      return x;
    }
    if (out == Outcome::exhausted) {
      std::ostringstream msg;
      msg << "BiCGSTAB exhausted " << max_iterations << " iterations, relative residual "
          << rep.relative_residual;
      throw Error(ErrorKind::max_iterations, msg.str());
    }
    if (attempt == 0) rep.restarts = 1;
  }
  if (report) *report = rep;
  std::ostringstream msg;
  msg << "BiCGSTAB breakdown after restart (" << why << ") at iteration " << rep.iterations
      << ", relative residual " << rep.relative_residual;
  throw Error(ErrorKind::breakdown, msg.str());
}

std::vector<double> krylov_solve(const SparseMatrix& a, const std::vector<double>& rhs, double tol,
                                 int max_iterations, KrylovReport* report) {
  LinearOperator op = [&a](const std::vector<double>& x, std::vector<double>& y) { y = a.apply(x); };
  return krylov_solve(op, a.diagonal(), rhs, tol, max_iterations, report);
}

// ---- -Delta_h ------------------------------------------------------------

Tridiagonal radial_negative_laplacian(const RadialMesh& m) {
  const int first = m.first_unknown();
  const int n = m.num_unknowns();
  Tridiagonal a(n);
  const double h = m.h();
  const double h2 = h * h;
  for (int k = 0; k < n; ++k) {
    const int i = first + k;
    if (i == 0) {
      a.diag[k] = 2.0 * m.dimension / h2;
      a.upper[k] = -2.0 * m.dimension / h2;
      continue;
    }
    const double adv = (m.dimension - 1) / m.r(i) / (2.0 * h);
    a.diag[k] = 2.0 / h2;
    a.lower[k] = -(1.0 / h2 - adv);
    a.upper[k] = -(1.0 / h2 + adv);
  }
  return a;
}

SparseMatrix grid_negative_laplacian(const Grid2D& g) {
  const double cx = 1.0 / (g.hx() * g.hx());
  const double cy = 1.0 / (g.hy() * g.hy());
  std::vector<SparseMatrix::Triplet> e;
  e.reserve(5 * g.num_unknowns());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int k = i + j * g.nx;
      e.push_back({k, k, 2.0 * cx + 2.0 * cy});
      if (i > 0) e.push_back({k, k - 1, -cx});
      if (i + 1 < g.nx) e.push_back({k, k + 1, -cx});
      if (j > 0) e.push_back({k, k - g.nx, -cy});
      if (j + 1 < g.ny) e.push_back({k, k + g.nx, -cy});
    }
  }
  return SparseMatrix::from_triplets(g.num_unknowns(), std::move(e));
}

// ---- eigenpair -----------------------------------------------------------

EigenPair principal_eigenpair(MeshPtr mesh) {
  if (!mesh) throw Error(ErrorKind::mesh_mismatch, "eigenpair without mesh");
  std::function<std::vector<double>(const std::vector<double>&)> apply, solve;
  std::optional<Tridiagonal> tri;
  std::optional<SparseMatrix> sp;
  std::optional<BandedLU> lu;
  if (const auto* rm = std::get_if<RadialMesh>(mesh.get())) {
    tri = radial_negative_laplacian(*rm);
    apply = [&](const std::vector<double>& x) { return tri->apply(x); };
    solve = [&](const std::vector<double>& b) { return tridiag_solve(*tri, b); };
  } else {
    sp = grid_negative_laplacian(std::get<Grid2D>(*mesh));
    lu.emplace(sp->to_banded());
    apply = [&](const std::vector<double>& x) { return sp->apply(x); };
    solve = [&](const std::vector<double>& b) { return lu->solve(b); };
  }
  // One step of iterative refinement keeps the solve error at rounding level.
  auto refined = [&](const std::vector<double>& b) {
    std::vector<double> y = solve(b);
    std::vector<double> ay = apply(y);
    std::vector<double> r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - ay[i];
    std::vector<double> dy = solve(r);
    for (std::size_t i = 0; i < b.size(); ++i) y[i] += dy[i];
    return y;
  };
  auto residual_of = [&](const std::vector<double>& x, double lam) {
    std::vector<double> ax = apply(x);
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(ax[i] - lam * x[i]));
    return m;
  };

  const int n = num_unknowns(*mesh);
  std::vector<double> x(n, 1.0);
  double lam = 0.0;
  double best_res = std::numeric_limits<double>::infinity();
  int stale = 0;
  bool lam_done = false;
  for (int it = 1; it <= 10000; ++it) {
    std::vector<double> y = refined(x);
    const double lam_new = dot(x, y) / dot(y, y);
    const double ymax = sup(y);
    // y has the sign of x for the principal mode; keep it positive.
    const double sign = std::accumulate(y.begin(), y.end(), 0.0) < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) x[i] = sign * y[i] / ymax;
    const double inc = std::abs(lam_new - lam);
    lam = lam_new;
    if (inc < 1e-12 * std::max(1.0, lam)) lam_done = true;
    if (!lam_done) continue;
    const double res = residual_of(x, lam);
    if (res < best_res * 0.5) {
      best_res = res;
      stale = 0;
    } else if (++stale >= 3) {
      EigenPair ep;
      ep.lambda1 = lam;
      ep.phi1 = DiscreteField::from_unknowns(mesh, x);
      ep.iterations = it;
      ep.residual = res;
      return ep;
    }
  }
  throw Error(ErrorKind::max_iterations, "inverse iteration did not converge in 1e4 iterations");
}

double richardson_eigenvalue(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

}  // namespace qgrad
