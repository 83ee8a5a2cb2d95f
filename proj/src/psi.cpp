#include "qgrad/psi.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "qgrad/error.hpp"

namespace qgrad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-12;
constexpr int kMaxDepth = 40;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::domain_error, what); }

// Inner integral is finite for every s > 0 only if the kernel is integrable
// at the anchor.
void require_inner(const PsiParams& prm) {
  if (prm.mu == 0.0) return;
  if (prm.anchor < 0.0) fail("psi anchor must be nonnegative");
  if (prm.delta < 0.0) fail("psi delta must be nonnegative");
  if (!(prm.gamma > 0.0)) fail("psi gamma must be positive");
  if (prm.anchor + prm.delta == 0.0 && prm.gamma >= 1.0) {
    fail("psi kernel is not integrable at 0; use delta > 0, gamma < 1 or a positive anchor");
  }
}

// psi itself is finite iff exp(-I) is integrable at 0.
void require_outer(const PsiParams& prm) {
  require_inner(prm);
  if (prm.mu == 0.0 || prm.delta > 0.0) return;
  if (prm.gamma == 1.0 && prm.mu >= 1.0) fail("psi diverges at 0 for gamma = 1, delta = 0, mu >= 1");
  if (prm.gamma > 1.0 && prm.mu < 0.0) fail("psi diverges at 0 for gamma > 1, delta = 0, mu < 0");
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                    double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth >= kMaxDepth || std::abs(diff) <= 15.0 * tol) {
    return left + right + diff / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // Relative floor: an absolute 1e-12 is below rounding for large integrals.
  const double eff = std::max(tol, 1e-15 * std::abs(whole));
  return simpson_step(f, a, b, fa, fm, fb, whole, eff, 0);
}

// Graded panels toward 0 so endpoint layers are resolved.
double integrate_from_zero(const std::function<double(double)>& f, double s) {
  constexpr int kPanels = 50;
  double total = 0.0;
  double lo = 0.0;
  for (int k = kPanels; k >= 0; --k) {
    const double hi = std::ldexp(s, -k);
    total += simpson(f, lo, hi, kQuadTol / (kPanels + 1));
    lo = hi;
  }
  return total;
}

}  // namespace

double psi_kernel(const PsiParams& prm, double s) {
  if (prm.mu == 0.0) return 0.0;
  const double base = s + prm.delta;
  if (base <= 0.0) return prm.mu > 0.0 ? kInf : -kInf;
  return prm.mu / std::pow(base, prm.gamma);
}

double psi_inner_integral(const PsiParams& prm, double s) {
  if (prm.mu == 0.0) return 0.0;
  require_inner(prm);
  const double c = prm.anchor + prm.delta;
  const double x = s + prm.delta;
  if (prm.gamma == 1.0) {
    if (x == 0.0) return prm.mu > 0.0 ? -kInf : kInf;
    return prm.mu * std::log(x / c);
  }
  const double e = 1.0 - prm.gamma;
  return prm.mu * (std::pow(x, e) - std::pow(c, e)) / e;
}

double psi_derivative(const PsiParams& prm, double s) {
  if (prm.mu == 0.0) return 1.0;
  return std::exp(-psi_inner_integral(prm, s));
}

double psi_forward(const PsiParams& prm, double s) {
  if (!(s >= 0.0)) fail("psi_forward requires s >= 0");
  if (s == 0.0) return 0.0;
  if (prm.mu == 0.0) return s;
  require_outer(prm);
  const double c = prm.anchor + prm.delta;
  if (prm.gamma == 1.0) {
    const double mu = prm.mu;
    if (mu == 1.0) return c * std::log((s + prm.delta) / prm.delta);
    const double e = 1.0 - mu;
    return std::pow(c, mu) * (std::pow(s + prm.delta, e) - std::pow(prm.delta, e)) / e;
  }
  return integrate_from_zero([&](double t) { return psi_derivative(prm, t); }, s);
}

double psi_supremum(const PsiParams& prm) {
  if (prm.mu <= 0.0) return kInf;
  require_outer(prm);
  if (prm.gamma > 1.0) return kInf;  // kernel integrable at infinity, psi' -> const > 0
  if (prm.gamma == 1.0) {
    if (prm.mu <= 1.0) return kInf;
    const double c = prm.anchor + prm.delta;
    return std::pow(c, prm.mu) * std::pow(prm.delta, 1.0 - prm.mu) / (prm.mu - 1.0);
  }
  // gamma < 1: psi' decays like exp(-mu s^{1-gamma}/(1-gamma)).
  auto f = [&](double t) { return psi_derivative(prm, t); };
  double total = integrate_from_zero(f, 1.0);
  for (double lo = 1.0; lo < 1e300; lo *= 2.0) {
    const double piece = simpson(f, lo, 2.0 * lo, kQuadTol);
    total += piece;
    if (piece <= 1e-17 * total && f(2.0 * lo) * lo <= 1e-17 * total) break;
  }
  return total;
}

double psi_inverse(const PsiParams& prm, double y) {
  if (!(y >= 0.0)) fail("psi_inverse requires y >= 0");
  if (y == 0.0) return 0.0;
  if (prm.mu == 0.0) return y;
  require_outer(prm);
  const double sup = psi_supremum(prm);
  if (!(y < sup)) {
    std::ostringstream msg;
    msg << "psi_inverse: " << y << " is outside the range of psi (sup " << sup << ")";
    fail(msg.str());
  }
  const double c = prm.anchor + prm.delta;
  if (prm.gamma == 1.0) {
    if (prm.mu == 1.0) return prm.delta * std::expm1(y / c);
    const double e = 1.0 - prm.mu;
    const double inner = std::pow(prm.delta, e) + e * y / std::pow(c, prm.mu);
    return std::pow(inner, 1.0 / e) - prm.delta;
  }
  double lo = 0.0;
  double hi = std::max(1.0, y);
  while (psi_forward(prm, hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) fail("psi_inverse: bracket search overflow");
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double val = psi_forward(prm, s) - y;
    if (std::abs(val) <= 1e-12 * std::max(1.0, y)) return s;
    if (val > 0.0) hi = s; else lo = s;
    const double d = psi_derivative(prm, s);
    double next = s - val / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
    s = next;
  }
  fail("psi_inverse did not converge");
}

}  // namespace qgrad
