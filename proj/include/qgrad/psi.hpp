#pragma once

namespace qgrad {

/// Parameters of the gradient-removing change of unknown
///
///   psi(s) = int_0^s exp(-int_anchor^t k(r) dr) dt,   k(r) = mu / (r + delta)^gamma.
///
/// With anchor = 0 the inner integral must converge at 0 (delta > 0 or
/// gamma < 1). A positive anchor only rescales psi by a constant factor.
struct PsiParams {
  double mu = 0.0;
  double delta = 0.0;
  double gamma = 1.0;
  double anchor = 0.0;

  friend bool operator==(const PsiParams&, const PsiParams&) = default;
};

/// k(s) = mu / (s + delta)^gamma.
double psi_kernel(const PsiParams& params, double s);

/// int_anchor^s k(r) dr in closed form.
double psi_inner_integral(const PsiParams& params, double s);

/// psi'(s) = exp(-int_anchor^s k).
double psi_derivative(const PsiParams& params, double s);

/// psi(s) for s >= 0. Closed forms for gamma = 1 and for mu = 0; otherwise
/// adaptive Simpson quadrature (absolute tolerance 1e-12, at most 40
/// bisection levels). Throws ErrorKind::domain_error when the integral does
/// not exist.
double psi_forward(const PsiParams& params, double s);

/// Inverse of psi_forward: safeguarded Newton/bisection to 1e-12 relative.
/// Throws ErrorKind::domain_error for negative y or y beyond sup psi.
double psi_inverse(const PsiParams& params, double y);

/// sup_{s>0} psi(s), +infinity when psi is unbounded.
double psi_supremum(const PsiParams& params);

}  // namespace qgrad
