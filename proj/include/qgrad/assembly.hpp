#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "qgrad/linear.hpp"
#include "qgrad/mesh.hpp"
#include "qgrad/model.hpp"

namespace qgrad {

/// What the frozen problem keeps from v.
///   full             -Delta u + (v+delta) g(x,v) |grad u|^2 / (u+delta) = lambda f(v) + t v^sigma
///   coefficient_only -Delta u + (v+delta) g(x,v) |grad u|^2 / (u+delta) = lambda f(u) + t u^sigma
enum class FreezeMode { coefficient_only, full };

/// Residual selector shared by assembly and the Newton solver.
struct ResidualKind {
  enum class Kind { quasilinear, frozen };
  Kind kind = Kind::quasilinear;
  std::optional<DiscreteField> frozen_at;
  FreezeMode mode = FreezeMode::full;
  /// Optional nodal right-hand side added to lambda f + t u^sigma + h (size = nodes).
  std::vector<double> extra_source;

  static ResidualKind quasilinear();
  static ResidualKind frozen(DiscreteField v, FreezeMode mode = FreezeMode::full);
};

/// F_i = -Delta_h u_i + g(x_i,u_i) |grad_h u|_i^2 - lambda f(u_i) - t u_i^sigma_t - h(x_i)
/// at unknown nodes; zero at fixed boundary nodes. Throws
/// ErrorKind::domain_error carrying the node when a singular g meets u <= 0.
DiscreteField residual_quasilinear(const ProblemSpec& spec, const DiscreteField& u);
DiscreteField residual_frozen(const ProblemSpec& spec, const DiscreteField& v, const DiscreteField& u,
                              FreezeMode mode = FreezeMode::full);
DiscreteField residual(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& u);

/// Analytic Jacobian with respect to the unknowns: tridiagonal on radial
/// meshes, five-point CSR on grids.
using Jacobian = std::variant<Tridiagonal, SparseMatrix>;
Jacobian jacobian(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& u);

std::vector<double> jacobian_apply(const Jacobian& j, const std::vector<double>& x);
/// Direct tridiagonal solve, or BiCGSTAB with a banded LU fallback on grids.
std::vector<double> jacobian_solve(const Jacobian& j, const std::vector<double>& rhs);
/// Column k of the Jacobian as a dense vector.
std::vector<double> jacobian_column(const Jacobian& j, int k);

}  // namespace qgrad
