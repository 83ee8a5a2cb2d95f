#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qgrad/psi.hpp"
#include "qgrad/table.hpp"

namespace qgrad {

/// A location in the domain. Radial meshes use `x` as the radius r.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class DomainKind { radial_ball, radial_annulus, rectangle };

struct DomainSpec {
  DomainKind kind = DomainKind::radial_ball;
  int dimension = 3;
  double outer_radius = 1.0;
  double inner_radius = 0.0;  // annulus only
  double width = 1.0;         // rectangle only
  double height = 1.0;        // rectangle only

  bool radial() const noexcept { return kind != DomainKind::rectangle; }
  /// Distance from the symmetry center: r for radial kinds, |x - c| for the
  /// rectangle [0,width] x [0,height] with c its midpoint.
  double center_distance(Point pt) const noexcept;
  /// Throws ErrorKind::invalid_dimension or ErrorKind::invalid_spec.
  void validate() const;

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Inner subdomain omega. Radial domains use the shell r_lo < r < r_hi
/// (r_lo = 0 gives a centered ball); rectangles use [x_lo,x_hi] x [y_lo,y_hi].
struct InnerRegion {
  double r_lo = 0.0;
  double r_hi = 0.5;
  double x_lo = 0.25, x_hi = 0.75;
  double y_lo = 0.25, y_hi = 0.75;

  bool contains(const DomainSpec& domain, Point pt) const noexcept;
  bool strictly_interior(const DomainSpec& domain) const noexcept;

  friend bool operator==(const InnerRegion&, const InnerRegion&) = default;
};

enum class MuKind { constant, radial_profile, piecewise };

/// The coefficient field mu(x).
struct MuFieldSpec {
  MuKind kind = MuKind::constant;
  double value = 0.0;            // constant
  MonotoneTable profile;         // radial_profile: mu as a function of center distance
  double inner_value = 0.0;      // piecewise: mu inside omega
  double outer_value = 0.0;      // piecewise: mu outside omega
  InnerRegion omega;

  double operator()(const DomainSpec& domain, Point pt) const;
  bool is_constant() const noexcept { return kind == MuKind::constant; }
  void validate(const DomainSpec& domain) const;

  friend bool operator==(const MuFieldSpec&, const MuFieldSpec&) = default;
};

enum class FKind { pure_power, shifted_power, table, semilinearized, truncated };

/// The zero-order nonlinearity f.
struct NonlinearitySpec {
  FKind kind = FKind::pure_power;
  double p = 2.0;
  double a = 1.0;      // shifted_power coefficient; also the (f_*) constant
  double shift = 0.0;  // shifted_power: a (s + shift)^p
  std::optional<double> limit_L;
  bool declares_f_star = false;
  bool declares_f_zero = false;

  MonotoneTable table;

  // semilinearized: phi(t) = psi'(s) * scale * base(s), s = psi^{-1}(t)
  PsiParams psi;
  double scale = 1.0;

  // truncated: base(s) below threshold, base(s0) / s0^p * s^p above
  double threshold = 0.0;

  std::shared_ptr<const NonlinearitySpec> base;

  friend bool operator==(const NonlinearitySpec& a, const NonlinearitySpec& b);
};

enum class GKind { model_singular, constant_over_s, table, truncated };

/// The gradient coefficient g(x, s).
///
///   model_singular   mu(x) / (s + delta)^gamma
///   constant_over_s  coefficient / s
///   table            (mu(x) A(s) + B(s)) / (s + offset)
///   truncated        base below threshold, threshold * base(x, threshold) / s above
struct GradientCoefSpec {
  GKind kind = GKind::model_singular;
  double gamma = 1.0;
  double delta = 0.0;
  MuFieldSpec mu;
  double coefficient = 0.0;

  MonotoneTable table_mu;    // A(s); empty means A = 0
  MonotoneTable table_free;  // B(s); empty means B = 0
  double offset = 0.0;

  double threshold = 0.0;
  std::shared_ptr<const GradientCoefSpec> base;

  // Declared structural conditions, checked by validate_spec.
  std::optional<double> tau;        // lower bound of (s + delta) g
  std::optional<double> sigma;      // upper bound of (s + delta) g
  bool declares_nonnegative = false;
  bool declares_g_infinity = false;
  bool declares_monotone_sg = false;
  MonotoneTable majorant;           // G(s) on (0, majorant_s0); empty if undeclared
  double majorant_s0 = 1.0;

  friend bool operator==(const GradientCoefSpec& a, const GradientCoefSpec& b);
};

/// Optional source term h(x) added to the right-hand side. `bump` is the
/// smooth compactly supported amplitude * exp(1 - 1 / (1 - (rho/radius)^2)).
struct SourceSpec {
  enum class Kind { none, bump } kind = Kind::none;
  double amplitude = 1.0;
  double radius = 0.25;

  double operator()(const DomainSpec& domain, Point pt) const noexcept;
  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

/// -Delta u + g(x,u)|grad u|^2 = lambda f(u) + t u^sigma_t + h(x),  u = 0 on the boundary.
struct ProblemSpec {
  DomainSpec domain;
  double lambda = 1.0;
  NonlinearitySpec f;
  GradientCoefSpec g;
  double t = 0.0;
  double sigma_t = 0.5;
  SourceSpec source;

  /// Structural validation; throws Error (invalid_dimension, invalid_spec,
  /// invalid_table).
  void validate() const;

  friend bool operator==(const ProblemSpec& a, const ProblemSpec& b);
};

struct Thresholds {
  double two_star = 0.0;
  double sigma1 = 0.0;  // (2* - 1 - p) / (2* - 2)
  double sigma2 = 0.0;  // (N - (N - 2) p) / 2
  double sigma3 = 0.0;  // (N + 1 - (N - 1) p) / 2
};

/// 2N / (N - 2). Throws ErrorKind::invalid_dimension for N < 3.
double two_star(int N);
Thresholds thresholds(int N, double p);

double eval_f(const NonlinearitySpec& f, double s);
double eval_df(const NonlinearitySpec& f, double s);
double eval_g(const GradientCoefSpec& g, const DomainSpec& domain, Point x, double s);
/// d/ds g(x, s).
double eval_dg(const GradientCoefSpec& g, const DomainSpec& domain, Point x, double s);
/// (s + delta) g(x, s) with delta the spec's g.delta.
double eval_sg(const GradientCoefSpec& g, const DomainSpec& domain, Point x, double s);

double eval_f(const ProblemSpec& spec, double s);
double eval_g(const ProblemSpec& spec, Point x, double s);
double eval_sg(const ProblemSpec& spec, Point x, double s);

/// Decomposition (s + delta) g(x, s) = mu(x) alpha(s) + beta(s) used to
/// materialize transformed coefficients; `alpha` multiplies the mu-field.
struct SgSplit {
  double alpha = 0.0;
  double beta = 0.0;
};
SgSplit split_sg(const GradientCoefSpec& g, double s);
/// The mu-field that multiplies `alpha` in split_sg.
const MuFieldSpec& split_mu(const GradientCoefSpec& g);

struct ConditionResult {
  std::string name;
  bool satisfied = true;
  std::optional<Point> witness_x;
  std::optional<double> witness_s;
  double margin = 0.0;  // worst slack found; negative when violated
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  bool ok() const noexcept;
  const ConditionResult* find(const std::string& name) const noexcept;
};

/// Log-spaced s-grid on [1e-8, 1e8], 10 points per decade (161 points).
std::vector<double> condition_sample_grid();

/// Deterministic x-samples: 65 equispaced radii on [a, R] for radial kinds,
/// a 17 x 17 lattice (boundary included) for rectangles.
std::vector<Point> domain_sample_points(const DomainSpec& domain);

/// Checks every declared structural condition on the fixed sample grids.
ValidationReport validate_spec(const ProblemSpec& spec);

}  // namespace qgrad
