#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qgrad/assembly.hpp"
#include "qgrad/linear.hpp"
#include "qgrad/mesh.hpp"
#include "qgrad/model.hpp"

namespace qgrad {

struct SolverConfig {
  double residual_tol = 1e-10;  // sup norm, relative to the lambda f scale
  double step_tol = 1e-12;
  int max_newton = 200;
  double backtrack = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 40;
  double eps_pos = 1e-12;  // floor coefficient: u_i >= eps_pos * phi1_i
  double theta = 1.0;      // fixed-point relaxation
  int max_fixed_point = 500;
  FreezeMode freeze = FreezeMode::coefficient_only;
  int line_search_points = 16;
  int max_starts = 8;  // solve(): Newton starts before giving up

  /// Throws ErrorKind::invalid_spec unless all fields are positive and theta <= 1.
  void validate() const;
};

/// floor_degenerate: at least 1% of unknowns (or the sup norm) lie within 1e3
/// floor heights eps_pos phi1 of zero.
/// interior_degenerate: the residual converged but u has an interior local
/// minimum below kInteriorDip times its sup norm.
enum class SolveStatus { converged, diverged, max_iterations, floor_degenerate, interior_degenerate };
inline constexpr double kInteriorDip = 1e-3;
inline constexpr double kTrivialFactor = 1e3;  // floor heights below which u counts as zero
const char* to_string(SolveStatus s) noexcept;

struct SolveReport {
  SolveStatus status = SolveStatus::diverged;
  std::optional<DiscreteField> solution;  // last iterate, also on failure
  int iterations = 0;
  double residual = 0.0;   // sup norm of the final residual
  double threshold = 0.0;  // residual level that counted as converged
  double sup_norm = 0.0;
  double positivity_margin = 0.0;  // min over unknowns of u_i / phi1_i
  double holder_half = 0.0;        // Holder quotient at alpha = 1/2
  int floor_nodes = 0;  // unknowns within 1e3 floor heights of zero
  std::string diagnostics;

  bool converged() const noexcept { return status == SolveStatus::converged; }
};

/// Residual level treated as zero: tol * max(1, ||lambda f(u) + t u^sigma + h||_inf)
/// plus the rounding floor of -Delta_h at ||u||_inf.
double convergence_threshold(const ProblemSpec& spec, const DiscreteField& u, double tol);

/// Principal eigenpair, memoized per mesh (thread safe).
const EigenPair& cached_eigenpair(const MeshPtr& mesh);

/// c0 with lambda f(c0)/c0 + t c0^{sigma-1} = lambda_1, or 1 if no crossing.
double reference_amplitude(const ProblemSpec& spec, double lambda1);

/// Best c for the guess c * shape: 16-point logarithmic scan of
/// ||F(c shape)||_2 / c over [c_lo, c_hi], then one local rescan.
double line_search_amplitude(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& shape,
                             double c_lo, double c_hi, int points);

/// c phi1 with c chosen by line_search_amplitude around reference_amplitude.
DiscreteField initial_guess(const ProblemSpec& spec, const MeshPtr& mesh, const SolverConfig& cfg = {});

/// Quasilinear solve from initial_guess; on failure Newton restarts from the
/// other scan amplitudes, best score first, up to cfg.max_starts starts.
SolveReport solve(const ProblemSpec& spec, const MeshPtr& mesh, const SolverConfig& cfg = {});

/// Damped Newton with Armijo backtracking on 1/2 ||F||_2^2; iterates are
/// clipped to eps_pos * phi1 after each step.
SolveReport newton_solve(const ProblemSpec& spec, const ResidualKind& kind, const DiscreteField& u0,
                         const SolverConfig& cfg = {});

struct FixedPointStep {
  double step = 0.0;      // sup |u_{k+1} - u_k|
  double residual = 0.0;  // quasilinear residual of u_{k+1}
  int inner_iterations = 0;
};

struct FixedPointResult {
  SolveReport report;
  std::vector<FixedPointStep> history;
};

/// u_{k+1} = (1 - theta) u_k + theta K(u_k): K solves the problem frozen at
/// u_k in mode cfg.freeze.
FixedPointResult fixed_point_K(const ProblemSpec& spec, const DiscreteField& u0, const SolverConfig& cfg = {});

struct SweepRecord {
  double param = 0.0;
  double sup_norm = 0.0;
  double scaled_norm = 0.0;
  SolveStatus status = SolveStatus::diverged;
  int iterations = 0;
  double residual = 0.0;
};

struct SweepTable {
  std::string parameter;  // "lambda" or "t"
  std::vector<SweepRecord> records;
  std::vector<SolveReport> reports;  // parallel to records

  void write_csv(std::ostream& os) const;
  std::string to_csv() const;
};

/// Sequential sweep, each lambda warm-started from the last converged one.
/// scaled_norm = lambda^{1/(p-1)} ||u||_inf.
SweepTable continuation_lambda(const ProblemSpec& spec, const MeshPtr& mesh, const std::vector<double>& grid,
                               const SolverConfig& cfg = {});

struct TSweepResult {
  SweepTable table;
  std::optional<double> t_fail;
};

/// Upward t sweep. t_fail is the first t where the warm start and the three
/// guesses c phi1, c in {0.1, 1, 10} c0, all fail.
TSweepResult continuation_t(const ProblemSpec& spec, const MeshPtr& mesh, const std::vector<double>& grid,
                            const SolverConfig& cfg = {});

}  // namespace qgrad
