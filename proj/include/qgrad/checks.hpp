#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qgrad/mesh.hpp"
#include "qgrad/model.hpp"
#include "qgrad/nonlinear.hpp"

namespace qgrad {

struct CheckVerdict {
  std::string name;
  bool pass = true;
  bool precondition_violated = false;
  std::optional<double> witness_param;  // s, lambda, ... where violated
  std::optional<int> witness_node;
  double margin = 0.0;
  std::string detail;
};

struct PsiCheckOptions {
  double L = 1.0;
  double anchor = 1.0;
  double s_min = 1e-6;
  double s_max = 1e6;
  int points = 1000;
};

/// Tests that H(s) = psi'(s) s^p / psi(s)^{2*-1} decreases on a log grid,
/// where psi'(s) = exp(-int_{anchor}^{s/L} g(x0, r) dr). The verdict follows
/// the pointwise form (p - tau g(x0,tau)) psi(s) < (2*-1) s psi'(s), tau = s/L;
/// `detail` notes any disagreement with the sampled monotonicity of H.
CheckVerdict check_psi_decreasing(const GradientCoefSpec& g, const DomainSpec& domain, Point x0, double p, int N,
                                  const PsiCheckOptions& opt = {});

/// A(w) = -Delta_h w + g(x,w) |grad_h w|^2 at unknown nodes.
DiscreteField gradient_operator(const GradientCoefSpec& g, const DomainSpec& domain, const DiscreteField& w);

/// Discrete comparison: requires A(u) <= h <= A(v) at unknowns, u <= v on the
/// boundary and sampled (s g) nondecreasing with s g <= sigma < 1; then
/// asserts u <= v + 1e-10 everywhere.
CheckVerdict comparison_check(const DiscreteField& u, const DiscreteField& v, const std::vector<double>& h,
                              const GradientCoefSpec& g, const DomainSpec& domain);

/// D = (N-2)/2 int |grad v|^2 - N/(q+1) int v^{q+1} + 1/2 int_{boundary} (x.nu)(dv/dnu)^2
/// on a radial ball mesh: trapezoid rule in r over central-difference v', with
/// v'(0) = 0 and a 3-point one-sided derivative at r = R.
double pohozaev_defect(const DiscreteField& v, double q);

/// Solves -Delta_h v = v^q on a ball mesh: solve() first, then Newton from
/// concentrated guesses A ((1 + r^2/e^2)^{-1/2} - (1 + R^2/e^2)^{-1/2}) with
/// e = h/2 ... 32h and A = 1 ... 3e4. Supercritical q only has mesh-scale
/// solutions: a center spike u_0 = (2N/h^2)^{1/(q-1)} over a tail at the floor.
/// It is returned with its floor-degenerate status once the residual meets the
/// threshold and the sup norm is nontrivial.
SolveReport pohozaev_solve(const MeshPtr& mesh, double q, const SolverConfig& cfg = {});

/// max |u(x) - u(y)| / |x - y|^alpha over all node pairs (radial meshes) or
/// 1e5 low-discrepancy node pairs (grids).
double holder_quotient(const DiscreteField& u, double alpha, int pairs_2d = 100000);

struct AprioriResult {
  SweepTable table;
  CheckVerdict verdict;
  double max_over_median = 0.0;
};

/// continuation_lambda plus the verdict max scaled norm <= 1.05 median.
AprioriResult apriori_scaled_sweep(const ProblemSpec& spec, const MeshPtr& mesh, const std::vector<double>& grid,
                                   const SolverConfig& cfg = {});

struct ProbeLevel {
  int resolution = 0;
  SolveStatus status = SolveStatus::diverged;
  int iterations = 0;
  double residual = 0.0;
  double integral_h_over_u = 0.0;  // quadrature of h/u
  double min_u_outer = 0.0;        // min u at unknowns outside omega
  std::string diagnostics;
};

struct ProbeOptions {
  int base_resolution = 200;
  int levels = 3;
  int workers = 1;
};

struct NonexistenceReport {
  std::vector<ProbeLevel> levels;
  bool trivial_instance = false;
  bool degenerate = false;     // the degeneration verdict
  double max_ih_change = 0.0;  // largest relative I_h change between levels
  std::string detail;

  void write_csv(std::ostream& os) const;
};

/// Runs fixed_point_K on base_resolution * 2^k, k < levels. Verdict: every
/// level fails, or each refinement either fails or multiplies I_h by >= 1.5.
NonexistenceReport nonexistence_probe(const ProblemSpec& spec, const ProbeOptions& opt = {},
                                      const SolverConfig& cfg = {});

}  // namespace qgrad
