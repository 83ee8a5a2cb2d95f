#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qgrad/mesh.hpp"
#include "qgrad/model.hpp"

namespace qgrad {

struct TransformMetadata {
  std::string name;
  std::optional<double> mu, delta, gamma, sigma, b, c;
  std::optional<double> p_gamma, threshold, anchor, lambda_factor;
  bool b_grid_limited = false;  // no b works down to s = 0; b is the grid supremum
};

/// A transformed problem and the node-wise maps between unknowns:
/// forward takes an original value s to the new unknown, inverse goes back.
struct TransformedProblem {
  ProblemSpec spec;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  TransformMetadata meta;

  DiscreteField map_forward(const DiscreteField& u) const;
  DiscreteField map_inverse(const DiscreteField& v) const;
};

/// Removes the gradient term of a constant-mu model-singular problem:
/// new f = phi(t) = psi'(psi^{-1}(t)) lambda f(psi^{-1}(t)), g = 0, lambda = 1.
/// Throws ErrorKind::unsupported_transform for nonconstant mu, t > 0 or a source.
TransformedProblem semilinearize(const ProblemSpec& spec);

struct PowerTransformDefect {
  double c = 0.0;
  double exponent = 0.0;  // (p - mu) / (1 - mu)
  double defect = 0.0;    // sup |-Delta_h v - v^exponent| over unknowns
  DiscreteField v;
};

/// v = c u^{1-mu}, c = ((1-mu) lambda)^{(1-mu)/(p-1)}. Throws
/// ErrorKind::invalid_spec for mu >= 1.
PowerTransformDefect power_transform_check(const DiscreteField& u, double mu, double lambda, double p);

struct GammaTableOptions {
  double s_min = 1e-12;
  double s_max = 1e9;
  int per_decade = 1000;
};

/// v = (u + delta)^gamma - delta^gamma with f_gamma, g_gamma materialized as
/// monotone tables. lambda is multiplied by gamma / b so solutions correspond
/// exactly; b defaults to 1.01 times the grid supremum of s^{p_gamma} / f_gamma.
/// Throws ErrorKind::unsupported_transform for gamma <= 1.
TransformedProblem gamma_transform(const ProblemSpec& spec, double gamma, std::optional<double> b = std::nullopt,
                                   const GammaTableOptions& opt = {});

/// g -> g below s0, s0 g(x,s0)/s above; f -> f below s0, f(s0) (s/s0)^p above.
TransformedProblem truncate_at_s0(const ProblemSpec& spec, double s0);
/// g -> g below delta_t, delta_t g(x,delta_t)/s above; f unchanged.
TransformedProblem truncate_at_delta(const ProblemSpec& spec, double delta_t);

struct BlowupProfile {
  double eta = 0.0;  // ||u||^{-(p-1)/2}
  int argmax = 0;
  std::vector<double> y;
  std::vector<double> values;  // eta^{2/(p-1)} u(x_max + eta y)
  bool clipped = false;        // window left the domain or max next to the boundary
};

/// Samples the blow-up rescaling on y in [-window, window] (radial meshes use
/// r = r_max + eta y; grids use the x-line through the maximum).
BlowupProfile blowup_rescale(const DiscreteField& u, double p, double window = 1.0, int samples = 201);

}  // namespace qgrad
