#include <cmath>

#include <doctest.h>

#include "qgrad/error.hpp"
#include "qgrad/nonlinear.hpp"
#include "qgrad/transforms.hpp"

using namespace qgrad;

namespace {

MeshPtr ball(int M) { return make_mesh(RadialMesh::ball(3, 1.0, M)); }

ProblemSpec model(double mu, double delta, double gamma, double p) {
  ProblemSpec s;
  s.g.mu.value = mu;
  s.g.delta = delta;
  s.g.gamma = gamma;
  s.f.p = p;
  return s;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io_error;
}

}  // namespace

TEST_SUITE("transforms") {
  TEST_CASE("semilinearize preconditions") {
    ProblemSpec s = model(0.3, 0.5, 1, 3);
    s.g.mu.kind = MuKind::piecewise;
    CHECK(kind_of([&] { semilinearize(s); }) == ErrorKind::unsupported_transform);
    s = model(0.3, 0.5, 1, 3);
    s.t = 1;
    CHECK(kind_of([&] { semilinearize(s); }) == ErrorKind::unsupported_transform);
    s = model(0.3, 0.5, 1, 3);
    s.g.kind = GKind::constant_over_s;
    CHECK(kind_of([&] { semilinearize(s); }) == ErrorKind::unsupported_transform);

    const TransformedProblem id = semilinearize(model(0.0, 0.0, 1, 3));
    CHECK(id.forward(2.5) == 2.5);
  }

  TEST_CASE("semilinearized nonlinearity") {
    // psi = ((s+d)^{1-mu} - d^{1-mu}) d^mu/(1-mu), psi' = (d/(s+d))^mu
    const double mu = 0.3, d = 0.5;
    const TransformedProblem tp = semilinearize(model(mu, d, 1, 3));
    CHECK(tp.spec.g.mu.value == 0.0);
    for (double s : {0.01, 0.3, 2.0, 10.0}) {
      const double y = std::pow(d, mu) * (std::pow(s + d, 1 - mu) - std::pow(d, 1 - mu)) / (1 - mu);
      CHECK(tp.forward(s) == doctest::Approx(y).epsilon(1e-12));
      CHECK(tp.inverse(y) == doctest::Approx(s).epsilon(1e-10));
      CHECK(eval_f(tp.spec.f, y) == doctest::Approx(std::pow(d / (s + d), mu) * s * s * s).epsilon(1e-10));
    }
  }

  TEST_CASE("power transform of a converged solution") {
    ProblemSpec s = model(0.3, 0.0, 1, 3);
    s.lambda = 2;
    const SolveReport r = solve(s, ball(400));
    REQUIRE(r.converged());
    const PowerTransformDefect d = power_transform_check(*r.solution, 0.3, 2, 3);
    CHECK(d.exponent == doctest::Approx(2.7 / 0.7));
    CHECK(d.c == doctest::Approx(std::pow(0.7 * 2, 0.7 / 2)));
    CHECK(d.v[0] == doctest::Approx(d.c * std::pow((*r.solution)[0], 0.7)));
    CHECK(kind_of([&] { power_transform_check(*r.solution, 1.0, 2, 3); }) == ErrorKind::invalid_spec);

    // mu = 0: v = lambda^{1/(p-1)} u solves -Delta v = v^p to solver tolerance
    ProblemSpec z = model(0.0, 0.0, 1, 3);
    z.lambda = 4;
    const SolveReport rz = solve(z, ball(400));
    REQUIRE(rz.converged());
    const PowerTransformDefect dz = power_transform_check(*rz.solution, 0.0, 4, 3);
    CHECK(dz.c == doctest::Approx(2.0));
    CHECK(dz.defect < 1e-6 * std::pow(dz.v.sup_norm(), 3));
  }

  TEST_CASE("power transform defect: second order inside, boundary layer at the wall") {
    // The d^{1/(1-mu)} layer has u(h)/u(2h) = 2^{-1/(1-mu)}; the three-point
    // scheme gives (1-mu)/(2-mu), so -Delta_h v is off by O(1/h) at r = R - h.
    const double mu = 0.3;
    std::vector<double> inner, full;
    for (int M : {250, 500, 1000}) {
      ProblemSpec s = model(mu, 0.0, 1, 3);
      const SolveReport r = solve(s, ball(M));
      REQUIRE(r.converged());
      const PowerTransformDefect d = power_transform_check(*r.solution, mu, 1, 3);
      const DiscreteField lap = laplacian(d.v);
      double e = 0;
      for (int i = 0; i <= 9 * M / 10; ++i) e = std::max(e, std::abs(-lap[i] - std::pow(d.v[i], d.exponent)));
      inner.push_back(e);
      full.push_back(d.defect);
      CHECK((*r.solution)[M - 1] / (*r.solution)[M - 2] == doctest::Approx((1 - mu) / (2 - mu)).epsilon(0.01));
    }
    CHECK(std::log2(inner[0] / inner[1]) >= 1.8);
    CHECK(std::log2(inner[1] / inner[2]) >= 1.8);
    CHECK(full[2] > full[1]);
  }

  TEST_CASE("gamma transform maps solutions") {
    ProblemSpec s = model(0.3, 1.0, 2.0, 3);
    s.lambda = 1;
    CHECK(kind_of([&] { gamma_transform(s, 1.0); }) == ErrorKind::unsupported_transform);
    const TransformedProblem tp = gamma_transform(s, 2.0);
    REQUIRE(tp.meta.b);
    CHECK(tp.spec.lambda == doctest::Approx(s.lambda * 2.0 / *tp.meta.b));
    for (double u : {1e-6, 0.1, 1.0, 30.0}) {
      CHECK(tp.forward(u) == doctest::Approx(std::pow(u + 1, 2) - 1).epsilon(1e-12));
      CHECK(tp.inverse(tp.forward(u)) == doctest::Approx(u).epsilon(1e-10));
    }
    const MeshPtr mesh = ball(400);
    const SolveReport a = solve(s, mesh);
    const SolveReport b = solve(tp.spec, mesh);
    REQUIRE(a.converged());
    REQUIRE(b.converged());
    CHECK(tp.map_inverse(*b.solution).sup_norm() == doctest::Approx(a.sup_norm).epsilon(1e-3));
  }

  TEST_CASE("truncations") {
    const ProblemSpec s = model(0.4, 0.0, 1, 3);
    const TransformedProblem t = truncate_at_s0(s, 0.5);
    const DomainSpec dom;
    CHECK(eval_f(t.spec.f, 0.3) == doctest::Approx(eval_f(s.f, 0.3)));
    CHECK(eval_g(t.spec.g, dom, {0.2, 0}, 0.3) == doctest::Approx(eval_g(s.g, dom, {0.2, 0}, 0.3)));
    // f(s0) (s/s0)^p = s^p for a pure power; s0 g(s0)/s = mu/s for mu/s
    CHECK(eval_f(t.spec.f, 4.0) == doctest::Approx(64.0));
    CHECK(eval_g(t.spec.g, dom, {0.2, 0}, 4.0) == doctest::Approx(0.1));

    ProblemSpec h = model(0.4, 1.0, 2.0, 3);
    const TransformedProblem th = truncate_at_s0(h, 0.5);
    CHECK(eval_g(th.spec.g, dom, {0.2, 0}, 3.0) == doctest::Approx(0.5 * 0.4 / 2.25 / 3.0));

    const TransformedProblem d = truncate_at_delta(s, 0.5);
    CHECK(eval_f(d.spec.f, 4.0) == doctest::Approx(64.0));
    CHECK(eval_g(d.spec.g, dom, {0.2, 0}, 0.25) == doctest::Approx(1.6));
    CHECK(eval_g(d.spec.g, dom, {0.2, 0}, 2.0) == doctest::Approx(0.5 * 0.8 / 2.0));
  }

  TEST_CASE("blow-up rescaling") {
    const MeshPtr mesh = ball(400);
    const DiscreteField u = DiscreteField::sample(mesh, [](Point p) { return 100 * (1 - p.x * p.x); });
    const BlowupProfile b = blowup_rescale(u, 3.0, 0.5, 101);
    CHECK(b.eta == doctest::Approx(0.01));
    CHECK(b.argmax == 0);
    REQUIRE(b.values.size() == 101);
    CHECK(b.values[50] == doctest::Approx(1.0));
    // eta^{2/(p-1)} u(eta y) = 1 - 1e-4 y^2, reflected through the center
    CHECK(b.values[0] == doctest::Approx(1 - 1e-4 * 0.25).epsilon(1e-9));
    CHECK(b.values[100] == doctest::Approx(b.values[0]));
    CHECK_FALSE(b.clipped);
  }
}
