#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "qgrad/checks.hpp"
#include "qgrad/error.hpp"

using namespace qgrad;

namespace {

MeshPtr ball(int M) { return make_mesh(RadialMesh::ball(3, 1.0, M)); }

template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_SUITE("checks") {
  TEST_CASE("Pohozaev defect of 1 - r^2 against dense quadrature") {
    const double q = 3.0, w = 4 * std::numbers::pi;
    // (N-2)/2 int |v'|^2 r^2 - N/(q+1) int v^{q+1} r^2 + (1/2) R^N v'(R)^2, times |S^2|
    const double grad = simpson([](double r) { return 4 * r * r * r * r; }, 0, 1, 20000);
    const double pow = simpson([&](double r) { return std::pow(1 - r * r, q + 1) * r * r; }, 0, 1, 20000);
    const double dense = w * (0.5 * grad - 3.0 / (q + 1) * pow + 0.5 * 4.0);
    const DiscreteField v = DiscreteField::sample(ball(4000), [](Point p) { return 1 - p.x * p.x; });
    CHECK(std::abs(pohozaev_defect(v, q) - dense) < 1e-6);
    CHECK(pohozaev_defect(DiscreteField(ball(50)), q) == 0.0);
    CHECK_THROWS_AS(pohozaev_defect(DiscreteField(make_mesh(RadialMesh::annulus(3, 0.5, 1, 20))), q), Error);
  }

  TEST_CASE("Holder quotient") {
    const MeshPtr line = make_mesh(RadialMesh::interval(1.0, 100));
    const DiscreteField x = DiscreteField::sample(line, [](Point p) { return p.x; });
    CHECK(holder_quotient(x, 0.5) == doctest::Approx(1.0));
    const DiscreteField c = DiscreteField::sample(line, [](Point) { return 2.0; });
    CHECK(holder_quotient(c, 0.5) == 0.0);
    CHECK_THROWS_AS(holder_quotient(x, 1.0), Error);
  }

  TEST_CASE("gradient operator matches a direct evaluation") {
    GradientCoefSpec g;
    g.kind = GKind::constant_over_s;
    g.coefficient = 0.5;
    const MeshPtr mesh = ball(50);
    const DiscreteField v = DiscreteField::sample(mesh, [](Point p) { return 1 - p.x * p.x; });
    const DiscreteField A = gradient_operator(g, DomainSpec{}, v);
    const double h = 0.02;
    for (int i = 1; i < 50; ++i) {
      const double r = i * h;
      // -Delta (1 - r^2) = 6; product stencil |grad|^2 = 4 r^2 - h^2
      CHECK(A[i] == doctest::Approx(6 + 0.5 * (4 * r * r - h * h) / (1 - r * r)));
    }
  }

  TEST_CASE("comparison check") {
    GradientCoefSpec g;
    g.kind = GKind::constant_over_s;
    g.coefficient = 0.4;
    const DomainSpec dom;
    const MeshPtr mesh = ball(80);
    const DiscreteField v = DiscreteField::sample(mesh, [](Point p) { return 1 - p.x * p.x; });
    const DiscreteField Av = gradient_operator(g, dom, v);

    const CheckVerdict same = comparison_check(v, v, Av.values(), g, dom);
    CHECK(same.pass);
    CHECK(same.margin == doctest::Approx(0.0));

    DiscreteField u = v;
    for (double& x : u.values()) x *= 0.9;
    CHECK(comparison_check(u, v, Av.values(), g, dom).pass);

    // A(1.1 v) = 1.1 h exceeds h: not a subsolution
    for (double& x : u.values()) x *= 1.1 / 0.9;
    const CheckVerdict bad = comparison_check(u, v, Av.values(), g, dom);
    CHECK_FALSE(bad.pass);
    CHECK(bad.precondition_violated);

    GradientCoefSpec big = g;
    big.coefficient = 1.2;
    CHECK(comparison_check(v, v, gradient_operator(big, dom, v).values(), big, dom).precondition_violated);
  }

  TEST_CASE("psi-decreasing verdict carries a witness") {
    DomainSpec dom;
    GradientCoefSpec g;
    g.kind = GKind::constant_over_s;
    g.coefficient = 0.6;  // sigma_1 = 1/2 at N = 3, p = 3
    const CheckVerdict v = check_psi_decreasing(g, dom, {0, 0}, 3.0, 3);
    CHECK_FALSE(v.pass);
    CHECK(v.witness_param.has_value());
    g.coefficient = 0.4;
    CHECK(check_psi_decreasing(g, dom, {0, 0}, 3.0, 3).pass);
  }

  TEST_CASE("a priori sweep on the exact-scaling family") {
    ProblemSpec s;
    s.f.p = 3;
    s.g.kind = GKind::constant_over_s;
    s.g.coefficient = 0.4;
    const AprioriResult r = apriori_scaled_sweep(s, ball(200), {0.1, 1, 10, 100});
    CHECK(r.verdict.pass);
    CHECK(r.max_over_median == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("nonexistence probe report") {
    ProblemSpec s;
    s.lambda = 0;
    s.g.mu.kind = MuKind::piecewise;
    s.g.mu.inner_value = 0.3;
    s.g.mu.outer_value = 0.3;
    s.source.kind = SourceSpec::Kind::bump;
    const NonexistenceReport r = nonexistence_probe(s, {100, 2, 2});
    CHECK_FALSE(r.degenerate);
    REQUIRE(r.levels.size() == 2);
    CHECK(r.levels[1].resolution == 200);
    std::ostringstream os;
    r.write_csv(os);
    CHECK(os.str().rfind("level,resolution,status,iterations,residual,integral_h_over_u,min_u_outer\n", 0) == 0);
  }
}
