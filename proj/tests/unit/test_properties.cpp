// Small worked cases for each module, each against a closed form or an
// independent computation.

#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "qgrad/assembly.hpp"
#include "qgrad/checks.hpp"
#include "qgrad/error.hpp"
#include "qgrad/psi.hpp"
#include "qgrad/transforms.hpp"

using namespace qgrad;

namespace {

MeshPtr ball(int M, int N = 3) { return make_mesh(RadialMesh::ball(N, 1.0, M)); }

double sup_unknowns(const DiscreteField& f) {
  double m = 0;
  for (int k = 0; k < num_unknowns(f.mesh()); ++k) m = std::max(m, std::abs(f[unknown_node(f.mesh(), k)]));
  return m;
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("threshold values") {
    CHECK(two_star(1000) > 2.0);
    CHECK(two_star(1000) < 2.01);
    const Thresholds at1 = thresholds(3, 1.0 + 1e-12);
    CHECK(at1.sigma1 == doctest::Approx(1.0));
    CHECK(at1.sigma2 == doctest::Approx(1.0));
    CHECK(at1.sigma3 == doctest::Approx(1.0));
    const Thresholds t = thresholds(4, 2.0);
    CHECK(t.sigma1 == doctest::Approx(0.5));
    CHECK(t.sigma2 == doctest::Approx(0.0));
    CHECK(t.sigma3 == doctest::Approx(-0.5));
  }

  TEST_CASE("declared conditions on simple coefficients") {
    ProblemSpec a;
    a.g.kind = GKind::constant_over_s;
    a.g.coefficient = 0.3;
    a.g.tau = a.g.sigma = 0.3;
    CHECK(validate_spec(a).find("g_star")->satisfied);

    ProblemSpec b;
    b.g.mu.value = 0.6;
    b.g.delta = 1.0;
    b.g.tau = b.g.sigma = 0.6;
    CHECK(validate_spec(b).find("g_star")->satisfied);

    // f(s) = s e^{-s} under a declared s^2 <= f: fails for s > W(1)
    ProblemSpec c;
    std::vector<double> xs, ys;
    for (int k = 0; k <= 160; ++k) {
      xs.push_back(std::pow(10.0, -8 + 0.1 * k));
      ys.push_back(xs.back() * std::exp(-xs.back()));
    }
    c.f.kind = FKind::table;
    c.f.p = 2;
    c.f.table = MonotoneTable(xs, ys);
    c.f.declares_f_star = true;
    const ConditionResult* fs = validate_spec(c).find("f_star");
    REQUIRE(fs);
    CHECK_FALSE(fs->satisfied);
    CHECK(fs->witness_s.has_value());

    GradientCoefSpec one;
    one.mu.value = 1.0;
    for (double s : {1e-3, 1.0, 1e3}) CHECK(eval_sg(one, DomainSpec{}, {0.5, 0}, s) == doctest::Approx(1.0));
    NonlinearitySpec f;
    f.p = 3;
    CHECK(eval_f(f, 2.0) == doctest::Approx(8.0));
    GradientCoefSpec g;
    g.kind = GKind::constant_over_s;
    g.coefficient = 0.4;
    CHECK(eval_g(g, DomainSpec{}, {}, 10.0) == doctest::Approx(0.04));
  }

  TEST_CASE("stencils on polynomials") {
    const MeshPtr m5 = ball(32, 5);
    const DiscreteField r2 = DiscreteField::sample(m5, [](Point p) { return p.x * p.x; });
    CHECK(laplacian(r2)[0] == doctest::Approx(10.0));
    const DiscreteField c = DiscreteField::sample(m5, [](Point) { return 3.0; });
    CHECK(sup_unknowns(laplacian(c)) == 0.0);
    CHECK(sup_unknowns(gradient_sq(c)) == 0.0);

    const MeshPtr m = ball(64);
    const DiscreteField r = DiscreteField::sample(m, [](Point p) { return p.x; });
    const DiscreteField gr = gradient_sq(r);
    for (int i = 1; i < 64; ++i) CHECK(gr[i] == doctest::Approx(1.0));
    const DiscreteField q = DiscreteField::sample(m, [](Point p) { return 1 - p.x * p.x; });
    const DiscreteField gq = gradient_sq(q);
    const double h = 1.0 / 64;
    for (int i = 1; i < 64; ++i) CHECK(std::abs(gq[i] - 4 * std::pow(i * h, 2)) <= 1.0001 * h * h);
  }

  TEST_CASE("residual identities") {
    const MeshPtr mesh = ball(100);
    const DiscreteField u = DiscreteField::sample(mesh, [](Point p) { return (1 - p.x * p.x) * (2 + std::cos(3 * p.x)); });

    ProblemSpec lin;
    lin.lambda = 0;
    lin.g.mu.value = 0;
    const DiscreteField F = residual_quasilinear(lin, u);
    const DiscreteField L = laplacian(u);
    for (int k = 0; k < 100; ++k) CHECK(F[k] == doctest::Approx(-L[k]));

    // g = sigma/s, f = s^3: every term of F_lambda(lambda^{-1/2} u) is lambda^{-1/2} F_1(u)
    ProblemSpec s;
    s.g.kind = GKind::constant_over_s;
    s.g.coefficient = 0.4;
    s.f.p = 3;
    s.lambda = 1;
    const DiscreteField F1 = residual_quasilinear(s, u);
    s.lambda = 9;
    DiscreteField us = u;
    for (double& x : us.values()) x /= 3;
    const DiscreteField F9 = residual_quasilinear(s, us);
    for (int k = 0; k < 100; ++k) CHECK(F9[k] == doctest::Approx(F1[k] / 3).epsilon(1e-12));

    // frozen at v = u agrees with the quasilinear residual
    const DiscreteField Ff = residual_frozen(s, us, us, FreezeMode::full);
    for (int k = 0; k < 100; ++k) CHECK(Ff[k] == doctest::Approx(F9[k]).epsilon(1e-12));

    // g = 0: J = -Delta_h - lambda p diag(u^{p-1})
    ProblemSpec z;
    z.g.mu.value = 0;
    z.f.p = 3;
    z.lambda = 2;
    const auto J = std::get<Tridiagonal>(jacobian(z, ResidualKind::quasilinear(), u));
    const Tridiagonal A = radial_negative_laplacian(std::get<RadialMesh>(*mesh));
    for (int k = 0; k < 100; ++k) {
      CHECK(J.diag[k] == doctest::Approx(A.diag[k] - 2 * 3 * u[k] * u[k]));
      if (k < 99) CHECK(J.upper[k] == doctest::Approx(A.upper[k]));
      if (k > 0) CHECK(J.lower[k] == doctest::Approx(A.lower[k]));
    }
  }

  TEST_CASE("exact linear solves") {
    Tridiagonal I(5);
    I.diag.assign(5, 1.0);
    CHECK(tridiag_solve(I, {1, 2, 3, 4, 5}) == std::vector<double>{1, 2, 3, 4, 5});

    const RadialMesh line = RadialMesh::interval(1.0, 40);
    const auto x = tridiag_solve(radial_negative_laplacian(line), std::vector<double>(39, 1.0));
    for (int k = 0; k < 39; ++k) {
      const double r = (k + 1) / 40.0;
      CHECK(x[k] == doctest::Approx(r * (1 - r) / 2).epsilon(1e-12));
    }

    KrylovReport rep;
    const LinearOperator id = [](const std::vector<double>& a, std::vector<double>& b) { b = a; };
    krylov_solve(id, std::vector<double>(4, 1.0), {1, 2, 3, 4}, 1e-12, 100, &rep);
    CHECK(rep.iterations <= 1);
    const LinearOperator ones = [](const std::vector<double>& a, std::vector<double>& b) {
      double s = 0;
      for (double v : a) s += v;
      b.assign(a.size(), s / a.size());
    };
    try {
      krylov_solve(ones, std::vector<double>(4, 1.0), {1, -1, 2, 0}, 1e-12, 100);
      FAIL("singular operator solved");
    } catch (const Error& e) {
      CHECK((e.kind() == ErrorKind::breakdown || e.kind() == ErrorKind::max_iterations));
    }
  }

  TEST_CASE("annulus eigenvalue") {
    const MeshPtr m = make_mesh(RadialMesh::annulus(3, 1.0, 2.0, 1000));
    const double l = richardson_eigenvalue(principal_eigenpair(m).lambda1, principal_eigenpair(refine(*m)).lambda1);
    CHECK(std::abs(l - std::numbers::pi * std::numbers::pi) < 1e-4);
  }

  TEST_CASE("Newton baselines") {
    ProblemSpec s;
    s.g.mu.value = 0;
    s.f.p = 3;
    const MeshPtr mesh = ball(400);
    // phi1 alone lies below the positive branch and collapses to zero
    const SolveReport low = newton_solve(s, ResidualKind::quasilinear(), cached_eigenpair(mesh).phi1);
    CHECK(low.status == SolveStatus::floor_degenerate);
    const SolveReport r = solve(s, mesh);
    INFO(std::string(to_string(r.status)));
    REQUIRE(r.converged());
    CHECK(r.residual <= r.threshold);
    CHECK(r.positivity_margin > 0);

    // a frozen solve at the converged point returns it
    ProblemSpec m;
    m.g.delta = 0.5;
    m.g.mu.value = 0.3;
    m.f.p = 3;
    const SolveReport q = solve(m, mesh);
    REQUIRE(q.converged());
    CHECK(q.residual <= 1e-8);
    const SolveReport fz = newton_solve(m, ResidualKind::frozen(*q.solution), *q.solution);
    REQUIRE(fz.converged());
    CHECK(fz.iterations <= 1);
    for (std::size_t i = 0; i < fz.solution->size(); ++i) CHECK((*fz.solution)[i] == doctest::Approx((*q.solution)[i]));

    // t sweep: the t = 0 entry is the plain solve; g = 0 still folds
    ProblemSpec z;
    z.g.mu.value = 0;
    z.f.p = 3;
    z.sigma_t = 0.5;
    const TSweepResult tr = continuation_t(z, ball(200), {0, 2, 4, 8, 16, 32, 64});
    REQUIRE(tr.table.records.size() == 7);
    CHECK(tr.table.records[0].sup_norm == doctest::Approx(solve(z, ball(200)).sup_norm).epsilon(1e-9));
    CHECK(tr.t_fail.has_value());
  }

  TEST_CASE("psi values") {
    for (const PsiParams p : {PsiParams{0.3, 0.5, 1, 0}, PsiParams{0.7, 0, 0.5, 0}, PsiParams{0.5, 1, 2, 0}}) {
      CHECK(psi_forward(p, 0.0) == 0.0);
    }
    for (double s : {0.0, 0.5, 7.0}) CHECK(psi_forward({0.0, 0.0, 1.0, 0.0}, s) == doctest::Approx(s));
    CHECK(psi_forward({0.5, 1.0, 1.0, 0.0}, 3.0) == doctest::Approx(2.0));
  }

  TEST_CASE("semilinearized f on a 100-point grid") {
    const double mu = 0.4, d = 1.0, p = 2.5;
    ProblemSpec s;
    s.g.mu.value = mu;
    s.g.delta = d;
    s.f.p = p;
    s.lambda = 1.7;
    const TransformedProblem tp = semilinearize(s);
    for (int k = 0; k < 100; ++k) {
      const double t = 0.05 * (k + 1);
      // s = psi^{-1}(t) closed form, phi(t) = psi'(s) lambda s^p
      const double sv = std::pow((1 - mu) * t / std::pow(d, mu) + std::pow(d, 1 - mu), 1 / (1 - mu)) - d;
      const double phi = std::pow(d / (sv + d), mu) * 1.7 * std::pow(sv, p);
      CHECK(eval_f(tp.spec.f, t) * tp.spec.lambda == doctest::Approx(phi).epsilon(1e-10));
    }
  }

  TEST_CASE("mapped-back semilinear solution satisfies the quasilinear scheme to O(h^2)") {
    ProblemSpec s;
    s.g.mu.value = 0.3;
    s.g.delta = 0.5;
    s.f.p = 3;
    const TransformedProblem tp = semilinearize(s);
    std::vector<double> res;
    for (int M : {200, 400, 800}) {
      const SolveReport semi = solve(tp.spec, ball(M));
      REQUIRE(semi.converged());
      res.push_back(sup_unknowns(residual_quasilinear(s, tp.map_inverse(*semi.solution))));
    }
    CHECK(std::log2(res[0] / res[1]) >= 1.8);
    CHECK(std::log2(res[1] / res[2]) >= 1.8);
  }

  TEST_CASE("power-transform exponent reaches 2*-1 exactly at sigma_1") {
    for (int N = 3; N <= 8; ++N) {
      const double ts = two_star(N);
      for (int i = 1; i < 20; ++i) {
        const double p = 1 + i * (ts - 2) / 20;
        const double s1 = thresholds(N, p).sigma1;
        for (int j = 0; j < 20; ++j) {
          const double mu = j / 20.0;
          if (std::abs(mu - s1) < 1e-12) continue;
          CHECK(((p - mu) / (1 - mu) >= ts - 1) == (mu >= s1));
        }
      }
    }
  }

  TEST_CASE("gamma transform limits and coefficient mapping") {
    ProblemSpec s;
    s.g.mu.value = 0.3;
    s.g.delta = 1.0;
    s.f.p = 3;
    const TransformedProblem near = gamma_transform(s, 1 + 1e-6);
    CHECK(*near.meta.p_gamma == doctest::Approx(3.0).epsilon(1e-5));
    for (double u : {0.1, 1.0, 5.0}) CHECK(near.forward(u) == doctest::Approx(u).epsilon(1e-5));

    // (s + delta) g = mu gives (s + delta^gamma) g_gamma = (mu + gamma - 1)/gamma
    const TransformedProblem tp = gamma_transform(s, 2.0);
    for (double v : {1e-6, 1e-2, 1.0, 1e2, 1e5}) {
      CHECK((v + 1.0) * eval_g(tp.spec.g, s.domain, {0.3, 0}, v) == doctest::Approx(0.65).epsilon(1e-6));
    }

    for (int N = 3; N <= 6; ++N) {
      const double ts = two_star(N);
      for (double p : {1.2, 1.5, 1.9}) {
        if (p >= ts - 1) continue;
        for (double gamma : {1.5, 2.0, 4.0}) {
          const double pg = (gamma - 1 + p) / gamma;
          for (int j = 0; j < 40; ++j) {
            const double mu = -1 + j * 0.05;
            const double s1 = (ts - 1 - p) / (ts - 2);
            if (std::abs(mu - s1) < 1e-9) continue;
            CHECK(((mu + gamma - 1) / gamma < (ts - 1 - pg) / (ts - 2)) == (mu < s1));
          }
        }
      }
    }
  }

  TEST_CASE("truncation invariants and continuity") {
    ProblemSpec s;
    s.g.kind = GKind::constant_over_s;
    s.g.coefficient = 0.4;
    s.f.p = 3;
    const TransformedProblem t = truncate_at_s0(s, 0.3);
    for (double v : {0.01, 0.3, 2.0, 50.0}) {
      CHECK(eval_g(t.spec.g, s.domain, {}, v) == doctest::Approx(0.4 / v));
      CHECK(eval_f(t.spec.f, v) == doctest::Approx(v * v * v));
    }
    ProblemSpec m;
    m.g.mu.value = 0.8;
    m.g.gamma = 2;
    m.g.delta = 0.5;
    const TransformedProblem tm = truncate_at_s0(m, 0.3);
    const auto sg = [&](double v) { return v * eval_g(tm.spec.g, m.domain, {0.1, 0}, v); };
    CHECK(sg(0.3 - 1e-9) == doctest::Approx(sg(0.3 + 1e-9)).epsilon(1e-7));
  }

  TEST_CASE("blow-up normalization") {
    const MeshPtr mesh = ball(400);
    const DiscreteField u = DiscreteField::sample(mesh, [](Point p) { return 1 - p.x * p.x; });
    const BlowupProfile b = blowup_rescale(u, 3.0, 0.5, 51);
    CHECK(b.eta == 1.0);
    CHECK(b.values[25] == 1.0);
    for (int i = 0; i < 51; ++i) CHECK(b.values[i] == doctest::Approx(1 - b.y[i] * b.y[i]).epsilon(1e-9));
  }

  TEST_CASE("psi check with no gradient term") {
    GradientCoefSpec zero;
    zero.mu.value = 0.0;
    CHECK(check_psi_decreasing(zero, DomainSpec{}, {0, 0}, 3.0, 3).pass);
  }

  TEST_CASE("comparison against manufactured solves") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(0, 1);
    DomainSpec dom;
    int done = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const MeshPtr mesh = ball(80);
      ProblemSpec s;
      s.lambda = 0;
      s.g.kind = GKind::constant_over_s;
      s.g.coefficient = 0.05 + 0.9 * unit(rng);
      const double a = 0.2 + unit(rng), b = unit(rng), k = 1 + 2 * unit(rng);
      const DiscreteField v = DiscreteField::sample(mesh, [=](Point p) {
        return (1 - p.x * p.x) * (a + b * std::cos(k * p.x) * std::cos(k * p.x));
      });
      const DiscreteField hv = gradient_operator(s.g, dom, v);
      ResidualKind kind = ResidualKind::quasilinear();
      kind.extra_source = hv.values();
      // strictly below h_v by at least 0.01 so the residual tolerance cannot matter
      for (double& x : kind.extra_source) x -= (0.01 + 0.04 * unit(rng)) * std::max(1.0, std::abs(x));
      const SolveReport r = newton_solve(s, kind, v);
      REQUIRE(r.converged());
      for (std::size_t i = 0; i < v.size(); ++i) CHECK((*r.solution)[i] <= v[i] + 1e-10);
      const auto verdict = comparison_check(*r.solution, v, hv.values(), s.g, dom);
      INFO(verdict.detail);
      CHECK(verdict.pass);
      ++done;
    }
    CHECK(done == 100);
  }

  TEST_CASE("Holder quotient is stable under refinement") {
    ProblemSpec s;
    s.g.mu.value = 0.3;
    s.f.p = 3;
    for (double lambda : {0.5, 1.0, 4.0}) {
      s.lambda = lambda;
      std::vector<double> q;
      for (int M : {200, 400, 800}) {
        const SolveReport r = solve(s, ball(M));
        REQUIRE(r.converged());
        q.push_back(holder_quotient(*r.solution, 0.5));
      }
      for (double x : q) CHECK(std::abs(x / q[0] - 1) <= 0.2);
    }
  }

  TEST_CASE("a priori sweep edge cases") {
    ProblemSpec s;
    s.f.p = 3;
    s.g.kind = GKind::constant_over_s;
    s.g.coefficient = 0.4;
    CHECK(apriori_scaled_sweep(s, ball(100), {2.0}).verdict.pass);
  }

  TEST_CASE("probe without a source is trivial") {
    ProblemSpec s;
    s.lambda = 0;
    s.g.mu.value = 0.3;
    const NonexistenceReport r = nonexistence_probe(s, {100, 2, 1});
    CHECK(r.trivial_instance);
  }
}
