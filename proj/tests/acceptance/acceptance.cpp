// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qgrad/checks.hpp"
#include "qgrad/config.hpp"
#include "qgrad/transforms.hpp"

using namespace qgrad;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MeshPtr ball(int M) { return make_mesh(RadialMesh::ball(3, 1.0, M)); }

// 1. lambda^{1/(p-1)} ||u||_inf is the same for every lambda.
Outcome scaling_law() {
  ProblemSpec s;
  s.f.p = 3;
  s.g.kind = GKind::constant_over_s;
  s.g.coefficient = 0.4;
  const MeshPtr mesh = ball(2000);
  cached_eigenpair(mesh);
  std::vector<double> scaled;
  double slowest = 0.0;
  for (double lambda : {0.1, 1.0, 10.0, 100.0}) {
    s.lambda = lambda;
    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport r = solve(s, mesh);
    slowest = std::max(slowest, seconds_since(t0));
    if (!r.converged()) return {false, fmt("lambda %g: %s", lambda, to_string(r.status))};
    scaled.push_back(std::pow(lambda, 1.0 / (s.f.p - 1)) * r.sup_norm);
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  const double spread = (*hi - *lo) / *lo;
  return {spread <= 1e-8 && slowest < 1.0,
          fmt("scaled norm %.10f, relative spread %.2e, slowest solve %.3fs", *lo, spread, slowest)};
}

// psi for gamma = 1, delta > 0, anchor 0 in closed form, and its inverse.
double psi_closed(double mu, double d, double s) {
  return std::pow(d, mu) * (std::pow(s + d, 1 - mu) - std::pow(d, 1 - mu)) / (1 - mu);
}
double psi_closed_inverse(double mu, double d, double y) {
  return std::pow((1 - mu) * y / std::pow(d, mu) + std::pow(d, 1 - mu), 1 / (1 - mu)) - d;
}

// 2. Direct solve against psi^{-1} of the semilinear solve.
Outcome transform_equivalence() {
  ProblemSpec s;
  s.f.p = 3;
  s.g.gamma = 1;
  s.g.delta = 0.5;
  s.g.mu.value = 0.3;
  s.lambda = 1;
  const TransformedProblem tp = semilinearize(s);
  std::vector<double> diffs;
  for (int M : {500, 1000, 2000}) {
    const MeshPtr mesh = ball(M);
    const SolveReport direct = solve(s, mesh);
    const SolveReport semi = solve(tp.spec, mesh);
    if (!direct.converged() || !semi.converged()) return {false, fmt("M=%d did not converge", M)};
    double d = 0.0;
    for (std::size_t i = 0; i < direct.solution->size(); ++i) {
      const double back = psi_closed_inverse(0.3, 0.5, (*semi.solution)[i]);
      d = std::max(d, std::abs(back - (*direct.solution)[i]));
    }
    diffs.push_back(d);
  }
  const double o1 = std::log2(diffs[0] / diffs[1]);
  const double o2 = std::log2(diffs[1] / diffs[2]);
  return {o1 >= 1.8 && o2 >= 1.8,
          fmt("diff %.3e %.3e %.3e, orders %.3f %.3f", diffs[0], diffs[1], diffs[2], o1, o2)};
}

// 3. check_psi_decreasing flips at sigma_1; the closed-form exponent of
// H(s) ~ s^{p - (2*-1) + sigma (2*-2)} decides every sampled sigma.
Outcome psi_threshold() {
  int disagreements = 0, runs = 0;
  bool edges = true;
  std::string where;
  for (int N : {3, 4, 5}) {
    const double ts = 2.0 * N / (N - 2);
    const double p = ts / 2;  // midpoint of (1, 2* - 1)
    const double s1 = (ts - 1 - p) / (ts - 2);
    DomainSpec dom;
    dom.dimension = N;
    std::vector<double> sigmas = {s1 - 1e-3, s1 + 1e-3, s1 - 1e-2, s1 + 1e-2};
    for (int k = 1; k < 40; ++k) sigmas.push_back(k / 40.0);
    for (double sigma : sigmas) {
      GradientCoefSpec g;
      g.kind = GKind::constant_over_s;
      g.coefficient = sigma;
      const CheckVerdict v = check_psi_decreasing(g, dom, {0, 0}, p, N);
      const bool expected = p - (ts - 1) + sigma * (ts - 2) < 0;
      ++runs;
      if (v.pass != expected) {
        ++disagreements;
        where += fmt(" N=%d sigma=%.4f", N, sigma);
      }
    }
    const bool below = check_psi_decreasing({.kind = GKind::constant_over_s, .coefficient = s1 - 1e-3}, dom, {0, 0},
                                            p, N)
                           .pass;
    const CheckVerdict above = check_psi_decreasing(
        {.kind = GKind::constant_over_s, .coefficient = s1 + 1e-3}, dom, {0, 0}, p, N);
    edges = edges && below && !above.pass && above.witness_param.has_value();
  }
  return {edges && disagreements == 0,
          fmt("%d sigma values over N=3,4,5, %d disagreements%s", runs, disagreements, where.c_str())};
}

// 4. sigma_3 < sigma_2 < sigma_1 < 1, compared with the formulas.
Outcome threshold_ordering() {
  int violations = 0, cases = 0;
  for (int N = 3; N <= 10; ++N) {
    const double ts = 2.0 * N / (N - 2);
    for (int k = 0; k < 100; ++k) {
      const double p = 1 + (k + 0.5) / 100 * (ts - 2);
      const Thresholds t = thresholds(N, p);
      const double s1 = (ts - 1 - p) / (ts - 2), s2 = (N - (N - 2) * p) / 2, s3 = (N + 1 - (N - 1) * p) / 2;
      const bool formulas = std::abs(t.sigma1 - s1) < 1e-14 && std::abs(t.sigma2 - s2) < 1e-14 &&
                            std::abs(t.sigma3 - s3) < 1e-14 && std::abs(t.two_star - ts) < 1e-14;
      ++cases;
      if (!(formulas && t.sigma3 < t.sigma2 && t.sigma2 < t.sigma1 && t.sigma1 < 1)) ++violations;
    }
  }
  return {violations == 0, fmt("%d (N, p) pairs, %d violations", cases, violations)};
}

// 5. Random supersolution v (h = A(v)) and subsolution u = kappa w with
// A(u) = kappa A(w) <= h; the conclusion u <= v is checked node by node.
Outcome comparison_principle() {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DomainSpec dom;
  int failures = 0, trials = 0, attempts = 0;
  while (trials < 100 && attempts < 1000) {
    ++attempts;
    const int M = 50 + static_cast<int>(unit(rng) * 150);
    const MeshPtr mesh = ball(M);
    GradientCoefSpec g;
    g.kind = GKind::constant_over_s;
    g.coefficient = 0.02 + 0.96 * unit(rng);
    auto random_shape = [&] {
      const double a = 0.1 + unit(rng), b = unit(rng), c = unit(rng), k = 1 + 3 * unit(rng);
      return DiscreteField::sample(mesh, [=](Point p) {
        const double r = p.x;
        return a * (1 - r * r) + b * (1 - r * r) * (1 - r * r) + c * std::sin(std::numbers::pi * (1 - r) / 2) *
                                                                     (1 + 0.3 * std::cos(k * r));
      });
    };
    const DiscreteField v = random_shape();
    const DiscreteField w = random_shape();
    const DiscreteField Av = gradient_operator(g, dom, v);
    const DiscreteField Aw = gradient_operator(g, dom, w);
    double kappa = INFINITY;
    bool positive = true;
    for (int k = 0; k < num_unknowns(*mesh); ++k) {
      const int i = unknown_node(*mesh, k);
      if (!(Av[i] > 0 && Aw[i] > 0)) positive = false;
      else kappa = std::min(kappa, Av[i] / Aw[i]);
    }
    if (!positive) continue;  // h must be positive for the scaling argument
    ++trials;
    DiscreteField u = w;
    for (double& x : u.values()) x *= 0.999 * kappa;
    const CheckVerdict verdict = comparison_check(u, v, Av.values(), g, dom);
    bool ordered = true;
    for (std::size_t i = 0; i < u.size(); ++i) ordered = ordered && u[i] <= v[i] + 1e-10;
    if (!verdict.pass || !ordered) ++failures;
  }
  return {trials == 100 && failures == 0, fmt("%d pairs, %d failures", trials, failures)};
}

// 6. Richardson-extrapolated eigenvalues against pi^2.
Outcome eigenpair() {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  auto extrapolated = [](MeshPtr coarse) {
    return richardson_eigenvalue(principal_eigenpair(coarse).lambda1, principal_eigenpair(refine(*coarse)).lambda1);
  };
  const double interval = extrapolated(make_mesh(RadialMesh::interval(1.0, 2000)));
  const double unit_ball = extrapolated(ball(2000));
  const double e1 = std::abs(interval - pi2), e2 = std::abs(unit_ball - pi2);
  return {e1 <= 1e-4 && e2 <= 1e-4, fmt("interval error %.2e, ball error %.2e", e1, e2)};
}

ProblemSpec probe_problem(double outer_mu) {
  ProblemSpec s;
  s.lambda = 0;
  s.g.gamma = 1;
  s.g.delta = 0;
  s.g.mu.kind = MuKind::piecewise;
  s.g.mu.inner_value = 0.3;
  s.g.mu.outer_value = outer_mu;
  s.g.mu.omega.r_lo = 0;
  s.g.mu.omega.r_hi = 0.5;
  s.source.kind = SourceSpec::Kind::bump;
  s.source.radius = 0.25;
  return s;
}

// 7. Degeneration with mu = 2 outside B_{1/2}; stable control at mu = 0.3.
Outcome nonexistence() {
  const ProbeOptions opt{200, 3, 3};
  const NonexistenceReport bad = nonexistence_probe(probe_problem(2.0), opt);
  const NonexistenceReport good = nonexistence_probe(probe_problem(0.3), opt);
  bool control_converged = true;
  for (const auto& l : good.levels) control_converged = control_converged && l.status == SolveStatus::converged;
  return {bad.degenerate && !good.degenerate && control_converged && good.max_ih_change <= 0.1,
          fmt("mu=2: %s; mu=0.3: %s, I_h change %.2e", bad.degenerate ? "degenerate" : "not degenerate",
              good.degenerate ? "degenerate" : "not degenerate", good.max_ih_change)};
}

// 8. ||u_lambda|| decreases and drops below 0.1.
Outcome large_lambda() {
  ProblemSpec s;
  s.f.p = 2;
  s.g.gamma = 0.5;
  s.g.delta = 0;
  s.g.mu.value = 0.5;
  const MeshPtr mesh = ball(2000);
  std::vector<double> sup;
  for (double lambda : {10.0, 100.0, 1000.0}) {
    s.lambda = lambda;
    const SolveReport r = solve(s, mesh);
    if (!r.converged()) return {false, fmt("lambda %g: %s", lambda, to_string(r.status))};
    sup.push_back(r.sup_norm);
  }
  return {sup[0] > sup[1] && sup[1] > sup[2] && sup[2] < 0.1,
          fmt("sup norms %.4g > %.4g > %.4g", sup[0], sup[1], sup[2])};
}

// 9. t_fail finite and within a factor 2 across meshes.
Outcome t_sweep() {
  ProblemSpec s;
  s.f.p = 3;
  s.g.kind = GKind::constant_over_s;
  s.g.coefficient = 0.4;
  s.sigma_t = 0.4;
  s.lambda = 1;
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(0.5 * k);
  const TSweepResult a = continuation_t(s, ball(1000), grid);
  const TSweepResult b = continuation_t(s, ball(2000), grid);
  if (!a.t_fail || !b.t_fail) return {false, "t_fail missing"};
  const double ratio = std::max(*a.t_fail, *b.t_fail) / std::min(*a.t_fail, *b.t_fail);
  return {ratio <= 2.0, fmt("t_fail %.2f (M=1000), %.2f (M=2000)", *a.t_fail, *b.t_fail)};
}

// 10. Pohozaev defect: O(h^2) for q = 3, order one for the supercritical spike.
Outcome pohozaev() {
  std::vector<double> D;
  ProblemSpec s;
  s.f.p = 3;
  s.g.mu.value = 0;
  for (int M : {250, 500, 1000, 2000}) {
    const SolveReport r = solve(s, ball(M));
    if (!r.converged()) return {false, fmt("q=3 M=%d: %s", M, to_string(r.status))};
    D.push_back(std::abs(pohozaev_defect(*r.solution, 3.0)));
  }
  double worst = INFINITY;
  for (std::size_t k = 1; k < D.size(); ++k) worst = std::min(worst, std::log2(D[k - 1] / D[k]));
  const double q = 2.0 * 3 / (3 - 2) - 1 + 0.5;
  const SolveReport sup = pohozaev_solve(ball(2000), q);
  if (!(sup.residual <= sup.threshold)) return {false, fmt("supercritical solve: %s", to_string(sup.status))};
  const double Dsup = std::abs(pohozaev_defect(*sup.solution, q));
  return {worst >= 1.5 && Dsup >= 10 * D.back(),
          fmt("|D| %.2e %.2e %.2e %.2e (min order %.2f); supercritical |D| %.3g (%s, sup %.4g)", D[0], D[1], D[2],
              D[3], worst, Dsup, to_string(sup.status), sup.sup_norm)};
}

// 11. Analytic Jacobian columns against forward differences of the residual,
// scaled by max(1, |column|).
Outcome jacobian_fd() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::pair<std::string, GradientCoefSpec>> variants;
  {
    GradientCoefSpec g;
    g.mu.value = 0.4;
    variants.emplace_back("mu/s", g);
    g.gamma = 0.5;
    g.delta = 0.3;
    variants.emplace_back("mu/(s+delta)^0.5", g);
    g.gamma = 2;
    g.delta = 1;
    variants.emplace_back("mu/(s+1)^2", g);
    GradientCoefSpec pw;
    pw.mu.kind = MuKind::piecewise;
    pw.mu.inner_value = 0.2;
    pw.mu.outer_value = 0.7;
    variants.emplace_back("piecewise mu/s", pw);
    GradientCoefSpec c;
    c.kind = GKind::constant_over_s;
    c.coefficient = 0.6;
    variants.emplace_back("constant/s", c);
    GradientCoefSpec t;
    t.kind = GKind::table;
    t.mu.value = 0.5;
    std::vector<double> xs, a, b;
    for (int k = 0; k <= 40; ++k) {
      const double x = std::pow(10.0, -4 + 0.2 * k);
      xs.push_back(x);
      a.push_back(x / (1 + x));
      b.push_back(0.1 * std::atan(x));
    }
    t.table_mu = MonotoneTable(xs, a);
    t.table_free = MonotoneTable(xs, b);
    t.offset = 0.1;
    variants.emplace_back("table", t);
    GradientCoefSpec tr;
    tr.kind = GKind::truncated;
    tr.threshold = 0.5;
    tr.base = std::make_shared<GradientCoefSpec>(variants[0].second);
    variants.emplace_back("truncated", tr);
  }

  double worst = 0.0;
  std::string worst_at;
  int trials = 0;
  for (int trial = 0; trial < 50; ++trial) {
    for (const auto& [name, g] : variants) {
      for (bool grid : {false, true}) {
        ProblemSpec s;
        s.g = g;
        s.f.p = 2 + unit(rng);
        s.lambda = unit(rng);
        s.t = unit(rng);
        s.sigma_t = 0.5;
        if (grid) {
          s.domain.kind = DomainKind::rectangle;
          s.domain.dimension = 2;
        }
        const MeshPtr mesh = grid ? make_mesh(Grid2D::make(1, 1, 8, 9)) : ball(16);
        const double a = 0.5 + unit(rng), k = 1 + 3 * unit(rng);
        DiscreteField u = DiscreteField::sample(mesh, [&](Point p) {
          const double d = s.domain.center_distance(p);
          return a * (1.2 - d * d) * (1 + 0.3 * std::sin(k * (p.x + p.y))) + 0.05 * unit(rng);
        });
        for (int i = 0; i < num_nodes(*mesh); ++i)
          if (is_boundary(*mesh, i)) u[i] = 0.0;
        const ResidualKind kind = trial % 2 ? ResidualKind::quasilinear()
                                            : ResidualKind::frozen(u, trial % 4 ? FreezeMode::full
                                                                                : FreezeMode::coefficient_only);
        const Jacobian J = jacobian(s, kind, u);
        const DiscreteField F0 = residual(s, kind, u);
        const double eps = 1e-7;
        for (int col = 0; col < num_unknowns(*mesh); ++col) {
          const int node = unknown_node(*mesh, col);
          DiscreteField up = u;
          up[node] += eps;
          const DiscreteField Fp = residual(s, kind, up);
          const std::vector<double> exact = jacobian_column(J, col);
          double scale = 1.0, err = 0.0;
          for (double x : exact) scale = std::max(scale, std::abs(x));
          for (int row = 0; row < num_unknowns(*mesh); ++row) {
            const int rn = unknown_node(*mesh, row);
            err = std::max(err, std::abs((Fp[rn] - F0[rn]) / eps - exact[row]));
          }
          if (err / scale > worst) {
            worst = err / scale;
            worst_at = name + (grid ? " (grid)" : " (ball)");
          }
        }
        ++trials;
      }
    }
  }
  return {worst <= 1e-6, fmt("%d Jacobians over %zu g variants, worst scaled discrepancy %.2e (%s)", trials,
                             variants.size(), worst, worst_at.c_str())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string drop_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos && line.find("\"output_dir\"") == std::string::npos)
      out += line + '\n';
  return out;
}

// 12. Every preset through the CLI twice; all bodies identical.
Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "qgrad-acceptance-repro";
  fs::remove_all(root);
  int compared = 0;
  std::string mismatch;
  for (const Preset& p : presets()) {
    std::string bodies[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = root / (p.name + "-" + std::to_string(run));
      const std::string cmd = std::string(QGRAD_CLI) + " " + p.command + " --preset " + p.name + " --out " +
                              dir.string() + " > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc == -1 || !fs::exists(dir / "manifest.json")) return {false, "CLI failed for " + p.name};
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        const std::string body = slurp(f);
        bodies[run] += f.filename().string() + "\n" +
                       (f.filename() == "manifest.json" ? drop_timestamp(body) : body);
      }
    }
    ++compared;
    if (bodies[0] != bodies[1]) mismatch += " " + p.name;
  }
  fs::remove_all(root);
  return {mismatch.empty() && compared > 0,
          fmt("%d presets run twice, mismatches:%s", compared, mismatch.empty() ? " none" : mismatch.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact scaling law", scaling_law},
      {"transform equivalence", transform_equivalence},
      {"psi-condition threshold", psi_threshold},
      {"threshold ordering", threshold_ordering},
      {"comparison principle", comparison_principle},
      {"principal eigenpair", eigenpair},
      {"nonexistence degeneration", nonexistence},
      {"large-lambda smallness", large_lambda},
      {"t-sweep failure point", t_sweep},
      {"Pohozaev defect", pohozaev},
      {"Jacobian finite differences", jacobian_fd},
      {"reproducibility", reproducibility},
  };
  int failed = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", index - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
