#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lasn/oracle.hpp"
#include "lasn/rng.hpp"
#include "lasn/snewton.hpp"

using namespace lasn;

namespace {

DenseMatrix random_features(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix x(n, d);
  for (double& v : x.data) v = rng.normal();
  return x;
}

std::vector<double> random_labels(int n, std::uint64_t seed) {
  Rng rng(seed + 1000);
  std::vector<double> y(n);
  for (double& v : y) v = rng.unit() < 0.5 ? -1.0 : 1.0;
  return y;
}

std::vector<int> active_set_at(const std::vector<double>& w, const DenseMatrix& x,
                               const std::vector<double>& y) {
  std::vector<int> active;
  for (int i = 0; i < x.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < x.cols; ++j) s += x(i, j) * w[j];
    if (1.0 - y[i] * s > 0.0) active.push_back(i);
  }
  return active;
}

}  // namespace

TEST_CASE("augment_bias appends a constant-one column", "[snewton]") {
  DenseMatrix x(2, 1);
  x(0, 0) = 0.5;
  x(1, 0) = -1.5;
  FeatureBlock aug = augment_bias(FeatureBlock{x, FeatureRole::train});
  REQUIRE(aug.matrix.cols == 2);
  CHECK(aug.matrix(0, 0) == 0.5);
  CHECK(aug.matrix(0, 1) == 1.0);
  CHECK(aug.matrix(1, 0) == -1.5);
  CHECK(aug.matrix(1, 1) == 1.0);

  // augmented score = plain score + implicit bias
  std::vector<double> w{2.0, 0.7};
  for (int i = 0; i < 2; ++i) {
    const double plain = x(i, 0) * w[0];
    const double augmented = aug.matrix(i, 0) * w[0] + aug.matrix(i, 1) * w[1];
    CHECK(augmented == Catch::Approx(plain + w[1]).margin(1e-15));
  }
}

TEST_CASE("objective at w = 0 is C times the sample count", "[snewton]") {
  DenseMatrix x = random_features(13, 3, 2);
  std::vector<double> y = random_labels(13, 2);
  CHECK(objective(std::vector<double>(3, 0.0), x, y, 2.5) ==
        Catch::Approx(2.5 * 13.0).epsilon(1e-14));
}

TEST_CASE("objective matches the scalar hand computation", "[snewton]") {
  // one sample x = (1), y = 1, C = 1, w = 2/3: 0.5*(4/9) + (1/3)^2 = 1/3
  DenseMatrix x(1, 1);
  x(0, 0) = 1.0;
  CHECK(objective({2.0 / 3.0}, x, {1.0}, 1.0) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("objective is bounded below by the regularizer", "[snewton]") {
  DenseMatrix x = random_features(10, 4, 3);
  std::vector<double> y = random_labels(10, 3);
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> w(4);
    for (double& v : w) v = rng.normal();
    double reg = 0.0;
    for (double v : w) reg += v * v;
    CHECK(objective(w, x, y, 1.7) >= 0.5 * reg - 1e-12);
  }
}

TEST_CASE("gradient at w = 0 sums the labeled rows", "[snewton]") {
  DenseMatrix x = random_features(9, 3, 5);
  std::vector<double> y = random_labels(9, 5);
  const double c = 1.3;
  std::vector<double> g = gradient(std::vector<double>(3, 0.0), x, y, c);
  for (int j = 0; j < 3; ++j) {
    double expect = 0.0;
    for (int i = 0; i < 9; ++i) expect -= 2.0 * c * y[i] * x(i, j);
    CHECK(g[j] == Catch::Approx(expect).margin(1e-12));
  }
}

TEST_CASE("gradient vanishes at the scalar stationary point", "[snewton]") {
  // w - 2C(1 - w) = 0  =>  w* = 2C/(1+2C)
  DenseMatrix x(1, 1);
  x(0, 0) = 1.0;
  for (double c : {0.5, 1.0, 10.0}) {
    const double w_star = 2.0 * c / (1.0 + 2.0 * c);
    std::vector<double> g = gradient({w_star}, x, {1.0}, c);
    CHECK(std::abs(g[0]) < 1e-14);
  }
}

TEST_CASE("gradient matches central finite differences away from kinks", "[snewton]") {
  const DenseMatrix x = random_features(15, 4, 11);
  const std::vector<double> y = random_labels(15, 11);
  const double c = 2.0;
  Rng rng(123);

  int checked = 0;
  while (checked < 5) {
    std::vector<double> w(4);
    for (double& v : w) v = rng.normal();
    double min_margin = 1e300;
    for (int i = 0; i < 15; ++i) {
      double s = 0.0;
      for (int j = 0; j < 4; ++j) s += x(i, j) * w[j];
      min_margin = std::min(min_margin, std::abs(1.0 - y[i] * s));
    }
    if (min_margin < 1e-3) continue;  // resample away from kink points
    ++checked;

    std::vector<double> g = gradient(w, x, y, c);
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(w[j]));
      std::vector<double> wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double fd = (objective(wp, x, y, c) - objective(wm, x, y, c)) / (2.0 * h);
      CHECK(std::abs(g[j] - fd) <= 1e-5 * std::max(1.0, std::abs(g[j])));
    }
  }
}

TEST_CASE("hessian_apply with an empty active set is the identity", "[snewton]") {
  DenseMatrix x = random_features(6, 3, 21);
  std::vector<double> h{1.0, -2.0, 0.5};
  CHECK(hessian_apply(x, {}, 3.0, h) == h);
}

TEST_CASE("hessian_apply with one active row is a rank-one update", "[snewton]") {
  DenseMatrix x(2, 2);
  x(0, 0) = 2.0;
  x(0, 1) = -1.0;
  x(1, 0) = 7.0;
  x(1, 1) = 7.0;
  const std::vector<double> h{0.5, 1.5};
  const double c = 1.25;
  std::vector<double> out = hessian_apply(x, {0}, c, h);
  const double xh = 2.0 * 0.5 + (-1.0) * 1.5;
  CHECK(out[0] == Catch::Approx(0.5 + 2.0 * c * 2.0 * xh).epsilon(1e-14));
  CHECK(out[1] == Catch::Approx(1.5 + 2.0 * c * (-1.0) * xh).epsilon(1e-14));
}

TEST_CASE("hessian_apply agrees with dense assembly", "[snewton]") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const int n = 12, d = 5;
    DenseMatrix x = random_features(n, d, seed);
    std::vector<double> y = random_labels(n, seed);
    Rng rng(seed + 500);
    std::vector<double> w(d), h(d);
    for (double& v : w) v = rng.normal();
    for (double& v : h) v = rng.normal();
    const double c = 1.0 + static_cast<double>(seed);

    std::vector<int> active = active_set_at(w, x, y);
    std::vector<double> fast = hessian_apply(x, active, c, h);

    DenseMatrix v_dense = DenseMatrix::identity(d);
    for (int i : active)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) v_dense(a, b) += 2.0 * c * x(i, a) * x(i, b);
    std::vector<double> slow = matvec(v_dense, h);
    for (int j = 0; j < d; ++j) CHECK(std::abs(fast[j] - slow[j]) <= 1e-10);
  }
}

TEST_CASE("hessian_apply is a positive definite operator", "[snewton]") {
  DenseMatrix x = random_features(10, 4, 9);
  std::vector<double> y = random_labels(10, 9);
  Rng rng(901);
  std::vector<int> active{0, 2, 5, 7};
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> h(4);
    for (double& v : h) v = rng.normal();
    std::vector<double> vh = hessian_apply(x, active, 2.0, h);
    double hvh = 0.0, hh = 0.0;
    for (int j = 0; j < 4; ++j) {
      hvh += h[j] * vh[j];
      hh += h[j] * h[j];
    }
    CHECK(hvh >= hh - 1e-10);
  }
}

TEST_CASE("solve stops immediately when the start point already satisfies delta", "[snewton]") {
  DenseMatrix x(2, 1);
  x(0, 0) = 1.0;
  x(1, 0) = -1.0;
  SolverConfig config;
  config.C = 1.0;
  config.delta = 1e9;  // ||grad f(0)|| is finite, so 0 iterations
  SolverReport rep = solve(x, {1.0, -1.0}, config);
  CHECK(rep.converged);
  CHECK(rep.newton_iters == 0);
  CHECK(rep.w == std::vector<double>{0.0});
}

TEST_CASE("solve reaches the scalar closed form", "[snewton]") {
  DenseMatrix x(1, 1);
  x(0, 0) = 1.0;
  SolverConfig config;
  config.C = 1.0;
  config.delta = 1e-10;
  SolverReport rep = solve(x, {1.0}, config);
  REQUIRE(rep.converged);
  CHECK(rep.w[0] == Catch::Approx(2.0 / 3.0).margin(1e-8));
}

TEST_CASE("solve matches the dual oracle on the separable two-point problem", "[snewton]") {
  // x = -1 (y = -1) and x = +1 (y = +1), bias-augmented; the stationary
  // point works out to w = (0.8, 0).
  DenseMatrix x(2, 2);
  x(0, 0) = -1.0;
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  x(1, 1) = 1.0;
  const std::vector<double> y{-1.0, 1.0};
  SolverConfig config;
  config.C = 1.0;
  SolverReport rep = solve(x, y, config);
  REQUIRE(rep.converged);
  CHECK(rep.w[0] == Catch::Approx(0.8).margin(1e-6));
  CHECK(rep.w[1] == Catch::Approx(0.0).margin(1e-6));

  DenseMatrix q(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double dot_aug = x(i, 0) * x(j, 0) + x(i, 1) * x(j, 1);
      q(i, j) = y[i] * y[j] * dot_aug;
    }
  DualSolution dual = solve_dual_cd(q, 1.0);
  std::vector<double> w_dual = recover_primal_w(dual.lambda, x, y);
  CHECK(std::abs(rep.w[0] - w_dual[0]) <= 1e-6);
  CHECK(std::abs(rep.w[1] - w_dual[1]) <= 1e-6);

  // both training points classified correctly
  CHECK(x(0, 0) * rep.w[0] + rep.w[1] < 0.0);
  CHECK(x(1, 0) * rep.w[0] + rep.w[1] > 0.0);
}

TEST_CASE("solve decreases f on every accepted step and honors the CG contract", "[snewton]") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const int n = 30, d = 6;
    DenseMatrix x = random_features(n, d, seed + 40);
    std::vector<double> y = random_labels(n, seed + 40);
    SolverConfig config;
    config.C = 5.0;
    SolverReport rep = solve(x, y, config);
    REQUIRE(rep.converged);

    for (std::size_t t = 0; t < rep.iterations.size(); ++t) {
      const NewtonIterRecord& rec = rep.iterations[t];
      CHECK(rec.cg_residual <= rec.cg_bound * (1.0 + 1e-12));
      CHECK(rec.objective_decrease < 0.0);
      if (t > 0) CHECK(rec.objective <= rep.iterations[t - 1].objective);
    }
  }
}

TEST_CASE("gradient norms contract superlinearly near the solution", "[snewton]") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const int n = 40, d = 8;
    DenseMatrix x = random_features(n, d, seed + 70);
    std::vector<double> y = random_labels(n, seed + 70);
    SolverConfig config;
    config.C = 10.0;
    SolverReport rep = solve(x, y, config);
    REQUIRE(rep.converged);
    CHECK(rep.newton_iters <= 30);

    std::vector<double> norms;
    for (const auto& rec : rep.iterations) norms.push_back(rec.grad_norm);
    norms.push_back(rep.final_grad_norm);
    for (std::size_t t = 0; t + 1 < norms.size(); ++t)
      if (norms[t] < 1e-2) CHECK(norms[t + 1] <= 0.5 * norms[t]);
  }
}

TEST_CASE("solve reports non-convergence at the iteration cap", "[snewton]") {
  DenseMatrix x = random_features(25, 5, 33);
  std::vector<double> y = random_labels(25, 33);
  SolverConfig config;
  config.C = 10.0;
  config.max_newton_iters = 1;
  config.delta = 1e-14;
  SolverReport rep = solve(x, y, config);
  CHECK_FALSE(rep.converged);
  CHECK(rep.newton_iters == 1);
}
