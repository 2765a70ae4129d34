#include <cmath>
#include <random>

#include "doctest.h"
#include "pnnsr/error.hpp"
#include "pnnsr/optimizer.hpp"

using namespace pnnsr;

namespace {

/// f(x) = 1/2 x'Ax - b'x with A = Q'Q + I (positive definite).
struct Quadratic {
  int n;
  std::vector<double> a;
  std::vector<double> b;

  Quadratic(int size, std::uint64_t seed) : n(size), a(size * size, 0.0), b(size) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> q(size * size);
    for (double& v : q) v = z(rng) / std::sqrt(static_cast<double>(size));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = i == j ? 1.0 : 0.0;
        for (int k = 0; k < n; ++k) s += q[k * n + i] * q[k * n + j];
        a[i * n + j] = s;
      }
    for (double& v : b) v = z(rng);
  }

  double operator()(std::span<const double> x, std::span<double> g) const {
    double f = 0.0;
    for (int i = 0; i < n; ++i) {
      double ax = 0.0;
      for (int j = 0; j < n; ++j) ax += a[i * n + j] * x[j];
      g[i] = ax - b[i];
      f += 0.5 * x[i] * ax - b[i] * x[i];
    }
    return f;
  }
};

double rosenbrock(std::span<const double> x, std::span<double> g) {
  const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
  g[0] = -2.0 * a - 400.0 * x[0] * b;
  g[1] = 200.0 * b;
  return a * a + 100.0 * b * b;
}

}  // namespace

TEST_CASE("quadratic in 76 variables converges") {
  const Quadratic q(76, 3);
  CgOptions opt;
  opt.max_iters = 200;
  opt.rel_tol = 0.0;
  opt.grad_tol = 1e-6;
  const auto r = minimize_cg(std::cref(q), std::vector<double>(76, 0.0), opt);
  CHECK(r.grad_norm < 1e-6);
  CHECK(r.iterations <= 200);
  CHECK(r.stop_reason == "grad_tol");
}

TEST_CASE("accepted iterates never increase the objective") {
  const Quadratic q(20, 9);
  const auto r = minimize_cg(std::cref(q), std::vector<double>(20, 1.0), CgOptions{});
  REQUIRE(r.curve.size() >= 2);
  for (std::size_t i = 1; i < r.curve.size(); ++i) CHECK(r.curve[i] <= r.curve[i - 1]);
  CHECK(r.curve.back() == r.value);
}

TEST_CASE("nonconvex valley") {
  CgOptions opt;
  opt.max_iters = 5000;
  opt.rel_tol = 0.0;
  opt.grad_tol = 1e-8;
  const auto r = minimize_cg(rosenbrock, {-1.2, 1.0}, opt);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("relative decrease window stops early") {
  const Quadratic q(10, 1);
  CgOptions opt;
  opt.rel_tol = 1e-3;
  const auto r = minimize_cg(std::cref(q), std::vector<double>(10, 0.5), opt);
  CHECK(r.stop_reason != "max_iters");
  CHECK(r.iterations < 500);
}

TEST_CASE("iteration cap") {
  const Quadratic q(30, 2);
  CgOptions opt;
  opt.max_iters = 3;
  opt.rel_tol = 0.0;
  const auto r = minimize_cg(std::cref(q), std::vector<double>(30, 0.0), opt);
  CHECK(r.iterations == 3);
  CHECK(r.stop_reason == "max_iters");
}

TEST_CASE("non-finite start is rejected") {
  const auto bad = [](std::span<const double>, std::span<double> g) {
    g[0] = 0.0;
    return std::nan("");
  };
  CHECK_THROWS_AS(minimize_cg(bad, {0.0}, CgOptions{}), Error);
}
