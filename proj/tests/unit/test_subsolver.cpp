#include "arp/subsolver.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace arp;

namespace {

double cubic(const Vector& g, const Matrix& b, double sigma, const Vector& s) {
  return g.dot(s) + 0.5 * s.dot(b * s) + sigma / 6.0 * std::pow(s.norm(), 3);
}

// Best value over a polar grid of the plane (n = 2).
double grid_min_2d(const Vector& g, const Matrix& b, double sigma, double radius) {
  double best = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double r = radius * i / 2000.0;
    for (int j = 0; j < 720; ++j) {
      const double t = 2.0 * M_PI * j / 720.0;
      Vector s(2);
      s << r * std::cos(t), r * std::sin(t);
      best = std::min(best, cubic(g, b, sigma, s));
    }
  }
  return best;
}

ModelState quadratic_state(const Vector& g, const Matrix& b, double sigma) {
  return ModelState(Vector::Zero(g.size()), {SymTensor::from_vector(g)}, SymTensor::from_matrix(b), sigma);
}

}  // namespace

TEST_SUITE("subsolver") {

TEST_CASE("cubic step satisfies the global optimality conditions") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    const Vector g = oracle::random_vector(rng, n);
    const Matrix b = sym(oracle::random_symmetric(rng, n, 2, 2.0), n, 2).to_matrix();
    const double sigma = 0.1 + trial * 0.2;
    const Vector s = exact_cubic_step(g, b, sigma);
    const double lam = 0.5 * sigma * s.norm();
    CHECK(((b + lam * Matrix::Identity(n, n)) * s + g).norm() < 1e-8 * (1 + g.norm()));
    CHECK(lambda_min(b + lam * Matrix::Identity(n, n)) >= -1e-8);
  }
}

TEST_CASE("cubic step reaches the grid minimum in the plane") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector g = oracle::random_vector(rng, 2);
    const Matrix b = sym(oracle::random_symmetric(rng, 2, 2, 2.0), 2, 2).to_matrix();
    const double sigma = 1.0 + trial;
    const Vector s = exact_cubic_step(g, b, sigma);
    CHECK(cubic(g, b, sigma, s) <= grid_min_2d(g, b, sigma, 3.0 * (s.norm() + 1.0)) + 1e-9);
  }
}

TEST_CASE("hard case moves along the leftmost eigenvector") {
  Matrix b(2, 2);
  b << -2, 0, 0, 1;
  Vector g(2);
  g << 0.0, 1.0;
  const double sigma = 1.0;
  const Vector s = exact_cubic_step(g, b, sigma);
  // λ = 2 gives ||s|| = 4 with the tail component -1/3.
  CHECK(s.norm() == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(s(1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-10));
  CHECK(std::abs(s(0)) == doctest::Approx(std::sqrt(16.0 - 1.0 / 9.0)).epsilon(1e-10));
}

TEST_CASE("zero gradient with positive curvature returns zero") {
  CHECK(exact_cubic_step(Vector::Zero(3), Matrix::Identity(3, 3), 1.0).norm() == 0.0);
}

TEST_CASE("minimize_model certifies steps for p = 2 and p = 3") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const int p = 2 + trial % 2;
    std::vector<SymTensor> d;
    for (int i = 1; i < p; ++i) d.push_back(sym(oracle::random_symmetric(rng, n, i), n, i));
    const ModelState st(Vector::Zero(n), d, sym(oracle::random_symmetric(rng, n, p), n, p), 0.5 + trial);
    for (auto method : {SubsolverMethod::ExactSecular, SubsolverMethod::InnerDescent}) {
      SubsolverConfig cfg;
      cfg.method = method;
      const SubsolverResult r = minimize_model(st, 2.0, 2.0, cfg);
      CHECK(r.certificate.all_ok());
      CHECK(check_step(st, r.s, 2.0, 2.0).all_ok());
      CHECK(model_change(st, r.s) <= 0.0);
    }
  }
}

TEST_CASE("exhausted budget reports the best point") {
  std::mt19937_64 rng(34);
  SubsolverConfig cfg;
  cfg.method = SubsolverMethod::InnerDescent;
  cfg.inner_budget = 1;
  int exhausted = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const ModelState st(Vector::Zero(3),
                        {sym(oracle::random_symmetric(rng, 3, 1), 3, 1), sym(oracle::random_symmetric(rng, 3, 2), 3, 2)},
                        sym(oracle::random_symmetric(rng, 3, 3), 3, 3), 1e-2);
    try {
      const SubsolverResult r = inner_descent(st, 1.01, 1.01, cfg);
      CHECK(r.inner_iterations <= 1);
    } catch (const BudgetExhausted& e) {
      ++exhausted;
      CHECK(e.best().s.size() == 3);
      CHECK(model_change(st, e.best().s) <= 0.0);
      CHECK_FALSE(e.best().certificate.all_ok());
    }
  }
  CHECK(exhausted > 0);
}

TEST_CASE("configuration validation") {
  SubsolverConfig cfg;
  cfg.inner_budget = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.inner_budget = 10;
  cfg.inner_tol_factor = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

}  // TEST_SUITE
