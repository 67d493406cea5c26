#include "arp/taylor_model.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace arp;

namespace {

struct RandomModel {
  int n, p;
  std::vector<oracle::Coeffs> derivs;  // orders 1..p-1
  oracle::Coeffs top;
  double sigma;

  ModelState state() const {
    std::vector<SymTensor> d;
    for (int i = 1; i < p; ++i) d.push_back(sym(derivs[static_cast<std::size_t>(i - 1)], n, i));
    return ModelState(Vector::Zero(n), d, sym(top, n, p), sigma);
  }

  // Model change evaluated term by term with brute-force contractions.
  double change(const Vector& s) const {
    double acc = 0.0, fact = 1.0;
    for (int i = 1; i < p; ++i) {
      fact *= i;
      acc += oracle::full_contract(derivs[static_cast<std::size_t>(i - 1)], n, i, s) / fact;
    }
    fact *= p;
    acc += oracle::full_contract(top, n, p, s) / fact;
    acc += sigma * std::pow(s.norm(), p + 1) / (fact * (p + 1));
    return acc;
  }
};

RandomModel random_model(std::mt19937_64& rng, int n, int p) {
  RandomModel m{n, p, {}, {}, 0.0};
  for (int i = 1; i < p; ++i) m.derivs.push_back(oracle::random_symmetric(rng, n, i));
  m.top = oracle::random_symmetric(rng, n, p);
  m.sigma = 0.5 + std::uniform_real_distribution<double>(0.0, 2.0)(rng);
  return m;
}

}  // namespace

TEST_SUITE("taylor_model") {

TEST_CASE("model value matches a term-by-term evaluation") {
  std::mt19937_64 rng(21);
  for (int p = 2; p <= 4; ++p) {
    for (int n = 1; n <= 3; ++n) {
      const RandomModel rm = random_model(rng, n, p);
      const ModelState st = rm.state();
      const Vector s = oracle::random_vector(rng, n);
      CHECK(model_change(st, s) == doctest::Approx(rm.change(s)).epsilon(1e-12));
      CHECK(model_change(st, s) == doctest::Approx(taylor_change(st, s) + regularizer(st, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("model gradient and Hessian agree with central differences") {
  std::mt19937_64 rng(22);
  for (int p = 2; p <= 4; ++p) {
    const int n = 3;
    const RandomModel rm = random_model(rng, n, p);
    const ModelState st = rm.state();
    const Vector s = oracle::random_vector(rng, n);
    const Vector g = model_grad(st, s);
    const Matrix h = model_hess(st, s);
    for (int i = 0; i < n; ++i) {
      CHECK(g(i) == doctest::Approx(oracle::central_diff([&](const Vector& z) { return rm.change(z); }, s, i, 1e-4))
                        .epsilon(1e-7));
      for (int j = 0; j < n; ++j) {
        const double d = oracle::central_diff([&](const Vector& z) { return model_grad(st, z)(j); }, s, i, 1e-4);
        CHECK(h(j, i) == doctest::Approx(d).epsilon(1e-6).scale(1.0));
      }
    }
    CHECK((h - h.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("Taylor gradient excludes the regularizer") {
  std::mt19937_64 rng(23);
  const RandomModel rm = random_model(rng, 2, 3);
  const ModelState st = rm.state();
  const Vector s = oracle::random_vector(rng, 2);
  const double r = s.norm();
  const Vector reg_grad = st.sigma() / factorial(3) * r * r * s;
  CHECK((model_grad(st, s) - taylor_grad(st, s) - reg_grad).norm() < 1e-12);
}

TEST_CASE("certificate of the zero step at a second-order point") {
  ModelState st(Vector::Zero(2), {SymTensor::zeros(1, 2)}, SymTensor::from_matrix(Matrix::Identity(2, 2)), 1.0);
  const StepCertificate c = check_step(st, Vector::Zero(2), 2.0, 2.0);
  CHECK(c.all_ok());
  CHECK(c.model_decrease == 0.0);
  CHECK(c.theta1_rhs == 0.0);
}

TEST_CASE("certificate of the zero step fails on negative curvature") {
  Matrix b(2, 2);
  b << -2, 0, 0, 1;
  ModelState st(Vector::Zero(2), {SymTensor::zeros(1, 2)}, SymTensor::from_matrix(b), 1.0);
  const StepCertificate c = check_step(st, Vector::Zero(2), 2.0, 2.0);
  CHECK(c.decrease_ok);
  CHECK(c.theta1_ok);
  CHECK_FALSE(c.theta2_ok);
  CHECK(c.lam_min_model == doctest::Approx(-2.0));
}

TEST_CASE("certificate right-hand sides") {
  ModelState st(Vector::Zero(2), {SymTensor::zeros(1, 2), SymTensor::zeros(2, 2)}, SymTensor::zeros(3, 2), 3.0);
  Vector s(2);
  s << 0.6, 0.8;
  const StepCertificate c = check_step(st, s, 2.0, 1.5);
  CHECK(c.theta1_rhs == doctest::Approx(2.0 * 3.0 / 6.0));
  CHECK(c.theta2_rhs == doctest::Approx(1.5 * 3.0 / 2.0));
  CHECK_THROWS_AS(check_step(st, s, 1.0, 2.0), Error);
}

TEST_CASE("model construction validates shapes") {
  CHECK_THROWS(ModelState(Vector::Zero(2), {SymTensor::zeros(1, 3)}, SymTensor::zeros(2, 2), 1.0));
  CHECK_THROWS(ModelState(Vector::Zero(2), {SymTensor::zeros(1, 2)}, SymTensor::zeros(3, 2), 1.0));
  CHECK_THROWS(ModelState(Vector::Zero(2), {SymTensor::zeros(1, 2)}, SymTensor::zeros(2, 2), 0.0));
  CHECK(factorial(0) == 1.0);
  CHECK(factorial(5) == 120.0);
}

}  // TEST_SUITE
