#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carmafield/model.hpp"

using namespace carmafield;

namespace {

Matrix diag2(double a, double b) {
  Matrix m(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("spec construction and structural checks") {
  const auto spec = ModelSpec::carma(2, {Polynomial({1.0, 1.0}), Polynomial({1.0, 2.0})}, {1.0});
  CHECK(spec.p == 1);
  CHECK(spec.q == 0);
  CHECK(spec.c == std::vector<double>{1.0});
  CHECK(spec.all_axes_distinct_eigenvalues());
  CHECK(spec.min_abs_real_eigenvalue() == doctest::Approx(1.0));

  const auto carma21 = ModelSpec::carma(1, {Polynomial({1.0, 3.0, 2.0})}, {1.0, 1.0});
  CHECK(carma21.q == 1);
  CHECK(carma21.c == std::vector<double>({0.0, 1.0}));
  CHECK(carma21.b_poly(Complex(-1.0, 0.0)) == Complex(0.0, 0.0));

  CHECK_THROWS_AS(ModelSpec::carma(1, {Polynomial({1.0, 1.0})}, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(ModelSpec::carma(1, {Polynomial({1.0, 1.0})}, {0.0}), Error);
  CHECK_THROWS_AS(
      ModelSpec::carma(2, {Polynomial({1.0, 1.0}), Polynomial({1.0, 3.0, 2.0})}, {1.0}),
      Error);
  CHECK_THROWS_AS(ModelSpec::gcarma({diag2(-1, -2)}, {1.0}, {1.0, 1.0}), Error);
}

TEST_CASE("validation report") {
  const auto levy = LevyBasisSpec::gaussian(1.0);

  const auto ok = ModelSpec::carma(2, {Polynomial({1.0, 1.0}), Polynomial({1.0, 2.0})}, {1.0});
  const ValidationReport rep = validate_model(ok, levy);
  CHECK(rep.passed());
  CHECK(rep.stationary);
  CHECK(rep.companion_mode);
  CHECK(rep.no_common_roots);
  CHECK(rep.failures.empty());

  const auto bad = ModelSpec::carma(1, {Polynomial({1.0, -1.0})}, {1.0});
  const ValidationReport rep2 = validate_model(bad, levy);
  CHECK(!rep2.passed());
  CHECK(!rep2.stationary);

  // diagonal GCARMA pair with no companion structure
  const auto a1 = ModelSpec::gcarma({diag2(-2, -3), diag2(-5, -7)}, {1.0, 1.0}, {1.0, 1.0});
  const ValidationReport rep3 = validate_model(a1, levy);
  CHECK(rep3.passed());
  CHECK(!rep3.companion_mode);

  // common root between b and a_1
  const auto common = ModelSpec::carma(1, {Polynomial({1.0, 3.0, 2.0})}, {1.0, 1.0});
  CHECK(!validate_model(common, levy).no_common_roots);
}

TEST_CASE("noise cumulants and moments") {
  const auto gauss = LevyBasisSpec::gaussian(2.0);
  CHECK(gauss.cumulant(1.0).real() == doctest::Approx(-1.0));
  CHECK(gauss.cumulant(1.0).imag() == doctest::Approx(0.0));
  CHECK(*gauss.kappa1() == 0.0);
  CHECK(*gauss.kappa2() == 2.0);

  const auto stab = LevyBasisSpec::stable(1.5, 1.0);
  CHECK(stab.cumulant(2.0).real() == doctest::Approx(-std::pow(2.0, 1.5)));
  CHECK(!stab.kappa2().has_value());
  CHECK_THROWS_AS(stab.kappa2_or_throw(), Error);
  CHECK(*LevyBasisSpec::stable(2.0, 1.5).kappa2() == doctest::Approx(3.0));

  const auto cp = LevyBasisSpec::compound_poisson(3.0, ConstantJump{1.0});
  const Complex z = cp.cumulant(M_PI);
  CHECK(z.real() == doctest::Approx(3.0 * (std::cos(M_PI) - 1.0)));
  CHECK(z.imag() == doctest::Approx(3.0 * std::sin(M_PI)));
  CHECK(*cp.kappa1() == doctest::Approx(3.0));
  CHECK(*cp.kappa2() == doctest::Approx(3.0));

  const auto cpl = LevyBasisSpec::compound_poisson(2.0, LaplaceJump{0.5});
  CHECK(*cpl.kappa1() == doctest::Approx(0.0));
  CHECK(*cpl.kappa2() == doctest::Approx(2.0 * 2.0 * 0.25));
  CHECK(jump_char_function(LaplaceJump{0.5}, 2.0).real() == doctest::Approx(1.0 / 2.0));

  CHECK_THROWS_AS(LevyBasisSpec::gaussian(-1.0), Error);
  CHECK_THROWS_AS(LevyBasisSpec::stable(2.5, 1.0), Error);
  CHECK_THROWS_AS(LevyBasisSpec::compound_poisson(0.0, ConstantJump{1.0}), Error);
}

TEST_CASE("marginal characteristic function") {
  const auto car1 = ModelSpec::carma(1, {Polynomial({1.0, 1.0})}, {1.0});
  const auto gauss = LevyBasisSpec::gaussian(1.0);

  CHECK(marginal_char_function(car1, gauss, 0.0) == Complex(1.0, 0.0));

  for (double u : {0.5, 1.0, 2.0}) {
    const Complex phi = marginal_char_function(car1, gauss, u);
    CHECK(phi.real() == doctest::Approx(std::exp(-u * u / 4.0)).epsilon(1e-9));
    CHECK(phi.imag() == doctest::Approx(0.0));
    CHECK(std::abs(phi) <= 1.0 + 1e-12);
  }

  // Gaussian case: log phi exactly quadratic in u
  const double c1 = std::log(std::abs(marginal_char_function(car1, gauss, 0.5))) / 0.25;
  const double c2 = std::log(std::abs(marginal_char_function(car1, gauss, 2.0))) / 4.0;
  CHECK(c1 == doctest::Approx(c2).epsilon(1e-9));

  // stable CAR(1) on the plane: closed-form exponent
  const auto plane = ModelSpec::carma(2, {Polynomial({1.0, 1.0}), Polynomial({1.0, 2.0})}, {1.0});
  const double alpha = 1.5, eta = 0.8;
  const auto stab = LevyBasisSpec::stable(alpha, eta);
  for (double u : {0.5, 1.0, 2.0}) {
    const Complex phi = marginal_char_function(plane, stab, u);
    const double expect = std::exp(-eta * std::pow(u, alpha) / (alpha * alpha * 2.0));
    CHECK(phi.real() == doctest::Approx(expect).epsilon(1e-7));
    CHECK(phi.imag() == doctest::Approx(0.0));
  }
  const double r1 = std::log(std::abs(marginal_char_function(plane, stab, 0.5))) / std::pow(0.5, alpha);
  const double r2 = std::log(std::abs(marginal_char_function(plane, stab, 2.0))) / std::pow(2.0, alpha);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-6));
}
