#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "carmafield/kernel.hpp"

using namespace carmafield;

namespace {

Matrix diag2(double a, double b) {
  Matrix m(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// random stationary CARMA spec with well-separated real roots
ModelSpec random_spec(std::mt19937& gen, int dim, int p, int q) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    std::vector<Polynomial> polys;
    for (int a = 0; a < dim; ++a) {
      std::vector<Complex> roots;
      for (int i = 0; i < p; ++i) roots.emplace_back(-0.4 - 2.6 * unif(gen), 0.0);
      bool separated = true;
      for (size_t i = 0; i < roots.size(); ++i)
        for (size_t j = i + 1; j < roots.size(); ++j)
          if (std::abs(roots[i] - roots[j]) < 0.15) separated = false;
      if (!separated) {
        --a;
        continue;
      }
      polys.push_back(Polynomial::from_roots(roots));
    }
    std::vector<double> b(static_cast<size_t>(p), 0.0);
    for (int i = 0; i <= q; ++i) b[static_cast<size_t>(i)] = 2.0 * unif(gen) - 1.0;
    b[static_cast<size_t>(q)] = 0.5 + unif(gen);
    ModelSpec spec = ModelSpec::carma(dim, std::move(polys), std::move(b));
    bool common = false;
    for (const auto& e : spec.axis_spectra.front().eigenvalues)
      if (std::abs(spec.b_poly(e.value)) < 1e-3) common = true;
    if (!common) return spec;
  }
}

}  // namespace

TEST_CASE("direct kernel evaluation") {
  const auto car1 = ModelSpec::carma(2, {Polynomial({1.0, 1.0}), Polynomial({1.0, 2.0})}, {1.0});
  const double s11[2] = {1.0, 1.0};
  CHECK(kernel_direct(car1, s11) == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));
  const double neg[2] = {-0.1, 1.0};
  CHECK(kernel_direct(car1, neg) == 0.0);

  // two-exponential diagonal pair
  const auto a1 = ModelSpec::gcarma({diag2(-2, -3), diag2(-5, -7)}, {1.0, 1.0}, {1.0, 1.0});
  for (double s1 : {0.0, 0.3, 1.1})
    for (double s2 : {0.0, 0.4, 0.9}) {
      const double s[2] = {s1, s2};
      const double expect = std::exp(-2 * s1 - 5 * s2) + std::exp(-3 * s1 - 7 * s2);
      CHECK(kernel_direct(a1, s) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("polynomial truncations") {
  const Polynomial a({1.0, 3.0, 2.0});
  CHECK(truncated_poly(a, 1).coeffs() == std::vector<double>({1.0, 3.0}));
  CHECK(truncated_poly(a, 2).coeffs() == std::vector<double>({1.0}));
  const Polynomial cubic({1.0, 6.0, 11.0, 6.0});
  CHECK(truncated_poly(cubic, 2).coeffs() == std::vector<double>({1.0, 6.0}));
  CHECK_THROWS_AS(truncated_poly(a, 0), Error);
  CHECK_THROWS_AS(truncated_poly(a, 3), Error);
}

TEST_CASE("coefficient table") {
  // root cancellation leaves a single exponential
  const auto carma21 = ModelSpec::carma(1, {Polynomial({1.0, 3.0, 2.0})}, {1.0, 1.0});
  const KernelCoefficients kc = kernel_coefficients(carma21);
  double wm1 = -1.0, wm2 = -1.0;
  for (int i = 0; i < kc.order; ++i) {
    const int idx[1] = {i};
    const double w = kc.weight(idx).real();
    if (std::abs(kc.axis_eigenvalues[0][static_cast<size_t>(i)] - Complex(-1, 0)) < 1e-8)
      wm1 = w;
    else
      wm2 = w;
  }
  CHECK(wm1 == doctest::Approx(0.0));
  CHECK(wm2 == doctest::Approx(1.0).epsilon(1e-10));

  // d=1 classical form b(lambda)/a'(lambda)
  const auto carma31 = ModelSpec::carma(1, {Polynomial({1.0, 6.0, 11.0, 6.0})}, {1.0, 0.5, 0.0});
  const KernelCoefficients kc31 = kernel_coefficients(carma31);
  const Polynomial ap = carma31.axis_polys[0].derivative();
  for (int i = 0; i < 3; ++i) {
    const Complex lambda = kc31.axis_eigenvalues[0][static_cast<size_t>(i)];
    const int idx[1] = {i};
    CHECK(std::abs(kc31.weight(idx) - carma31.b_poly(lambda) / ap.eval(lambda)) < 1e-10);
  }

  // p=1 on the plane collapses to a unit weight
  const auto car1 = ModelSpec::carma(2, {Polynomial({1.0, 1.0}), Polynomial({1.0, 2.0})}, {1.0});
  const KernelCoefficients kp = kernel_coefficients(car1);
  const int zero[2] = {0, 0};
  CHECK(kp.weight(zero).real() == doctest::Approx(1.0));
  CHECK(kp.axis_eigenvalues[0][0].real() == doctest::Approx(-1.0));
  CHECK(kp.axis_eigenvalues[1][0].real() == doctest::Approx(-2.0));
}

TEST_CASE("coefficient routes match the direct route") {
  std::mt19937 gen(777);
  for (int it = 0; it < 12; ++it) {
    const int dim = 1 + it % 2;
    const int p = 2 + it % 2;
    const ModelSpec spec = random_spec(gen, dim, p, (it % p == 0) ? 0 : p - 1);
    const KernelCoefficients kc = kernel_coefficients(spec);
    std::vector<double> s(static_cast<size_t>(dim));
    double worst = 0.0;
    for (int i = 0; i < (dim == 1 ? 50 : 10); ++i)
      for (int j = 0; j < (dim == 1 ? 1 : 10); ++j) {
        s[0] = 5.0 * i / (dim == 1 ? 49 : 9);
        if (dim == 2) s[1] = 5.0 * j / 9.0;
        worst = std::max(worst, std::abs(kc.eval(s) - kernel_direct(spec, s)));
      }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("gcarma coefficients via eigendecomposition") {
  const auto a1 = ModelSpec::gcarma({diag2(-2, -3), diag2(-5, -7)}, {1.0, 1.0}, {1.0, 1.0});
  const KernelCoefficients kc = kernel_coefficients(a1);
  for (double s1 : {0.2, 0.8})
    for (double s2 : {0.1, 0.6}) {
      const double s[2] = {s1, s2};
      CHECK(kc.eval(s) == doctest::Approx(kernel_direct(a1, s)).epsilon(1e-10));
    }

  // conjugate-symmetric table for complex spectra
  const auto osc = ModelSpec::carma(1, {Polynomial({1.0, 2.0, 2.0})}, {1.0, 0.0});
  const KernelCoefficients ko = kernel_coefficients(osc);
  const int i0[1] = {0}, i1[1] = {1};
  CHECK(std::abs(ko.weight(i0) - std::conj(ko.weight(i1))) < 1e-10);
  for (double s : {0.0, 0.5, 2.0}) {
    const double sv[1] = {s};
    CHECK(ko.eval(sv) == doctest::Approx(kernel_direct(osc, sv)).epsilon(1e-10));
  }
}

TEST_CASE("equal axis matrices closed form") {
  const auto carma21 =
      ModelSpec::carma(2, {Polynomial({1.0, 3.0, 2.0}), Polynomial({1.0, 3.0, 2.0})}, {1.0, 1.0});
  const double s[2] = {1.0, 1.0};
  CHECK(kernel_equal_matrices(carma21, s) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
  CHECK(kernel_direct(carma21, s) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));

  const auto car1d3 = ModelSpec::carma(
      3, {Polynomial({1.0, 1.0}), Polynomial({1.0, 1.0}), Polynomial({1.0, 1.0})}, {1.0});
  const double s3[3] = {1.0, 1.0, 1.0};
  CHECK(kernel_equal_matrices(car1d3, s3) == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));

  // repeated root handled by the derivative form
  const auto rep = ModelSpec::carma(1, {Polynomial({1.0, 2.0, 1.0})}, {1.0, 0.0});
  const double s1[1] = {1.0};
  CHECK(kernel_equal_matrices(rep, s1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  for (double t : {0.3, 0.9, 2.5}) {
    const double sv[1] = {t};
    CHECK(kernel_equal_matrices(rep, sv) ==
          doctest::Approx(kernel_direct(rep, sv)).epsilon(1e-10));
  }

  const auto mixed =
      ModelSpec::carma(2, {Polynomial({1.0, 1.0}), Polynomial({1.0, 2.0})}, {1.0});
  const double s2[2] = {1.0, 1.0};
  CHECK_THROWS_AS(kernel_equal_matrices(mixed, s2), Error);
}

TEST_CASE("evaluator dispatch and envelope") {
  // repeated roots route through the direct path
  const auto rep = ModelSpec::carma(1, {Polynomial({1.0, 2.0, 1.0})}, {1.0, 0.0});
  const KernelEvaluator krep(rep);
  CHECK(!krep.closed_form());
  CHECK_THROWS_AS(krep.coefficients(), Error);
  const double s1[1] = {1.0};
  CHECK(krep(s1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

  std::mt19937 gen(99);
  const ModelSpec spec = random_spec(gen, 2, 3, 1);
  const KernelEvaluator k(spec);
  CHECK(k.closed_form());
  const double eta = 0.9 * spec.min_abs_real_eigenvalue();
  const double zero[2] = {0.0, 0.0};
  const double c = std::abs(k(zero)) + 1.0;
  for (double s1v : {0.5, 1.5, 3.0, 4.5})
    for (double s2v : {0.5, 1.5, 3.0, 4.5}) {
      const double s[2] = {s1v, s2v};
      CHECK(std::abs(k(s)) <= 3.0 * c * std::exp(-eta * std::hypot(s1v, s2v)));
      const double off[2] = {s1v, -s2v};
      CHECK(k(off) == 0.0);
    }
}
