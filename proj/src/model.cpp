#include "carmafield/model.hpp"

#include <cmath>

#include "carmafield/kernel.hpp"

namespace carmafield {

ModelSpec ModelSpec::carma(int dim, std::vector<Polynomial> axis_polys,
                           std::vector<double> b) {
  if (dim < 1 || dim > 3) throw Error("dimension must be 1, 2 or 3");
  if (static_cast<int>(axis_polys.size()) != dim)
    throw Error("need one axis polynomial per dimension");
  const int p = axis_polys.front().degree();
  if (p < 1) throw Error("state order must be >= 1");
  for (const auto& a : axis_polys) {
    if (!a.monic()) throw Error("axis polynomials must be monic");
    if (a.degree() != p) throw Error("axis polynomials must share one degree");
  }
  if (static_cast<int>(b.size()) != p) throw Error("b must have length p");
  int q = -1;
  for (int i = 0; i < p; ++i)
    if (b[static_cast<size_t>(i)] != 0.0) q = i;
  if (q < 0) throw Error("b must be non-zero");

  ModelSpec spec;
  spec.dim = dim;
  spec.p = p;
  spec.q = q;
  spec.mode = ModelMode::carma;
  spec.axis_polys = std::move(axis_polys);
  spec.b = std::move(b);
  spec.c.assign(static_cast<size_t>(p), 0.0);
  spec.c.back() = 1.0;
  for (const auto& a : spec.axis_polys) {
    spec.axis_matrices.push_back(companion_matrix(a));
    spec.axis_spectra.push_back(poly_roots(a));
  }
  return spec;
}

ModelSpec ModelSpec::gcarma(std::vector<Matrix> axis_matrices, std::vector<double> b,
                            std::vector<double> c) {
  const int dim = static_cast<int>(axis_matrices.size());
  if (dim < 1 || dim > 3) throw Error("dimension must be 1, 2 or 3");
  const int p = axis_matrices.front().rows();
  for (const auto& m : axis_matrices)
    if (m.rows() != p || m.cols() != p) throw Error("axis matrices must share one order");
  if (static_cast<int>(b.size()) != p || static_cast<int>(c.size()) != p)
    throw Error("b and c must have length p");

  ModelSpec spec;
  spec.dim = dim;
  spec.p = p;
  spec.q = p - 1;
  spec.mode = ModelMode::gcarma;
  spec.axis_matrices = std::move(axis_matrices);
  spec.b = std::move(b);
  spec.c = std::move(c);
  for (const auto& m : spec.axis_matrices) spec.axis_spectra.push_back(matrix_spectrum(m));
  return spec;
}

Complex ModelSpec::b_poly(Complex z) const {
  Complex acc = 0.0;
  for (int i = p - 1; i >= 0; --i) acc = acc * z + b[static_cast<size_t>(i)];
  return acc;
}

double ModelSpec::min_abs_real_eigenvalue() const {
  double m = 1e300;
  for (const auto& s : axis_spectra) m = std::min(m, s.min_abs_real_part());
  return m;
}

bool ModelSpec::all_axes_distinct_eigenvalues() const {
  for (const auto& s : axis_spectra)
    if (!s.distinct()) return false;
  return true;
}

LevyBasisSpec LevyBasisSpec::gaussian(double sigma2, double beta) {
  if (sigma2 < 0.0) throw Error("sigma2 must be non-negative");
  LevyBasisSpec out;
  out.beta = beta;
  out.sigma2 = sigma2;
  return out;
}

LevyBasisSpec LevyBasisSpec::compound_poisson(double rate, JumpSizeLaw law,
                                              double beta, double sigma2) {
  if (rate <= 0.0) throw Error("compound-Poisson rate must be positive");
  if (sigma2 < 0.0) throw Error("sigma2 must be non-negative");
  LevyBasisSpec out;
  out.beta = beta;
  out.sigma2 = sigma2;
  out.jumps = CompoundPoissonJumps{rate, law};
  return out;
}

LevyBasisSpec LevyBasisSpec::stable(double alpha, double eta) {
  if (alpha <= 0.0 || alpha > 2.0) throw Error("stable index must lie in (0,2]");
  if (eta <= 0.0) throw Error("stable scale must be positive");
  LevyBasisSpec out;
  out.jumps = StableJumps{alpha, eta};
  return out;
}

bool LevyBasisSpec::is_gaussian() const { return std::holds_alternative<NoJumps>(jumps); }
bool LevyBasisSpec::is_stable() const { return std::holds_alternative<StableJumps>(jumps); }

double jump_mean(const JumpSizeLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConstantJump>) return l.value;
        if constexpr (std::is_same_v<T, GaussianJump>) return l.mean;
        if constexpr (std::is_same_v<T, LaplaceJump>) return 0.0;
      },
      law);
}

double jump_second_moment(const JumpSizeLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConstantJump>) return l.value * l.value;
        if constexpr (std::is_same_v<T, GaussianJump>)
          return l.mean * l.mean + l.stddev * l.stddev;
        if constexpr (std::is_same_v<T, LaplaceJump>) return 2.0 * l.scale * l.scale;
      },
      law);
}

Complex jump_char_function(const JumpSizeLaw& law, double u) {
  return std::visit(
      [u](const auto& l) -> Complex {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConstantJump>)
          return std::exp(Complex(0.0, u * l.value));
        if constexpr (std::is_same_v<T, GaussianJump>)
          return std::exp(Complex(-0.5 * u * u * l.stddev * l.stddev, u * l.mean));
        if constexpr (std::is_same_v<T, LaplaceJump>)
          return Complex(1.0 / (1.0 + l.scale * l.scale * u * u), 0.0);
      },
      law);
}

std::optional<double> LevyBasisSpec::kappa1() const {
  if (const auto* cp = std::get_if<CompoundPoissonJumps>(&jumps))
    return beta + cp->rate * jump_mean(cp->law);
  if (const auto* st = std::get_if<StableJumps>(&jumps)) {
    if (st->alpha > 1.0) return 0.0;  // symmetric
    return std::nullopt;
  }
  return beta;
}

std::optional<double> LevyBasisSpec::kappa2() const {
  if (const auto* cp = std::get_if<CompoundPoissonJumps>(&jumps))
    return sigma2 + cp->rate * jump_second_moment(cp->law);
  if (const auto* st = std::get_if<StableJumps>(&jumps)) {
    if (st->alpha == 2.0) return 2.0 * st->eta;
    return std::nullopt;
  }
  return sigma2;
}

double LevyBasisSpec::kappa2_or_throw() const {
  const auto k2 = kappa2();
  if (!k2) throw Error("second moment undefined for this noise specification");
  return *k2;
}

Complex LevyBasisSpec::cumulant(double u) const {
  if (const auto* st = std::get_if<StableJumps>(&jumps))
    return Complex(-st->eta * std::pow(std::abs(u), st->alpha), 0.0);
  Complex zeta(-0.5 * u * u * sigma2, u * beta);
  if (const auto* cp = std::get_if<CompoundPoissonJumps>(&jumps))
    zeta += cp->rate * (jump_char_function(cp->law, u) - 1.0);
  return zeta;
}

ValidationReport validate_model(const ModelSpec& spec, const LevyBasisSpec& levy) {
  ValidationReport rep;
  rep.companion_mode = spec.mode == ModelMode::carma;

  rep.stationary = true;
  for (const auto& s : spec.axis_spectra)
    if (s.max_real_part() >= 0.0) rep.stationary = false;
  if (!rep.stationary) rep.failures.push_back("stationarity");

  for (const auto& s : spec.axis_spectra) rep.axis_distinct.push_back(s.distinct());

  if (spec.mode == ModelMode::carma) {
    for (const auto& e : spec.axis_spectra.front().eigenvalues) {
      if (std::abs(spec.b_poly(e.value)) < 1e-9) rep.no_common_roots = false;
    }
  }

  // All supported jump families have finite log moments: compound Poisson with
  // finite-mean jump sizes and symmetric stable laws both qualify.
  rep.log_moment_finite = true;
  (void)levy;
  return rep;
}

Complex marginal_char_function(const ModelSpec& spec, const LevyBasisSpec& levy,
                               double u, double abs_tol) {
  if (u == 0.0) return Complex(1.0, 0.0);
  const KernelEvaluator g(spec);
  // The substitution rate must match the integrand's slowest decay exactly,
  // otherwise the mapped integrand has a fractional-power endpoint.
  double rate = spec.min_abs_real_eigenvalue();
  if (const auto* st = std::get_if<StableJumps>(&levy.jumps)) rate *= st->alpha;
  const Complex integral = quad_rplus_complex(
      [&](std::span<const double> s) { return levy.cumulant(u * g(s)); }, spec.dim,
      rate, abs_tol);
  return std::exp(integral);
}

}  // namespace carmafield
