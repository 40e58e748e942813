#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "carmafield/algebra.hpp"

namespace carmafield {

enum class ModelMode { carma, gcarma };

/// CARMA(p,q)/GCARMA parameterization on R^d. CARMA mode fixes c = (0,...,0,1)
/// and builds the axis matrices as companions of the axis polynomials.
struct ModelSpec {
  int dim = 1;
  int p = 1;
  int q = 0;  // meaningful in CARMA mode only
  ModelMode mode = ModelMode::carma;
  std::vector<Polynomial> axis_polys;   // CARMA mode, size dim
  std::vector<Matrix> axis_matrices;    // both modes, size dim
  std::vector<double> b;
  std::vector<double> c;
  std::vector<Spectrum> axis_spectra;   // derived on construction

  static ModelSpec carma(int dim, std::vector<Polynomial> axis_polys,
                         std::vector<double> b);
  static ModelSpec gcarma(std::vector<Matrix> axis_matrices, std::vector<double> b,
                          std::vector<double> c);

  /// b(z) = b_0 + b_1 z + ... + b_{p-1} z^{p-1}.
  Complex b_poly(Complex z) const;
  /// Smallest |Re lambda| across all axes (kernel decay rate).
  double min_abs_real_eigenvalue() const;
  bool all_axes_distinct_eigenvalues() const;
};

struct ConstantJump {
  double value = 1.0;
};
struct GaussianJump {
  double mean = 0.0;
  double stddev = 1.0;
};
struct LaplaceJump {
  double scale = 1.0;  // two-sided exponential jump sizes
};
using JumpSizeLaw = std::variant<ConstantJump, GaussianJump, LaplaceJump>;

struct NoJumps {};
struct CompoundPoissonJumps {
  double rate = 1.0;
  JumpSizeLaw law;
};
struct StableJumps {
  double alpha = 1.5;  // in (0,2], symmetric
  double eta = 1.0;    // scale in zeta(u) = -eta |u|^alpha
};

/// Homogeneous Levy basis characteristics. The compound-Poisson part is finite
/// activity, so the small-jump compensator is folded into the drift beta and
/// the basis reads beta*Leb + sigma*W + sum of raw jumps.
struct LevyBasisSpec {
  double beta = 0.0;
  double sigma2 = 0.0;
  std::variant<NoJumps, CompoundPoissonJumps, StableJumps> jumps;

  static LevyBasisSpec gaussian(double sigma2, double beta = 0.0);
  static LevyBasisSpec compound_poisson(double rate, JumpSizeLaw law,
                                        double beta = 0.0, double sigma2 = 0.0);
  static LevyBasisSpec stable(double alpha, double eta);

  bool is_gaussian() const;  // no jump part at all
  bool is_stable() const;

  std::optional<double> kappa1() const;
  std::optional<double> kappa2() const;
  /// Requires kappa2; throws otherwise.
  double kappa2_or_throw() const;

  /// Cumulant (Levy symbol) zeta(u).
  Complex cumulant(double u) const;
};

double jump_mean(const JumpSizeLaw& law);
double jump_second_moment(const JumpSizeLaw& law);
Complex jump_char_function(const JumpSizeLaw& law, double u);

struct ValidationReport {
  bool structurally_valid = true;
  bool stationary = false;                  // all eigenvalue real parts < 0
  std::vector<bool> axis_distinct;          // distinct eigenvalues per axis
  bool no_common_roots = true;              // b(.) vs a_1(.) (CARMA mode)
  bool log_moment_finite = true;            // jump-law log moment
  bool companion_mode = true;               // false for GCARMA specs
  std::vector<std::string> failures;

  bool passed() const { return structurally_valid && stationary && log_moment_finite; }
};

ValidationReport validate_model(const ModelSpec& spec, const LevyBasisSpec& levy);

/// Characteristic function of Y(t): exp{ int_{R_+^d} zeta(u g(s)) ds }.
Complex marginal_char_function(const ModelSpec& spec, const LevyBasisSpec& levy,
                               double u, double abs_tol = 1e-9);

}  // namespace carmafield
