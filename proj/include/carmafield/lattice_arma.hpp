#pragma once

#include <array>
#include <map>

#include "carmafield/simulate.hpp"

namespace carmafield {

using Lag = std::pair<int, int>;

/// Exact ARMA structure of a planar field sampled on the unit lattice:
/// sum_k d_k Y_{t-k} equals a (p-1,p-1)-dependent moving average of the
/// cell integrals R_t.
struct ArmaRepresentation {
  int p = 1;
  std::vector<double> ar;                  // d_{k1,k2}, (p+1)^2 row-major
  std::vector<std::vector<double>> theta;  // Theta_{k1,k2}, p^2 row vectors of length p
  Matrix noise_cov;                        // Sigma_R, p x p
  std::map<Lag, double> rhs_acov;          // gamma_hat on |h_i| <= p-1

  double d(int k1, int k2) const { return ar[static_cast<size_t>(k1) * (p + 1) + k2]; }
  const std::vector<double>& theta_at(int k1, int k2) const {
    return theta[static_cast<size_t>(k1) * p + k2];
  }
  /// Zero outside the (p-1,p-1) support.
  double gamma_hat(int h1, int h2) const;
};

/// d_{k,0} and d_{0,k} from the characteristic polynomials of e^{A_1}, e^{A_2};
/// cross terms multiply. Requires commuting axis matrices.
std::vector<double> ar_coefficients(const ModelSpec& spec);

struct NoiseWeights {
  std::vector<std::vector<double>> theta;
  Matrix noise_cov;
};

NoiseWeights noise_weights(const ModelSpec& spec, const LevyBasisSpec& levy,
                           double quad_tol = 1e-10);

std::map<Lag, double> rhs_autocovariance(const ModelSpec& spec, const LevyBasisSpec& levy);

ArmaRepresentation arma_representation(const ModelSpec& spec, const LevyBasisSpec& levy);

struct MaMatch {
  std::vector<std::array<double, 4>> solutions;  // (theta00, theta10, theta01, theta11)
  bool matched = false;                          // false: no_real_solution
};

struct MaMatchOptions {
  int starts = 10000;
  double residual_tol = 1e-10;
  double dedup_tol = 1e-6;
};

/// All real MA(1,1) parameterizations reproducing a p=2 gamma_hat table, by
/// multi-start damped Gauss-Newton over a quasi-random start box.
MaMatch ma_match(const std::map<Lag, double>& gamma_hat, const MaMatchOptions& opt = {});

struct SpectralCheck {
  double min_f = 0.0;
  bool log_integrable = false;
};

/// Discrete spectral density of gamma_hat on a grid_n^2 frequency grid;
/// log-integrability reported via strict positivity of the minimum.
SpectralCheck discrete_spectral_check(const std::map<Lag, double>& gamma_hat,
                                      int grid_n = 256);

struct ResidualReport {
  std::map<Lag, double> acov;       // empirical autocovariance of V_t
  std::map<Lag, double> corr;       // same, normalized by acov(0,0)
  std::map<Lag, double> deviation;  // acov minus gamma_hat
  size_t samples = 0;
};

/// Applies the AR filter V_t = sum_k d_k Y_{t-k} to a unit-spacing field and
/// reports how close V comes to the predicted moving-average structure.
ResidualReport verify_arma_recursion(const LatticeField& field,
                                     const ArmaRepresentation& repr);

}  // namespace carmafield
