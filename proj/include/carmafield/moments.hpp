#pragma once

#include <memory>
#include <span>

#include "carmafield/kernel.hpp"

namespace carmafield {

struct OrthantTable;

/// Second-order statistics of a stationary field: mean, orthant-dependent
/// autocovariance and rational spectral density. Closed forms come from the
/// kernel coefficient table; a quadrature route is kept as an independent
/// oracle and as the fallback for repeated eigenvalues.
class SecondOrder {
 public:
  SecondOrder(const ModelSpec& spec, const LevyBasisSpec& levy);

  double mean() const;
  double variance() const { return autocovariance(std::vector<double>(static_cast<size_t>(spec_->dim), 0.0)); }

  /// Closed form when available, quadrature otherwise.
  double autocovariance(std::span<const double> t) const;

  /// kappa2 * int g(s+max(0,-t)) g(s+max(0,t)) ds, independent of the closed
  /// form.
  double autocovariance_quadrature(std::span<const double> t,
                                   double abs_tol = 1e-10) const;

  double spectral_density(std::span<const double> omega) const;

  bool closed_form() const { return kernel_.closed_form(); }
  double kappa2() const { return kappa2_; }
  const KernelEvaluator& kernel() const { return kernel_; }

 private:
  double autocovariance_closed(std::span<const double> t) const;

  const OrthantTable& orthants() const;

  const ModelSpec* spec_;
  const LevyBasisSpec* levy_;
  KernelEvaluator kernel_;
  mutable std::shared_ptr<const OrthantTable> orthants_;
  double kappa2_ = 0.0;
  bool kappa1_defined_ = false;
  double kappa1_ = 0.0;
};

/// State covariance Sigma = kappa2 int e^{A_1 s_1}...c c^T...e^{A_1^T s_1} ds
/// by quadrature (test oracle; variance == b^T Sigma b).
Matrix state_covariance(const ModelSpec& spec, const LevyBasisSpec& levy,
                        double abs_tol = 1e-9);

/// Double-residue closed form for CAR(p) on the plane; must agree with the
/// general autocovariance route.
double car_p_plane_acov(const ModelSpec& spec, const LevyBasisSpec& levy,
                        std::span<const double> t);

}  // namespace carmafield
