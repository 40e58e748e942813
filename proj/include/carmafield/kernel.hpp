#pragma once

#include <optional>
#include <span>

#include "carmafield/model.hpp"

namespace carmafield {

/// Exponential-sum representation of the kernel: a dense p^d tensor of complex
/// weights over per-axis eigenvalue choices. Valid only when every axis has
/// distinct eigenvalues.
struct KernelCoefficients {
  int dim = 0;
  int order = 0;                                    // p
  std::vector<std::vector<Complex>> axis_eigenvalues;  // [axis][i], size p
  std::vector<Complex> weights;                     // p^dim, row-major in indices

  size_t flat_index(std::span<const int> idx) const;
  Complex weight(std::span<const int> idx) const;
  double eval(std::span<const double> s) const;
};

/// g(s) = b^T e^{A_1 s_1} ... e^{A_d s_d} c for s >= 0, zero otherwise.
double kernel_direct(const ModelSpec& spec, std::span<const double> s);

/// Degree-(p-k) truncation a_k(z) = sum_{l=0}^{p-k} alpha_l z^{p-k-l}.
Polynomial truncated_poly(const Polynomial& a, int k);

/// Exponential-sum weights: residue formula in CARMA mode, eigendecomposition
/// of the axis matrices in GCARMA mode. Requires distinct eigenvalues per axis.
KernelCoefficients kernel_coefficients(const ModelSpec& spec);

/// Closed form for equal axis polynomials (any multiplicity structure).
double kernel_equal_matrices(const ModelSpec& spec, std::span<const double> s);

/// Kernel evaluation dispatch: coefficient table when all axes have distinct,
/// well-separated eigenvalues, direct matrix exponentials otherwise.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(const ModelSpec& spec);

  double operator()(std::span<const double> s) const;
  bool closed_form() const { return coeffs_.has_value(); }
  const KernelCoefficients& coefficients() const;

 private:
  const ModelSpec* spec_;
  std::optional<KernelCoefficients> coeffs_;
};

}  // namespace carmafield
