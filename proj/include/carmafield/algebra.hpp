#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace carmafield {

using Complex = std::complex<double>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Real polynomial alpha_0 z^p + alpha_1 z^{p-1} + ... + alpha_p stored in
/// descending-power order. The monic constructors enforce alpha_0 == 1.
class Polynomial {
 public:
  explicit Polynomial(std::vector<double> coeffs);

  /// Monic polynomial from the tail coefficients {a_1, ..., a_p}.
  static Polynomial monic_from_tail(std::vector<double> tail);

  /// Expands prod_i (z - r_i) for a conjugate-closed root set.
  static Polynomial from_roots(const std::vector<Complex>& roots);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool monic() const { return coeffs_.front() == 1.0; }
  double coeff(int i) const { return coeffs_.at(static_cast<size_t>(i)); }
  const std::vector<double>& coeffs() const { return coeffs_; }

  Complex eval(Complex z) const;
  double eval(double z) const;
  Polynomial derivative() const;

 private:
  std::vector<double> coeffs_;
};

/// Dense real square matrix, row-major. Sized for state orders p <= 10.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double value = 0.0);
  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  Matrix operator*(const Matrix& rhs) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator-(const Matrix& rhs) const;
  Matrix scaled(double s) const;
  Matrix transpose() const;
  std::vector<double> apply(std::span<const double> x) const;

  double norm1() const;
  double max_abs_diff(const Matrix& rhs) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

/// Solves A X = B by LU with partial pivoting.
Matrix solve(Matrix a, Matrix b);

/// Companion matrix of a monic polynomial; (-a_1) for degree 1.
Matrix companion_matrix(const Polynomial& poly);

/// Characteristic polynomial det(zI - A) via Faddeev-LeVerrier.
Polynomial characteristic_polynomial(const Matrix& a);

/// e^{At} by scaling-and-squaring with the degree-13 Pade approximant.
Matrix mat_exp(const Matrix& a, double t = 1.0);

struct EigenValue {
  Complex value;
  int multiplicity = 1;
};

struct Spectrum {
  std::vector<EigenValue> eigenvalues;

  int total_multiplicity() const;
  bool distinct() const;
  /// Flat list with repetitions according to multiplicity.
  std::vector<Complex> flat() const;
  double max_real_part() const;
  double min_abs_real_part() const;
  /// Smallest pairwise gap between distinct eigenvalues.
  double min_gap() const;
};

/// All complex roots by Durand-Kerner iteration; multiplicities inferred by
/// clustering within `cluster_radius` (relative).
Spectrum poly_roots(const Polynomial& poly, double tol = 1e-12,
                    double cluster_radius = 1e-6);

Spectrum matrix_spectrum(const Matrix& a);

/// Tensorized Gauss-Legendre quadrature over R_+^d for integrands with
/// exponential decay |f(s)| <= C e^{-decay_rate ||s||}. Each axis is mapped to
/// (0,1) via u = 1 - e^{-decay_rate s} and panels are refined dyadically until
/// two successive levels differ by less than abs_tol.
double quad_rplus(const std::function<double(std::span<const double>)>& f,
                  int dim, double decay_rate, double abs_tol);

Complex quad_rplus_complex(
    const std::function<Complex(std::span<const double>)>& f, int dim,
    double decay_rate, double abs_tol);

/// Tensorized Gauss-Legendre on the unit cube [0,1]^d with dyadic refinement.
double quad_unit_cube(const std::function<double(std::span<const double>)>& f,
                      int dim, double abs_tol);

/// Complex dense matrix utilities used by the eigenvector path.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(int rows, int cols, Complex value = {});
  static CMatrix identity(int n);
  static CMatrix from_real(const Matrix& m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Complex& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  Complex operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  CMatrix operator*(const CMatrix& rhs) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> a_;
};

/// Solves A X = B (complex LU with partial pivoting).
CMatrix solve(CMatrix a, CMatrix b);

/// A unit null vector of a (numerically) singular matrix.
std::vector<Complex> null_vector(CMatrix a);

}  // namespace carmafield
