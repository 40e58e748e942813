#include "carmafield/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carmafield {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw Error("polynomial needs at least one coefficient");
  if (coeffs_.size() > 1 && coeffs_.front() == 0.0)
    throw Error("leading coefficient must be non-zero");
}

Polynomial Polynomial::monic_from_tail(std::vector<double> tail) {
  std::vector<double> c;
  c.reserve(tail.size() + 1);
  c.push_back(1.0);
  c.insert(c.end(), tail.begin(), tail.end());
  return Polynomial(std::move(c));
}

Polynomial Polynomial::from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> c{1.0};
  for (const Complex& r : roots) {
    c.push_back(0.0);
    for (size_t i = c.size() - 1; i > 0; --i) c[i] = c[i] - r * c[i - 1];
  }
  std::vector<double> real(c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    if (std::abs(c[i].imag()) > 1e-10 * (1.0 + std::abs(c[i].real())))
      throw Error("root set is not conjugate-closed");
    real[i] = c[i].real();
  }
  return Polynomial(std::move(real));
}

Complex Polynomial::eval(Complex z) const {
  Complex acc = 0.0;
  for (double c : coeffs_) acc = acc * z + c;
  return acc;
}

double Polynomial::eval(double z) const {
  double acc = 0.0;
  for (double c : coeffs_) acc = acc * z + c;
  return acc;
}

Polynomial Polynomial::derivative() const {
  const int p = degree();
  if (p == 0) return Polynomial({0.0});
  std::vector<double> c(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) c[static_cast<size_t>(i)] = coeffs_[static_cast<size_t>(i)] * (p - i);
  return Polynomial(std::move(c));
}

Matrix::Matrix(int rows, int cols, double value)
    : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, value) {}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw Error("matrix shape mismatch");
  Matrix out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const double v = (*this)(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < rhs.cols_; ++j) out(i, j) += v * rhs(k, j);
    }
  return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
  Matrix out = *this;
  for (size_t i = 0; i < a_.size(); ++i) out.a_[i] += rhs.a_[i];
  return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
  Matrix out = *this;
  for (size_t i = 0; i < a_.size(); ++i) out.a_[i] -= rhs.a_[i];
  return out;
}

Matrix Matrix::scaled(double s) const {
  Matrix out = *this;
  for (double& v : out.a_) v *= s;
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

std::vector<double> Matrix::apply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols_) throw Error("matrix/vector shape mismatch");
  std::vector<double> y(static_cast<size_t>(rows_), 0.0);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) y[static_cast<size_t>(i)] += (*this)(i, j) * x[static_cast<size_t>(j)];
  return y;
}

double Matrix::norm1() const {
  double best = 0.0;
  for (int j = 0; j < cols_; ++j) {
    double s = 0.0;
    for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

double Matrix::max_abs_diff(const Matrix& rhs) const {
  double best = 0.0;
  for (size_t i = 0; i < a_.size(); ++i) best = std::max(best, std::abs(a_[i] - rhs.a_[i]));
  return best;
}

Matrix solve(Matrix a, Matrix b) {
  const int n = a.rows();
  if (a.cols() != n || b.rows() != n) throw Error("solve: shape mismatch");
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) throw Error("solve: singular matrix");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (int j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      for (int j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    for (int j = 0; j < b.cols(); ++j) {
      double s = b(k, j);
      for (int i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
      b(k, j) = s / a(k, k);
    }
  }
  return b;
}

Matrix companion_matrix(const Polynomial& poly) {
  if (!poly.monic()) throw Error("companion matrix requires a monic polynomial");
  const int p = poly.degree();
  Matrix m(p, p);
  if (p == 1) {
    m(0, 0) = -poly.coeff(1);
    return m;
  }
  for (int i = 0; i + 1 < p; ++i) m(i, i + 1) = 1.0;
  for (int j = 0; j < p; ++j) m(p - 1, j) = -poly.coeff(p - j);
  return m;
}

Polynomial characteristic_polynomial(const Matrix& a) {
  const int n = a.rows();
  std::vector<double> c(static_cast<size_t>(n) + 1, 0.0);
  c[0] = 1.0;
  Matrix m = Matrix::identity(n);  // M_0 = I
  for (int k = 1; k <= n; ++k) {
    m = a * m;
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += m(i, i);
    c[static_cast<size_t>(k)] = -tr / k;
    for (int i = 0; i < n; ++i) m(i, i) += c[static_cast<size_t>(k)];
  }
  return Polynomial(std::move(c));
}

namespace {

Matrix pade13(const Matrix& a) {
  static const double b[14] = {64764752532480000.0, 32382376266240000.0,
                               7771770303897600.0,  1187353796428800.0,
                               129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,
                               1323241920.0,        40840800.0,
                               960960.0,            16380.0,
                               182.0,               1.0};
  const int n = a.rows();
  const Matrix id = Matrix::identity(n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  Matrix u = a6.scaled(b[13]) + a4.scaled(b[11]) + a2.scaled(b[9]);
  u = a6 * u + a6.scaled(b[7]) + a4.scaled(b[5]) + a2.scaled(b[3]) + id.scaled(b[1]);
  u = a * u;
  Matrix v = a6.scaled(b[12]) + a4.scaled(b[10]) + a2.scaled(b[8]);
  v = a6 * v + a6.scaled(b[6]) + a4.scaled(b[4]) + a2.scaled(b[2]) + id.scaled(b[0]);
  return solve(v - u, v + u);
}

}  // namespace

Matrix mat_exp(const Matrix& a, double t) {
  if (!std::isfinite(t)) throw Error("mat_exp: non-finite time");
  Matrix at = a.scaled(t);
  const double norm = at.norm1();
  int s = 0;
  if (norm > 5.4) s = static_cast<int>(std::ceil(std::log2(norm / 5.4)));
  if (s > 0) at = at.scaled(std::ldexp(1.0, -s));
  Matrix r = pade13(at);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

int Spectrum::total_multiplicity() const {
  int s = 0;
  for (const auto& e : eigenvalues) s += e.multiplicity;
  return s;
}

bool Spectrum::distinct() const {
  for (const auto& e : eigenvalues)
    if (e.multiplicity != 1) return false;
  return true;
}

std::vector<Complex> Spectrum::flat() const {
  std::vector<Complex> out;
  for (const auto& e : eigenvalues)
    for (int i = 0; i < e.multiplicity; ++i) out.push_back(e.value);
  return out;
}

double Spectrum::max_real_part() const {
  double m = -1e300;
  for (const auto& e : eigenvalues) m = std::max(m, e.value.real());
  return m;
}

double Spectrum::min_abs_real_part() const {
  double m = 1e300;
  for (const auto& e : eigenvalues) m = std::min(m, std::abs(e.value.real()));
  return m;
}

double Spectrum::min_gap() const {
  double m = 1e300;
  for (size_t i = 0; i < eigenvalues.size(); ++i)
    for (size_t j = i + 1; j < eigenvalues.size(); ++j)
      m = std::min(m, std::abs(eigenvalues[i].value - eigenvalues[j].value));
  return m;
}

Spectrum poly_roots(const Polynomial& poly, double tol, double cluster_radius) {
  const int p = poly.degree();
  if (p < 1) throw Error("poly_roots: degree must be >= 1");
  // Normalize to monic for the iteration.
  std::vector<Complex> c(poly.coeffs().begin(), poly.coeffs().end());
  for (auto& v : c) v /= poly.coeff(0);
  auto eval = [&](Complex z) {
    Complex acc = 0.0;
    for (const Complex& ci : c) acc = acc * z + ci;
    return acc;
  };

  double coeff_norm = 0.0;
  for (double v : poly.coeffs()) coeff_norm += std::abs(v);

  // Durand-Kerner from a perturbed circle.
  double radius = 0.0;
  for (int i = 1; i <= p; ++i) radius = std::max(radius, std::pow(std::abs(c[static_cast<size_t>(i)].real()), 1.0 / i));
  radius = std::max(0.5, 1.2 * radius);
  std::vector<Complex> z(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) {
    const double ang = 2.0 * M_PI * i / p + 0.379;
    z[static_cast<size_t>(i)] = radius * Complex(std::cos(ang), std::sin(ang)) + Complex(1e-3 * i, 2e-3);
  }
  bool converged = false;
  for (int iter = 0; iter < 1000 && !converged; ++iter) {
    double move = 0.0;
    for (int i = 0; i < p; ++i) {
      Complex denom = 1.0;
      for (int j = 0; j < p; ++j)
        if (j != i) denom *= z[static_cast<size_t>(i)] - z[static_cast<size_t>(j)];
      if (denom == Complex(0.0)) {
        z[static_cast<size_t>(i)] += Complex(1e-8, 1e-8);
        continue;
      }
      const Complex delta = eval(z[static_cast<size_t>(i)]) / denom;
      z[static_cast<size_t>(i)] -= delta;
      move = std::max(move, std::abs(delta));
    }
    converged = move < 1e-15 * (1.0 + radius);
  }
  // Residual check against the declared tolerance.
  for (const Complex& r : z)
    if (std::abs(poly.eval(r)) > tol * (1.0 + coeff_norm) * 1e3)
      throw Error("poly_roots: iteration did not converge");

  // Cluster within the relative radius; cluster mean becomes the eigenvalue.
  std::vector<bool> used(static_cast<size_t>(p), false);
  Spectrum spec;
  for (int i = 0; i < p; ++i) {
    if (used[static_cast<size_t>(i)]) continue;
    std::vector<Complex> cluster{z[static_cast<size_t>(i)]};
    used[static_cast<size_t>(i)] = true;
    for (int j = i + 1; j < p; ++j) {
      if (used[static_cast<size_t>(j)]) continue;
      if (std::abs(z[static_cast<size_t>(j)] - z[static_cast<size_t>(i)]) <
          cluster_radius * (1.0 + std::abs(z[static_cast<size_t>(i)]))) {
        cluster.push_back(z[static_cast<size_t>(j)]);
        used[static_cast<size_t>(j)] = true;
      }
    }
    Complex mean = std::accumulate(cluster.begin(), cluster.end(), Complex(0.0)) /
                   static_cast<double>(cluster.size());
    // A root of multiplicity m is a simple root of the (m-1)-th derivative;
    // polish it there to recover full accuracy.
    if (cluster.size() > 1) {
      Polynomial d = poly;
      for (size_t k = 1; k < cluster.size(); ++k) d = d.derivative();
      const Polynomial dd = d.derivative();
      for (int it = 0; it < 20; ++it) {
        const Complex den = dd.eval(mean);
        if (std::abs(den) == 0.0) break;
        const Complex step = d.eval(mean) / den;
        mean -= step;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(mean))) break;
      }
    }
    if (std::abs(mean.imag()) < cluster_radius * (1.0 + std::abs(mean))) mean = Complex(mean.real(), 0.0);
    spec.eigenvalues.push_back({mean, static_cast<int>(cluster.size())});
  }
  std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(), [](const EigenValue& a, const EigenValue& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
  return spec;
}

Spectrum matrix_spectrum(const Matrix& a) { return poly_roots(characteristic_polynomial(a)); }

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<size_t>(n), 0.0);
  w.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[static_cast<size_t>(i)] = t;
    w[static_cast<size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

const std::vector<double>& gl32_nodes() {
  static std::vector<double> x, w;
  if (x.empty()) gauss_legendre(32, x, w);
  return x;
}
const std::vector<double>& gl32_weights() {
  static std::vector<double> x, w;
  if (w.empty()) gauss_legendre(32, x, w);
  return w;
}

template <typename T, typename F>
T tensor_quad_unit(const F& f, int dim, int level) {
  const auto& gx = gl32_nodes();
  const auto& gw = gl32_weights();
  const int panels = 1 << level;
  const int per_axis = 32 * panels;
  const double h = 1.0 / panels;
  // Per-axis node/weight tables.
  std::vector<double> nodes(static_cast<size_t>(per_axis)), weights(static_cast<size_t>(per_axis));
  for (int pnl = 0; pnl < panels; ++pnl)
    for (int i = 0; i < 32; ++i) {
      nodes[static_cast<size_t>(pnl * 32 + i)] = h * (pnl + 0.5 * (gx[static_cast<size_t>(i)] + 1.0));
      weights[static_cast<size_t>(pnl * 32 + i)] = 0.5 * h * gw[static_cast<size_t>(i)];
    }
  std::vector<int> idx(static_cast<size_t>(dim), 0);
  std::vector<double> u(static_cast<size_t>(dim));
  T total{};
  // Odometer over the tensor grid.
  while (true) {
    double wprod = 1.0;
    for (int a = 0; a < dim; ++a) {
      u[static_cast<size_t>(a)] = nodes[static_cast<size_t>(idx[static_cast<size_t>(a)])];
      wprod *= weights[static_cast<size_t>(idx[static_cast<size_t>(a)])];
    }
    total += f(std::span<const double>(u)) * wprod;
    int a = 0;
    for (; a < dim; ++a) {
      if (++idx[static_cast<size_t>(a)] < per_axis) break;
      idx[static_cast<size_t>(a)] = 0;
    }
    if (a == dim) break;
  }
  return total;
}

template <typename T, typename F>
T refine_quad(const F& f, int dim, double abs_tol, int max_level) {
  T prev = tensor_quad_unit<T>(f, dim, 0);
  for (int level = 1; level <= max_level; ++level) {
    T cur = tensor_quad_unit<T>(f, dim, level);
    if (std::abs(cur - prev) < abs_tol) return cur;
    prev = cur;
  }
  throw Error("quadrature did not reach the requested tolerance");
}

int max_level_for(int dim) {
  switch (dim) {
    case 1: return 8;
    case 2: return 5;
    default: return 3;
  }
}

}  // namespace

double quad_rplus(const std::function<double(std::span<const double>)>& f, int dim,
                  double decay_rate, double abs_tol) {
  if (decay_rate <= 0.0) throw Error("quad_rplus: decay_rate must be positive");
  std::vector<double> s(static_cast<size_t>(dim));
  auto g = [&](std::span<const double> u) {
    double jac = 1.0;
    for (int a = 0; a < dim; ++a) {
      const double ua = u[static_cast<size_t>(a)];
      s[static_cast<size_t>(a)] = -std::log1p(-ua) / decay_rate;
      jac /= decay_rate * (1.0 - ua);
    }
    return f(std::span<const double>(s)) * jac;
  };
  return refine_quad<double>(g, dim, abs_tol, max_level_for(dim));
}

Complex quad_rplus_complex(const std::function<Complex(std::span<const double>)>& f,
                           int dim, double decay_rate, double abs_tol) {
  if (decay_rate <= 0.0) throw Error("quad_rplus: decay_rate must be positive");
  std::vector<double> s(static_cast<size_t>(dim));
  auto g = [&](std::span<const double> u) {
    double jac = 1.0;
    for (int a = 0; a < dim; ++a) {
      const double ua = u[static_cast<size_t>(a)];
      s[static_cast<size_t>(a)] = -std::log1p(-ua) / decay_rate;
      jac /= decay_rate * (1.0 - ua);
    }
    return f(std::span<const double>(s)) * jac;
  };
  return refine_quad<Complex>(g, dim, abs_tol, max_level_for(dim));
}

double quad_unit_cube(const std::function<double(std::span<const double>)>& f, int dim,
                      double abs_tol) {
  return refine_quad<double>(f, dim, abs_tol, max_level_for(dim));
}

CMatrix::CMatrix(int rows, int cols, Complex value)
    : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, value) {}

CMatrix CMatrix::identity(int n) {
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::from_real(const Matrix& m) {
  CMatrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

CMatrix CMatrix::operator*(const CMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw Error("matrix shape mismatch");
  CMatrix out(rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Complex v = (*this)(i, k);
      for (int j = 0; j < rhs.cols_; ++j) out(i, j) += v * rhs(k, j);
    }
  return out;
}

CMatrix solve(CMatrix a, CMatrix b) {
  const int n = a.rows();
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == Complex(0.0)) throw Error("solve: singular matrix");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (int j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
    }
    for (int i = k + 1; i < n; ++i) {
      const Complex f = a(i, k) / a(k, k);
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      for (int j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  for (int k = n - 1; k >= 0; --k)
    for (int j = 0; j < b.cols(); ++j) {
      Complex s = b(k, j);
      for (int i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
      b(k, j) = s / a(k, k);
    }
  return b;
}

std::vector<Complex> null_vector(CMatrix a) {
  const int n = a.rows();
  std::vector<int> pivot_col;
  int row = 0;
  for (int col = 0; col < n && row < n; ++col) {
    int piv = row;
    for (int i = row + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
    if (std::abs(a(piv, col)) < 1e-9) continue;  // free column
    if (piv != row)
      for (int j = 0; j < n; ++j) std::swap(a(row, j), a(piv, j));
    for (int i = 0; i < n; ++i) {
      if (i == row) continue;
      const Complex f = a(i, col) / a(row, col);
      for (int j = col; j < n; ++j) a(i, j) -= f * a(row, j);
    }
    pivot_col.push_back(col);
    ++row;
  }
  // First free column drives the null vector.
  std::vector<bool> is_pivot(static_cast<size_t>(n), false);
  for (int c : pivot_col) is_pivot[static_cast<size_t>(c)] = true;
  int free_col = -1;
  for (int c = 0; c < n; ++c)
    if (!is_pivot[static_cast<size_t>(c)]) {
      free_col = c;
      break;
    }
  if (free_col < 0) throw Error("null_vector: matrix is non-singular");
  std::vector<Complex> v(static_cast<size_t>(n), 0.0);
  v[static_cast<size_t>(free_col)] = 1.0;
  for (size_t r = 0; r < pivot_col.size(); ++r) {
    const int c = pivot_col[r];
    v[static_cast<size_t>(c)] = -a(static_cast<int>(r), free_col) / a(static_cast<int>(r), c);
  }
  double norm = 0.0;
  for (const Complex& vi : v) norm += std::norm(vi);
  norm = std::sqrt(norm);
  for (Complex& vi : v) vi /= norm;
  return v;
}

}  // namespace carmafield
