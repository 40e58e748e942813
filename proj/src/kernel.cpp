#include "carmafield/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace carmafield {

namespace {

constexpr double kImagTol = 1e-10;

double real_checked(Complex v, const char* what) {
  if (std::abs(v.imag()) > kImagTol * (1.0 + std::abs(v.real())))
    throw Error(std::string(what) + ": imaginary residue above tolerance");
  return v.real();
}

}  // namespace

size_t KernelCoefficients::flat_index(std::span<const int> idx) const {
  size_t f = 0;
  for (int a = 0; a < dim; ++a) f = f * static_cast<size_t>(order) + static_cast<size_t>(idx[static_cast<size_t>(a)]);
  return f;
}

Complex KernelCoefficients::weight(std::span<const int> idx) const {
  return weights[flat_index(idx)];
}

double KernelCoefficients::eval(std::span<const double> s) const {
  for (double si : s)
    if (si < 0.0) return 0.0;
  Complex acc = 0.0;
  std::vector<int> idx(static_cast<size_t>(dim), 0);
  while (true) {
    Complex e = 0.0;
    for (int a = 0; a < dim; ++a)
      e += axis_eigenvalues[static_cast<size_t>(a)][static_cast<size_t>(idx[static_cast<size_t>(a)])] * s[static_cast<size_t>(a)];
    acc += weight(idx) * std::exp(e);
    int a = 0;
    for (; a < dim; ++a) {
      if (++idx[static_cast<size_t>(a)] < order) break;
      idx[static_cast<size_t>(a)] = 0;
    }
    if (a == dim) break;
  }
  return real_checked(acc, "kernel coefficients");
}

double kernel_direct(const ModelSpec& spec, std::span<const double> s) {
  if (static_cast<int>(s.size()) != spec.dim) throw Error("kernel: point dimension mismatch");
  for (double si : s)
    if (si < 0.0) return 0.0;
  std::vector<double> v = spec.c;
  for (int a = spec.dim - 1; a >= 0; --a) {
    const Matrix e = mat_exp(spec.axis_matrices[static_cast<size_t>(a)], s[static_cast<size_t>(a)]);
    v = e.apply(v);
  }
  double out = 0.0;
  for (int i = 0; i < spec.p; ++i) out += spec.b[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
  return out;
}

Polynomial truncated_poly(const Polynomial& a, int k) {
  const int p = a.degree();
  if (k < 1 || k > p) throw Error("truncated_poly: k out of range");
  std::vector<double> c(static_cast<size_t>(p - k) + 1);
  for (int l = 0; l <= p - k; ++l) c[static_cast<size_t>(l)] = a.coeff(l);
  return Polynomial(std::move(c));
}

namespace {

KernelCoefficients carma_coefficients(const ModelSpec& spec) {
  const int d = spec.dim;
  const int p = spec.p;
  KernelCoefficients out;
  out.dim = d;
  out.order = p;
  for (const auto& s : spec.axis_spectra) {
    if (!s.distinct()) throw Error("kernel coefficients require distinct eigenvalues per axis");
    std::vector<Complex> ev;
    for (const auto& e : s.eigenvalues) ev.push_back(e.value);
    out.axis_eigenvalues.push_back(std::move(ev));
  }

  // Truncations a_{i,k} for axes 1..d-1 and derivative values per axis.
  std::vector<std::vector<Polynomial>> trunc(static_cast<size_t>(d));
  std::vector<Polynomial> deriv;
  for (int a = 0; a < d; ++a) {
    deriv.push_back(spec.axis_polys[static_cast<size_t>(a)].derivative());
    for (int k = 1; k <= p; ++k)
      trunc[static_cast<size_t>(a)].push_back(truncated_poly(spec.axis_polys[static_cast<size_t>(a)], k));
  }

  size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<size_t>(p);
  out.weights.assign(total, Complex(0.0));

  std::vector<int> idx(static_cast<size_t>(d), 0);
  std::vector<Complex> cur(static_cast<size_t>(p)), next(static_cast<size_t>(p));
  while (true) {
    // Chain contraction over the inner summation indices k_1,...,k_d.
    const Complex lam_d = out.axis_eigenvalues[static_cast<size_t>(d - 1)][static_cast<size_t>(idx[static_cast<size_t>(d - 1)])];
    const Complex ad_prime = deriv[static_cast<size_t>(d - 1)].eval(lam_d);
    Complex pw = 1.0;
    for (int k = 1; k <= p; ++k) {
      cur[static_cast<size_t>(k - 1)] = pw / ad_prime;
      pw *= lam_d;
    }
    for (int a = d - 2; a >= 0; --a) {
      const Complex lam = out.axis_eigenvalues[static_cast<size_t>(a)][static_cast<size_t>(idx[static_cast<size_t>(a)])];
      const Complex aprime = deriv[static_cast<size_t>(a)].eval(lam);
      Complex inner = 0.0;
      for (int k = 1; k <= p; ++k)
        inner += trunc[static_cast<size_t>(a)][static_cast<size_t>(k - 1)].eval(lam) * cur[static_cast<size_t>(k - 1)];
      Complex lp = 1.0;
      for (int k = 1; k <= p; ++k) {
        next[static_cast<size_t>(k - 1)] = lp / aprime * inner;
        lp *= lam;
      }
      std::swap(cur, next);
    }
    Complex w = 0.0;
    for (int k = 1; k <= p; ++k) w += spec.b[static_cast<size_t>(k - 1)] * cur[static_cast<size_t>(k - 1)];
    out.weights[out.flat_index(idx)] = w;

    int a = 0;
    for (; a < d; ++a) {
      if (++idx[static_cast<size_t>(a)] < p) break;
      idx[static_cast<size_t>(a)] = 0;
    }
    if (a == d) break;
  }
  return out;
}

struct EigenBasis {
  std::vector<Complex> values;  // p eigenvalues
  CMatrix vectors;              // columns
  CMatrix inverse;
};

EigenBasis eigen_basis(const Matrix& m, const Spectrum& spec) {
  const int p = m.rows();
  EigenBasis out;
  out.vectors = CMatrix(p, p);
  for (const auto& e : spec.eigenvalues) {
    if (e.multiplicity != 1) throw Error("eigendecomposition requires distinct eigenvalues");
    CMatrix shifted = CMatrix::from_real(m);
    for (int i = 0; i < p; ++i) shifted(i, i) -= e.value;
    const std::vector<Complex> v = null_vector(shifted);
    const int col = static_cast<int>(out.values.size());
    for (int i = 0; i < p; ++i) out.vectors(i, col) = v[static_cast<size_t>(i)];
    out.values.push_back(e.value);
  }
  out.inverse = solve(out.vectors, CMatrix::identity(p));
  return out;
}

KernelCoefficients gcarma_coefficients(const ModelSpec& spec) {
  const int d = spec.dim;
  const int p = spec.p;
  std::vector<EigenBasis> bases;
  for (int a = 0; a < d; ++a)
    bases.push_back(eigen_basis(spec.axis_matrices[static_cast<size_t>(a)], spec.axis_spectra[static_cast<size_t>(a)]));

  KernelCoefficients out;
  out.dim = d;
  out.order = p;
  for (const auto& basis : bases) out.axis_eigenvalues.push_back(basis.values);

  // weight(j_1..j_d) = (b^T S_1)_{j_1} prod (S_i^{-1} S_{i+1})_{j_i j_{i+1}}
  //                    (S_d^{-1} c)_{j_d}
  std::vector<Complex> left(static_cast<size_t>(p), 0.0);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) left[static_cast<size_t>(j)] += spec.b[static_cast<size_t>(i)] * bases.front().vectors(i, j);
  std::vector<Complex> right(static_cast<size_t>(p), 0.0);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) right[static_cast<size_t>(j)] += bases.back().inverse(j, i) * spec.c[static_cast<size_t>(i)];
  std::vector<CMatrix> links;
  for (int a = 0; a + 1 < d; ++a)
    links.push_back(bases[static_cast<size_t>(a)].inverse * bases[static_cast<size_t>(a + 1)].vectors);

  size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<size_t>(p);
  out.weights.assign(total, Complex(0.0));
  std::vector<int> idx(static_cast<size_t>(d), 0);
  while (true) {
    Complex w = left[static_cast<size_t>(idx[0])];
    for (int a = 0; a + 1 < d; ++a)
      w *= links[static_cast<size_t>(a)](idx[static_cast<size_t>(a)], idx[static_cast<size_t>(a + 1)]);
    w *= right[static_cast<size_t>(idx[static_cast<size_t>(d - 1)])];
    out.weights[out.flat_index(idx)] = w;
    int a = 0;
    for (; a < d; ++a) {
      if (++idx[static_cast<size_t>(a)] < p) break;
      idx[static_cast<size_t>(a)] = 0;
    }
    if (a == d) break;
  }
  return out;
}

}  // namespace

KernelCoefficients kernel_coefficients(const ModelSpec& spec) {
  if (spec.mode == ModelMode::carma) return carma_coefficients(spec);
  return gcarma_coefficients(spec);
}

namespace {

// Taylor coefficients of a real polynomial around z0, ascending order.
std::vector<Complex> taylor_at(const std::vector<double>& desc, Complex z0, int count) {
  // Repeated synthetic division by (z - z0).
  std::vector<Complex> work(desc.begin(), desc.end());
  std::vector<Complex> out;
  for (int t = 0; t < count; ++t) {
    if (work.empty()) {
      out.push_back(0.0);
      continue;
    }
    Complex rem = 0.0;
    for (auto& c : work) {
      const Complex v = c + rem * z0;
      rem = v;
      c = v;
    }
    out.push_back(work.back());
    work.pop_back();
  }
  return out;
}

// Truncated series division num/den, both ascending, den[0] != 0.
std::vector<Complex> series_divide(const std::vector<Complex>& num,
                                   const std::vector<Complex>& den, int count) {
  std::vector<Complex> out(static_cast<size_t>(count), 0.0);
  for (int n = 0; n < count; ++n) {
    Complex acc = n < static_cast<int>(num.size()) ? num[static_cast<size_t>(n)] : Complex(0.0);
    for (int j = 1; j <= n; ++j) {
      if (j < static_cast<int>(den.size()))
        acc -= den[static_cast<size_t>(j)] * out[static_cast<size_t>(n - j)];
    }
    out[static_cast<size_t>(n)] = acc / den[0];
  }
  return out;
}

}  // namespace

double kernel_equal_matrices(const ModelSpec& spec, std::span<const double> s) {
  if (spec.mode != ModelMode::carma) throw Error("equal-matrix route requires CARMA mode");
  const Polynomial& a1 = spec.axis_polys.front();
  for (const auto& a : spec.axis_polys)
    if (a.coeffs() != a1.coeffs()) throw Error("equal-matrix route requires equal axis polynomials");
  for (double si : s)
    if (si < 0.0) return 0.0;

  double total_s = 0.0;
  for (double si : s) total_s += si;

  const Spectrum spectrum = spec.axis_spectra.front();
  // b as descending-power coefficients for Taylor shifts.
  std::vector<double> b_desc(spec.b.rbegin(), spec.b.rend());

  Complex acc = 0.0;
  for (const auto& e : spectrum.eigenvalues) {
    const int mu = e.multiplicity;
    // Deflate a by (z - lambda)^mu.
    std::vector<Complex> deflated(a1.coeffs().begin(), a1.coeffs().end());
    for (int t = 0; t < mu; ++t) {
      Complex rem = 0.0;
      for (auto& c : deflated) {
        const Complex v = c + rem * e.value;
        rem = v;
        c = v;
      }
      deflated.pop_back();
    }
    // Taylor expansion of h = b / (a / (z-lambda)^mu) around lambda.
    std::vector<Complex> num = taylor_at(b_desc, e.value, mu);
    std::vector<Complex> den;
    {
      std::vector<Complex> work = deflated;
      for (int t = 0; t < mu; ++t) {
        if (work.empty()) {
          den.push_back(0.0);
          continue;
        }
        Complex rem = 0.0;
        for (auto& c : work) {
          const Complex v = c + rem * e.value;
          rem = v;
          c = v;
        }
        den.push_back(work.back());
        work.pop_back();
      }
    }
    const std::vector<Complex> h = series_divide(num, den, mu);
    // (1/(mu-1)!) d^{mu-1}/dz^{mu-1} [e^{zS} h(z)] at lambda.
    const Complex e_ls = std::exp(e.value * total_s);
    double fact = 1.0;
    Complex term = 0.0;
    double s_pow = 1.0;
    for (int j = 0; j <= mu - 1; ++j) {
      term += s_pow / fact * h[static_cast<size_t>(mu - 1 - j)];
      s_pow *= total_s;
      fact *= (j + 1);
    }
    acc += e_ls * term;
  }
  return real_checked(acc, "equal-matrix kernel");
}

KernelEvaluator::KernelEvaluator(const ModelSpec& spec) : spec_(&spec) {
  bool ok = true;
  for (const auto& s : spec.axis_spectra) {
    if (!s.distinct()) ok = false;
    double scale = 0.0;
    for (const auto& e : s.eigenvalues) scale = std::max(scale, std::abs(e.value));
    if (s.eigenvalues.size() > 1 && s.min_gap() < 1e-6 * (1.0 + scale)) ok = false;
  }
  if (ok) coeffs_ = kernel_coefficients(spec);
}

double KernelEvaluator::operator()(std::span<const double> s) const {
  if (coeffs_) return coeffs_->eval(s);
  return kernel_direct(*spec_, s);
}

const KernelCoefficients& KernelEvaluator::coefficients() const {
  if (!coeffs_) throw Error("coefficient table unavailable (repeated eigenvalues)");
  return *coeffs_;
}

}  // namespace carmafield
