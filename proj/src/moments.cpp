#include "carmafield/moments.hpp"

#include <algorithm>
#include <cmath>

namespace carmafield {

// Orthant coefficients d_v for every sign pattern v, from the kernel weights:
//   d_v(i) = sum_j prod_a [-1/(lambda_a(i_a)+lambda_a(j_a))] d(m) d(n),
// where axis a of (m,n) is (i_a,j_a) if v_a=+1 and (j_a,i_a) if v_a=-1.
struct OrthantTable {
  int dim = 0;
  int order = 0;
  std::vector<std::vector<Complex>> axis_eigenvalues;
  std::vector<std::vector<Complex>> coeff;  // [v-index][flat i-tuple]

  size_t flat(std::span<const int> idx) const {
    size_t f = 0;
    for (int a = 0; a < dim; ++a) f = f * static_cast<size_t>(order) + static_cast<size_t>(idx[static_cast<size_t>(a)]);
    return f;
  }
};

namespace {

constexpr double kImagTol = 1e-10;

double real_checked(Complex v, const char* what) {
  if (std::abs(v.imag()) > kImagTol * (1.0 + std::abs(v.real())))
    throw Error(std::string(what) + ": imaginary residue above tolerance");
  return v.real();
}

OrthantTable build_orthant_table(const KernelCoefficients& kc) {
  OrthantTable t;
  t.dim = kc.dim;
  t.order = kc.order;
  t.axis_eigenvalues = kc.axis_eigenvalues;
  const int d = kc.dim;
  const int p = kc.order;
  size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<size_t>(p);
  t.coeff.assign(static_cast<size_t>(1) << d, std::vector<Complex>(total, Complex(0.0)));

  std::vector<int> i(static_cast<size_t>(d), 0), j(static_cast<size_t>(d), 0);
  std::vector<int> m(static_cast<size_t>(d)), n(static_cast<size_t>(d));
  while (true) {
    std::fill(j.begin(), j.end(), 0);
    while (true) {
      Complex denom = 1.0;
      for (int a = 0; a < d; ++a) {
        const Complex li = kc.axis_eigenvalues[static_cast<size_t>(a)][static_cast<size_t>(i[static_cast<size_t>(a)])];
        const Complex lj = kc.axis_eigenvalues[static_cast<size_t>(a)][static_cast<size_t>(j[static_cast<size_t>(a)])];
        denom *= -(li + lj);
      }
      for (int vbits = 0; vbits < (1 << d); ++vbits) {
        for (int a = 0; a < d; ++a) {
          const bool plus = (vbits >> a & 1) == 0;
          m[static_cast<size_t>(a)] = plus ? i[static_cast<size_t>(a)] : j[static_cast<size_t>(a)];
          n[static_cast<size_t>(a)] = plus ? j[static_cast<size_t>(a)] : i[static_cast<size_t>(a)];
        }
        t.coeff[static_cast<size_t>(vbits)][t.flat(i)] += kc.weight(m) * kc.weight(n) / denom;
      }
      int a = 0;
      for (; a < d; ++a) {
        if (++j[static_cast<size_t>(a)] < p) break;
        j[static_cast<size_t>(a)] = 0;
      }
      if (a == d) break;
    }
    int a = 0;
    for (; a < d; ++a) {
      if (++i[static_cast<size_t>(a)] < p) break;
      i[static_cast<size_t>(a)] = 0;
    }
    if (a == d) break;
  }
  return t;
}

}  // namespace

const OrthantTable& SecondOrder::orthants() const {
  if (!orthants_)
    orthants_ = std::make_shared<const OrthantTable>(build_orthant_table(kernel_.coefficients()));
  return *orthants_;
}

SecondOrder::SecondOrder(const ModelSpec& spec, const LevyBasisSpec& levy)
    : spec_(&spec), levy_(&levy), kernel_(spec) {
  kappa2_ = levy.kappa2_or_throw();
  if (auto k1 = levy.kappa1()) {
    kappa1_defined_ = true;
    kappa1_ = *k1;
  }
}

double SecondOrder::mean() const {
  if (!kappa1_defined_) throw Error("mean undefined for this noise specification");
  if (kappa1_ == 0.0) return 0.0;
  if (kernel_.closed_form()) {
    const KernelCoefficients& kc = kernel_.coefficients();
    Complex acc = 0.0;
    std::vector<int> idx(static_cast<size_t>(kc.dim), 0);
    while (true) {
      Complex denom = 1.0;
      for (int a = 0; a < kc.dim; ++a)
        denom *= -kc.axis_eigenvalues[static_cast<size_t>(a)][static_cast<size_t>(idx[static_cast<size_t>(a)])];
      acc += kc.weight(idx) / denom;
      int a = 0;
      for (; a < kc.dim; ++a) {
        if (++idx[static_cast<size_t>(a)] < kc.order) break;
        idx[static_cast<size_t>(a)] = 0;
      }
      if (a == kc.dim) break;
    }
    return kappa1_ * real_checked(acc, "mean");
  }
  const double rate = 0.9 * spec_->min_abs_real_eigenvalue();
  return kappa1_ *
         quad_rplus([&](std::span<const double> s) { return kernel_(s); }, spec_->dim,
                    rate, 1e-10);
}

double SecondOrder::autocovariance(std::span<const double> t) const {
  if (kernel_.closed_form()) return autocovariance_closed(t);
  return autocovariance_quadrature(t);
}

double SecondOrder::autocovariance_closed(std::span<const double> t) const {
  const OrthantTable& tab = orthants();
  const int d = tab.dim;
  int vbits = 0;
  for (int a = 0; a < d; ++a)
    if (t[static_cast<size_t>(a)] < 0.0) vbits |= 1 << a;
  Complex acc = 0.0;
  std::vector<int> idx(static_cast<size_t>(d), 0);
  while (true) {
    Complex e = 0.0;
    for (int a = 0; a < d; ++a)
      e += tab.axis_eigenvalues[static_cast<size_t>(a)][static_cast<size_t>(idx[static_cast<size_t>(a)])] *
           std::abs(t[static_cast<size_t>(a)]);
    acc += tab.coeff[static_cast<size_t>(vbits)][tab.flat(idx)] * std::exp(e);
    int a = 0;
    for (; a < d; ++a) {
      if (++idx[static_cast<size_t>(a)] < tab.order) break;
      idx[static_cast<size_t>(a)] = 0;
    }
    if (a == d) break;
  }
  return kappa2_ * real_checked(acc, "autocovariance");
}

double SecondOrder::autocovariance_quadrature(std::span<const double> t,
                                              double abs_tol) const {
  const int d = spec_->dim;
  std::vector<double> lo(static_cast<size_t>(d)), hi(static_cast<size_t>(d));
  for (int a = 0; a < d; ++a) {
    lo[static_cast<size_t>(a)] = std::max(0.0, -t[static_cast<size_t>(a)]);
    hi[static_cast<size_t>(a)] = std::max(0.0, t[static_cast<size_t>(a)]);
  }
  const double rate = 0.9 * spec_->min_abs_real_eigenvalue();
  std::vector<double> sa(static_cast<size_t>(d)), sb(static_cast<size_t>(d));
  const double value = quad_rplus(
      [&](std::span<const double> s) {
        for (int a = 0; a < d; ++a) {
          sa[static_cast<size_t>(a)] = s[static_cast<size_t>(a)] + lo[static_cast<size_t>(a)];
          sb[static_cast<size_t>(a)] = s[static_cast<size_t>(a)] + hi[static_cast<size_t>(a)];
        }
        return kernel_(sa) * kernel_(sb);
      },
      d, rate, abs_tol / std::max(1.0, kappa2_));
  return kappa2_ * value;
}

double SecondOrder::spectral_density(std::span<const double> omega) const {
  const OrthantTable& tab = orthants();
  const int d = tab.dim;
  Complex acc = 0.0;
  std::vector<int> idx(static_cast<size_t>(d), 0);
  while (true) {
    for (int vbits = 0; vbits < (1 << d); ++vbits) {
      Complex denom = 1.0;
      for (int a = 0; a < d; ++a) {
        const double va = (vbits >> a & 1) == 0 ? 1.0 : -1.0;
        denom *= Complex(0.0, va * omega[static_cast<size_t>(a)]) -
                 tab.axis_eigenvalues[static_cast<size_t>(a)][static_cast<size_t>(idx[static_cast<size_t>(a)])];
      }
      acc += tab.coeff[static_cast<size_t>(vbits)][tab.flat(idx)] / denom;
    }
    int a = 0;
    for (; a < d; ++a) {
      if (++idx[static_cast<size_t>(a)] < tab.order) break;
      idx[static_cast<size_t>(a)] = 0;
    }
    if (a == d) break;
  }
  double f = kappa2_ / std::pow(2.0 * M_PI, d) * real_checked(acc, "spectral density");
  if (f < 0.0 && f > -1e-12) f = 0.0;
  return f;
}

Matrix state_covariance(const ModelSpec& spec, const LevyBasisSpec& levy,
                        double abs_tol) {
  const int p = spec.p;
  const int d = spec.dim;
  const double kappa2 = levy.kappa2_or_throw();
  const double rate = 0.9 * spec.min_abs_real_eigenvalue();
  auto state_vector = [&](std::span<const double> s) {
    std::vector<double> v = spec.c;
    for (int a = d - 1; a >= 0; --a)
      v = mat_exp(spec.axis_matrices[static_cast<size_t>(a)], s[static_cast<size_t>(a)]).apply(v);
    return v;
  };
  Matrix sigma(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double val = quad_rplus(
          [&](std::span<const double> s) {
            const std::vector<double> v = state_vector(s);
            return v[static_cast<size_t>(i)] * v[static_cast<size_t>(j)];
          },
          d, rate, abs_tol);
      sigma(i, j) = kappa2 * val;
      sigma(j, i) = kappa2 * val;
    }
  return sigma;
}

double car_p_plane_acov(const ModelSpec& spec, const LevyBasisSpec& levy,
                        std::span<const double> t) {
  if (spec.mode != ModelMode::carma || spec.dim != 2)
    throw Error("CAR(p) plane formula requires CARMA mode on R^2");
  if (spec.q != 0) throw Error("CAR(p) plane formula requires q = 0");
  const double kappa2 = levy.kappa2_or_throw();
  const double b0 = spec.b.front();
  const int p = spec.p;
  const Polynomial& a1 = spec.axis_polys[0];
  const Polynomial& a2 = spec.axis_polys[1];
  const Polynomial a1p = a1.derivative();
  const Polynomial a2p = a2.derivative();
  const bool same_sign = t[0] * t[1] >= 0.0;

  std::vector<Polynomial> a1k;
  for (int k = 1; k <= p; ++k) a1k.push_back(truncated_poly(a1, k));

  Complex acc = 0.0;
  for (const auto& e1 : spec.axis_spectra[0].eigenvalues) {
    if (e1.multiplicity != 1) throw Error("CAR(p) plane formula requires distinct roots");
    const Complex l1 = e1.value;
    for (const auto& e2 : spec.axis_spectra[1].eigenvalues) {
      if (e2.multiplicity != 1) throw Error("CAR(p) plane formula requires distinct roots");
      const Complex l2 = e2.value;
      Complex inner = 0.0;
      for (int k = 1; k <= p; ++k)
        for (int l = 1; l <= p; ++l) {
          const double sign = same_sign ? (l % 2 == 1 ? 1.0 : -1.0) : (k % 2 == 1 ? 1.0 : -1.0);
          inner += a1k[static_cast<size_t>(k - 1)].eval(l1) * a1k[static_cast<size_t>(l - 1)].eval(-l1) *
                   std::pow(l2, k + l - 2) * sign /
                   (a1p.eval(l1) * a1.eval(-l1) * a2p.eval(l2) * a2.eval(-l2));
        }
      acc += inner * std::exp(l1 * std::abs(t[0]) + l2 * std::abs(t[1]));
    }
  }
  return kappa2 * b0 * b0 * real_checked(acc, "CAR(p) plane autocovariance");
}

}  // namespace carmafield
