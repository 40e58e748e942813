#include "carmafield/lattice_arma.hpp"

#include <algorithm>
#include <cmath>

namespace carmafield {

namespace {

void require_plane_commuting(const ModelSpec& spec) {
  if (spec.dim != 2) throw Error("lattice sampling structure requires d = 2");
  const Matrix& a1 = spec.axis_matrices[0];
  const Matrix& a2 = spec.axis_matrices[1];
  const Matrix comm = a1 * a2 - a2 * a1;
  if (comm.norm1() > 1e-12 * (1.0 + a1.norm1() * a2.norm1()))
    throw Error("axis matrices must commute");
}

std::vector<double> exp_char_poly(const Spectrum& spectrum) {
  std::vector<Complex> roots;
  for (Complex lambda : spectrum.flat()) roots.push_back(std::exp(lambda));
  const Polynomial chi = Polynomial::from_roots(roots);
  return chi.coeffs();  // descending: coeff(k) = d_{k}
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  int i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

}  // namespace

double ArmaRepresentation::gamma_hat(int h1, int h2) const {
  const auto it = rhs_acov.find({h1, h2});
  return it == rhs_acov.end() ? 0.0 : it->second;
}

std::vector<double> ar_coefficients(const ModelSpec& spec) {
  require_plane_commuting(spec);
  const int p = spec.p;
  const std::vector<double> d1 = exp_char_poly(spec.axis_spectra[0]);
  const std::vector<double> d2 = exp_char_poly(spec.axis_spectra[1]);
  std::vector<double> out(static_cast<size_t>(p + 1) * (p + 1));
  for (int k1 = 0; k1 <= p; ++k1)
    for (int k2 = 0; k2 <= p; ++k2)
      out[static_cast<size_t>(k1) * (p + 1) + k2] =
          d1[static_cast<size_t>(k1)] * d2[static_cast<size_t>(k2)];
  return out;
}

NoiseWeights noise_weights(const ModelSpec& spec, const LevyBasisSpec& levy,
                           double quad_tol) {
  require_plane_commuting(spec);
  const int p = spec.p;
  const double kappa2 = levy.kappa2_or_throw();
  const std::vector<double> d = ar_coefficients(spec);
  const Matrix& a1 = spec.axis_matrices[0];
  const Matrix& a2 = spec.axis_matrices[1];

  // b^T e^{m1 A1 + m2 A2} for every integer shift in the window
  std::vector<std::vector<double>> bexp(static_cast<size_t>(p) * p);
  for (int m1 = 0; m1 < p; ++m1)
    for (int m2 = 0; m2 < p; ++m2) {
      const Matrix e = mat_exp(a1.scaled(m1) + a2.scaled(m2));
      std::vector<double> row(static_cast<size_t>(p), 0.0);
      for (int jcol = 0; jcol < p; ++jcol)
        for (int i = 0; i < p; ++i)
          row[static_cast<size_t>(jcol)] += spec.b[static_cast<size_t>(i)] * e(i, jcol);
      bexp[static_cast<size_t>(m1) * p + m2] = std::move(row);
    }

  NoiseWeights out;
  out.theta.assign(static_cast<size_t>(p) * p, std::vector<double>(static_cast<size_t>(p), 0.0));
  for (int k1 = 0; k1 < p; ++k1)
    for (int k2 = 0; k2 < p; ++k2) {
      std::vector<double>& th = out.theta[static_cast<size_t>(k1) * p + k2];
      for (int l1 = 0; l1 <= k1; ++l1)
        for (int l2 = 0; l2 <= k2; ++l2) {
          const double dl = d[static_cast<size_t>(l1) * (p + 1) + l2];
          const std::vector<double>& row = bexp[static_cast<size_t>(k1 - l1) * p + (k2 - l2)];
          for (int i = 0; i < p; ++i) th[static_cast<size_t>(i)] += dl * row[static_cast<size_t>(i)];
        }
    }

  out.noise_cov = Matrix(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const double v = quad_unit_cube(
          [&](std::span<const double> s) {
            const Matrix e = mat_exp(a1.scaled(s[0]) + a2.scaled(s[1]));
            const std::vector<double> w = e.apply(spec.c);
            return w[static_cast<size_t>(i)] * w[static_cast<size_t>(j)];
          },
          2, quad_tol);
      out.noise_cov(i, j) = kappa2 * v;
      out.noise_cov(j, i) = kappa2 * v;
    }
  return out;
}

std::map<Lag, double> rhs_autocovariance(const ModelSpec& spec, const LevyBasisSpec& levy) {
  const NoiseWeights nw = noise_weights(spec, levy);
  const int p = spec.p;
  std::map<Lag, double> gamma;
  for (int h1 = -(p - 1); h1 <= p - 1; ++h1)
    for (int h2 = -(p - 1); h2 <= p - 1; ++h2) {
      double acc = 0.0;
      for (int k1 = 0; k1 < p; ++k1)
        for (int k2 = 0; k2 < p; ++k2) {
          const int m1 = k1 - h1;
          const int m2 = k2 - h2;
          if (m1 < 0 || m1 >= p || m2 < 0 || m2 >= p) continue;
          const std::vector<double>& u = nw.theta[static_cast<size_t>(k1) * p + k2];
          const std::vector<double>& v = nw.theta[static_cast<size_t>(m1) * p + m2];
          for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
              acc += u[static_cast<size_t>(i)] * nw.noise_cov(i, j) * v[static_cast<size_t>(j)];
        }
      gamma[{h1, h2}] = acc;
    }
  return gamma;
}

ArmaRepresentation arma_representation(const ModelSpec& spec, const LevyBasisSpec& levy) {
  ArmaRepresentation repr;
  repr.p = spec.p;
  repr.ar = ar_coefficients(spec);
  NoiseWeights nw = noise_weights(spec, levy);
  repr.theta = std::move(nw.theta);
  repr.noise_cov = std::move(nw.noise_cov);
  repr.rhs_acov = rhs_autocovariance(spec, levy);
  return repr;
}

namespace {

double gamma_of(const std::map<Lag, double>& g, int h1, int h2) {
  const auto it = g.find({h1, h2});
  if (it != g.end()) return it->second;
  const auto flipped = g.find({-h1, -h2});
  if (flipped != g.end()) return flipped->second;
  throw Error("gamma_hat table is missing a required lag");
}

void ma_residual(const std::array<double, 4>& th, const std::array<double, 5>& g,
                 std::array<double, 5>& f) {
  const double t00 = th[0], t10 = th[1], t01 = th[2], t11 = th[3];
  f[0] = t00 * t00 + t10 * t10 + t01 * t01 + t11 * t11 - g[0];
  f[1] = t00 * t10 + t01 * t11 - g[1];
  f[2] = t10 * t11 + t00 * t01 - g[2];
  f[3] = t00 * t11 - g[3];
  f[4] = t01 * t10 - g[4];
}

void ma_jacobian(const std::array<double, 4>& th, double j[5][4]) {
  const double t00 = th[0], t10 = th[1], t01 = th[2], t11 = th[3];
  const double rows[5][4] = {
      {2 * t00, 2 * t10, 2 * t01, 2 * t11},
      {t10, t00, t11, t01},
      {t01, t11, t00, t10},
      {t11, 0.0, 0.0, t00},
      {0.0, t01, t10, 0.0},
  };
  std::copy(&rows[0][0], &rows[0][0] + 20, &j[0][0]);
}

double max_abs(const std::array<double, 5>& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

MaMatch ma_match(const std::map<Lag, double>& gamma_hat, const MaMatchOptions& opt) {
  const std::array<double, 5> g = {
      gamma_of(gamma_hat, 0, 0), gamma_of(gamma_hat, 1, 0), gamma_of(gamma_hat, 0, 1),
      gamma_of(gamma_hat, 1, 1), gamma_of(gamma_hat, 1, -1)};
  if (g[0] < 0.0) throw Error("gamma_hat(0,0) must be non-negative");
  const double box = 1.2 * std::sqrt(g[0]);
  const double accept = opt.residual_tol * (1.0 + g[0]);
  const int bases[4] = {2, 3, 5, 7};

  MaMatch out;
  for (int start = 1; start <= opt.starts; ++start) {
    std::array<double, 4> th;
    for (int k = 0; k < 4; ++k)
      th[static_cast<size_t>(k)] = box * (2.0 * halton(start, bases[k]) - 1.0);

    std::array<double, 5> f;
    ma_residual(th, g, f);
    double fnorm = max_abs(f);
    double mu = 1e-3;
    for (int iter = 0; iter < 80 && fnorm > 0.05 * accept; ++iter) {
      double jac[5][4];
      ma_jacobian(th, jac);
      Matrix jtj(4, 4), jtf(4, 1);
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          double s = 0.0;
          for (int r = 0; r < 5; ++r) s += jac[r][a] * jac[r][b];
          jtj(a, b) = s;
        }
        double s = 0.0;
        for (int r = 0; r < 5; ++r) s += jac[r][a] * f[static_cast<size_t>(r)];
        jtf(a, 0) = s;
      }
      bool improved = false;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Matrix damped = jtj;
        for (int a = 0; a < 4; ++a) damped(a, a) += mu;
        std::array<double, 4> cand = th;
        try {
          const Matrix step = solve(damped, jtf);
          for (int a = 0; a < 4; ++a) cand[static_cast<size_t>(a)] -= step(a, 0);
        } catch (const Error&) {
          mu *= 10.0;
          continue;
        }
        std::array<double, 5> fc;
        ma_residual(cand, g, fc);
        const double cnorm = max_abs(fc);
        if (cnorm < fnorm) {
          th = cand;
          f = fc;
          fnorm = cnorm;
          mu = std::max(mu / 3.0, 1e-14);
          improved = true;
          break;
        }
        mu *= 10.0;
      }
      if (!improved) break;
    }
    if (fnorm >= accept) continue;
    bool duplicate = false;
    for (const auto& s : out.solutions) {
      double dist = 0.0;
      for (int k = 0; k < 4; ++k)
        dist = std::max(dist, std::abs(s[static_cast<size_t>(k)] - th[static_cast<size_t>(k)]));
      if (dist < opt.dedup_tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.solutions.push_back(th);
  }
  std::sort(out.solutions.begin(), out.solutions.end());
  out.matched = !out.solutions.empty();
  return out;
}

SpectralCheck discrete_spectral_check(const std::map<Lag, double>& gamma_hat, int grid_n) {
  SpectralCheck out;
  out.min_f = 1e300;
  const double norm = 1.0 / (4.0 * M_PI * M_PI);
  for (int i = 0; i < grid_n; ++i) {
    const double w1 = -M_PI + 2.0 * M_PI * i / grid_n;
    for (int j = 0; j < grid_n; ++j) {
      const double w2 = -M_PI + 2.0 * M_PI * j / grid_n;
      double f = 0.0;
      for (const auto& [lag, g] : gamma_hat)
        f += g * std::cos(w1 * lag.first + w2 * lag.second);
      out.min_f = std::min(out.min_f, norm * f);
    }
  }
  out.log_integrable = out.min_f > 0.0;
  return out;
}

ResidualReport verify_arma_recursion(const LatticeField& field,
                                     const ArmaRepresentation& repr) {
  if (field.grid.dim != 2) throw Error("residual check requires a planar field");
  for (double s : field.grid.spacing)
    if (std::abs(s - 1.0) > 1e-12) throw Error("residual check requires unit spacing");
  const int p = repr.p;
  const int n1 = field.grid.extents[0];
  const int n2 = field.grid.extents[1];
  if (n1 <= 2 * p || n2 <= 2 * p) throw Error("field too small for the residual check");

  const int m1 = n1 - p;
  const int m2 = n2 - p;
  std::vector<double> v(static_cast<size_t>(m1) * m2, 0.0);
  auto y = [&](int i, int j) {
    return field.values[static_cast<size_t>(i) * n2 + j];
  };
  double mean = 0.0;
  for (int i = 0; i < m1; ++i)
    for (int j = 0; j < m2; ++j) {
      double acc = 0.0;
      for (int k1 = 0; k1 <= p; ++k1)
        for (int k2 = 0; k2 <= p; ++k2)
          acc += repr.d(k1, k2) * y(i + p - k1, j + p - k2);
      v[static_cast<size_t>(i) * m2 + j] = acc;
      mean += acc;
    }
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;

  ResidualReport rep;
  rep.samples = v.size();
  for (int h1 = 0; h1 <= p; ++h1)
    for (int h2 = h1 == 0 ? 0 : -p; h2 <= p; ++h2) {
      double acc = 0.0;
      size_t cnt = 0;
      for (int i = 0; i < m1 - h1; ++i)
        for (int j = std::max(0, -h2); j < m2 - std::max(0, h2); ++j) {
          acc += v[static_cast<size_t>(i) * m2 + j] *
                 v[static_cast<size_t>(i + h1) * m2 + (j + h2)];
          ++cnt;
        }
      rep.acov[{h1, h2}] = cnt ? acc / static_cast<double>(cnt) : 0.0;
    }
  const double v0 = rep.acov.at({0, 0});
  for (const auto& [lag, a] : rep.acov) {
    rep.corr[lag] = v0 > 0.0 ? a / v0 : 0.0;
    double expected = 0.0;
    const auto it = repr.rhs_acov.find(lag);
    if (it != repr.rhs_acov.end()) expected = it->second;
    rep.deviation[lag] = a - expected;
  }
  return rep;
}

}  // namespace carmafield
