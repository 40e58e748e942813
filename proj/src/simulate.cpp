#include "carmafield/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace carmafield {

namespace {

uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

LatticeGrid LatticeGrid::regular(std::vector<double> origin, std::vector<double> spacing,
                                 std::vector<int> extents) {
  LatticeGrid g;
  g.dim = static_cast<int>(extents.size());
  if (g.dim < 1 || g.dim > 3) throw Error("grid dimension must be 1, 2 or 3");
  if (origin.size() != extents.size() || spacing.size() != extents.size())
    throw Error("grid fields must share one dimension");
  for (double s : spacing)
    if (!(s > 0.0)) throw Error("grid spacing must be positive");
  for (int e : extents)
    if (e < 1) throw Error("grid extents must be positive");
  g.origin = std::move(origin);
  g.spacing = std::move(spacing);
  g.extents = std::move(extents);
  return g;
}

size_t LatticeGrid::size() const {
  size_t n = 1;
  for (int e : extents) n *= static_cast<size_t>(e);
  return n;
}

size_t LatticeGrid::flat_index(std::span<const int> idx) const {
  size_t f = 0;
  for (int a = 0; a < dim; ++a)
    f = f * static_cast<size_t>(extents[static_cast<size_t>(a)]) +
        static_cast<size_t>(idx[static_cast<size_t>(a)]);
  return f;
}

std::vector<double> LatticeGrid::point(std::span<const int> idx) const {
  std::vector<double> t(static_cast<size_t>(dim));
  for (int a = 0; a < dim; ++a)
    t[static_cast<size_t>(a)] = origin[static_cast<size_t>(a)] +
                                idx[static_cast<size_t>(a)] * spacing[static_cast<size_t>(a)];
  return t;
}

CounterRng::CounterRng(uint64_t seed, uint64_t stream) {
  state_ = mix64(mix64(seed + kGolden) ^ mix64(stream + 0x5851F42D4C957F2DULL));
}

uint64_t CounterRng::next_raw() {
  state_ += kGolden;
  return mix64(state_);
}

double CounterRng::uniform() {
  // in (0,1]
  return (static_cast<double>(next_raw() >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

long long CounterRng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // count unit-exponential arrivals; safe for any mean, O(mean) draws
  long long k = 0;
  double s = -std::log(uniform());
  while (s < mean) {
    ++k;
    s += -std::log(uniform());
  }
  return k;
}

double CounterRng::stable_symmetric(double alpha) {
  const double u = M_PI * (uniform() - 0.5);
  const double w = -std::log(uniform());
  if (std::abs(alpha - 1.0) < 1e-12) return std::tan(u);
  const double t = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
  return t * std::pow(std::cos(u - alpha * u) / w, (1.0 - alpha) / alpha);
}

double sample_cell(const LevyBasisSpec& levy, double volume, CounterRng& rng) {
  if (!(volume > 0.0)) throw Error("cell volume must be positive");
  double x = levy.beta * volume;
  if (levy.sigma2 > 0.0) x += std::sqrt(levy.sigma2 * volume) * rng.normal();
  if (const auto* cp = std::get_if<CompoundPoissonJumps>(&levy.jumps)) {
    const long long n = rng.poisson(cp->rate * volume);
    for (long long i = 0; i < n; ++i) {
      x += std::visit(
          [&](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ConstantJump>) return l.value;
            if constexpr (std::is_same_v<T, GaussianJump>)
              return l.mean + l.stddev * rng.normal();
            if constexpr (std::is_same_v<T, LaplaceJump>) {
              const double e = -std::log(rng.uniform());
              return (rng.uniform() < 0.5 ? -l.scale : l.scale) * e;
            }
          },
          cp->law);
    }
  } else if (const auto* st = std::get_if<StableJumps>(&levy.jumps)) {
    x += std::pow(st->eta * volume, 1.0 / st->alpha) * rng.stable_symmetric(st->alpha);
  }
  return x;
}

namespace {

uint64_t replicate_stream(const SeedRecord& seed, uint64_t stream) {
  return seed.replicate * kGolden + stream + 1;
}

LatticeField convolution_impl(const ModelSpec& spec, const LevyBasisSpec& levy,
                              const LatticeGrid& grid, SeedRecord seed,
                              const ConvolutionOptions& opt, bool parallel) {
  if (grid.dim != spec.dim) throw Error("grid dimension must match the model");
  if (!(opt.trunc_tol > 0.0) || opt.trunc_tol >= 1.0)
    throw Error("trunc_tol must lie in (0,1)");
  const int d = spec.dim;
  const double radius = std::log(1.0 / opt.trunc_tol) / spec.min_abs_real_eigenvalue();

  std::vector<int> window(static_cast<size_t>(d));
  size_t window_cells = 1;
  for (int a = 0; a < d; ++a) {
    window[static_cast<size_t>(a)] =
        std::max(1, static_cast<int>(std::ceil(radius / grid.spacing[static_cast<size_t>(a)])));
    window_cells *= static_cast<size_t>(window[static_cast<size_t>(a)]);
  }
  if (window_cells > opt.max_window_cells)
    throw Error("truncation radius exceeds the kernel window budget");

  std::vector<int> ext(static_cast<size_t>(d));
  size_t noise_cells = 1;
  double cell_volume = 1.0;
  for (int a = 0; a < d; ++a) {
    ext[static_cast<size_t>(a)] = grid.extents[static_cast<size_t>(a)] + window[static_cast<size_t>(a)];
    noise_cells *= static_cast<size_t>(ext[static_cast<size_t>(a)]);
    cell_volume *= grid.spacing[static_cast<size_t>(a)];
  }
  if (noise_cells > opt.max_noise_cells)
    throw Error("noise lattice exceeds the cell budget");

  const KernelEvaluator kernel(spec);
  std::vector<double> gtab(window_cells);
  {
    std::vector<int> k(static_cast<size_t>(d), 0);
    std::vector<double> s(static_cast<size_t>(d));
    for (size_t f = 0; f < window_cells; ++f) {
      for (int a = 0; a < d; ++a)
        s[static_cast<size_t>(a)] =
            (k[static_cast<size_t>(a)] + 0.5) * grid.spacing[static_cast<size_t>(a)];
      gtab[f] = kernel(s);
      for (int a = d - 1; a >= 0; --a) {
        if (++k[static_cast<size_t>(a)] < window[static_cast<size_t>(a)]) break;
        k[static_cast<size_t>(a)] = 0;
      }
    }
  }

  const bool zero_noise = levy.beta == 0.0 && levy.sigma2 == 0.0 &&
                          std::holds_alternative<NoJumps>(levy.jumps);
  std::vector<double> noise(noise_cells, 0.0);
  if (!zero_noise) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (long long f = 0; f < static_cast<long long>(noise_cells); ++f) {
      CounterRng rng(seed.seed, replicate_stream(seed, static_cast<uint64_t>(f)));
      noise[static_cast<size_t>(f)] = sample_cell(levy, cell_volume, rng);
    }
  }

  LatticeField field;
  field.grid = grid;
  field.seed = seed;
  field.values.assign(grid.size(), 0.0);
  const size_t total = grid.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (long long f = 0; f < static_cast<long long>(total); ++f) {
    std::vector<int> n(static_cast<size_t>(d));
    size_t rem = static_cast<size_t>(f);
    for (int a = d - 1; a >= 0; --a) {
      n[static_cast<size_t>(a)] = static_cast<int>(rem % static_cast<size_t>(grid.extents[static_cast<size_t>(a)]));
      rem /= static_cast<size_t>(grid.extents[static_cast<size_t>(a)]);
    }
    double acc = 0.0;
    std::vector<int> k(static_cast<size_t>(d), 0);
    for (size_t kf = 0; kf < window_cells; ++kf) {
      // noise cell n - (k+1), shifted by the window width into the extended lattice
      size_t off = 0;
      for (int a = 0; a < d; ++a) {
        const int o = n[static_cast<size_t>(a)] - (k[static_cast<size_t>(a)] + 1) +
                      window[static_cast<size_t>(a)];
        off = off * static_cast<size_t>(ext[static_cast<size_t>(a)]) + static_cast<size_t>(o);
      }
      acc += gtab[kf] * noise[off];
      for (int a = d - 1; a >= 0; --a) {
        if (++k[static_cast<size_t>(a)] < window[static_cast<size_t>(a)]) break;
        k[static_cast<size_t>(a)] = 0;
      }
    }
    field.values[static_cast<size_t>(f)] = acc;
  }
  return field;
}

// Lower-triangular Cholesky with an escalating diagonal jitter.
std::vector<double> cholesky_jittered(std::vector<double> a, size_t n, double scale) {
  const double jitters[] = {0.0, 1e-12, 1e-10, 1e-8};
  for (double j : jitters) {
    std::vector<double> l = a;
    for (size_t i = 0; i < n; ++i) l[i * n + i] += j * scale;
    bool ok = true;
    for (size_t c = 0; c < n && ok; ++c) {
      double diag = l[c * n + c];
      for (size_t k = 0; k < c; ++k) diag -= l[c * n + k] * l[c * n + k];
      if (diag <= 0.0) {
        ok = false;
        break;
      }
      const double root = std::sqrt(diag);
      l[c * n + c] = root;
      for (size_t r = c + 1; r < n; ++r) {
        double v = l[r * n + c];
        for (size_t k = 0; k < c; ++k) v -= l[r * n + k] * l[c * n + k];
        l[r * n + c] = v / root;
      }
      for (size_t k = c + 1; k < n; ++k) l[c * n + k] = 0.0;
    }
    if (ok) return l;
  }
  throw Error("covariance matrix is not positive definite within the jitter budget");
}

}  // namespace

LatticeField simulate_convolution(const ModelSpec& spec, const LevyBasisSpec& levy,
                                  const LatticeGrid& grid, SeedRecord seed,
                                  const ConvolutionOptions& opt) {
  return convolution_impl(spec, levy, grid, seed, opt, opt.parallel);
}

LatticeField simulate_convolution_serial(const ModelSpec& spec, const LevyBasisSpec& levy,
                                         const LatticeGrid& grid, SeedRecord seed,
                                         const ConvolutionOptions& opt) {
  return convolution_impl(spec, levy, grid, seed, opt, false);
}

std::vector<double> gaussian_exact_points(const ModelSpec& spec,
                                          const LevyBasisSpec& levy,
                                          const std::vector<std::vector<double>>& points,
                                          CounterRng& rng) {
  if (!levy.is_gaussian()) throw Error("exact sampling requires a pure Gaussian basis");
  const size_t n = points.size();
  SecondOrder so(spec, levy);
  const double mean = so.mean();
  std::vector<double> cov(n * n);
  std::vector<double> lag(static_cast<size_t>(spec.dim));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) {
      for (int a = 0; a < spec.dim; ++a)
        lag[static_cast<size_t>(a)] =
            points[i][static_cast<size_t>(a)] - points[j][static_cast<size_t>(a)];
      const double g = so.autocovariance(lag);
      cov[i * n + j] = g;
      cov[j * n + i] = g;
    }
  const std::vector<double> l = cholesky_jittered(std::move(cov), n, so.variance());
  std::vector<double> z(n);
  for (size_t i = 0; i < n; ++i) z[i] = rng.normal();
  std::vector<double> out(n, mean);
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k <= i; ++k) out[i] += l[i * n + k] * z[k];
  return out;
}

LatticeField simulate_gaussian_exact(const ModelSpec& spec, const LevyBasisSpec& levy,
                                     const LatticeGrid& grid, SeedRecord seed,
                                     size_t max_points) {
  if (grid.dim != spec.dim) throw Error("grid dimension must match the model");
  if (grid.size() > max_points)
    throw Error("grid too large for the dense-covariance method");
  const size_t n = grid.size();
  std::vector<std::vector<double>> points;
  points.reserve(n);
  std::vector<int> idx(static_cast<size_t>(grid.dim), 0);
  for (size_t f = 0; f < n; ++f) {
    points.push_back(grid.point(idx));
    for (int a = grid.dim - 1; a >= 0; --a) {
      if (++idx[static_cast<size_t>(a)] < grid.extents[static_cast<size_t>(a)]) break;
      idx[static_cast<size_t>(a)] = 0;
    }
  }
  CounterRng rng(seed.seed, replicate_stream(seed, 0));
  LatticeField field;
  field.grid = grid;
  field.seed = seed;
  field.values = gaussian_exact_points(spec, levy, points, rng);
  return field;
}

double car1_innovation_variance(const ModelSpec& spec, const LevyBasisSpec& levy,
                                double dx, double dy) {
  if (spec.p != 1 || spec.dim != 2) throw Error("recursion requires p = 1 on R^2");
  const double l1 = spec.axis_spectra[0].eigenvalues[0].value.real();
  const double l2 = spec.axis_spectra[1].eigenvalues[0].value.real();
  const double scale = spec.b[0] * spec.c[0];
  return levy.kappa2_or_throw() * scale * scale * (1.0 - std::exp(2.0 * l1 * dx)) *
         (1.0 - std::exp(2.0 * l2 * dy)) / (4.0 * l1 * l2);
}

LatticeField simulate_car1_recursion(const ModelSpec& spec, const LevyBasisSpec& levy,
                                     const LatticeGrid& grid, SeedRecord seed,
                                     int jump_subdivisions) {
  if (spec.p != 1 || spec.dim != 2) throw Error("recursion requires p = 1 on R^2");
  if (grid.dim != 2) throw Error("recursion requires a planar grid");
  const double dx = grid.spacing[0];
  const double dy = grid.spacing[1];
  const double l1 = spec.axis_spectra[0].eigenvalues[0].value.real();
  const double l2 = spec.axis_spectra[1].eigenvalues[0].value.real();
  const double scale = spec.b[0] * spec.c[0];
  const double r1 = std::exp(l1 * dx);
  const double r2 = std::exp(l2 * dy);
  const int n1 = grid.extents[0];
  const int n2 = grid.extents[1];

  LatticeField field;
  field.grid = grid;
  field.seed = seed;
  field.values.assign(grid.size(), 0.0);
  auto value = [&](int i, int j) -> double& {
    return field.values[static_cast<size_t>(i) * static_cast<size_t>(n2) + static_cast<size_t>(j)];
  };

  // boundary strip: first row plus first column
  if (levy.is_gaussian()) {
    std::vector<std::vector<double>> strip;
    std::vector<int> idx(2);
    for (int j = 0; j < n2; ++j) {
      idx = {0, j};
      strip.push_back(grid.point(idx));
    }
    for (int i = 1; i < n1; ++i) {
      idx = {i, 0};
      strip.push_back(grid.point(idx));
    }
    CounterRng rng(seed.seed, replicate_stream(seed, 0));
    const std::vector<double> draw = gaussian_exact_points(spec, levy, strip, rng);
    for (int j = 0; j < n2; ++j) value(0, j) = draw[static_cast<size_t>(j)];
    for (int i = 1; i < n1; ++i) value(i, 0) = draw[static_cast<size_t>(n2 + i - 1)];
  } else {
    // approximate stationary start from truncated moving averages along each edge
    const LatticeGrid row = LatticeGrid::regular({grid.origin[0], grid.origin[1]},
                                                 {dx, dy}, {1, n2});
    const LatticeGrid col = LatticeGrid::regular({grid.origin[0] + dx, grid.origin[1]},
                                                 {dx, dy}, {n1 - 1, 1});
    ConvolutionOptions opt;
    SeedRecord rowseed{seed.seed, seed.replicate * 3 + 1};
    SeedRecord colseed{seed.seed, seed.replicate * 3 + 2};
    const LatticeField rowf = simulate_convolution(spec, levy, row, rowseed, opt);
    for (int j = 0; j < n2; ++j) value(0, j) = rowf.values[static_cast<size_t>(j)];
    if (n1 > 1) {
      const LatticeField colf = simulate_convolution(spec, levy, col, colseed, opt);
      for (int i = 1; i < n1; ++i) value(i, 0) = colf.values[static_cast<size_t>(i - 1)];
    }
  }

  const bool gaussian = levy.is_gaussian();
  const double innov_sd = gaussian ? std::sqrt(car1_innovation_variance(spec, levy, dx, dy)) : 0.0;
  const int m = std::max(1, jump_subdivisions);
  const double du = dx / m;
  const double dv = dy / m;
  for (int i = 1; i < n1; ++i)
    for (int j = 1; j < n2; ++j) {
      const uint64_t cell = static_cast<uint64_t>(i) * static_cast<uint64_t>(n2) +
                            static_cast<uint64_t>(j);
      CounterRng rng(seed.seed, replicate_stream(seed, cell + 7));
      double z;
      if (gaussian) {
        z = innov_sd * rng.normal();
      } else {
        z = 0.0;
        for (int u = 0; u < m; ++u)
          for (int v = 0; v < m; ++v) {
            const double su = dx - (u + 0.5) * du;
            const double sv = dy - (v + 0.5) * dv;
            z += scale * std::exp(l1 * su + l2 * sv) * sample_cell(levy, du * dv, rng);
          }
      }
      value(i, j) = r1 * value(i - 1, j) + r2 * value(i, j - 1) -
                    r1 * r2 * value(i - 1, j - 1) + z;
    }
  return field;
}

void write_csv(const LatticeField& field, std::ostream& out) {
  const int d = field.grid.dim;
  for (int a = 0; a < d; ++a) out << 't' << (a + 1) << ',';
  out << "value\n";
  char buf[64];
  std::vector<int> idx(static_cast<size_t>(d), 0);
  const size_t n = field.grid.size();
  for (size_t f = 0; f < n; ++f) {
    const std::vector<double> t = field.grid.point(idx);
    for (int a = 0; a < d; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", t[static_cast<size_t>(a)]);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", field.values[f]);
    out << buf << '\n';
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[static_cast<size_t>(a)] < field.grid.extents[static_cast<size_t>(a)]) break;
      idx[static_cast<size_t>(a)] = 0;
    }
  }
}

void write_csv(const LatticeField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  write_csv(field, out);
}

}  // namespace carmafield
