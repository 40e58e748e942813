#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "carmafield/moments.hpp"

namespace carmafield {

struct SeedRecord {
  uint64_t seed = 0;
  uint64_t replicate = 0;
};

struct LatticeGrid {
  int dim = 0;
  std::vector<double> origin;   // per axis
  std::vector<double> spacing;  // per axis, > 0
  std::vector<int> extents;     // samples per axis

  static LatticeGrid regular(std::vector<double> origin, std::vector<double> spacing,
                             std::vector<int> extents);

  size_t size() const;
  /// Row-major with the last axis fastest.
  size_t flat_index(std::span<const int> idx) const;
  std::vector<double> point(std::span<const int> idx) const;
};

struct LatticeField {
  LatticeGrid grid;
  std::vector<double> values;
  SeedRecord seed;

  double at(std::span<const int> idx) const { return values[grid.flat_index(idx)]; }
};

/// Deterministic counter-based stream: the (seed, stream) pair fully determines
/// the draw sequence, so cells and replicates can be generated in any order.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream);

  uint64_t next_raw();
  double uniform();           // (0,1)
  double normal();            // standard, Box-Muller
  long long poisson(double mean);
  double stable_symmetric(double alpha);  // unit scale, Chambers-Mallows-Stuck

 private:
  uint64_t state_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// One draw of the basis over a cell of the given volume.
double sample_cell(const LevyBasisSpec& levy, double volume, CounterRng& rng);

struct ConvolutionOptions {
  double trunc_tol = 1e-6;
  size_t max_window_cells = size_t{1} << 22;   // per-point kernel window budget
  size_t max_noise_cells = size_t{1} << 27;    // extended noise lattice budget
  bool parallel = true;
};

/// Midpoint discretization of the moving average: Y_n = sum_k g((k-1/2)Delta)
/// Lambda(cell_{n-k}) over the window where the kernel tail exceeds trunc_tol
/// relative to its peak. Output is identical for the serial and parallel paths.
LatticeField simulate_convolution(const ModelSpec& spec, const LevyBasisSpec& levy,
                                  const LatticeGrid& grid, SeedRecord seed,
                                  const ConvolutionOptions& opt = {});

/// Single-threaded reference with the same stream layout; used by tests and the
/// benchmark to pin down the parallel path.
LatticeField simulate_convolution_serial(const ModelSpec& spec,
                                         const LevyBasisSpec& levy,
                                         const LatticeGrid& grid, SeedRecord seed,
                                         const ConvolutionOptions& opt = {});

/// Multivariate normal draw at arbitrary points with covariance gamma(t_i-t_j).
std::vector<double> gaussian_exact_points(const ModelSpec& spec,
                                          const LevyBasisSpec& levy,
                                          const std::vector<std::vector<double>>& points,
                                          CounterRng& rng);

/// Dense-Cholesky draw on a lattice; grid size capped (the matrix is dense).
LatticeField simulate_gaussian_exact(const ModelSpec& spec, const LevyBasisSpec& levy,
                                     const LatticeGrid& grid, SeedRecord seed,
                                     size_t max_points = 4096);

/// Exact quarter-plane AR recursion for CAR(1) on R^2. The boundary strip is a
/// Gaussian-exact draw in the Gaussian case and a convolution draw otherwise;
/// jump-case innovations integrate the cell by subdivision.
LatticeField simulate_car1_recursion(const ModelSpec& spec, const LevyBasisSpec& levy,
                                     const LatticeGrid& grid, SeedRecord seed,
                                     int jump_subdivisions = 4);

/// Gaussian innovation variance of the unit-cell integral in the recursion.
double car1_innovation_variance(const ModelSpec& spec, const LevyBasisSpec& levy,
                                double dx, double dy);

void write_csv(const LatticeField& field, std::ostream& out);
void write_csv(const LatticeField& field, const std::string& path);

}  // namespace carmafield
