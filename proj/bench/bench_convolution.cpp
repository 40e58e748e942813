#include <chrono>
#include <cstdio>

#include "carmafield/simulate.hpp"

using namespace carmafield;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  int n = 96;
  int reps = 5;
  if (argc > 1) n = std::atoi(argv[1]);
  if (argc > 2) reps = std::atoi(argv[2]);

  const auto spec = ModelSpec::carma(
      2, {Polynomial({1.0, 3.0, 2.0}), Polynomial({1.0, 2.5, 1.0})}, {1.0, 1.0});
  const auto levy = LevyBasisSpec::gaussian(1.0);
  const auto grid = LatticeGrid::regular({0.0, 0.0}, {0.25, 0.25}, {n, n});
  ConvolutionOptions opt;
  opt.trunc_tol = 1e-5;

  std::printf("convolution benchmark: %dx%d grid, %d replicates\n", n, n, reps);

  double serial_time = 0.0, parallel_time = 0.0;
  bool identical = true;
  for (int r = 0; r < reps; ++r) {
    const SeedRecord seed{1234, static_cast<uint64_t>(r)};
    auto t0 = std::chrono::steady_clock::now();
    const LatticeField fs = simulate_convolution_serial(spec, levy, grid, seed, opt);
    serial_time += seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const LatticeField fp = simulate_convolution(spec, levy, grid, seed, opt);
    parallel_time += seconds_since(t0);
    identical = identical && fs.values == fp.values;
  }

  std::printf("serial reference: %8.3f s total (%.3f s/replicate)\n", serial_time,
              serial_time / reps);
  std::printf("parallel:         %8.3f s total (%.3f s/replicate)\n", parallel_time,
              parallel_time / reps);
  std::printf("speedup: %.2fx\n", serial_time / parallel_time);
  std::printf("outputs bit-identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
