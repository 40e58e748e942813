#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "carmafield/model_io.hpp"
#include "carmafield/simulate.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace carmafield;

struct GridFlags {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<int> steps;
};

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
  cmd->add_option("--min", g.min, "Lower corner, one value per axis")
      ->delimiter(',')
      ->required();
  cmd->add_option("--max", g.max, "Upper corner, one value per axis")
      ->delimiter(',')
      ->required();
  cmd->add_option("--steps", g.steps, "Points per axis")->delimiter(',')->required();
}

std::vector<std::vector<double>> grid_axes(const GridFlags& g, int dim) {
  if (static_cast<int>(g.min.size()) != dim || static_cast<int>(g.max.size()) != dim ||
      static_cast<int>(g.steps.size()) != dim)
    throw Error("grid flags must supply one value per model axis");
  std::vector<std::vector<double>> axes(static_cast<size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    const int n = g.steps[static_cast<size_t>(a)];
    if (n < 1) throw Error("--steps values must be positive");
    for (int i = 0; i < n; ++i) {
      const double lo = g.min[static_cast<size_t>(a)];
      const double hi = g.max[static_cast<size_t>(a)];
      axes[static_cast<size_t>(a)].push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    }
  }
  return axes;
}

void write_table(std::ostream& out, const std::vector<std::vector<double>>& axes,
                 const std::function<double(std::span<const double>)>& f) {
  const int d = static_cast<int>(axes.size());
  for (int a = 0; a < d; ++a) out << 't' << (a + 1) << ',';
  out << "value\n";
  std::vector<int> idx(static_cast<size_t>(d), 0);
  std::vector<double> t(static_cast<size_t>(d));
  char buf[64];
  while (true) {
    for (int a = 0; a < d; ++a)
      t[static_cast<size_t>(a)] = axes[static_cast<size_t>(a)][static_cast<size_t>(idx[static_cast<size_t>(a)])];
    for (int a = 0; a < d; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", t[static_cast<size_t>(a)]);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", f(t));
    out << buf << '\n';
    int a = d - 1;
    for (; a >= 0; --a) {
      if (++idx[static_cast<size_t>(a)] < static_cast<int>(axes[static_cast<size_t>(a)].size())) break;
      idx[static_cast<size_t>(a)] = 0;
    }
    if (a < 0) break;
  }
}

void write_gnuplot_script(const std::string& script_path, const std::string& csv_path,
                          int dim) {
  std::ofstream out(script_path);
  if (!out) throw Error("cannot open output file: " + script_path);
  out << "set datafile separator ','\n";
  if (dim == 2) {
    out << "set view map\nset pm3d interpolate 2,2\n"
        << "splot '" << csv_path << "' skip 1 using 1:2:3 with pm3d notitle\n";
  } else {
    out << "plot '" << csv_path << "' skip 1 using 1:2 with lines notitle\n";
  }
  out << "pause -1\n";
}

int run_validate(const std::string& model_path) {
  const ModelDocument doc = load_model_document(model_path);
  const ValidationReport report = validate_model(doc.spec, doc.levy);
  std::cout << validation_report_json(report) << '\n';
  return report.passed() ? 0 : 1;
}

int run_table(const std::string& model_path, const std::string& quantity,
              const GridFlags& flags, const std::string& out_path, bool gnuplot) {
  const ModelDocument doc = load_model_document(model_path);
  const ValidationReport report = validate_model(doc.spec, doc.levy);
  if (!report.passed()) {
    std::cerr << "model fails validation\n" << validation_report_json(report) << '\n';
    return 1;
  }
  const std::vector<std::vector<double>> axes = grid_axes(flags, doc.spec.dim);

  std::function<double(std::span<const double>)> f;
  KernelEvaluator kernel(doc.spec);
  std::optional<SecondOrder> so;
  if (quantity == "kernel") {
    f = [&](std::span<const double> t) { return kernel(t); };
  } else {
    so.emplace(doc.spec, doc.levy);  // throws on undefined second moments
    if (quantity == "acf")
      f = [&](std::span<const double> t) { return so->autocovariance(t); };
    else
      f = [&](std::span<const double> t) { return so->spectral_density(t); };
  }

  if (out_path.empty()) {
    write_table(std::cout, axes, f);
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot open output file: " + out_path);
    write_table(out, axes, f);
    if (gnuplot) write_gnuplot_script(out_path + ".gp", out_path, doc.spec.dim);
  }
  return 0;
}

int run_simulate(const std::string& model_path, const std::string& method,
                 const GridFlags& flags, uint64_t seed, int replicates,
                 const std::string& out_prefix, double trunc_tol, bool gnuplot) {
  const ModelDocument doc = load_model_document(model_path);
  const ValidationReport report = validate_model(doc.spec, doc.levy);
  if (!report.passed()) {
    std::cerr << "model fails validation\n" << validation_report_json(report) << '\n';
    return 1;
  }
  const std::vector<std::vector<double>> axes = grid_axes(flags, doc.spec.dim);
  std::vector<double> origin, spacing;
  std::vector<int> extents;
  for (const auto& axis : axes) {
    origin.push_back(axis.front());
    spacing.push_back(axis.size() > 1 ? axis[1] - axis[0] : 1.0);
    extents.push_back(static_cast<int>(axis.size()));
  }
  const LatticeGrid grid = LatticeGrid::regular(origin, spacing, extents);

  std::vector<double> sums(static_cast<size_t>(replicates), 0.0);
  std::vector<double> sq_sums(static_cast<size_t>(replicates), 0.0);
  std::string first_csv;
  ConvolutionOptions opt;
  opt.trunc_tol = trunc_tol;
  std::exception_ptr failure;  // exceptions must not escape the parallel region
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < replicates; ++r) {
    try {
      const SeedRecord rec{seed, static_cast<uint64_t>(r)};
      LatticeField field;
      if (method == "convolution")
        field = simulate_convolution(doc.spec, doc.levy, grid, rec, opt);
      else if (method == "gaussian-exact")
        field = simulate_gaussian_exact(doc.spec, doc.levy, grid, rec);
      else
        field = simulate_car1_recursion(doc.spec, doc.levy, grid, rec);
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "_r%03d.csv", r);
      write_csv(field, out_prefix + suffix);
      double s = 0.0, s2 = 0.0;
      for (double v : field.values) {
        s += v;
        s2 += v * v;
      }
      sums[static_cast<size_t>(r)] = s;
      sq_sums[static_cast<size_t>(r)] = s2;
      if (r == 0) first_csv = out_prefix + suffix;
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const double n = static_cast<double>(grid.size()) * replicates;
  double total = 0.0, total_sq = 0.0;
  for (int r = 0; r < replicates; ++r) {
    total += sums[static_cast<size_t>(r)];
    total_sq += sq_sums[static_cast<size_t>(r)];
  }
  const double mean = total / n;
  const double variance = total_sq / n - mean * mean;
  std::ofstream summary(out_prefix + "_summary.json");
  if (!summary) throw Error("cannot open output file: " + out_prefix + "_summary.json");
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\n  \"replicates\": %d,\n  \"samples_per_replicate\": %zu,\n"
                "  \"mean\": %.17g,\n  \"variance\": %.17g\n}\n",
                replicates, grid.size(), mean, variance);
  summary << buf;
  if (gnuplot) write_gnuplot_script(out_prefix + ".gp", first_csv, doc.spec.dim);
  return 0;
}

int run_sample_arma(const std::string& model_path, bool ma) {
  const ModelDocument doc = load_model_document(model_path);
  const ArmaRepresentation repr = arma_representation(doc.spec, doc.levy);
  const SpectralCheck check = discrete_spectral_check(repr.rhs_acov);
  if (ma) {
    if (doc.spec.p != 2) throw Error("--ma-match requires p = 2");
    const MaMatch match = ma_match(repr.rhs_acov);
    std::cout << arma_representation_json(repr, check, &match) << '\n';
  } else {
    std::cout << arma_representation_json(repr, check) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("CARMA_FIELDS_THREADS")) {
    const int n = std::atoi(env);
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
  }

  CLI::App app{"Causal CARMA random fields: validation, tabulation, simulation and lattice ARMA analysis"};
  app.require_subcommand(1);

  std::string model_path, quantity = "kernel", out_path, method = "convolution";
  GridFlags grid;
  uint64_t seed = 0;
  int replicates = 1;
  double trunc_tol = 1e-6;
  bool gnuplot = false, ma = false;

  CLI::App* validate = app.add_subcommand("validate", "Check a model document");
  validate->add_option("model", model_path, "Model JSON path")->required();

  CLI::App* table = app.add_subcommand("table", "Tabulate kernel, autocovariance or spectral density");
  table->add_option("model", model_path, "Model JSON path")->required();
  table->add_option("--quantity", quantity, "kernel|acf|spectrum")
      ->check(CLI::IsMember({"kernel", "acf", "spectrum"}));
  add_grid_flags(table, grid);
  table->add_option("--out", out_path, "Write CSV here instead of stdout");
  table->add_flag("--gnuplot", gnuplot, "Also write a gnuplot script (needs --out)");

  CLI::App* simulate = app.add_subcommand("simulate", "Sample the field on a lattice");
  simulate->add_option("model", model_path, "Model JSON path")->required();
  simulate->add_option("--method", method, "convolution|gaussian-exact|car1")
      ->check(CLI::IsMember({"convolution", "gaussian-exact", "car1"}));
  add_grid_flags(simulate, grid);
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--replicates", replicates, "Independent replicates")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--trunc-tol", trunc_tol, "Kernel truncation tolerance");
  simulate->add_option("--out", out_path, "Output prefix")->required();
  simulate->add_flag("--gnuplot", gnuplot, "Also write a gnuplot script");

  CLI::App* arma = app.add_subcommand("sample-arma", "Unit-lattice ARMA structure");
  arma->add_option("model", model_path, "Model JSON path")->required();
  arma->add_flag("--ma-match", ma, "Search for finite MA(1,1) parameterizations");

  try {
    app.parse(argc, argv);
    if (table->parsed() && gnuplot && out_path.empty())
      throw carmafield::ParseError("--gnuplot requires --out");
    if (validate->parsed()) return run_validate(model_path);
    if (table->parsed()) return run_table(model_path, quantity, grid, out_path, gnuplot);
    if (simulate->parsed())
      return run_simulate(model_path, method, grid, seed, replicates, out_path,
                          trunc_tol, gnuplot);
    return run_sample_arma(model_path, ma);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const carmafield::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const carmafield::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
