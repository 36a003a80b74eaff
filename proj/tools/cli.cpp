#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "emd/density_io.hpp"
#include "emd/error.hpp"
#include "emd/examples.hpp"
#include "emd/oracle.hpp"

namespace emd::cli {

namespace {

using examples::ExampleName;

constexpr double kL1Reference = 0.8;
const double kL2Reference = 0.4 * std::sqrt(2.0);

struct Flags {
  std::string metric = "l2";
  double epsilon = 0.01;
  std::optional<double> mu;
  std::optional<double> tau;
  double theta = 1.0;
  std::optional<double> tol;
  std::size_t max_iters = 100000;
  std::size_t grid = 40;
  std::optional<std::string> example;
  std::optional<std::string> rho0;
  std::optional<std::string> rho1;
  std::optional<std::string> out_flux;
  std::optional<std::string> out_potential;
  std::optional<std::string> out_residuals;
  std::optional<std::string> table;
  std::optional<std::string> out_table;
  bool oracle_check = false;
  std::int64_t denominator = 16;
  std::size_t instances = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool strict_steps = false;
  bool epsilon_given = false;
};

std::string bool_text(bool b) { return b ? "true" : "false"; }

void write_file(const std::string& path,
                const std::function<void(std::ostream&)>& writer) {
  std::ofstream file(path);
  if (!file) throw ParseError("cannot open '" + path + "' for writing");
  file.imbue(std::locale::classic());
  writer(file);
  if (!file) throw ParseError("failed writing '" + path + "'");
}

SolverConfig config_from(const Flags& flags, const LatticeGrid& grid) {
  SolverConfig config;
  config.metric = parse_metric(flags.metric);
  config.epsilon = flags.epsilon;
  config.mu = flags.mu.value_or(scaled_step(grid));
  config.tau = flags.tau.value_or(scaled_step(grid));
  config.theta = flags.theta;
  config.tol = flags.tol.value_or(1e-5);
  config.max_iters = flags.max_iters;
  config.strict_steps = flags.strict_steps;
  config.allow_nonunique = flags.epsilon_given && flags.epsilon == 0.0;
  config.threads = flags.threads;
  return config;
}

int run_solve(const Flags& flags, std::ostream& out, std::ostream& err) {
  const bool have_files = flags.rho0 || flags.rho1;
  if (flags.example.has_value() == have_files) {
    err << "error: give exactly one of --example or --rho0/--rho1\n";
    return kUsageError;
  }
  if (have_files && !(flags.rho0 && flags.rho1)) {
    err << "error: --rho0 and --rho1 must be given together\n";
    return kUsageError;
  }

  std::optional<DensityField> p0, p1;
  std::string source;
  if (flags.example) {
    const auto name = examples::parse_example(*flags.example);
    auto pair = examples::generate(examples::make_spec(name, flags.grid));
    p0 = std::move(pair.first);
    p1 = std::move(pair.second);
    source = "example:" + *flags.example;
  } else {
    p0 = io::read_density_file(*flags.rho0);
    p1 = io::read_density_file(*flags.rho1);
    if (!(p0->grid() == p1->grid())) {
      throw IncompatibleFields("dimension mismatch: '" + *flags.rho0 +
                               "' and '" + *flags.rho1 +
                               "' describe different lattices");
    }
    source = "files";
  }

  const LatticeGrid& grid = p0->grid();
  const SolverConfig config = config_from(flags, grid);
  const SolveReport report = solve(*p0, *p1, config);
  for (const auto& warning : report.warnings) err << "warning: " << warning << '\n';

  const auto& shape = grid.shape();
  out << "source=" << source << '\n'
      << "metric=" << to_string(config.metric) << '\n'
      << "grid=" << shape[1] << 'x' << shape[0] << '\n'
      << "vertices=" << grid.size() << '\n'
      << "mu=" << io::format_double(config.mu) << '\n'
      << "tau=" << io::format_double(config.tau) << '\n'
      << "theta=" << io::format_double(config.theta) << '\n'
      << "epsilon="
      << io::format_double(config.metric == Metric::L1 ? config.epsilon : 0.0)
      << '\n'
      << "tol=" << io::format_double(config.tol) << '\n'
      << "distance=" << io::format_double(report.distance) << '\n'
      << "regularized_distance="
      << io::format_double(report.regularized_distance) << '\n'
      << "iterations=" << report.iterations << '\n'
      << "converged=" << bool_text(report.converged) << '\n'
      << "final_residual=" << io::format_double(report.final_residual())
      << '\n'
      << "wall_time_s=" << io::format_double(report.loop_seconds) << '\n';

  if (flags.out_residuals) {
    write_file(*flags.out_residuals,
               [&](std::ostream& os) { io::write_residuals(os, report); });
  }
  if (flags.out_flux) {
    write_file(*flags.out_flux,
               [&](std::ostream& os) { io::write_flux(os, report.flux); });
  }
  if (flags.out_potential) {
    write_file(*flags.out_potential, [&](std::ostream& os) {
      io::write_potential(os, report.potential);
    });
  }

  if (!report.converged) {
    err << "error: not converged after " << report.iterations
        << " iterations (residual " << io::format_double(report.final_residual())
        << " > tol " << io::format_double(config.tol) << ")\n";
    return kNotConverged;
  }
  return kSuccess;
}

int run_oracle_check(const Flags& flags, std::ostream& out, std::ostream& err) {
  if (flags.grid > kOracleMaxGrid) {
    err << "error: --oracle-check needs --grid <= " << kOracleMaxGrid << '\n';
    return kUsageError;
  }
  if (flags.denominator <= 0 || flags.denominator > kOracleMaxDenominator) {
    err << "error: --denominator must lie in [1, " << kOracleMaxDenominator
        << "]\n";
    return kUsageError;
  }
  const LatticeGrid grid = LatticeGrid::square(flags.grid);
  std::mt19937_64 rng(flags.seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < flags.instances; ++k) {
    const auto p0 = random_rational_density(grid, flags.denominator, rng);
    const auto p1 = random_rational_density(grid, flags.denominator, rng);
    const auto cmp = compare_with_oracle(p0, p1, flags.denominator);
    worst = std::max(worst, cmp.gap);
    out << "instance=" << k << " exact=" << io::format_double(cmp.exact)
        << " solver=" << io::format_double(cmp.solver)
        << " gap=" << io::format_double(cmp.gap)
        << " iterations=" << cmp.iterations << '\n';
  }
  out << "max_gap=" << io::format_double(worst) << '\n';
  if (worst > kOracleGapLimit) {
    err << "error: oracle gap " << io::format_double(worst) << " exceeds "
        << io::format_double(kOracleGapLimit) << '\n';
    return kNumericalFailure;
  }
  return kSuccess;
}

int run_table_mode(const Flags& flags, std::ostream& out) {
  const TableId id = parse_table(*flags.table);
  TableOptions options;
  options.tol = flags.tol;
  options.threads = flags.threads;
  const auto sections = run_table(id, options);
  if (flags.out_table) {
    write_file(*flags.out_table,
               [&](std::ostream& os) { write_table(os, id, sections); });
  } else {
    write_table(out, id, sections);
  }
  return kSuccess;
}

struct SweepCase {
  ExampleName example;
  Metric metric;
  double epsilon;
  double tol;
  std::size_t n;  // lattice is n x n
};

SweepRow run_cell(const SweepCase& c, const TableOptions& options) {
  SweepRow row;
  try {
    const auto [p0, p1] =
        examples::generate(examples::make_spec(c.example, c.n));
    SolverConfig config;
    config.metric = c.metric;
    config.epsilon = c.epsilon;
    config.allow_nonunique = true;
    config.mu = config.tau = scaled_step(p0.grid());
    config.tol = options.tol.value_or(c.tol);
    config.max_iters = options.max_iters;
    config.threads = options.threads;
    const auto report = solve(p0, p1, config);
    row.seconds = report.loop_seconds;
    row.iterations = report.iterations;
    const double reference =
        c.metric == Metric::L1 ? kL1Reference : kL2Reference;
    row.relative_error =
        std::abs(report.regularized_distance - reference) / reference;
    row.failed = !report.converged;
  } catch (const Error&) {
    row.failed = true;
  }
  return row;
}

}  // namespace

TableId parse_table(const std::string& text) {
  if (text == "t1") return TableId::T1;
  if (text == "t2") return TableId::T2;
  if (text == "t3") return TableId::T3;
  if (text == "t4") return TableId::T4;
  if (text == "t5") return TableId::T5;
  throw ConfigurationError("unknown table '" + text + "' (expected t1..t5)");
}

std::vector<SweepSection> run_table(TableId id, const TableOptions& options) {
  static constexpr std::size_t kSides[] = {10, 20, 40, 80};
  std::vector<SweepSection> sections;

  auto mesh_sweep = [&](const std::string& title, ExampleName example,
                        Metric metric, double epsilon, double tol,
                        std::span<const std::size_t> sides) {
    SweepSection section{title, "N", metric, {}};
    for (std::size_t n : sides) {
      SweepRow row = run_cell({example, metric, epsilon, tol, n}, options);
      row.parameter = static_cast<double>(n * n);
      section.rows.push_back(row);
    }
    sections.push_back(std::move(section));
  };

  const ExampleName first_three[] = {ExampleName::DiracPair,
                                     ExampleName::DiracSplit2,
                                     ExampleName::DiracSplit4};
  switch (id) {
    case TableId::T1:
      for (ExampleName e : first_three) {
        mesh_sweep(std::string(examples::to_string(e)), e, Metric::L2, 0.0,
                   1e-5, kSides);
      }
      break;
    case TableId::T2:
      for (ExampleName e : first_three) {
        mesh_sweep(std::string(examples::to_string(e)), e, Metric::L1, 0.01,
                   1e-9, kSides);
      }
      break;
    case TableId::T3:
      mesh_sweep("l1", ExampleName::DiracSplit4, Metric::L1, 0.01, 1e-5,
                 kSides);
      mesh_sweep("l2", ExampleName::DiracSplit4, Metric::L2, 0.0, 1e-5,
                 kSides);
      break;
    case TableId::T4: {
      static constexpr std::size_t kT4Sides[] = {20, 40, 80};
      mesh_sweep("dirac_split4 epsilon=0", ExampleName::DiracSplit4,
                 Metric::L1, 0.0, 1e-6, kT4Sides);
      break;
    }
    case TableId::T5: {
      SweepSection section{"dirac_split4 N=1600", "epsilon", Metric::L1, {}};
      for (double eps : {0.1, 0.01, 0.001, 0.0001}) {
        SweepRow row = run_cell(
            {ExampleName::DiracSplit4, Metric::L1, eps, 1e-6, 40}, options);
        row.parameter = eps;
        section.rows.push_back(row);
      }
      sections.push_back(std::move(section));
      break;
    }
  }
  return sections;
}

void write_table(std::ostream& out, TableId id,
                 const std::vector<SweepSection>& sections) {
  auto cell = [](const SweepRow& row, double value) {
    return row.failed ? std::string("FAILED") : io::format_double(value);
  };
  if (id == TableId::T3) {
    const auto& l1 = sections.at(0).rows;
    const auto& l2 = sections.at(1).rows;
    out << "# dirac_split4, l1 vs l2 wall time\n"
        << "N time_l1_s time_l2_s iterations_l1 iterations_l2\n";
    for (std::size_t k = 0; k < l1.size(); ++k) {
      out << io::format_double(l1[k].parameter) << ' '
          << cell(l1[k], l1[k].seconds) << ' ' << cell(l2[k], l2[k].seconds)
          << ' ' << l1[k].iterations << ' ' << l2[k].iterations << '\n';
    }
    return;
  }
  for (const auto& section : sections) {
    out << "# " << section.title << " (" << to_string(section.metric)
        << ")\n"
        << section.parameter_name << " time_s iterations relative_error\n";
    for (const auto& row : section.rows) {
      out << io::format_double(row.parameter) << ' '
          << cell(row, row.seconds) << ' ' << row.iterations << ' '
          << cell(row, row.relative_error) << '\n';
    }
  }
}

OracleComparison compare_with_oracle(const DensityField& p0,
                                     const DensityField& p1,
                                     std::int64_t denominator) {
  OracleComparison cmp;
  cmp.exact = exact_emd(measure_from_density(p0, denominator),
                        measure_from_density(p1, denominator), Metric::L1);
  SolverConfig config;
  config.metric = Metric::L1;
  config.epsilon = 1e-4;
  config.tol = 1e-9;
  config.mu = config.tau = scaled_step(p0.grid());
  config.max_iters = 1000000;
  const auto report = solve(p0, p1, config);
  cmp.solver = report.distance;
  cmp.iterations = report.iterations;
  cmp.converged = report.converged;
  const double diff = std::abs(cmp.solver - cmp.exact);
  cmp.gap = cmp.exact > 0.0 ? diff / cmp.exact : diff;
  return cmp;
}

DensityField random_rational_density(const LatticeGrid& grid,
                                     std::int64_t denominator,
                                     std::mt19937_64& rng) {
  std::vector<double> units(grid.size(), 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  for (std::int64_t u = 0; u < denominator; ++u) units[pick(rng)] += 1.0;
  for (double& x : units) x /= static_cast<double>(denominator);
  return DensityField(grid, std::move(units));
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Flags flags;
  CLI::App app{"Earth Mover's Distance on a uniform lattice (primal-dual)", "emd"};
  app.option_defaults()->always_capture_default();

  app.add_option("--metric", flags.metric, "Ground metric")
      ->check(CLI::IsMember({"l1", "l2"}, CLI::ignore_case));
  auto* eps_opt =
      app.add_option("--epsilon", flags.epsilon, "L1 quadratic regularization")
          ->check(CLI::NonNegativeNumber);
  app.add_option("--mu", flags.mu, "Primal step (default dx/4)");
  app.add_option("--tau", flags.tau, "Dual step (default dx/4)");
  app.add_option("--theta", flags.theta, "Extrapolation in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--tol", flags.tol, "Mean divergence residual threshold");
  app.add_option("--max-iters", flags.max_iters, "Iteration cap")
      ->check(CLI::PositiveNumber);
  app.add_option("--grid", flags.grid, "Lattice is grid x grid on [-2,2]^2")
      ->check(CLI::PositiveNumber);
  app.add_option("--example", flags.example, "Named density pair");
  app.add_option("--rho0", flags.rho0, "Source density file");
  app.add_option("--rho1", flags.rho1, "Target density file");
  app.add_option("--out-flux", flags.out_flux, "Write flux (ix iy axis value)");
  app.add_option("--out-potential", flags.out_potential,
                 "Write potential grid");
  app.add_option("--out-residuals", flags.out_residuals,
                 "Write residual history");
  app.add_option("--table", flags.table, "Reproduction sweep t1..t5")
      ->check(CLI::IsMember({"t1", "t2", "t3", "t4", "t5"}));
  app.add_option("--out-table", flags.out_table, "Write the sweep to a file");
  app.add_flag("--oracle-check", flags.oracle_check,
               "Compare against the exact assignment oracle");
  app.add_option("--denominator", flags.denominator,
                 "Oracle-check mass resolution 1/K");
  app.add_option("--instances", flags.instances,
                 "Oracle-check instance count");
  app.add_option("--seed", flags.seed, "Seed for all randomness");
  app.add_option("--threads", flags.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  app.add_flag("--strict-steps", flags.strict_steps,
               "Reject steps violating tau*mu*|K|^2 < 1");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  flags.epsilon_given = eps_opt->count() > 0;

  const int modes = (flags.table ? 1 : 0) + (flags.oracle_check ? 1 : 0);
  if (modes > 1 || (modes == 1 && (flags.example || flags.rho0 || flags.rho1))) {
    err << "error: --table, --oracle-check and a solve are mutually "
           "exclusive\n";
    return kUsageError;
  }

  try {
    if (flags.table) return run_table_mode(flags, out);
    if (flags.oracle_check) return run_oracle_check(flags, out, err);
    return run_solve(flags, out, err);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace emd::cli
