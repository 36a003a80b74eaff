#include "emd/pd_solver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include "emd/error.hpp"

namespace emd {

namespace {

void require_same_grid(const LatticeGrid& a, const LatticeGrid& b,
                       const char* what) {
  if (!(a == b)) {
    throw IncompatibleFields(std::string(what) +
                             ": fields live on different lattices");
  }
}

// Runs body(begin, end) over [0, n) split into contiguous chunks. Each
// output element is written by exactly one chunk, so results do not depend
// on the number of threads.
template <typename Body>
void parallel_for(unsigned threads, std::size_t n, Body&& body) {
  constexpr std::size_t kMinChunk = 4096;
  const std::size_t chunks =
      std::min<std::size_t>(threads, std::max<std::size_t>(1, n / kMinChunk));
  if (chunks <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(chunks - 1);
  const std::size_t step = (n + chunks - 1) / chunks;
  for (std::size_t c = 1; c < chunks; ++c) {
    const std::size_t begin = std::min(n, c * step);
    const std::size_t end = std::min(n, begin + step);
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(std::size_t{0}, std::min(n, step));
}

std::string format_number(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << x;
  return os.str();
}

// Per-face proximal step on vertices [begin, end). `grad` is scratch space
// in flux layout.
void primal_step(const LatticeGrid& grid, Metric metric, double mu,
                 double epsilon, std::span<const double> m_prev,
                 std::span<const double> phi, std::span<double> grad,
                 std::span<double> m_next, std::size_t begin,
                 std::size_t end) {
  const std::size_t d = grid.dims();
  detail::gradient_into(grid, phi, grad, begin, end);
  if (metric == Metric::L1) {
    const double scale = 1.0 / (1.0 + epsilon * mu);
    for (std::size_t k = begin * d; k < end * d; ++k) {
      m_next[k] = scale * shrink(m_prev[k] + mu * grad[k], mu);
    }
  } else {
    for (std::size_t k = begin * d; k < end * d; ++k) {
      m_next[k] = m_prev[k] + mu * grad[k];
    }
    for (std::size_t i = begin; i < end; ++i) {
      shrink2_in_place(m_next.subspan(i * d, d), mu);
    }
  }
}

double mean_abs_residual(std::span<const double> div,
                         std::span<const double> p0,
                         std::span<const double> p1) {
  double sum = 0.0;
  for (std::size_t i = 0; i < div.size(); ++i) {
    sum += std::abs(div[i] + p1[i] - p0[i]);
  }
  return sum / static_cast<double>(div.size());
}

}  // namespace

std::string_view to_string(Metric metric) {
  return metric == Metric::L1 ? "l1" : "l2";
}

Metric parse_metric(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "l1") return Metric::L1;
  if (lower == "l2") return Metric::L2;
  throw ConfigurationError("unknown metric '" + std::string(text) +
                           "' (expected l1 or l2)");
}

void SolverConfig::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(mu)) throw ConfigurationError("mu must be positive");
  if (!positive(tau)) throw ConfigurationError("tau must be positive");
  if (!positive(tol)) throw ConfigurationError("tol must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ConfigurationError("theta must lie in [0, 1]");
  }
  if (!(std::isfinite(epsilon) && epsilon >= 0.0)) {
    throw ConfigurationError("epsilon must be nonnegative");
  }
  if (max_iters == 0) throw ConfigurationError("max_iters must be positive");
  if (residual_check_interval == 0) {
    throw ConfigurationError("residual_check_interval must be positive");
  }
  if (threads == 0) throw ConfigurationError("threads must be positive");
  if (metric == Metric::L1 && epsilon == 0.0 && !allow_nonunique) {
    throw ConfigurationError(
        "epsilon = 0 under the l1 metric has non-unique minimizers; "
        "opt in explicitly to allow it");
  }
}

double scaled_step(const LatticeGrid& grid) {
  const double d = static_cast<double>(grid.dims());
  return 0.25 * grid.spacing() * std::min(1.0, std::sqrt(2.0 / d));
}

double shrink(double y, double alpha) {
  if (y > alpha) return y - alpha;
  if (y < -alpha) return y + alpha;
  return 0.0;
}

void shrink2_in_place(std::span<double> y, double alpha) {
  double norm2 = 0.0;
  for (double c : y) norm2 += c * c;
  const double norm = std::sqrt(norm2);
  if (norm <= alpha) {
    std::fill(y.begin(), y.end(), 0.0);
    return;
  }
  const double factor = (norm - alpha) / norm;
  for (double& c : y) c *= factor;
}

std::vector<double> shrink2(std::span<const double> y, double alpha) {
  std::vector<double> out(y.begin(), y.end());
  shrink2_in_place(out, alpha);
  return out;
}

FluxField primal_update_l2(const FluxField& m_prev, const DualPotential& phi,
                           double mu) {
  require_same_grid(m_prev.grid(), phi.grid(), "primal_update_l2");
  const auto& grid = m_prev.grid();
  std::vector<double> grad(grid.size() * grid.dims());
  std::vector<double> next(grad.size());
  primal_step(grid, Metric::L2, mu, 0.0, m_prev.values(), phi.values(), grad,
              next, 0, grid.size());
  return FluxField(grid, std::move(next));
}

FluxField primal_update_l1(const FluxField& m_prev, const DualPotential& phi,
                           double mu, double epsilon) {
  require_same_grid(m_prev.grid(), phi.grid(), "primal_update_l1");
  const auto& grid = m_prev.grid();
  std::vector<double> grad(grid.size() * grid.dims());
  std::vector<double> next(grad.size());
  primal_step(grid, Metric::L1, mu, epsilon, m_prev.values(), phi.values(),
              grad, next, 0, grid.size());
  return FluxField(grid, std::move(next));
}

DualPotential dual_update(const DualPotential& phi_prev,
                          const FluxField& m_next, const FluxField& m_prev,
                          const DensityField& p0, const DensityField& p1,
                          double tau, double theta) {
  const auto& grid = phi_prev.grid();
  require_same_grid(grid, m_next.grid(), "dual_update");
  require_same_grid(grid, m_prev.grid(), "dual_update");
  require_same_grid(grid, p0.grid(), "dual_update");
  require_same_grid(grid, p1.grid(), "dual_update");

  const auto next = m_next.values();
  const auto prev = m_prev.values();
  std::vector<double> extrapolated(next.size());
  for (std::size_t k = 0; k < next.size(); ++k) {
    extrapolated[k] = next[k] + theta * (next[k] - prev[k]);
  }
  std::vector<double> div(grid.size());
  detail::divergence_into(grid, extrapolated, div);

  std::vector<double> phi(phi_prev.values().begin(), phi_prev.values().end());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    phi[i] += tau * (div[i] + p1[i] - p0[i]);
  }
  return DualPotential(grid, std::move(phi));
}

double cost(const FluxField& m, Metric metric) {
  const auto values = m.values();
  double total = 0.0;
  if (metric == Metric::L1) {
    for (double x : values) total += std::abs(x);
    return total;
  }
  const std::size_t d = m.grid().dims();
  for (std::size_t i = 0; i < m.grid().size(); ++i) {
    double norm2 = 0.0;
    for (std::size_t v = 0; v < d; ++v) {
      norm2 += values[i * d + v] * values[i * d + v];
    }
    total += std::sqrt(norm2);
  }
  return total;
}

double operator_norm_bound(const LatticeGrid& grid) {
  const double dx = grid.spacing();
  return 4.0 * static_cast<double>(grid.dims()) / (dx * dx);
}

SolveReport solve(const DensityField& p0, const DensityField& p1,
                  const SolverConfig& config, std::optional<FluxField> m0,
                  std::optional<DualPotential> phi0) {
  config.validate();
  const LatticeGrid& grid = p0.grid();
  require_same_grid(grid, p1.grid(), "solve");
  if (m0) require_same_grid(grid, m0->grid(), "solve (initial flux)");
  if (phi0) require_same_grid(grid, phi0->grid(), "solve (initial potential)");
  for (const DensityField* p : {&p0, &p1}) {
    if (std::abs(p->total() - 1.0) > 1e-9) {
      throw InvalidMeasure("density sums to " + format_number(p->total()) +
                           ", expected 1");
    }
  }

  std::vector<std::string> warnings;
  const double step_product =
      config.tau * config.mu * operator_norm_bound(grid);
  if (step_product >= 1.0) {
    const std::string msg = "step sizes violate tau*mu*|K|^2 < 1 (value " +
                            format_number(step_product) + ")";
    if (config.strict_steps) throw ConfigurationError(msg);
    warnings.push_back(msg);
  }
  if (config.metric == Metric::L1 && config.epsilon == 0.0) {
    warnings.push_back("epsilon = 0: the l1 minimizer is not unique");
  }

  const std::size_t n = grid.size();
  const std::size_t d = grid.dims();
  const double mu = config.mu;
  const double tau = config.tau;
  const double theta = config.theta;
  const double eps = config.metric == Metric::L1 ? config.epsilon : 0.0;

  std::vector<double> m(n * d, 0.0);
  std::vector<double> phi(n, 0.0);
  if (m0) m.assign(m0->values().begin(), m0->values().end());
  if (phi0) phi.assign(phi0->values().begin(), phi0->values().end());
  std::vector<double> m_next(n * d);
  std::vector<double> grad(n * d);
  std::vector<double> extrapolated(n * d);
  std::vector<double> div(n);
  const auto mass0 = p0.mass();
  const auto mass1 = p1.mass();

  SolveReport report{FluxField(grid), DualPotential(grid)};
  report.warnings = std::move(warnings);

  const auto start = std::chrono::steady_clock::now();
  std::size_t k = 0;
  while (k < config.max_iters) {
    ++k;
    parallel_for(config.threads, n, [&](std::size_t begin, std::size_t end) {
      primal_step(grid, config.metric, mu, eps, m, phi, grad, m_next, begin,
                  end);
      for (std::size_t f = begin * d; f < end * d; ++f) {
        extrapolated[f] = m_next[f] + theta * (m_next[f] - m[f]);
      }
    });
    parallel_for(config.threads, n, [&](std::size_t begin, std::size_t end) {
      detail::divergence_into(grid, extrapolated, div, begin, end);
      for (std::size_t i = begin; i < end; ++i) {
        phi[i] += tau * (div[i] + mass1[i] - mass0[i]);
      }
    });
    m.swap(m_next);

    if (k % config.residual_check_interval != 0 && k != config.max_iters) {
      continue;
    }
    parallel_for(config.threads, n, [&](std::size_t begin, std::size_t end) {
      detail::divergence_into(grid, m, div, begin, end);
    });
    const double residual = mean_abs_residual(div, mass0, mass1);
    const bool finite_phi = std::all_of(
        phi.begin(), phi.end(), [](double x) { return std::isfinite(x); });
    if (!std::isfinite(residual) || !finite_phi) {
      throw DivergenceError(k, "non-finite iterate at iteration " +
                                   std::to_string(k));
    }
    report.residual_history.push_back({k, residual});
    if (residual <= config.tol) {
      report.converged = true;
      break;
    }
  }
  report.loop_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  report.iterations = k;
  report.flux = FluxField(grid, std::move(m));
  report.potential = DualPotential(grid, std::move(phi));
  report.distance = cost(report.flux, config.metric);
  report.regularized_distance = report.distance;
  if (config.metric == Metric::L1 && eps > 0.0) {
    double norm2 = 0.0;
    for (double x : report.flux.values()) norm2 += x * x;
    report.regularized_distance += 0.5 * eps * norm2;
  }
  return report;
}

}  // namespace emd
