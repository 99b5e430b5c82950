#ifndef GEODESIGN_HARNESS_HPP
#define GEODESIGN_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "geodesign/binomial.hpp"
#include "geodesign/covariance.hpp"
#include "geodesign/design.hpp"
#include "geodesign/errors.hpp"
#include "geodesign/estimation.hpp"
#include "geodesign/field.hpp"
#include "geodesign/geometry.hpp"
#include "geodesign/rng.hpp"

namespace geodesign {

enum class ModelKind { Gaussian, Binomial };

// Declarative description of one Monte Carlo sweep: a design axis (delta
// grid for SI, k grid for ICP) crossed with covariance settings (phi, tau2),
// evaluated over independent replicates.
struct ExperimentSpec {
  ModelKind model = ModelKind::Gaussian;
  DesignFamily family = DesignFamily::SI;
  int n = 150;
  std::vector<double> delta_grid;  // SI sweeps
  std::vector<int> k_grid;         // ICP sweeps
  double delta0 = 0.0;             // ICP baseline inhibition distance, pre-inflation
  double zeta = 0.0;               // <= 0 -> delta_k/2 default
  double sigma2 = 1.0;
  double kappa = 1.5;
  std::vector<double> phi_grid;
  std::vector<double> tau2_grid;
  int replicates = 0;  // 0 -> model default (100 Gaussian, 50 binomial)
  int grid_nx = 64;
  int grid_ny = 64;
  Region region = Region::unit_square();
  std::uint64_t base_seed = 1;
  bool estimate_params = true;   // ignored (forced false) for the binomial model
  bool fresh_design = true;      // false: one design per cell, shared by replicates
  bool compute_mspe = false;
  int trials = 10;               // binomial
  double offset = 0.0;           // binomial logit intercept
  long max_iter = 1000000;

  int effective_replicates() const {
    if (replicates > 0) return replicates;
    return model == ModelKind::Gaussian ? 100 : 50;
  }

  // Collects every violated field into a single error so config mistakes
  // surface in one pass.
  void validate() const {
    std::vector<std::string> bad;
    if (family != DesignFamily::SI && family != DesignFamily::ICP) {
      bad.push_back("family (sweeps support si and icp)");
    }
    if (n < 1) bad.push_back("n (must be >= 1)");
    if (family == DesignFamily::SI) {
      if (delta_grid.empty()) bad.push_back("delta_grid (empty)");
      for (double d : delta_grid) {
        if (!(d > 0.0)) bad.push_back("delta_grid (entries must be > 0)");
      }
    } else {
      if (k_grid.empty()) bad.push_back("k_grid (empty)");
      for (int k : k_grid) {
        if (k < 0 || 2 * k > n) bad.push_back("k_grid (entries must satisfy 0 <= k <= n/2)");
      }
      if (!(delta0 > 0.0)) bad.push_back("delta0 (must be > 0 for icp sweeps)");
    }
    if (!(sigma2 > 0.0)) bad.push_back("sigma2 (must be > 0)");
    if (!(kappa > 0.0)) bad.push_back("kappa (must be > 0)");
    if (phi_grid.empty()) bad.push_back("phi_grid (empty)");
    for (double phi : phi_grid) {
      if (!(phi > 0.0)) bad.push_back("phi_grid (entries must be > 0)");
    }
    if (tau2_grid.empty()) bad.push_back("tau2_grid (empty)");
    for (double t : tau2_grid) {
      if (t < 0.0) bad.push_back("tau2_grid (entries must be >= 0)");
    }
    if (replicates < 0) bad.push_back("replicates (must be >= 1, or 0 for the default)");
    if (grid_nx < 1 || grid_ny < 1) bad.push_back("grid resolution (must be >= 1)");
    if (model == ModelKind::Binomial && trials < 1) bad.push_back("trials (must be >= 1)");
    if (model == ModelKind::Binomial && estimate_params) {
      bad.push_back("estimate_params (binomial-model estimation is not supported; set false)");
    }
    if (max_iter < 1) bad.push_back("max_iter (must be >= 1)");
    if (!bad.empty()) {
      std::string msg = "invalid experiment spec; offending fields: ";
      for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? "; " : "") + bad[i];
      throw validation_error(msg);
    }
  }
};

// Aggregates for one (design-parameter x covariance-parameter) cell.
struct CellResult {
  // cell identity and the exact design parameters used
  double delta = std::numeric_limits<double>::quiet_NaN();  // SI sweeps
  int k = -1;                                               // ICP sweeps
  double delta_k = 0.0;
  double zeta = 0.0;
  double phi = 0.0;
  double tau2 = 0.0;

  double apv_mean = 0.0;
  double apv_se = 0.0;
  double mspe_mean = std::numeric_limits<double>::quiet_NaN();
  double mspe_se = std::numeric_limits<double>::quiet_NaN();
  int replicates = 0;
  int failures = 0;
  std::vector<double> apv_raw;   // per replicate; NaN marks a failed replicate
  std::vector<double> mspe_raw;  // present when MSPE was requested
  std::vector<std::string> warnings;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<CellResult> cells;
  std::vector<std::string> warnings;
};

namespace detail {

inline int worker_count() {
  if (const char* env = std::getenv("GEODESIGN_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

struct MeanSe {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  int count = 0;
};

// Mean and Monte Carlo standard error of the non-NaN entries.
inline MeanSe mean_se(const std::vector<double>& raw) {
  MeanSe out;
  double sum = 0.0;
  for (double v : raw) {
    if (std::isnan(v)) continue;
    sum += v;
    ++out.count;
  }
  if (out.count == 0) return out;
  out.mean = sum / out.count;
  if (out.count == 1) {
    out.se = 0.0;
    return out;
  }
  double ss = 0.0;
  for (double v : raw) {
    if (std::isnan(v)) continue;
    ss += (v - out.mean) * (v - out.mean);
  }
  out.se = std::sqrt(ss / (out.count - 1) / out.count);
  return out;
}

// One cell of a sweep: runs all replicates (concurrently when workers > 1)
// and aggregates. Per-replicate randomness comes from substreams of the
// cell stream, so results do not depend on execution order.
inline CellResult run_cell(const ExperimentSpec& spec, int cell_index, CellResult cell) {
  const int s = spec.effective_replicates();
  const PredictionGrid grid = make_prediction_grid(spec.region, spec.grid_nx, spec.grid_ny);
  const CovarianceParams truth{spec.sigma2, cell.phi, cell.tau2, spec.kappa};
  truth.validate();

  cell.replicates = s;
  cell.apv_raw.assign(static_cast<std::size_t>(s), std::numeric_limits<double>::quiet_NaN());
  if (spec.compute_mspe) {
    cell.mspe_raw.assign(static_cast<std::size_t>(s), std::numeric_limits<double>::quiet_NaN());
  }

  RandomStream cell_stream = RandomStream(spec.base_seed).substream(static_cast<std::uint64_t>(cell_index));

  auto make_design = [&](RandomStream& rng) {
    if (spec.family == DesignFamily::SI) {
      return generate_si(spec.n, cell.delta, spec.region, rng, spec.max_iter);
    }
    return generate_icp(spec.n, cell.k, spec.delta0, spec.zeta, spec.region, rng, spec.max_iter);
  };

  // Fixed-design mode: design and joint factorization are built once and
  // shared; replicate streams then only drive field/noise draws.
  Design shared_design;
  std::unique_ptr<JointSimulator> shared_sim;
  if (!spec.fresh_design) {
    RandomStream design_rng = cell_stream.substream(0);
    shared_design = make_design(design_rng);
    std::vector<Point> sim_points = shared_design.points;
    if (spec.compute_mspe) sim_points.insert(sim_points.end(), grid.points.begin(), grid.points.end());
    shared_sim = std::make_unique<JointSimulator>(sim_points, truth);
  }

  std::vector<std::string> failure_notes(static_cast<std::size_t>(s));
  auto run_replicate = [&](int rep) {
    RandomStream rng = cell_stream.substream(static_cast<std::uint64_t>(rep) + 1);
    try {
      const Design* design = &shared_design;
      Design fresh;
      if (spec.fresh_design) {
        fresh = make_design(rng);
        design = &fresh;
      }

      FieldRealization real;
      real.params = truth;
      real.seed = rng.seed();
      if (shared_sim) {
        const Eigen::VectorXd draw = shared_sim->draw(rng);
        real.design_values = draw.head(design->n());
        if (spec.compute_mspe) real.grid_values = draw.tail(grid.size());
      } else {
        real = simulate_joint(*design, grid, truth, rng, spec.compute_mspe);
      }

      PredictionSurface surface;
      if (spec.model == ModelKind::Gaussian) {
        const Eigen::VectorXd y = observe_gaussian(real, cell.tau2, rng);
        CovarianceParams plug_in = truth;
        if (spec.estimate_params) {
          // The fit starts from a data-driven guess, never from the generating
          // values: plug-in prediction should credit a design for how well it
          // identifies the covariance structure, and an oracle start would let
          // a flat likelihood masquerade as a good estimate.
          CovarianceParams init = truth;
          const double var_y = (y.array() - y.mean()).square().sum() /
                               static_cast<double>(std::max<Eigen::Index>(y.size() - 1, 1));
          init.sigma2 = 0.5 * var_y;
          init.tau2 = 0.5 * var_y;
          init.phi = 0.25 * std::hypot(spec.region.width(), spec.region.height());
          const FitResult fit = fit_gaussian_ml(design->points, y, spec.kappa, init, false);
          if (!fit.converged) {
            throw numerical_error("replicate fit did not converge");
          }
          plug_in = fit.params_hat;
        }
        surface = krige(design->points, y, grid, plug_in);
      } else {
        const BinomialData data = simulate_binomial(real, cell.tau2, spec.trials, spec.offset, rng);
        CovarianceParams latent = truth;  // U is absorbed via the nugget term
        surface = predict_latent_laplace(design->points, data, grid, latent, spec.offset);
      }

      cell.apv_raw[static_cast<std::size_t>(rep)] = apv(surface, grid).mean;
      if (spec.compute_mspe) {
        cell.mspe_raw[static_cast<std::size_t>(rep)] = mspe(surface, real, grid);
      }
    } catch (const std::exception& e) {
      failure_notes[static_cast<std::size_t>(rep)] = e.what();
    }
  };

  const int workers = std::min(worker_count(), s);
  if (workers <= 1) {
    for (int rep = 0; rep < s; ++rep) run_replicate(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < s; rep = next.fetch_add(1)) run_replicate(rep);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  for (int rep = 0; rep < s; ++rep) {
    if (!failure_notes[static_cast<std::size_t>(rep)].empty()) {
      ++cell.failures;
      if (cell.warnings.size() < 5) {
        cell.warnings.push_back("replicate " + std::to_string(rep) + " failed: " +
                                failure_notes[static_cast<std::size_t>(rep)]);
      }
    }
  }
  const MeanSe apv_stats = mean_se(cell.apv_raw);
  cell.apv_mean = apv_stats.mean;
  cell.apv_se = apv_stats.se;
  if (spec.compute_mspe) {
    const MeanSe mspe_stats = mean_se(cell.mspe_raw);
    cell.mspe_mean = mspe_stats.mean;
    cell.mspe_se = mspe_stats.se;
  }
  if (s > 0 && cell.failures > 0.02 * s) {
    cell.warnings.push_back("failure rate " + std::to_string(cell.failures) + "/" +
                            std::to_string(s) + " exceeds the 2% alarm threshold");
  }
  return cell;
}

inline ExperimentReport run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentReport report;
  report.spec = spec;

  int cell_index = 0;
  const std::size_t n_design =
      spec.family == DesignFamily::SI ? spec.delta_grid.size() : spec.k_grid.size();
  for (std::size_t di = 0; di < n_design; ++di) {
    for (double phi : spec.phi_grid) {
      for (double tau2 : spec.tau2_grid) {
        CellResult cell;
        cell.phi = phi;
        cell.tau2 = tau2;
        if (spec.family == DesignFamily::SI) {
          cell.delta = spec.delta_grid[di];
          cell.delta_k = cell.delta;
        } else {
          cell.k = spec.k_grid[di];
          cell.delta_k = cell.k < spec.n ? delta_for_k(spec.delta0, spec.n, cell.k) : 0.0;
          cell.zeta = cell.k > 0 ? (spec.zeta > 0.0 ? spec.zeta : cell.delta_k / 2.0) : 0.0;
        }
        report.cells.push_back(run_cell(spec, cell_index, cell));
        ++cell_index;
      }
    }
  }
  for (const CellResult& cell : report.cells) {
    for (const std::string& w : cell.warnings) {
      if (w.find("alarm threshold") != std::string::npos) {
        report.warnings.push_back("cell failure alarm: " + w);
      }
    }
  }
  return report;
}

}  // namespace detail

// APV as a function of the inhibition distance delta for SI designs.
inline ExperimentReport run_si_sweep(const ExperimentSpec& spec) {
  if (spec.family != DesignFamily::SI) {
    throw validation_error("run_si_sweep: spec.family must be si");
  }
  return detail::run_sweep(spec);
}

// APV as a function of the close-pair count k for ICP designs, delta_k per cell.
inline ExperimentReport run_icp_sweep(const ExperimentSpec& spec) {
  if (spec.family != DesignFamily::ICP) {
    throw validation_error("run_icp_sweep: spec.family must be icp");
  }
  return detail::run_sweep(spec);
}

inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  return spec.family == DesignFamily::SI ? run_si_sweep(spec) : run_icp_sweep(spec);
}

// Difference of mean APV between two cells sharing covariance settings, with
// pooled Monte Carlo standard error and one-sided z statistic.
struct DesignComparison {
  double diff = 0.0;       // a minus b
  double pooled_se = 0.0;
  double z = 0.0;          // diff / pooled_se
};

inline DesignComparison compare_cells(const CellResult& a, const CellResult& b) {
  if (a.phi != b.phi || a.tau2 != b.tau2) {
    throw validation_error("compare_cells: cells have different covariance settings");
  }
  DesignComparison out;
  out.diff = a.apv_mean - b.apv_mean;
  out.pooled_se = std::sqrt(a.apv_se * a.apv_se + b.apv_se * b.apv_se);
  if (out.pooled_se > 0.0) {
    out.z = out.diff / out.pooled_se;
  } else {
    out.z = out.diff == 0.0 ? 0.0
                            : std::copysign(std::numeric_limits<double>::infinity(), out.diff);
  }
  return out;
}

inline DesignComparison compare_designs(const ExperimentReport& a, const ExperimentReport& b,
                                        std::size_t cell_index) {
  if (cell_index >= a.cells.size() || cell_index >= b.cells.size()) {
    throw validation_error("compare_designs: cell index out of range");
  }
  return compare_cells(a.cells[cell_index], b.cells[cell_index]);
}

}  // namespace geodesign

#endif  // GEODESIGN_HARNESS_HPP
