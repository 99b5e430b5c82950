// Release gate: ten numbered end-to-end checks, one per invocation. Each run
// prints a single PASS:/FAIL: line with the measured values and exits 0/1.
// Thresholds are fixed constants here, not knobs.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "geodesign/geodesign.hpp"

using namespace geodesign;
namespace fs = std::filesystem;

namespace {

int report(int which, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << ": criterion " << which << ": " << detail << "\n";
  return ok ? 0 : 1;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// --- 1: packing density arithmetic ------------------------------------------

int criterion_packing_density() {
  const double rho = packing_density(150, 0.06, Region::unit_square());
  const double target = 0.42412, tol = 1e-4;
  return report(1, std::abs(rho - target) <= tol,
                "packing_density(150, 0.06, unit square) = " + fmt(rho) + ", target " +
                    fmt(target) + " +/- " + fmt(tol));
}

// --- 2: inflated inhibition distance ----------------------------------------

int criterion_delta_for_k() {
  const double d = delta_for_k(0.06, 150, 75);
  const double target = 0.08485, tol = 5e-4;
  return report(2, std::abs(d - target) <= tol,
                "delta_for_k(0.06, 150, 75) = " + fmt(d) + ", target " + fmt(target) + " +/- " +
                    fmt(tol));
}

// --- 3: hard-core property over 500 designs ---------------------------------

int criterion_hard_core() {
  const int n = 100, designs = 500;
  const double delta = 0.05;
  int violations = 0;
  for (int s = 1; s <= designs; ++s) {
    RandomStream rng(static_cast<std::uint64_t>(s));
    const Design d = generate_si(n, delta, Region::unit_square(), rng);
    if (d.n() != n || min_pairwise_distance(d.points) < delta) ++violations;
  }
  return report(3, violations == 0,
                std::to_string(designs) + " SI(" + std::to_string(n) + ", " + fmt(delta) +
                    ") designs, min-distance violations = " + std::to_string(violations));
}

// --- 4: kriging vs. direct conditional-Gaussian formulae ---------------------

int criterion_kriging_oracle() {
  const double tol = 1e-10;
  double worst = 0.0;
  RandomStream root(20260814);
  const PredictionGrid grid = make_prediction_grid(Region::unit_square(), 3, 3);
  for (int s = 0; s < 20; ++s) {
    RandomStream rng = root.substream(static_cast<std::uint64_t>(s) + 1);
    CovarianceParams p;
    p.sigma2 = 0.5 + rng.uniform();
    p.phi = 0.05 + 0.3 * rng.uniform();
    p.tau2 = 0.3 * rng.uniform();
    p.kappa = (s % 2 == 0) ? 0.5 : 1.5;

    const Design d = generate_crd(5, Region::unit_square(), rng);
    const FieldRealization real = simulate_joint(d, grid, p, rng, false);
    const double trend = 1.25;
    const Eigen::VectorXd y = observe_gaussian(real, p.tau2, rng, trend);
    const PredictionSurface surface = krige(d, y, grid, p, trend);

    // Direct partitioned computation with an explicit inverse.
    const Eigen::MatrixXd K = data_covariance(d.points, p);
    const Eigen::MatrixXd C = cross_covariance(grid.points, d.points, p);  // m x n
    const Eigen::MatrixXd Kinv = K.inverse();
    const Eigen::VectorXd mean_direct =
        (C * (Kinv * (y.array() - trend).matrix())).array() + trend;
    const Eigen::VectorXd var_direct =
        p.sigma2 - (C * Kinv * C.transpose()).diagonal().array();

    worst = std::max(worst, (surface.mean - mean_direct).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (surface.variance - var_direct).lpNorm<Eigen::Infinity>());
  }
  return report(4, worst <= tol,
                "20 scenarios, worst |krige - direct| = " + fmt(worst) + ", tol " + fmt(tol));
}

// --- 5: APV improves with inhibition distance (Gaussian, plug-in) ------------

int criterion_gaussian_delta_trend() {
  ExperimentSpec spec;
  spec.model = ModelKind::Gaussian;
  spec.family = DesignFamily::SI;
  spec.n = 100;
  spec.delta_grid = {0.01, 0.05};
  spec.sigma2 = 1.0;
  spec.kappa = 1.5;
  spec.phi_grid = {0.15};
  spec.tau2_grid = {0.0};
  spec.replicates = 100;
  spec.estimate_params = true;
  spec.base_seed = 20260814;

  const ExperimentReport rep = run_si_sweep(spec);
  const CellResult& small = rep.cells[0];  // delta = 0.01
  const CellResult& large = rep.cells[1];  // delta = 0.05
  const DesignComparison cmp = compare_cells(small, large);
  const bool ok = cmp.z >= 2.0;
  return report(5, ok,
                "mean APV delta=0.01: " + fmt(small.apv_mean) + " (se " + fmt(small.apv_se) +
                    ", failures " + std::to_string(small.failures) + "), delta=0.05: " +
                    fmt(large.apv_mean) + " (se " + fmt(large.apv_se) + ", failures " +
                    std::to_string(large.failures) + "), one-sided z = " + fmt(cmp.z) +
                    ", need >= 2");
}

// --- 6: close pairs matter only with appreciable nugget ----------------------

int criterion_close_pair_effect() {
  ExperimentSpec spec;
  spec.model = ModelKind::Gaussian;
  spec.family = DesignFamily::ICP;
  spec.n = 100;
  spec.k_grid = {0, 20};
  spec.delta0 = 0.05;
  spec.sigma2 = 1.0;
  spec.kappa = 1.5;
  spec.phi_grid = {0.15};
  spec.tau2_grid = {0.0, 0.2};
  spec.replicates = 100;
  spec.estimate_params = true;
  spec.base_seed = 20260814;

  const ExperimentReport rep = run_icp_sweep(spec);
  // Cell order: k outer, tau2 inner.
  const CellResult& k0_t0 = rep.cells[0];
  const CellResult& k0_t2 = rep.cells[1];
  const CellResult& k20_t0 = rep.cells[2];
  const CellResult& k20_t2 = rep.cells[3];

  const DesignComparison no_nugget = compare_cells(k20_t0, k0_t0);
  const DesignComparison with_nugget = compare_cells(k0_t2, k20_t2);
  const bool negligible_ok = std::abs(no_nugget.z) <= 2.0;
  const bool benefit_ok = with_nugget.z >= 2.0;
  return report(6, negligible_ok && benefit_ok,
                "tau2=0: APV(k=20) - APV(k=0) = " + fmt(no_nugget.diff) + ", |z| = " +
                    fmt(std::abs(no_nugget.z)) + " (need <= 2); tau2=0.2: APV(k=0) - APV(k=20) = " +
                    fmt(with_nugget.diff) + ", z = " + fmt(with_nugget.z) + " (need >= 2)");
}

// --- 7: binomial model, APV improves with inhibition distance ----------------

int criterion_binomial_delta_trend() {
  ExperimentSpec spec;
  spec.model = ModelKind::Binomial;
  spec.family = DesignFamily::SI;
  spec.n = 100;
  spec.delta_grid = {0.01, 0.05};
  spec.sigma2 = 1.0;
  spec.kappa = 1.5;
  spec.phi_grid = {0.15};
  spec.tau2_grid = {0.4};
  spec.trials = 10;
  spec.offset = 0.0;
  spec.replicates = 50;
  spec.estimate_params = false;  // true parameters plugged in
  spec.base_seed = 20260814;

  const ExperimentReport rep = run_si_sweep(spec);
  const CellResult& small = rep.cells[0];
  const CellResult& large = rep.cells[1];
  const DesignComparison cmp = compare_cells(small, large);
  const bool ok = cmp.z >= 2.0;
  return report(7, ok,
                "binomial mean APV delta=0.01: " + fmt(small.apv_mean) + ", delta=0.05: " +
                    fmt(large.apv_mean) + ", one-sided z = " + fmt(cmp.z) + ", need >= 2");
}

// --- 8: ML fits never fall below the truth; range recovery -------------------

int criterion_ml_sanity() {
  CovarianceParams truth;
  truth.sigma2 = 1.0;
  truth.phi = 0.15;
  truth.tau2 = 0.2;
  truth.kappa = 1.5;

  const int reps = 200, n = 150;
  const PredictionGrid dummy_grid = make_prediction_grid(Region::unit_square(), 1, 1);
  RandomStream root(20260814);
  int loglik_violations = 0;
  std::vector<double> phi_hats;
  phi_hats.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    RandomStream rng = root.substream(static_cast<std::uint64_t>(r) + 1);
    const Design d = generate_crd(n, Region::unit_square(), rng);
    const FieldRealization real = simulate_joint(d, dummy_grid, truth, rng, false);
    const Eigen::VectorXd y = observe_gaussian(real, truth.tau2, rng, 0.0);

    const double ll_truth = gaussian_loglik(d, y, truth, 0.0);
    const FitResult fit = fit_gaussian_ml(d.points, y, truth.kappa, truth, false);
    if (!(fit.loglik >= ll_truth - 1e-9)) ++loglik_violations;
    phi_hats.push_back(fit.params_hat.phi);
  }
  std::sort(phi_hats.begin(), phi_hats.end());
  const double median_phi = 0.5 * (phi_hats[reps / 2 - 1] + phi_hats[reps / 2]);
  const bool ok = loglik_violations == 0 && median_phi >= 0.075 && median_phi <= 0.30;
  return report(8, ok,
                std::to_string(reps) + " fits at n=" + std::to_string(n) +
                    ", loglik(estimate) < loglik(truth) in " + std::to_string(loglik_violations) +
                    " cases (need 0); median phi_hat = " + fmt(median_phi) +
                    ", need within [0.075, 0.30]");
}

// --- 9: empirical MSPE agrees with model-based APV ---------------------------

int criterion_mspe_apv_consistency() {
  ExperimentSpec spec;
  spec.model = ModelKind::Gaussian;
  spec.family = DesignFamily::SI;
  spec.n = 50;
  spec.delta_grid = {0.05};
  spec.sigma2 = 1.0;
  spec.kappa = 1.5;
  spec.phi_grid = {0.15};
  spec.tau2_grid = {0.1};
  spec.replicates = 500;
  spec.estimate_params = false;
  spec.fresh_design = false;  // one fixed design shared by all replicates
  spec.compute_mspe = true;
  spec.grid_nx = 32;
  spec.grid_ny = 32;
  spec.base_seed = 20260814;

  const ExperimentReport rep = run_si_sweep(spec);
  const CellResult& cell = rep.cells[0];
  const double pooled = std::sqrt(cell.mspe_se * cell.mspe_se + cell.apv_se * cell.apv_se);
  const double diff = std::abs(cell.mspe_mean - cell.apv_mean);
  const bool ok = diff <= 3.0 * pooled;
  return report(9, ok,
                "fixed SI(50, 0.05), 500 replicates: mean MSPE = " + fmt(cell.mspe_mean) +
                    ", mean APV = " + fmt(cell.apv_mean) + " (apv se " + fmt(cell.apv_se) +
                    "), |diff| = " + fmt(diff) + ", limit 3*pooled-se = " + fmt(3.0 * pooled));
}

// --- 10: candidate-set workflow through the command line ---------------------

struct WorkDir {
  fs::path path;
  WorkDir() {
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("geodesign_accept_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~WorkDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_cli(const WorkDir& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.path.string() + "' && '" + GEODESIGN_CLI_PATH + "' " +
                          args + " > /dev/null 2> cli_err.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int criterion_candidate_workflow() {
  WorkDir dir;

  if (run_cli(dir, "synth-candidates --n 857 --seed 73 --out cand.csv") != 0) {
    return report(10, false, "synth-candidates failed: " + slurp(dir.path / "cli_err.txt"));
  }

  {
    std::ofstream params(dir.path / "table1.json");
    params << "{\"intercept\": -1.90986, \"sigma2\": 0.53016, \"tau2\": 0.26328, "
              "\"phi\": 0.31913, \"kappa\": 0.5}\n";
  }

  const std::string design_args =
      "design --family icp --n 200 --k 20 --delta0 0.03 --candidates cand.csv "
      "--params-file table1.json --seed 7";
  if (run_cli(dir, design_args + " --out run1.csv") != 0) {
    return report(10, false, "design run failed: " + slurp(dir.path / "cli_err.txt"));
  }

  const Design d = read_design((dir.path / "run1.csv").string());
  std::string problems;
  if (d.n() != 200) problems += " n=" + std::to_string(d.n());
  if (d.params.k != 20) problems += " k=" + std::to_string(d.params.k);
  if (static_cast<int>(d.parents.size()) != 20) {
    problems += " parents=" + std::to_string(d.parents.size());
  }
  if (d.candidate_ids.size() != 200) {
    problems += " candidate_ids=" + std::to_string(d.candidate_ids.size());
  }

  const double expected_delta_k = delta_for_k(0.03, 200, 20);
  if (std::abs(d.params.delta_k - expected_delta_k) > 1e-12) {
    problems += " delta_k=" + fmt(d.params.delta_k);
  }
  const double min_inhib = min_pairwise_distance(d.inhibitory_points());
  if (min_inhib < d.params.delta_k) problems += " min_inhibitory=" + fmt(min_inhib);

  std::vector<bool> used(d.points.size(), false);
  for (int j = 0; j < d.params.k; ++j) {
    const int parent = d.parents[static_cast<std::size_t>(j)];
    const int pair_index = d.n_inhibitory() + j;
    if (parent < 0 || parent >= d.n_inhibitory() || used[static_cast<std::size_t>(parent)]) {
      problems += " bad_parent=" + std::to_string(parent);
      continue;
    }
    used[static_cast<std::size_t>(parent)] = true;
    const double sep = distance(d.points[static_cast<std::size_t>(pair_index)],
                                d.points[static_cast<std::size_t>(parent)]);
    if (!(sep < d.params.zeta)) problems += " pair_sep=" + fmt(sep);
  }

  const nlohmann::json sidecar = nlohmann::json::parse(slurp(dir.path / "run1.json"));
  if (!sidecar.contains("supplied_params") ||
      sidecar["supplied_params"]["sigma2"].get<double>() != 0.53016 ||
      sidecar["supplied_params"]["phi"].get<double>() != 0.31913) {
    problems += " supplied_params_missing";
  }

  if (run_cli(dir, design_args + " --out run2.csv") != 0) {
    return report(10, false, "repeat design run failed: " + slurp(dir.path / "cli_err.txt"));
  }
  if (slurp(dir.path / "run1.csv") != slurp(dir.path / "run2.csv")) {
    problems += " csv_not_deterministic";
  }
  if (slurp(dir.path / "run1.json") != slurp(dir.path / "run2.json")) {
    problems += " json_not_deterministic";
  }

  const bool ok = problems.empty();
  return report(10, ok,
                ok ? "857-candidate ICP(200, 20) workflow: all structural checks and "
                     "byte-level determinism hold (min inhibitory distance " +
                         fmt(min_inhib) + " >= delta_k " + fmt(d.params.delta_k) + ")"
                   : "violations:" + problems);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1-10>\n";
    return 2;
  }
  const int which = std::atoi(argv[1]);
  try {
    switch (which) {
      case 1: return criterion_packing_density();
      case 2: return criterion_delta_for_k();
      case 3: return criterion_hard_core();
      case 4: return criterion_kriging_oracle();
      case 5: return criterion_gaussian_delta_trend();
      case 6: return criterion_close_pair_effect();
      case 7: return criterion_binomial_delta_trend();
      case 8: return criterion_ml_sanity();
      case 9: return criterion_mspe_apv_consistency();
      case 10: return criterion_candidate_workflow();
      default:
        std::cerr << "usage: acceptance <criterion 1-10>\n";
        return 2;
    }
  } catch (const std::exception& e) {
    return report(which, false, std::string("unexpected exception: ") + e.what());
  }
}
