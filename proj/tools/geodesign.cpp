// Command-line front end: design generation, model fitting, Monte Carlo
// experiments, and synthetic candidate sets.

#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geodesign/geodesign.hpp"

namespace {

using namespace geodesign;

geodesign::Region parse_region(const std::string& text) {
  if (text == "unit") return Region::unit_square();
  std::vector<double> vals;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    vals.push_back(detail::parse_double(item, "--region"));
  }
  if (vals.size() != 4) {
    throw validation_error("--region must be 'unit' or xmin,ymin,xmax,ymax");
  }
  return Region(vals[0], vals[1], vals[2], vals[3]);
}

// Every command is replayable: an explicit --seed is used as given, otherwise
// a random one is drawn and printed.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given) {
  if (given.has_value()) return *given;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cout << "seed: " << seed << " (chosen randomly; pass --seed " << seed << " to reproduce)\n";
  return seed;
}

void guard_planar(const std::vector<Point>& pts, bool force_planar, const std::string& what) {
  if (!force_planar && looks_like_lonlat(pts)) {
    throw validation_error(what + " look like unprojected lon/lat degrees; project to planar "
                           "coordinates first or pass --force-planar");
  }
}

struct DesignArgs {
  std::string family = "si";
  int n = 0;
  int k = 0;
  double delta = 0.0;
  double delta0 = 0.0;
  double zeta = 0.0;
  double spacing = 0.0;
  std::string region_text = "unit";
  std::string candidates_path;
  std::string params_path;
  std::string out_path = "design.csv";
  std::optional<std::uint64_t> seed;
  long max_iter = 1000000;
  bool force_planar = false;
};

int cmd_design(const DesignArgs& args) {
  const Region region = parse_region(args.region_text);
  RandomStream rng(resolve_seed(args.seed));

  std::optional<SuppliedParams> supplied;
  if (!args.params_path.empty()) {
    supplied = read_params_json(args.params_path);
    std::cout << "using supplied covariance model: sigma2=" << supplied->params.sigma2
              << " tau2=" << supplied->params.tau2 << " phi=" << supplied->params.phi
              << " intercept=" << supplied->intercept << "\n";
  }

  std::optional<CandidateSet> candidates;
  if (!args.candidates_path.empty()) {
    std::vector<std::string> warnings;
    candidates = read_candidates(args.candidates_path, &warnings);
    for (const std::string& w : warnings) std::cout << "warning: " << w << "\n";
    std::cout << "candidates: N=" << candidates->size() << "\n";
    guard_planar(candidates->points, args.force_planar, "candidate coordinates");
  } else {
    guard_planar({Point{region.xmin, region.ymin}, Point{region.xmax, region.ymax}},
                 args.force_planar, "region bounds");
  }

  Design design;
  if (args.family == "si") {
    if (!(args.delta > 0.0)) throw validation_error("design --family si requires --delta > 0");
    design = candidates ? generate_si_finite(args.n, args.delta, *candidates, rng, args.max_iter)
                        : generate_si(args.n, args.delta, region, rng, args.max_iter);
  } else if (args.family == "icp") {
    if (!(args.delta0 > 0.0)) throw validation_error("design --family icp requires --delta0 > 0");
    design = candidates
                 ? generate_icp_finite(args.n, args.k, args.delta0, args.zeta, *candidates, rng,
                                       args.max_iter)
                 : generate_icp(args.n, args.k, args.delta0, args.zeta, region, rng, args.max_iter);
  } else if (args.family == "crd") {
    if (candidates) throw validation_error("--candidates is only supported for si and icp");
    design = generate_crd(args.n, region, rng);
  } else if (args.family == "lattice") {
    if (candidates) throw validation_error("--candidates is only supported for si and icp");
    design = generate_lattice(args.n, region, rng);
  } else if (args.family == "lattice_cp") {
    if (candidates) throw validation_error("--candidates is only supported for si and icp");
    design = generate_lattice_cp(args.n, args.k, args.spacing, args.zeta, region, rng);
  } else {
    throw validation_error("unknown --family '" + args.family +
                           "' (expected si, icp, crd, lattice, lattice_cp)");
  }

  for (const std::string& w : design.warnings) std::cout << "warning: " << w << "\n";
  write_design(args.out_path, design, supplied ? &*supplied : nullptr);

  std::cout << "family: " << family_name(design.family) << "\n";
  std::cout << "points: " << design.n() << " (close pairs: " << design.params.k << ")\n";
  if (design.packing_rho > 0.0) std::cout << "packing density: " << design.packing_rho << "\n";
  if (design.params.k > 0) {
    std::cout << "delta_k: " << design.params.delta_k << "  zeta: " << design.params.zeta << "\n";
  }
  if (design.n() >= 2) {
    std::cout << "min distance (all points): " << min_pairwise_distance(design.points) << "\n";
    if (design.params.k > 0 && design.n_inhibitory() >= 2) {
      std::cout << "min distance (inhibitory): "
                << min_pairwise_distance(design.inhibitory_points()) << "\n";
    }
  }
  std::cout << "wrote " << args.out_path << " and " << design_sidecar_path(args.out_path) << "\n";
  return 0;
}

struct FitArgs {
  std::string data_path;
  double kappa = 1.5;
  double init_sigma2 = 0.0;  // 0 -> data-driven
  double init_phi = 0.0;
  double init_tau2 = -1.0;   // <0 -> data-driven
  bool no_mean = false;
  std::string out_path = "fit.json";
  bool force_planar = false;
};

int cmd_fit(const FitArgs& args) {
  const DataSet data = read_data_csv(args.data_path);
  guard_planar(data.points, args.force_planar, "data coordinates");
  if (data.points.size() < 5) {
    throw validation_error("fit needs at least 5 observations, got " +
                           std::to_string(data.points.size()));
  }

  const double var_y =
      (data.values.array() - data.values.mean()).square().sum() / (data.values.size() - 1);
  CovarianceParams init;
  init.kappa = args.kappa;
  init.sigma2 = args.init_sigma2 > 0.0 ? args.init_sigma2 : std::max(0.5 * var_y, 1e-8);
  init.tau2 = args.init_tau2 >= 0.0 ? args.init_tau2 : std::max(0.5 * var_y, 1e-8);
  if (args.init_phi > 0.0) {
    init.phi = args.init_phi;
  } else {
    const CandidateSet tmp{data.points, data.ids};
    const Region bbox = tmp.bounding_region();
    init.phi = 0.25 * std::hypot(bbox.width(), bbox.height());
  }

  const FitResult fit = fit_gaussian_ml(data.points, data.values, args.kappa, init, !args.no_mean);
  if (!fit.converged) {
    std::cout << "warning: optimizer did not meet the convergence tolerance; "
                 "reporting best point found\n";
  }
  write_fit_json(args.out_path, fit);
  std::cout << fit_result_json(fit);
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

struct ExperimentArgs {
  std::string spec_path;
  std::string out_prefix;
  std::optional<std::uint64_t> seed;
};

int cmd_experiment(const ExperimentArgs& args) {
  ExperimentSpec spec = read_experiment_spec(args.spec_path);
  if (args.seed.has_value()) spec.base_seed = *args.seed;

  std::string prefix = args.out_prefix;
  if (prefix.empty()) {
    prefix = std::filesystem::path(args.spec_path).stem().string();
  }
  std::cout << "spec_hash: " << spec_hash(spec) << "  base_seed: " << spec.base_seed << "\n";

  const ExperimentReport report = run_experiment(spec);
  const std::string cells_path = prefix + "_cells.csv";
  const std::string raw_path = prefix + "_raw.csv";
  write_report(cells_path, raw_path, report);

  int failures = 0;
  for (const CellResult& cell : report.cells) failures += cell.failures;
  std::cout << "cells: " << report.cells.size() << "  replicates/cell: "
            << spec.effective_replicates() << "  failed replicates: " << failures << "\n";
  for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
  std::cout << "wrote " << cells_path << " and " << raw_path << "\n";
  return 0;
}

struct SynthArgs {
  int n = 857;
  int clusters = 25;
  std::string region_text = "unit";
  std::string out_path = "candidates.csv";
  std::optional<std::uint64_t> seed;
};

int cmd_synth_candidates(const SynthArgs& args) {
  const Region region = parse_region(args.region_text);
  RandomStream rng(resolve_seed(args.seed));
  const CandidateSet set = make_synthetic_candidates(args.n, region, rng, args.clusters);
  write_candidates_csv(args.out_path, set);
  std::cout << "synthetic candidate set (not real locations): N=" << set.size() << "\n";
  std::cout << "wrote " << args.out_path << "\n";
  return 0;
}

void print_error_json(const char* type, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized inhibitory spatial sampling designs and their predictive efficiency"};
  app.require_subcommand(1);

  DesignArgs dargs;
  CLI::App* design = app.add_subcommand("design", "Generate a sampling design");
  design->add_option("--family", dargs.family, "si | icp | crd | lattice | lattice_cp")
      ->default_str("si");
  design->add_option("--n", dargs.n, "total number of points")->required();
  design->add_option("--k", dargs.k, "number of close pairs (icp, lattice_cp)");
  design->add_option("--delta", dargs.delta, "inhibition distance (si)");
  design->add_option("--delta0", dargs.delta0, "baseline inhibition distance (icp)");
  design->add_option("--zeta", dargs.zeta, "close-pair radius (default delta_k/2)");
  design->add_option("--spacing", dargs.spacing, "lattice spacing (lattice_cp; default from count)");
  design->add_option("--region", dargs.region_text, "'unit' or xmin,ymin,xmax,ymax");
  design->add_option("--candidates", dargs.candidates_path, "candidate file (CSV or GeoJSON)");
  design->add_option("--params-file", dargs.params_path, "covariance parameters JSON (from fit)");
  design->add_option("--out", dargs.out_path, "output CSV path")->default_str("design.csv");
  design->add_option("--seed", dargs.seed, "RNG seed (random if omitted, printed)");
  design->add_option("--max-iter", dargs.max_iter, "replacement attempt budget");
  design->add_flag("--force-planar", dargs.force_planar, "skip the lon/lat coordinate guard");

  FitArgs fargs;
  CLI::App* fit = app.add_subcommand("fit", "Fit the Gaussian model by maximum likelihood");
  fit->add_option("--data", fargs.data_path, "data CSV with x,y,value columns")->required();
  fit->add_option("--kappa", fargs.kappa, "fixed smoothness");
  fit->add_option("--init-sigma2", fargs.init_sigma2, "initial sigma2 (default data-driven)");
  fit->add_option("--init-phi", fargs.init_phi, "initial phi (default data-driven)");
  fit->add_option("--init-tau2", fargs.init_tau2, "initial tau2 (default data-driven)");
  fit->add_flag("--no-mean", fargs.no_mean, "fix the mean at zero instead of estimating it");
  fit->add_option("--out", fargs.out_path, "output JSON path")->default_str("fit.json");
  fit->add_flag("--force-planar", fargs.force_planar, "skip the lon/lat coordinate guard");

  ExperimentArgs eargs;
  CLI::App* experiment = app.add_subcommand("experiment", "Run a Monte Carlo design sweep");
  experiment->add_option("--spec", eargs.spec_path, "experiment spec file")->required();
  experiment->add_option("--out-prefix", eargs.out_prefix, "report path prefix (default: spec stem)");
  experiment->add_option("--seed", eargs.seed, "override base_seed from the spec");

  SynthArgs sargs;
  CLI::App* synth = app.add_subcommand("synth-candidates", "Generate a synthetic candidate set");
  synth->add_option("--n", sargs.n, "number of candidate points");
  synth->add_option("--clusters", sargs.clusters, "number of settlement clusters");
  synth->add_option("--region", sargs.region_text, "'unit' or xmin,ymin,xmax,ymax");
  synth->add_option("--out", sargs.out_path, "output CSV path")->default_str("candidates.csv");
  synth->add_option("--seed", sargs.seed, "RNG seed (random if omitted, printed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error_json("validation", e.what());
    return 2;
  }

  try {
    if (design->parsed()) return cmd_design(dargs);
    if (fit->parsed()) return cmd_fit(fargs);
    if (experiment->parsed()) return cmd_experiment(eargs);
    if (synth->parsed()) return cmd_synth_candidates(sargs);
  } catch (const geodesign::validation_error& e) {
    print_error_json("validation", e.what());
    return 2;
  } catch (const geodesign::feasibility_error& e) {
    print_error_json("feasibility", e.what());
    return 3;
  } catch (const geodesign::numerical_error& e) {
    print_error_json("numerical", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error_json("internal", e.what());
    return 1;
  }
  return 0;
}
