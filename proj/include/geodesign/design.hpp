#ifndef GEODESIGN_DESIGN_HPP
#define GEODESIGN_DESIGN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "geodesign/errors.hpp"
#include "geodesign/geometry.hpp"
#include "geodesign/rng.hpp"

namespace geodesign {

enum class DesignFamily { SI, ICP, CRD, Lattice, LatticeCP };

inline const char* family_name(DesignFamily f) {
  switch (f) {
    case DesignFamily::SI: return "si";
    case DesignFamily::ICP: return "icp";
    case DesignFamily::CRD: return "crd";
    case DesignFamily::Lattice: return "lattice";
    case DesignFamily::LatticeCP: return "lattice_cp";
  }
  return "?";
}

// Family-specific parameters, filled as applicable.
struct DesignParams {
  int n = 0;
  int k = 0;            // close pairs
  double delta = 0.0;   // SI inhibition distance, or delta0 for ICP
  double delta_k = 0.0; // effective inhibition distance of the inhibitory component
  double zeta = 0.0;    // close-pair disc radius
  double spacing = 0.0; // lattice families
  long max_iter = 0;
};

// An ordered set of sample locations plus provenance. For close-pair
// families the first n-k points are the inhibitory component and the last k
// are the paired points; parents[j] is the index (into points) of the j-th
// paired point's parent.
struct Design {
  std::vector<Point> points;
  DesignFamily family = DesignFamily::CRD;
  DesignParams params;
  std::uint64_t seed = 0;
  std::vector<int> parents;
  std::vector<std::string> candidate_ids;  // finite-set variants only
  double packing_rho = 0.0;                // attempted packing density (diagnostic)
  std::vector<std::string> warnings;

  int n() const { return static_cast<int>(points.size()); }
  int n_inhibitory() const { return n() - params.k; }

  bool is_close_pair(int index) const { return index >= n_inhibitory(); }

  std::vector<Point> inhibitory_points() const {
    return std::vector<Point>(points.begin(), points.begin() + n_inhibitory());
  }
};

// Inhibition distance that keeps the inhibitory component of an
// ICP(n, k, ...) design at the same packing density as SI(n, delta0):
// delta_k = delta0 * sqrt(n / (n - k)).
inline double delta_for_k(double delta0, int n, int k) {
  if (!(delta0 > 0.0)) throw validation_error("delta_for_k: delta0 must be > 0");
  if (k < 0) throw validation_error("delta_for_k: k must be >= 0");
  if (k >= n) throw validation_error("delta_for_k: requires k < n");
  return delta0 * std::sqrt(static_cast<double>(n) / static_cast<double>(n - k));
}

namespace detail {

// The iterative-replacement sampler degrades sharply past rho ~0.5; refuse
// outright above 0.55 and record a warning above 0.45.
constexpr double kRefusePackingRho = 0.55;
constexpr double kWarnPackingRho = 0.45;

inline double min_distance_to_others(const std::vector<Point>& pts, std::size_t i) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j != i) dmin = std::min(dmin, distance(pts[i], pts[j]));
  }
  return dmin;
}

inline std::string format_rho(double rho) {
  std::ostringstream os;
  os.precision(4);
  os << rho;
  return os.str();
}

inline void check_si_feasibility(int n, double delta, const Region& region, Design& design) {
  if (n < 2) return;  // a single point has no pairwise constraint
  const double rho = packing_density(n, delta, region);
  design.packing_rho = rho;
  if (rho > kRefusePackingRho) {
    throw feasibility_error("simple inhibitory design infeasible: packing density " +
                            format_rho(rho) + " exceeds " + format_rho(kRefusePackingRho) +
                            " (n=" + std::to_string(n) + ", delta=" + std::to_string(delta) + ")");
  }
  if (rho > kWarnPackingRho) {
    design.warnings.push_back("packing density " + format_rho(rho) +
                              " is above " + format_rho(kWarnPackingRho) +
                              "; construction may be slow");
  }
}

// Core of the SI construction: each point is redrawn until its nearest
// neighbour among the current sample is at least delta away, points being
// visited cyclically. `redraw` supplies the replacement location and
// `attempts` counts single-point replacements against max_iter.
template <typename Redraw>
void run_inhibitory_replacement(std::vector<Point>& pts, double delta, long max_iter,
                                double rho, Redraw&& redraw) {
  long attempts = 0;
  for (std::size_t i = 0; i < pts.size();) {
    if (min_distance_to_others(pts, i) >= delta) {
      ++i;
      continue;
    }
    if (attempts >= max_iter) {
      throw feasibility_error("inhibitory construction exhausted " + std::to_string(max_iter) +
                              " replacement attempts (attempted packing density " +
                              format_rho(rho) + ")");
    }
    redraw(i);
    ++attempts;
  }
}

// Sample k distinct indices from [0, n) without replacement.
inline std::vector<int> sample_without_replacement(int n, int k, RandomStream& rng) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const std::uint64_t pick = rng.uniform_index(static_cast<std::uint64_t>(n - j));
    out.push_back(pool[pick]);
    std::swap(pool[pick], pool[static_cast<std::size_t>(n - 1 - j)]);
  }
  return out;
}

// Coincident coordinates are collapsed to the first occurrence.
inline CandidateSet dedup_candidates(const CandidateSet& in, std::vector<std::string>* warnings) {
  CandidateSet out;
  out.points.reserve(in.points.size());
  out.ids.reserve(in.ids.size());
  std::unordered_map<std::string, bool> seen;
  int dropped = 0;
  for (std::size_t i = 0; i < in.points.size(); ++i) {
    std::ostringstream key;
    key.precision(17);
    key << in.points[i].x << "," << in.points[i].y;
    if (seen.emplace(key.str(), true).second) {
      out.points.push_back(in.points[i]);
      out.ids.push_back(i < in.ids.size() ? in.ids[i] : std::to_string(i));
    } else {
      ++dropped;
    }
  }
  if (dropped > 0 && warnings != nullptr) {
    warnings->push_back(std::to_string(dropped) + " coincident candidate point(s) deduplicated");
  }
  return out;
}

}  // namespace detail

// SI(n, delta): n locations uniform on the region subject to all pairwise
// distances being >= delta. Construction is the cyclic single-point
// replacement scheme, which leaves every constraint-satisfying configuration
// reachable.
inline Design generate_si(int n, double delta, const Region& region, RandomStream& rng,
                          long max_iter = 1000000) {
  if (n < 1) throw validation_error("generate_si: n must be >= 1");
  if (!(delta > 0.0)) throw validation_error("generate_si: delta must be > 0");
  if (max_iter < 1) throw validation_error("generate_si: max_iter must be >= 1");

  Design design;
  design.family = DesignFamily::SI;
  design.params = DesignParams{n, 0, delta, delta, 0.0, 0.0, max_iter};
  design.seed = rng.seed();
  detail::check_si_feasibility(n, delta, region, design);

  design.points.resize(static_cast<std::size_t>(n));
  for (Point& p : design.points) p = uniform_in_region(region, rng);
  if (n >= 2) {
    detail::run_inhibitory_replacement(design.points, delta, max_iter, design.packing_rho,
                                       [&](std::size_t i) { design.points[i] = uniform_in_region(region, rng); });
  }
  return design;
}

namespace detail {

// Finite-set SI on an already-deduplicated candidate set. Returns the chosen
// candidate indices so close-pair construction can track candidate usage
// without relying on id uniqueness.
inline std::vector<int> si_finite_core(int n, double delta, const CandidateSet& cands,
                                       RandomStream& rng, long max_iter, Design& design) {
  const int total = static_cast<int>(cands.size());
  if (n > total) {
    throw validation_error("finite-set design: n=" + std::to_string(n) +
                           " exceeds candidate count N=" + std::to_string(total));
  }
  check_si_feasibility(n, delta, cands.bounding_region(), design);

  // chosen[i] = candidate index held by design slot i; pool = unused candidates
  std::vector<int> chosen = sample_without_replacement(total, n, rng);
  std::vector<int> pool;
  {
    std::vector<bool> used(static_cast<std::size_t>(total), false);
    for (int c : chosen) used[static_cast<std::size_t>(c)] = true;
    for (int c = 0; c < total; ++c) {
      if (!used[static_cast<std::size_t>(c)]) pool.push_back(c);
    }
  }

  design.points.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    design.points[static_cast<std::size_t>(i)] = cands.points[static_cast<std::size_t>(chosen[static_cast<std::size_t>(i)])];
  }
  if (n >= 2) {
    if (pool.empty()) {
      // No spare candidates: the initial subset must already satisfy the
      // constraint (n == N); the replacement loop would spin forever.
      if (min_pairwise_distance(design.points) < delta) {
        throw feasibility_error("finite-set design: candidate set admits no replacement (n == N) "
                                "and the full set violates delta");
      }
    } else {
      run_inhibitory_replacement(
          design.points, delta, max_iter, design.packing_rho, [&](std::size_t i) {
            const std::uint64_t pick = rng.uniform_index(pool.size());
            std::swap(chosen[i], pool[pick]);
            design.points[i] = cands.points[static_cast<std::size_t>(chosen[i])];
          });
    }
  }
  design.candidate_ids.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    design.candidate_ids[static_cast<std::size_t>(i)] = cands.ids[static_cast<std::size_t>(chosen[static_cast<std::size_t>(i)])];
  }
  return chosen;
}

}  // namespace detail

// SI(n, delta) restricted to a finite candidate set: the uniform draws of
// the region construction become uniform draws from the currently unused
// candidates.
inline Design generate_si_finite(int n, double delta, const CandidateSet& candidates,
                                 RandomStream& rng, long max_iter = 1000000) {
  if (n < 1) throw validation_error("generate_si_finite: n must be >= 1");
  if (!(delta > 0.0)) throw validation_error("generate_si_finite: delta must be > 0");

  Design design;
  design.family = DesignFamily::SI;
  design.seed = rng.seed();
  design.params = DesignParams{n, 0, delta, delta, 0.0, 0.0, max_iter};
  const CandidateSet cands = detail::dedup_candidates(candidates, &design.warnings);
  detail::si_finite_core(n, delta, cands, rng, max_iter, design);
  return design;
}

namespace detail {

inline void validate_icp_args(int n, int k, double delta0, double& zeta, double& delta_k) {
  if (n < 1) throw validation_error("generate_icp: n must be >= 1");
  if (k < 0) throw validation_error("generate_icp: k must be >= 0");
  if (2 * k > n) {
    throw validation_error("generate_icp: k=" + std::to_string(k) + " exceeds n/2 with n=" +
                           std::to_string(n));
  }
  delta_k = delta_for_k(delta0, n, k);
  if (zeta <= 0.0) {
    zeta = delta_k / 2.0;  // default: the largest admissible close-pair radius
  } else if (zeta > delta_k / 2.0 * (1.0 + 1e-12)) {
    throw validation_error("generate_icp: zeta=" + std::to_string(zeta) +
                           " violates zeta <= delta_k/2 with delta_k=" + std::to_string(delta_k));
  }
}

}  // namespace detail

// ICP(n, k, delta0, zeta): an SI(n-k, delta_k) design augmented with k close
// pairs, each uniform on the disc of radius zeta round a distinct parent
// drawn from the inhibitory points without replacement. delta_k follows
// delta_for_k so the inhibitory component keeps the packing density of
// SI(n, delta0). Pass zeta <= 0 for the default delta_k/2.
inline Design generate_icp(int n, int k, double delta0, double zeta, const Region& region,
                           RandomStream& rng, long max_iter = 1000000) {
  double delta_k = 0.0;
  detail::validate_icp_args(n, k, delta0, zeta, delta_k);

  Design design = generate_si(n - k, delta_k, region, rng, max_iter);
  design.family = DesignFamily::ICP;
  design.params = DesignParams{n, k, delta0, delta_k, (k > 0 ? zeta : 0.0), 0.0, max_iter};

  const std::vector<int> parent_idx = detail::sample_without_replacement(n - k, k, rng);
  for (int j = 0; j < k; ++j) {
    const Point parent = design.points[static_cast<std::size_t>(parent_idx[static_cast<std::size_t>(j)])];
    design.points.push_back(uniform_in_disc_clipped(parent, zeta, region, rng));
    design.parents.push_back(parent_idx[static_cast<std::size_t>(j)]);
  }
  return design;
}

// Finite-set ICP: the inhibitory component comes from generate_si_finite and
// each close pair is drawn uniformly among the still-unused candidates
// strictly within zeta of its parent. A parent with no such neighbour is
// resampled (without replacement); the construction fails only when every
// inhibitory point has been tried.
inline Design generate_icp_finite(int n, int k, double delta0, double zeta,
                                  const CandidateSet& candidates, RandomStream& rng,
                                  long max_iter = 1000000) {
  double delta_k = 0.0;
  detail::validate_icp_args(n, k, delta0, zeta, delta_k);

  Design design;
  design.family = DesignFamily::ICP;
  design.seed = rng.seed();
  design.params = DesignParams{n, k, delta0, delta_k, (k > 0 ? zeta : 0.0), 0.0, max_iter};
  const CandidateSet cands = detail::dedup_candidates(candidates, &design.warnings);
  const int total = static_cast<int>(cands.size());
  if (n > total) {
    throw validation_error("generate_icp_finite: n=" + std::to_string(n) +
                           " exceeds candidate count N=" + std::to_string(total));
  }
  const std::vector<int> chosen = detail::si_finite_core(n - k, delta_k, cands, rng, max_iter, design);

  std::vector<bool> used(static_cast<std::size_t>(total), false);
  for (int c : chosen) used[static_cast<std::size_t>(c)] = true;

  // Parent order is a random permutation of the inhibitory points; walk it
  // until k of them have yielded a close pair.
  const std::vector<int> parent_order = detail::sample_without_replacement(n - k, n - k, rng);
  std::size_t next_parent = 0;
  std::vector<int> neighbours;
  for (int j = 0; j < k; ++j) {
    bool placed = false;
    while (next_parent < parent_order.size()) {
      const int pidx = parent_order[next_parent++];
      const Point parent = design.points[static_cast<std::size_t>(pidx)];
      neighbours.clear();
      for (int c = 0; c < total; ++c) {
        if (!used[static_cast<std::size_t>(c)] &&
            distance(parent, cands.points[static_cast<std::size_t>(c)]) < zeta) {
          neighbours.push_back(c);
        }
      }
      if (neighbours.empty()) continue;  // this parent never receives a pair
      const int c = neighbours[rng.uniform_index(neighbours.size())];
      used[static_cast<std::size_t>(c)] = true;
      design.points.push_back(cands.points[static_cast<std::size_t>(c)]);
      design.candidate_ids.push_back(cands.ids[static_cast<std::size_t>(c)]);
      design.parents.push_back(pidx);
      placed = true;
      break;
    }
    if (!placed) {
      throw feasibility_error("generate_icp_finite: only " + std::to_string(j) + " of " +
                              std::to_string(k) +
                              " close pairs could be placed; no unused candidate lies within zeta=" +
                              std::to_string(zeta) + " of any remaining parent");
    }
  }
  return design;
}

// Completely random design: n independent uniform locations.
inline Design generate_crd(int n, const Region& region, RandomStream& rng) {
  if (n < 1) throw validation_error("generate_crd: n must be >= 1");
  Design design;
  design.family = DesignFamily::CRD;
  design.params.n = n;
  design.seed = rng.seed();
  design.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) design.points.push_back(uniform_in_region(region, rng));
  return design;
}

// Square lattice with the largest m x m count not exceeding n_target.
// With jitter_origin the lattice origin is uniform within one cell, which
// keeps the design a probability sample; otherwise cells are centred.
inline Design generate_lattice(int n_target, const Region& region, RandomStream& rng,
                               bool jitter_origin = true) {
  if (n_target < 1) throw validation_error("generate_lattice: n_target must be >= 1");
  const int m = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_target))));
  const double sx = region.width() / m;
  const double sy = region.height() / m;
  const double ox = jitter_origin ? rng.uniform(0.0, sx) : sx / 2.0;
  const double oy = jitter_origin ? rng.uniform(0.0, sy) : sy / 2.0;

  Design design;
  design.family = DesignFamily::Lattice;
  design.params.n = m * m;
  design.params.spacing = std::min(sx, sy);
  design.seed = rng.seed();
  design.points.reserve(static_cast<std::size_t>(m * m));
  for (int iy = 0; iy < m; ++iy) {
    for (int ix = 0; ix < m; ++ix) {
      design.points.push_back(Point{region.xmin + ox + ix * sx, region.ymin + oy + iy * sy});
    }
  }
  return design;
}

// Lattice plus close pairs: exactly n-k lattice points (a near-square grid
// truncated row-major to the requested count) augmented with k disc-uniform
// points round distinct randomly selected lattice sites. spacing <= 0 picks
// the spacing from the count.
inline Design generate_lattice_cp(int n, int k, double spacing, double zeta, const Region& region,
                                  RandomStream& rng, bool jitter_origin = true) {
  if (n < 1) throw validation_error("generate_lattice_cp: n must be >= 1");
  if (k < 0) throw validation_error("generate_lattice_cp: k must be >= 0");
  if (2 * k > n) throw validation_error("generate_lattice_cp: requires k <= n/2");
  if (k > 0 && !(zeta > 0.0)) throw validation_error("generate_lattice_cp: zeta must be > 0");

  const int n_lattice = n - k;
  int cols, rows;
  double sx, sy;
  if (spacing > 0.0) {
    cols = static_cast<int>(std::floor(region.width() / spacing));
    rows = static_cast<int>(std::floor(region.height() / spacing));
    if (cols < 1 || rows < 1 || cols * rows < n_lattice) {
      throw validation_error("generate_lattice_cp: spacing " + std::to_string(spacing) +
                             " cannot fit " + std::to_string(n_lattice) + " lattice points");
    }
    sx = spacing;
    sy = spacing;
  } else {
    cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_lattice))));
    rows = (n_lattice + cols - 1) / cols;
    sx = region.width() / cols;
    sy = region.height() / rows;
  }
  const double ox = jitter_origin ? rng.uniform(0.0, sx) : sx / 2.0;
  const double oy = jitter_origin ? rng.uniform(0.0, sy) : sy / 2.0;

  Design design;
  design.family = DesignFamily::LatticeCP;
  design.params = DesignParams{n, k, 0.0, 0.0, zeta, std::min(sx, sy), 0};
  design.seed = rng.seed();
  design.points.reserve(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n_lattice; ++idx) {
    const int iy = idx / cols;
    const int ix = idx % cols;
    design.points.push_back(Point{region.xmin + ox + ix * sx, region.ymin + oy + iy * sy});
  }
  const std::vector<int> parent_idx = detail::sample_without_replacement(n_lattice, k, rng);
  for (int j = 0; j < k; ++j) {
    const Point parent = design.points[static_cast<std::size_t>(parent_idx[static_cast<std::size_t>(j)])];
    design.points.push_back(uniform_in_disc_clipped(parent, zeta, region, rng));
    design.parents.push_back(parent_idx[static_cast<std::size_t>(j)]);
  }
  return design;
}

}  // namespace geodesign

#endif  // GEODESIGN_DESIGN_HPP
