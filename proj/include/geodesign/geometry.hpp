#ifndef GEODESIGN_GEOMETRY_HPP
#define GEODESIGN_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "geodesign/errors.hpp"
#include "geodesign/rng.hpp"

namespace geodesign {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool finite(const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Axis-aligned rectangular study region. Irregular domains are handled via a
// finite CandidateSet inside an enclosing rectangle. Coordinates must be
// planar; geographic data has to be projected before use.
struct Region {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 1.0;
  double ymax = 1.0;

  Region() = default;
  Region(double x0, double y0, double x1, double y1) : xmin(x0), ymin(y0), xmax(x1), ymax(y1) {
    if (!(std::isfinite(xmin) && std::isfinite(ymin) && std::isfinite(xmax) && std::isfinite(ymax))) {
      throw validation_error("Region: bounds must be finite");
    }
    if (!(xmax > xmin && ymax > ymin)) {
      throw validation_error("Region: requires xmax > xmin and ymax > ymin");
    }
  }

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }

  bool contains(const Point& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }

  static Region unit_square() { return Region(0.0, 0.0, 1.0, 1.0); }
};

// Finite set of permissible sampling locations (e.g. enumerated households).
struct CandidateSet {
  std::vector<Point> points;
  std::vector<std::string> ids;  // unique, parallel to points

  std::size_t size() const { return points.size(); }

  // Enclosing rectangle, padded so boundary points test as contained.
  Region bounding_region() const {
    if (points.empty()) throw validation_error("CandidateSet: empty");
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    for (const Point& p : points) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
    const double padx = std::max(1e-9, 1e-6 * (x1 - x0));
    const double pady = std::max(1e-9, 1e-6 * (y1 - y0));
    return Region(x0 - padx, y0 - pady, x1 + padx, y1 + pady);
  }
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Minimum over all unordered pairs; O(n^2), fine at the sizes used here.
inline double min_pairwise_distance(const std::vector<Point>& points) {
  if (points.size() < 2) {
    throw validation_error("min_pairwise_distance: needs at least 2 points");
  }
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      dmin = std::min(dmin, distance(points[i], points[j]));
    }
  }
  return dmin;
}

// Fraction of the region covered by n non-overlapping discs of diameter
// delta: rho = n * pi * delta^2 / (4 |D|).
inline double packing_density(int n, double delta, const Region& region) {
  if (n < 1) throw validation_error("packing_density: n must be >= 1");
  if (!(delta > 0.0)) throw validation_error("packing_density: delta must be > 0");
  return static_cast<double>(n) * std::numbers::pi * delta * delta / (4.0 * region.area());
}

inline Point uniform_in_region(const Region& region, RandomStream& rng) {
  return Point{rng.uniform(region.xmin, region.xmax), rng.uniform(region.ymin, region.ymax)};
}

// Area-uniform point on the closed disc, via the radius transform
// r = radius * sqrt(u). Always consumes exactly two draws.
inline Point uniform_in_disc(const Point& center, double radius, RandomStream& rng) {
  if (!(radius > 0.0)) throw validation_error("uniform_in_disc: radius must be > 0");
  const double r = radius * std::sqrt(rng.uniform());
  const double theta = rng.uniform(0.0, 6.283185307179586476925287);
  return Point{center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

// Uniform on disc intersected with the region (close pairs must stay inside
// the study region). Rejection from the disc; a point strictly inside a
// rectangle always keeps at least a quarter of its disc, so this terminates
// quickly.
inline Point uniform_in_disc_clipped(const Point& center, double radius, const Region& region,
                                     RandomStream& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Point p = uniform_in_disc(center, radius, rng);
    if (region.contains(p)) return p;
  }
  throw numerical_error("uniform_in_disc_clipped: rejection budget exhausted (disc outside region?)");
}

// Synthetic household-like candidate set: cluster centres drawn uniformly,
// points scattered round them, all clipped to the region. Stands in for real
// enumeration data, which is not distributed with this project.
inline CandidateSet make_synthetic_candidates(int n, const Region& region, RandomStream& rng,
                                              int n_clusters = 25) {
  if (n < 1) throw validation_error("make_synthetic_candidates: n must be >= 1");
  if (n_clusters < 1) throw validation_error("make_synthetic_candidates: n_clusters must be >= 1");
  std::vector<Point> centres(static_cast<std::size_t>(n_clusters));
  for (Point& c : centres) c = uniform_in_region(region, rng);
  const double spread = 0.06 * std::min(region.width(), region.height());
  CandidateSet out;
  out.points.reserve(static_cast<std::size_t>(n));
  out.ids.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Point& c = centres[rng.uniform_index(static_cast<std::uint64_t>(n_clusters))];
    Point p{c.x + rng.normal(0.0, spread), c.y + rng.normal(0.0, spread)};
    p.x = std::clamp(p.x, region.xmin, region.xmax);
    p.y = std::clamp(p.y, region.ymin, region.ymax);
    out.points.push_back(p);
    out.ids.push_back("h" + std::to_string(i));
  }
  return out;
}

}  // namespace geodesign

#endif  // GEODESIGN_GEOMETRY_HPP
