#ifndef GEODESIGN_FIELD_HPP
#define GEODESIGN_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "geodesign/covariance.hpp"
#include "geodesign/design.hpp"
#include "geodesign/errors.hpp"
#include "geodesign/geometry.hpp"
#include "geodesign/rng.hpp"

namespace geodesign {

// Regular grid of cell centres used as quadrature nodes for the average
// prediction variance. Row-major from the lower-left cell.
struct PredictionGrid {
  Region region = Region::unit_square();
  int nx = 64;
  int ny = 64;
  std::vector<Point> points;

  int size() const { return static_cast<int>(points.size()); }
  double cell_area() const { return region.area() / (static_cast<double>(nx) * ny); }
};

inline PredictionGrid make_prediction_grid(const Region& region, int nx = 64, int ny = 64) {
  if (nx < 1 || ny < 1) throw validation_error("make_prediction_grid: resolution must be >= 1");
  PredictionGrid grid;
  grid.region = region;
  grid.nx = nx;
  grid.ny = ny;
  grid.points.reserve(static_cast<std::size_t>(nx) * ny);
  const double wx = region.width() / nx;
  const double wy = region.height() / ny;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      grid.points.push_back(Point{region.xmin + (ix + 0.5) * wx, region.ymin + (iy + 0.5) * wy});
    }
  }
  return grid;
}

// One draw of the latent field S at the design points and (optionally) the
// grid points, from their joint zero-mean Gaussian law.
struct FieldRealization {
  Eigen::VectorXd design_values;
  Eigen::VectorXd grid_values;  // empty when the grid was not simulated
  CovarianceParams params;
  std::uint64_t seed = 0;
};

// Plug-in predictive surface over a grid.
struct PredictionSurface {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  CovarianceParams params_used;
  double trend_mean = 0.0;  // constant mean supplied to the predictor
};

namespace detail {

// Lower-triangular factor of a latent covariance matrix, with escalating
// diagonal jitter (0, 1e-10 sigma^2, 1e-8 sigma^2) before giving up.
inline Eigen::MatrixXd chol_with_jitter(Eigen::MatrixXd cov, double sigma2,
                                        const char* context) {
  const double jitters[] = {0.0, 1e-10 * sigma2, 1e-8 * sigma2};
  double applied = 0.0;
  for (double jitter : jitters) {
    cov.diagonal().array() += jitter - applied;
    applied = jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      return llt.matrixL();
    }
  }
  throw numerical_error(std::string(context) +
                        ": covariance factorization failed after jitter escalation to 1e-8*sigma2 "
                        "(dimension " + std::to_string(cov.rows()) +
                        ", diagonal " + std::to_string(cov.diagonal().minCoeff()) + ".." +
                        std::to_string(cov.diagonal().maxCoeff()) + ")");
}

}  // namespace detail

// Exact joint simulator over a fixed point set: factorizes the latent
// covariance once so repeated draws (fixed-design Monte Carlo) cost a single
// triangular product each.
class JointSimulator {
 public:
  JointSimulator(const std::vector<Point>& points, const CovarianceParams& params)
      : params_(params), n_(static_cast<int>(points.size())) {
    params.validate();
    if (n_ == 0) throw validation_error("JointSimulator: empty point set");
    chol_ = detail::chol_with_jitter(latent_covariance(points, params), params.sigma2,
                                     "JointSimulator");
  }

  int size() const { return n_; }
  const CovarianceParams& params() const { return params_; }

  Eigen::VectorXd draw(RandomStream& rng) const {
    Eigen::VectorXd z(n_);
    for (int i = 0; i < n_; ++i) z[i] = rng.normal();
    return chol_.triangularView<Eigen::Lower>() * z;
  }

 private:
  CovarianceParams params_;
  int n_;
  Eigen::MatrixXd chol_;
};

// Joint draw of S over design and grid points from one consistent factorization.
// Pass a null grid (simulate_grid = false) to skip the grid values when only
// the design-point field is needed; the design-point law is unchanged.
inline FieldRealization simulate_joint(const std::vector<Point>& design_points,
                                       const PredictionGrid& grid,
                                       const CovarianceParams& params, RandomStream& rng,
                                       bool simulate_grid = true) {
  std::vector<Point> all = design_points;
  if (simulate_grid) all.insert(all.end(), grid.points.begin(), grid.points.end());
  JointSimulator sim(all, params);
  const Eigen::VectorXd s = sim.draw(rng);

  FieldRealization real;
  real.params = params;
  real.seed = rng.seed();
  const int n = static_cast<int>(design_points.size());
  real.design_values = s.head(n);
  if (simulate_grid) real.grid_values = s.tail(grid.size());
  return real;
}

inline FieldRealization simulate_joint(const Design& design, const PredictionGrid& grid,
                                       const CovarianceParams& params, RandomStream& rng,
                                       bool simulate_grid = true) {
  return simulate_joint(design.points, grid, params, rng, simulate_grid);
}

// Y_i = mean + S(x_i) + eps_i with eps_i iid N(0, tau2).
inline Eigen::VectorXd observe_gaussian(const FieldRealization& realization, double tau2,
                                        RandomStream& rng, double mean = 0.0) {
  if (tau2 < 0.0) throw validation_error("observe_gaussian: tau2 must be >= 0");
  const double sd = std::sqrt(tau2);
  Eigen::VectorXd y = (realization.design_values.array() + mean).matrix();
  if (tau2 > 0.0) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += rng.normal(0.0, sd);
  }
  return y;
}

namespace detail {

// Locate a duplicate pair for the singularity diagnostic.
inline std::string duplicate_pair_note(const std::vector<Point>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (distance(pts[i], pts[j]) == 0.0) {
        return " (duplicate design points at indices " + std::to_string(i) + " and " +
               std::to_string(j) + " with tau2 = 0)";
      }
    }
  }
  return "";
}

}  // namespace detail

// Simple kriging with known constant mean: for each grid point x,
//   mean(x) = trend + c(x)' K^{-1} (y - trend)
//   var(x)  = sigma^2 - c(x)' K^{-1} c(x)
// with K the data covariance at the design points and c(x) the sigma^2-scaled
// correlation vector. trend = 0 reproduces the zero-mean simulation model.
inline PredictionSurface krige(const std::vector<Point>& design_points, const Eigen::VectorXd& y,
                               const PredictionGrid& grid, const CovarianceParams& params,
                               double trend = 0.0) {
  params.validate();
  const int n = static_cast<int>(design_points.size());
  if (y.size() != n) throw validation_error("krige: y length does not match design size");
  if (n == 0) throw validation_error("krige: empty design");

  Eigen::LLT<Eigen::MatrixXd> llt(data_covariance(design_points, params));
  if (llt.info() != Eigen::Success) {
    std::string note = params.tau2 == 0.0 ? detail::duplicate_pair_note(design_points) : "";
    throw numerical_error("krige: data covariance is not positive definite" + note);
  }

  const Eigen::VectorXd alpha = llt.solve((y.array() - trend).matrix());
  const Eigen::MatrixXd cross = cross_covariance(grid.points, design_points, params);  // m x n

  PredictionSurface surface;
  surface.params_used = params;
  surface.trend_mean = trend;
  surface.mean = (cross * alpha).array() + trend;

  // var_j = sigma^2 - || L^{-1} c_j ||^2, one triangular solve for all j
  const Eigen::MatrixXd half = llt.matrixL().solve(cross.transpose());  // n x m
  surface.variance =
      (params.sigma2 - half.colwise().squaredNorm().array()).matrix().transpose();
  for (Eigen::Index j = 0; j < surface.variance.size(); ++j) {
    if (surface.variance[j] < 0.0) {
      if (surface.variance[j] < -1e-10 * params.sigma2) {
        throw numerical_error("krige: variance " + std::to_string(surface.variance[j]) +
                              " below zero beyond tolerance at grid index " + std::to_string(j));
      }
      surface.variance[j] = 0.0;
    }
  }
  return surface;
}

inline PredictionSurface krige(const Design& design, const Eigen::VectorXd& y,
                               const PredictionGrid& grid, const CovarianceParams& params,
                               double trend = 0.0) {
  return krige(design.points, y, grid, params, trend);
}

// Average prediction variance: cell-centre quadrature of Var{S(x)|Y} over the
// region, reported as the spatial mean and as the integral (mean times area).
struct ApvResult {
  double mean = 0.0;
  double integral = 0.0;
};

inline ApvResult apv(const PredictionSurface& surface, const PredictionGrid& grid) {
  if (surface.variance.size() != grid.size()) {
    throw validation_error("apv: surface and grid sizes differ");
  }
  ApvResult out;
  out.mean = surface.variance.mean();
  out.integral = out.mean * grid.region.area();
  return out;
}

// Spatially averaged squared prediction error against the simulated truth
// (the latent S plus the same constant trend the predictor used).
inline double mspe(const PredictionSurface& surface, const FieldRealization& realization,
                   const PredictionGrid& grid) {
  if (surface.mean.size() != grid.size()) throw validation_error("mspe: surface/grid size mismatch");
  if (realization.grid_values.size() != grid.size()) {
    throw validation_error("mspe: realization has no grid values of matching size");
  }
  const Eigen::ArrayXd err =
      surface.mean.array() - (realization.grid_values.array() + surface.trend_mean);
  return err.square().mean();
}

}  // namespace geodesign

#endif  // GEODESIGN_FIELD_HPP
