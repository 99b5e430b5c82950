#ifndef GEODESIGN_ESTIMATION_HPP
#define GEODESIGN_ESTIMATION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "geodesign/covariance.hpp"
#include "geodesign/design.hpp"
#include "geodesign/errors.hpp"
#include "geodesign/geometry.hpp"
#include "geodesign/rng.hpp"

namespace geodesign {

struct FitResult {
  CovarianceParams params_hat;
  double mean_hat = 0.0;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;  // total likelihood evaluations
};

namespace detail {

inline Eigen::MatrixXd pairwise_distances(const std::vector<Point>& pts) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = distance(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
    }
  }
  return d;
}

inline Eigen::MatrixXd covariance_from_distances(const Eigen::MatrixXd& dist,
                                                 const CovarianceParams& p) {
  const int n = static_cast<int>(dist.rows());
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = p.sigma2 + p.tau2;
    for (int j = i + 1; j < n; ++j) {
      k(i, j) = k(j, i) = p.sigma2 * matern_correlation(dist(i, j), p.phi, p.kappa);
    }
  }
  return k;
}

// Log density of y under N(mean 1, K), or -inf when K fails to factorize.
// When profile_mean is non-null the constant mean is replaced by its
// generalized-least-squares optimum and written through the pointer.
inline double loglik_from_cov(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double mean,
                              double* profile_mean) {
  const Eigen::Index n = y.size();
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();

  double mu = mean;
  if (profile_mean != nullptr) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd ki_ones = llt.solve(ones);
    mu = ki_ones.dot(y) / ki_ones.dot(ones);
    *profile_mean = mu;
  }
  const Eigen::VectorXd r = y.array() - mu;
  const Eigen::VectorXd half = llt.matrixL().solve(r);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (n * std::log(2.0 * M_PI) + logdet + half.squaredNorm());
}

// Nelder-Mead on a dim-parameter objective (minimization). Terminates when
// the simplex diameter drops below tol or the evaluation budget runs out.
struct SimplexResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
};

inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0, double step, double tol,
                                 int max_evals) {
  const std::size_t dim = x0.size();
  std::vector<std::vector<double>> xs(dim + 1, x0);
  std::vector<double> fs(dim + 1);
  SimplexResult res;
  for (std::size_t i = 0; i < dim; ++i) xs[i + 1][i] += step;
  for (std::size_t i = 0; i <= dim; ++i) {
    fs[i] = f(xs[i]);
    ++res.evals;
  }

  std::vector<std::size_t> order(dim + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= dim; ++i) {
      for (std::size_t c = 0; c < dim; ++c) {
        d = std::max(d, std::abs(xs[order[i]][c] - xs[order[0]][c]));
      }
    }
    return d;
  };

  while (res.evals < max_evals) {
    sort_simplex();
    if (diameter() < tol) {
      res.converged = true;
      break;
    }
    const std::size_t best = order[0], worst = order[dim], second = order[dim - 1];

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t c = 0; c < dim; ++c) centroid[c] += xs[i][c] / dim;
    }
    auto blend = [&](double coef) {
      std::vector<double> x(dim);
      for (std::size_t c = 0; c < dim; ++c) x[c] = centroid[c] + coef * (xs[worst][c] - centroid[c]);
      return x;
    };

    const std::vector<double> xr = blend(-1.0);  // reflection
    const double fr = f(xr);
    ++res.evals;
    if (fr < fs[best]) {
      const std::vector<double> xe = blend(-2.0);  // expansion
      const double fe = f(xe);
      ++res.evals;
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      const std::vector<double> xc = blend(outside ? -0.5 : 0.5);  // contraction
      const double fc = f(xc);
      ++res.evals;
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {  // shrink toward the best vertex
        for (std::size_t i = 0; i <= dim; ++i) {
          if (i == best) continue;
          for (std::size_t c = 0; c < dim; ++c) xs[i][c] = xs[best][c] + 0.5 * (xs[i][c] - xs[best][c]);
          fs[i] = f(xs[i]);
          ++res.evals;
        }
      }
    }
  }
  sort_simplex();
  res.x = xs[order[0]];
  res.f = fs[order[0]];
  return res;
}

}  // namespace detail

// Marginal Gaussian log-likelihood of y under N(mean 1, sigma2 R + tau2 I).
inline double gaussian_loglik(const std::vector<Point>& points, const Eigen::VectorXd& y,
                              const CovarianceParams& params, double mean = 0.0) {
  params.validate();
  if (y.size() != static_cast<Eigen::Index>(points.size())) {
    throw validation_error("gaussian_loglik: y length does not match point count");
  }
  const double ll = detail::loglik_from_cov(data_covariance(points, params), y, mean, nullptr);
  if (!std::isfinite(ll)) {
    throw numerical_error("gaussian_loglik: covariance not positive definite");
  }
  return ll;
}

inline double gaussian_loglik(const Design& design, const Eigen::VectorXd& y,
                              const CovarianceParams& params, double mean = 0.0) {
  return gaussian_loglik(design.points, y, params, mean);
}

// Maximum-likelihood fit of (sigma2, phi, tau2) with kappa held fixed,
// by Nelder-Mead over (log sigma2, log phi, log nu), nu = tau2/sigma2, with
// three restarts from deterministically perturbed starting values. The
// constant mean is profiled out in closed form when estimate_mean is set,
// otherwise fixed at zero. The returned loglik never falls below the
// likelihood at init: the initial point is always evaluated and kept when
// no search point beats it.
inline FitResult fit_gaussian_ml(const std::vector<Point>& points, const Eigen::VectorXd& y,
                                 double kappa, const CovarianceParams& init,
                                 bool estimate_mean = false) {
  const int n = static_cast<int>(points.size());
  if (n < 5) throw validation_error("fit_gaussian_ml: need at least 5 observations");
  if (y.size() != n) throw validation_error("fit_gaussian_ml: y length does not match point count");
  init.validate();
  {
    const double ybar = y.mean();
    if ((y.array() - ybar).abs().maxCoeff() == 0.0) {
      throw validation_error("fit_gaussian_ml: degenerate data (y is constant)");
    }
  }

  const Eigen::MatrixXd dist = detail::pairwise_distances(points);
  constexpr double kNuFloor = 1e-12;  // log-scale lower edge standing in for nu = 0

  // theta = (log sigma2, log phi, log nu)
  auto params_at = [&](const std::vector<double>& theta) {
    CovarianceParams p;
    p.sigma2 = std::exp(theta[0]);
    p.phi = std::exp(theta[1]);
    const double nu = std::exp(theta[2]);
    p.tau2 = (nu <= kNuFloor ? 0.0 : nu * p.sigma2);
    p.kappa = kappa;
    return p;
  };

  FitResult best;
  best.params_hat = init;
  best.params_hat.kappa = kappa;
  best.mean_hat = 0.0;
  auto evaluate = [&](const CovarianceParams& p, double* mean_out) {
    return detail::loglik_from_cov(detail::covariance_from_distances(dist, p), y, 0.0,
                                   estimate_mean ? mean_out : nullptr);
  };
  best.loglik = evaluate(best.params_hat, &best.mean_hat);
  int total_evals = 1;

  auto objective = [&](const std::vector<double>& theta) {
    const CovarianceParams p = params_at(theta);
    double mu = 0.0;
    return -detail::loglik_from_cov(detail::covariance_from_distances(dist, p), y, 0.0,
                                    estimate_mean ? &mu : nullptr);
  };

  std::vector<double> theta0 = {
      std::log(init.sigma2),
      std::log(init.phi),
      std::log(std::max(init.tau2 > 0.0 ? init.tau2 / init.sigma2 : 1e-4, kNuFloor)),
  };

  // Fixed internal stream so fits are reproducible irrespective of caller RNG.
  RandomStream restart_rng(0x5D5A1C5AD5E5ULL);
  bool best_from_converged_run = false;
  bool any_run_converged = false;
  bool init_still_best = true;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<double> start = theta0;
    if (attempt > 0) {
      for (double& c : start) c += restart_rng.uniform(-0.7, 0.7);
    }
    const detail::SimplexResult run = detail::nelder_mead(objective, start, 0.5, 1e-6, 500);
    total_evals += run.evals;
    any_run_converged = any_run_converged || run.converged;
    if (-run.f > best.loglik) {
      const CovarianceParams p = params_at(run.x);
      double mu = 0.0;
      const double ll = detail::loglik_from_cov(detail::covariance_from_distances(dist, p), y, 0.0,
                                                estimate_mean ? &mu : nullptr);
      ++total_evals;
      if (ll > best.loglik) {
        best.params_hat = p;
        best.mean_hat = estimate_mean ? mu : 0.0;
        best.loglik = ll;
        best_from_converged_run = run.converged;
        init_still_best = false;
      }
    }
  }

  // A nugget ratio at the floor is a boundary solution: report tau2 = 0
  // exactly (same likelihood by construction of params_at).
  if (best.params_hat.tau2 > 0.0 && best.params_hat.tau2 / best.params_hat.sigma2 <= 2.0 * kNuFloor) {
    best.params_hat.tau2 = 0.0;
  }
  // Converged means the reported optimum came out of a simplex run that met
  // the diameter tolerance (or every converged run confirmed init as best).
  best.converged = std::isfinite(best.loglik) &&
                   (best_from_converged_run || (init_still_best && any_run_converged));
  best.iterations = total_evals;
  if (!std::isfinite(best.loglik)) {
    throw numerical_error("fit_gaussian_ml: likelihood not finite at any evaluated point");
  }
  return best;
}

inline FitResult fit_gaussian_ml(const Design& design, const Eigen::VectorXd& y, double kappa,
                                 const CovarianceParams& init, bool estimate_mean = false) {
  return fit_gaussian_ml(design.points, y, kappa, init, estimate_mean);
}

}  // namespace geodesign

#endif  // GEODESIGN_ESTIMATION_HPP
