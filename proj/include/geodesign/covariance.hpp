#ifndef GEODESIGN_COVARIANCE_HPP
#define GEODESIGN_COVARIANCE_HPP

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "geodesign/errors.hpp"
#include "geodesign/geometry.hpp"

namespace geodesign {

// Matern-plus-nugget model parameters.
//
// Parameterisation note: the correlation argument is u / phi with no
// sqrt(2*kappa) scaling, i.e. rho(u) = {2^(kappa-1) Gamma(kappa)}^-1
// (u/phi)^kappa K_kappa(u/phi). This is the model-based-geostatistics
// convention; phi values quoted elsewhere are only comparable under it.
struct CovarianceParams {
  double sigma2 = 1.0;  // signal variance
  double phi = 0.1;     // range, in region length units
  double tau2 = 0.0;    // nugget variance
  double kappa = 1.5;   // smoothness, fixed during estimation

  void validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      throw validation_error("CovarianceParams: sigma2 must be > 0");
    if (!(phi > 0.0) || !std::isfinite(phi))
      throw validation_error("CovarianceParams: phi must be > 0");
    if (!(tau2 >= 0.0) || !std::isfinite(tau2))
      throw validation_error("CovarianceParams: tau2 must be >= 0");
    if (!(kappa > 0.0) || !std::isfinite(kappa))
      throw validation_error("CovarianceParams: kappa must be > 0");
  }
};

namespace detail {

// General-kappa Matern correlation through the modified Bessel function of
// the second kind. Guards: the x -> 0 limit is 1 (series correction is
// O(x^2) below the cutoff) and for x > 50 the value is < 1e-20, returned as 0
// before x^kappa * K_kappa(x) can reach inf * 0.
inline double matern_correlation_general(double u, double phi, double kappa) {
  const double x = u / phi;
  if (x < 1e-8) return 1.0;
  if (x > 50.0) return 0.0;
  const double scale = std::exp((1.0 - kappa) * std::log(2.0) - std::lgamma(kappa));
  return scale * std::pow(x, kappa) * std::cyl_bessel_k(kappa, x);
}

}  // namespace detail

// Matern correlation rho(u); rho(0) = 1, strictly decreasing in u.
// kappa in {0.5, 1.5, 2.5} uses the closed forms, anything else the Bessel
// route (the two are cross-checked in the test suite).
inline double matern_correlation(double u, double phi, double kappa) {
  if (!std::isfinite(u) || u < 0.0) throw validation_error("matern_correlation: u must be finite and >= 0");
  if (!(phi > 0.0)) throw validation_error("matern_correlation: phi must be > 0");
  if (!(kappa > 0.0)) throw validation_error("matern_correlation: kappa must be > 0");
  if (u == 0.0) return 1.0;
  const double x = u / phi;
  if (kappa == 0.5) return std::exp(-x);
  if (kappa == 1.5) return (1.0 + x) * std::exp(-x);
  if (kappa == 2.5) return (1.0 + x + x * x / 3.0) * std::exp(-x);
  return detail::matern_correlation_general(u, phi, kappa);
}

// Covariance of the latent field S at the given points:
// entry (i,j) = sigma2 * rho(||x_i - x_j||). No nugget anywhere.
inline Eigen::MatrixXd latent_covariance(const std::vector<Point>& points,
                                         const CovarianceParams& params) {
  if (points.empty()) throw validation_error("latent_covariance: points must be nonempty");
  params.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = params.sigma2;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = distance(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
      const double c = params.sigma2 * matern_correlation(d, params.phi, params.kappa);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

// Covariance of the data Y at the design points: latent + nugget on the
// diagonal only.
inline Eigen::MatrixXd data_covariance(const std::vector<Point>& points,
                                       const CovarianceParams& params) {
  Eigen::MatrixXd cov = latent_covariance(points, params);
  cov.diagonal().array() += params.tau2;
  return cov;
}

// sigma2-scaled cross-covariance between two point sets, Cov{S(a_i), S(b_j)}.
inline Eigen::MatrixXd cross_covariance(const std::vector<Point>& a, const std::vector<Point>& b,
                                        const CovarianceParams& params) {
  if (a.empty() || b.empty()) throw validation_error("cross_covariance: points must be nonempty");
  params.validate();
  Eigen::MatrixXd cov(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          params.sigma2 * matern_correlation(distance(a[i], b[j]), params.phi, params.kappa);
    }
  }
  return cov;
}

}  // namespace geodesign

#endif  // GEODESIGN_COVARIANCE_HPP
