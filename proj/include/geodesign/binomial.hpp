#ifndef GEODESIGN_BINOMIAL_HPP
#define GEODESIGN_BINOMIAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "geodesign/covariance.hpp"
#include "geodesign/design.hpp"
#include "geodesign/errors.hpp"
#include "geodesign/field.hpp"
#include "geodesign/rng.hpp"

namespace geodesign {

// Binomial observations at the design points: counts_i successes out of
// trials_i, with success probability logistic(offset + S_i + U_i).
struct BinomialData {
  std::vector<int> counts;
  std::vector<int> trials;
  double linear_offset = 0.0;

  int size() const { return static_cast<int>(counts.size()); }
};

inline double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

// log(1 + e^eta) without overflow
inline double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

// Per design point: U ~ N(0, tau2), p = logistic(offset + S + U),
// counts ~ Binomial(trials, p).
inline BinomialData simulate_binomial(const FieldRealization& realization, double tau2, int trials,
                                      double offset, RandomStream& rng) {
  if (trials < 1) throw validation_error("simulate_binomial: trials must be >= 1");
  if (tau2 < 0.0) throw validation_error("simulate_binomial: tau2 must be >= 0");
  const double sd = std::sqrt(tau2);

  BinomialData data;
  data.linear_offset = offset;
  const Eigen::Index n = realization.design_values.size();
  data.counts.reserve(static_cast<std::size_t>(n));
  data.trials.assign(static_cast<std::size_t>(n), trials);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = tau2 > 0.0 ? rng.normal(0.0, sd) : 0.0;
    const double p = logistic(offset + realization.design_values[i] + u);
    data.counts.push_back(rng.binomial(trials, p));
  }
  return data;
}

namespace detail {

// Binomial log-likelihood sum_i [c_i eta_i - t_i log(1+e^{eta_i})] up to the
// data-only combinatorial constant.
inline double binomial_loglik_term(const BinomialData& data, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += data.counts[static_cast<std::size_t>(i)] * eta[i] -
          data.trials[static_cast<std::size_t>(i)] * softplus(eta[i]);
  }
  return ll;
}

// Gaussian (Laplace) approximation to [w | counts] where w = S + U is the
// latent vector at the design points with prior N(0, sigma2 R + tau2 I).
struct LaplaceFit {
  Eigen::VectorXd mode;          // posterior mode of w
  Eigen::MatrixXd prior_inv;     // (sigma2 R + tau2 I)^{-1}
  Eigen::MatrixXd posterior_cov; // (prior_inv + W(mode))^{-1}
  double grad_norm = 0.0;        // max-norm of the log-posterior gradient at the mode
};

inline LaplaceFit laplace_fit(const std::vector<Point>& design_points, const BinomialData& data,
                              const CovarianceParams& params, double offset) {
  params.validate();
  const int n = static_cast<int>(design_points.size());
  if (data.size() != n || static_cast<int>(data.trials.size()) != n) {
    throw validation_error("laplace_fit: data length does not match design size");
  }
  for (int i = 0; i < n; ++i) {
    if (data.trials[static_cast<std::size_t>(i)] < 1 || data.counts[static_cast<std::size_t>(i)] < 0 ||
        data.counts[static_cast<std::size_t>(i)] > data.trials[static_cast<std::size_t>(i)]) {
      throw validation_error("laplace_fit: invalid counts/trials at index " + std::to_string(i));
    }
  }

  Eigen::LLT<Eigen::MatrixXd> prior_llt(data_covariance(design_points, params));
  if (prior_llt.info() != Eigen::Success) {
    throw numerical_error("laplace_fit: prior covariance not positive definite");
  }

  LaplaceFit fit;
  fit.prior_inv = prior_llt.solve(Eigen::MatrixXd::Identity(n, n));

  auto log_posterior = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd eta = (w.array() + offset).matrix();
    return binomial_loglik_term(data, eta) - 0.5 * w.dot(fit.prior_inv * w);
  };
  auto grad_and_weights = [&](const Eigen::VectorXd& w, Eigen::VectorXd& grad,
                              Eigen::VectorXd& wdiag) {
    for (int i = 0; i < n; ++i) {
      const double p = logistic(w[i] + offset);
      const double t = data.trials[static_cast<std::size_t>(i)];
      grad[i] = data.counts[static_cast<std::size_t>(i)] - t * p;
      wdiag[i] = std::max(t * p * (1.0 - p), 1e-12);  // guard saturated probabilities
    }
    grad -= fit.prior_inv * w;
  };

  // Gradient entries are differences of terms of magnitude up to trials_i, so
  // the attainable accuracy degrades with the largest trial count; a fixed
  // absolute cutoff would be unreachable in double precision for huge counts.
  const int max_trials = *std::max_element(data.trials.begin(), data.trials.end());
  const double grad_tol = 1e-8 * std::max(1.0, 0.25 * static_cast<double>(max_trials));

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  double lp = log_posterior(w);
  Eigen::VectorXd grad(n), wdiag(n);
  Eigen::MatrixXd hess(n, n);
  Eigen::LLT<Eigen::MatrixXd> hess_llt;
  constexpr int kMaxNewton = 100;
  bool resolved = false;
  for (int iter = 0; iter < kMaxNewton; ++iter) {
    grad_and_weights(w, grad, wdiag);
    if (grad.lpNorm<Eigen::Infinity>() < 0.1 * grad_tol) {
      resolved = true;
      break;
    }

    hess = fit.prior_inv;
    hess.diagonal() += wdiag;
    hess_llt.compute(hess);
    if (hess_llt.info() != Eigen::Success) {
      throw numerical_error("laplace_fit: Newton Hessian not positive definite");
    }
    const Eigen::VectorXd step = hess_llt.solve(grad);

    // damped ascent: halve until the log-posterior improves
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Eigen::VectorXd w_new = w + scale * step;
      const double lp_new = log_posterior(w_new);
      if (lp_new > lp) {
        w = w_new;
        lp = lp_new;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) {
      // No acceptable step. If the Newton decrement (the gain a full step
      // would buy) is below the floating-point resolution of the
      // log-posterior, the mode is converged and the line search simply
      // cannot see the remaining ascent; anything larger is a real failure.
      const double decrement = 0.5 * grad.dot(step);
      resolved = decrement <=
                 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(lp));
      break;
    }
  }

  grad_and_weights(w, grad, wdiag);
  fit.grad_norm = grad.lpNorm<Eigen::Infinity>();
  if (!resolved && fit.grad_norm >= grad_tol) {
    throw numerical_error("laplace_fit: mode search did not converge (gradient max-norm " +
                          std::to_string(fit.grad_norm) + ")");
  }
  fit.mode = w;

  hess = fit.prior_inv;
  hess.diagonal() += wdiag;
  hess_llt.compute(hess);
  if (hess_llt.info() != Eigen::Success) {
    throw numerical_error("laplace_fit: Hessian factorization failed at the mode");
  }
  fit.posterior_cov = hess_llt.solve(Eigen::MatrixXd::Identity(n, n));
  return fit;
}

}  // namespace detail

// Laplace approximation to [S(grid) | counts] under the logistic binomial
// model. The nugget-level noise U is absorbed into the latent vector at the
// design points (prior covariance sigma2 R + tau2 I); the mode and curvature
// of that posterior are propagated to the grid by the conditional-Gaussian
// map, targeting S alone:
//   E[S_g|Y]   = d_g . mode
//   Var[S_g|Y] = sigma2 - c_g . d_g + d_g' P d_g,   d_g = prior_inv c_g
inline PredictionSurface predict_latent_laplace(const std::vector<Point>& design_points,
                                                const BinomialData& data,
                                                const PredictionGrid& grid,
                                                const CovarianceParams& params, double offset) {
  const detail::LaplaceFit fit = detail::laplace_fit(design_points, data, params, offset);

  const Eigen::MatrixXd cross = cross_covariance(grid.points, design_points, params);  // m x n
  const Eigen::MatrixXd d = fit.prior_inv * cross.transpose();                         // n x m

  PredictionSurface surface;
  surface.params_used = params;
  surface.trend_mean = 0.0;
  surface.mean = d.transpose() * fit.mode;
  surface.variance.resize(grid.size());
  const Eigen::MatrixXd pd = fit.posterior_cov * d;  // P d, n x m
  for (int j = 0; j < grid.size(); ++j) {
    double v = params.sigma2 - cross.row(j).dot(d.col(j)) + d.col(j).dot(pd.col(j));
    if (v < 0.0) {
      if (v < -1e-8 * params.sigma2) {
        throw numerical_error("predict_latent_laplace: negative variance " + std::to_string(v) +
                              " at grid index " + std::to_string(j));
      }
      v = 0.0;
    }
    surface.variance[j] = v;
  }
  return surface;
}

inline PredictionSurface predict_latent_laplace(const Design& design, const BinomialData& data,
                                                const PredictionGrid& grid,
                                                const CovarianceParams& params, double offset) {
  return predict_latent_laplace(design.points, data, grid, params, offset);
}

}  // namespace geodesign

#endif  // GEODESIGN_BINOMIAL_HPP
