#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "geodesign/covariance.hpp"
#include "geodesign/errors.hpp"

using namespace geodesign;

TEST_CASE("matern closed forms at u = phi") {
  // kappa = 1/2: exp(-1); kappa = 3/2: 2 exp(-1); kappa = 5/2: (7/3) exp(-1).
  const double e1 = std::exp(-1.0);
  CHECK(matern_correlation(0.2, 0.2, 0.5) == Catch::Approx(e1).epsilon(1e-14));
  CHECK(matern_correlation(0.2, 0.2, 1.5) == Catch::Approx(2.0 * e1).epsilon(1e-14));
  CHECK(matern_correlation(0.2, 0.2, 2.5) == Catch::Approx(7.0 / 3.0 * e1).epsilon(1e-14));
}

TEST_CASE("matern correlation basics") {
  CHECK(matern_correlation(0.0, 0.1, 1.5) == 1.0);
  CHECK(matern_correlation(0.0, 0.1, 0.73) == 1.0);

  // Strictly decreasing along an increasing distance ladder.
  for (double kappa : {0.5, 1.5, 2.5, 0.8, 3.2}) {
    double prev = 1.0;
    for (double u = 0.01; u < 1.0; u += 0.01) {
      const double rho = matern_correlation(u, 0.15, kappa);
      CHECK(rho < prev);
      CHECK(rho > 0.0);
      prev = rho;
    }
  }

  // Values stay in (0, 1] and the long-range guard returns exactly 0, not NaN.
  CHECK(matern_correlation(1e3, 0.1, 1.7) == 0.0);
  CHECK(std::isfinite(matern_correlation(49.9 * 0.1, 0.1, 1.7)));
}

TEST_CASE("closed forms agree with the Bessel route") {
  // The general path accepts any kappa; nudging it by 1 ulp off the special
  // values forces the Bessel branch without moving the answer materially.
  for (double kappa : {0.5, 1.5, 2.5}) {
    const double kappa_off = std::nextafter(kappa, 2.0 * kappa);
    for (double u : {0.01, 0.05, 0.1, 0.3, 0.7, 1.5}) {
      const double closed = matern_correlation(u, 0.2, kappa);
      const double bessel = matern_correlation(u, 0.2, kappa_off);
      CHECK(closed == Catch::Approx(bessel).epsilon(1e-10));
    }
  }
}

TEST_CASE("parameter validation") {
  CovarianceParams p;
  CHECK_NOTHROW(p.validate());

  p = CovarianceParams{};
  p.sigma2 = 0.0;
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = CovarianceParams{};
  p.phi = -0.1;
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = CovarianceParams{};
  p.tau2 = -1e-9;
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = CovarianceParams{};
  p.kappa = 0.0;
  CHECK_THROWS_AS(p.validate(), validation_error);
  p = CovarianceParams{};
  p.sigma2 = std::nan("");
  CHECK_THROWS_AS(p.validate(), validation_error);

  CHECK_THROWS_AS(matern_correlation(-0.1, 0.1, 1.5), validation_error);
  CHECK_THROWS_AS(matern_correlation(0.1, 0.0, 1.5), validation_error);
  CHECK_THROWS_AS(matern_correlation(0.1, 0.1, -1.0), validation_error);
}

TEST_CASE("latent and data covariance matrices") {
  const std::vector<Point> pts{{0.1, 0.1}, {0.4, 0.2}, {0.9, 0.8}};
  CovarianceParams params;
  params.sigma2 = 1.7;
  params.phi = 0.25;
  params.tau2 = 0.3;
  params.kappa = 1.5;

  const Eigen::MatrixXd latent = latent_covariance(pts, params);
  REQUIRE(latent.rows() == 3);
  REQUIRE(latent.cols() == 3);
  CHECK(latent.isApprox(latent.transpose(), 1e-15));
  for (int i = 0; i < 3; ++i) CHECK(latent(i, i) == Catch::Approx(params.sigma2).epsilon(1e-15));
  const double d01 = distance(pts[0], pts[1]);
  CHECK(latent(0, 1) ==
        Catch::Approx(params.sigma2 * matern_correlation(d01, params.phi, params.kappa)).epsilon(1e-14));

  // The nugget lands on the diagonal only.
  const Eigen::MatrixXd data = data_covariance(pts, params);
  CHECK((data - latent).norm() == Catch::Approx(std::sqrt(3.0) * params.tau2).epsilon(1e-12));
  CHECK(data(0, 0) == Catch::Approx(params.sigma2 + params.tau2).epsilon(1e-15));
  CHECK(data(0, 1) == Catch::Approx(latent(0, 1)).epsilon(1e-15));

  const std::vector<Point> others{{0.5, 0.5}, {0.0, 1.0}, {1.0, 0.0}, {0.2, 0.9}};
  const Eigen::MatrixXd cross = cross_covariance(pts, others, params);
  REQUIRE(cross.rows() == 3);
  REQUIRE(cross.cols() == 4);
  CHECK(cross(1, 2) ==
        Catch::Approx(params.sigma2 *
                      matern_correlation(distance(pts[1], others[2]), params.phi, params.kappa))
            .epsilon(1e-14));

  CHECK_THROWS_AS(latent_covariance({}, params), validation_error);
  CHECK_THROWS_AS(cross_covariance({}, others, params), validation_error);
}

TEST_CASE("covariance matrices are positive definite for scattered points") {
  RandomStream rng(314159);
  const Region region = Region::unit_square();
  std::vector<Point> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(uniform_in_region(region, rng));

  for (double kappa : {0.5, 1.5, 2.5}) {
    CovarianceParams params;
    params.sigma2 = 2.0;
    params.phi = 0.2;
    params.kappa = kappa;
    params.tau2 = 0.0;
    const Eigen::MatrixXd cov = latent_covariance(pts, params);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    CHECK(es.eigenvalues().minCoeff() > -1e-10 * params.sigma2);
  }
}
