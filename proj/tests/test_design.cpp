#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "pricelab/design.hpp"
#include "pricelab/rng.hpp"

using namespace pricelab;

TEST_CASE("rank-one update on the identity") {
  DesignMatrix design(2, 1.0);
  Eigen::VectorXd z(2);
  z << 1.0, 0.0;
  design.update(z);
  CHECK(design.M()(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(design.M()(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(design.M()(0, 1) == 0.0);
  CHECK(design.log_det() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(design.M_inv()(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(design.M_inv()(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zero update leaves the design unchanged") {
  DesignMatrix design(3, 2.0);
  const Eigen::MatrixXd before = design.M();
  const double log_det_before = design.log_det();
  design.update(Eigen::VectorXd::Zero(3));
  CHECK(design.M() == before);
  CHECK(design.log_det() == doctest::Approx(log_det_before).epsilon(1e-15));
}

TEST_CASE("incremental inverse and log-det track direct recomputation") {
  const int dim = 5;
  const double lambda = 0.7;
  DesignMatrix design(dim, lambda);
  Eigen::MatrixXd direct = lambda * Eigen::MatrixXd::Identity(dim, dim);
  RngEngine rng = make_stream(21, Stream::kPolicy);
  std::normal_distribution<double> normal(0.0, 1.0);
  double prev_log_det = design.log_det();
  CHECK(prev_log_det == doctest::Approx(dim * std::log(lambda)).epsilon(1e-13));
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z[i] = normal(rng);
    design.update(z);
    direct.noalias() += z * z.transpose();

    const Eigen::MatrixXd residual =
        design.M() * design.M_inv() - Eigen::MatrixXd::Identity(dim, dim);
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);

    const Eigen::MatrixXd inv_err = design.M_inv() - direct.inverse();
    CHECK(inv_err.norm() / direct.inverse().norm() <= 1e-8);

    const double direct_log_det = std::log(direct.determinant());
    CHECK(std::abs(design.log_det() - direct_log_det) /
              std::abs(direct_log_det) <=
          1e-6);

    CHECK(design.log_det() >= prev_log_det - 1e-12);
    prev_log_det = design.log_det();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(design.M());
    CHECK(eig.eigenvalues().minCoeff() >= lambda - 1e-9);
  }
}

TEST_CASE("periodic refactorization keeps long runs accurate") {
  const int dim = 3;
  DesignMatrix design(dim, 1.0);
  Eigen::MatrixXd direct = Eigen::MatrixXd::Identity(dim, dim);
  RngEngine rng = make_stream(22, Stream::kPolicy);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 1300; ++k) {  // crosses two refactor boundaries
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z[i] = 0.1 * normal(rng);
    design.update(z);
    direct.noalias() += z * z.transpose();
  }
  CHECK((design.M_inv() - direct.inverse()).norm() / direct.inverse().norm() <=
        1e-8);
  CHECK(std::abs(design.log_det() - std::log(direct.determinant())) <= 1e-6);
}

TEST_CASE("norms and inverse square root") {
  DesignMatrix design(4, 1.5);
  RngEngine rng = make_stream(23, Stream::kPolicy);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 12; ++k) {
    Eigen::VectorXd z(4);
    for (int i = 0; i < 4; ++i) z[i] = normal(rng);
    design.update(z);
  }
  Eigen::VectorXd v(4);
  v << 0.3, -1.0, 0.5, 2.0;
  CHECK(design.norm_sq(v) == doctest::Approx(v.dot(design.M() * v)).epsilon(1e-12));
  CHECK(design.inv_norm_sq(v) ==
        doctest::Approx(v.dot(design.M_inv() * v)).epsilon(1e-12));
  const Eigen::MatrixXd S = design.inv_sqrt();
  CHECK((S * S - design.M_inv()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("elliptical potential audit") {
  SUBCASE("constant scalar sequence gives the harmonic sum") {
    std::vector<Eigen::VectorXd> zs(100, Eigen::VectorXd::Ones(1));
    const PotentialAudit audit = elliptical_potential_audit(zs, 1.0);
    CHECK(audit.lhs == doctest::Approx(5.187377517639621).epsilon(1e-12));
    CHECK(audit.bound == doctest::Approx(9.23024103368252).epsilon(1e-12));
    CHECK(audit.ok);
  }
  SUBCASE("zero sequence") {
    std::vector<Eigen::VectorXd> zs(10, Eigen::VectorXd::Zero(4));
    const PotentialAudit audit = elliptical_potential_audit(zs, 1.0);
    CHECK(audit.lhs == 0.0);
    CHECK(audit.ok);
  }
  SUBCASE("random unit-ball sequences never violate the bound") {
    RngEngine rng = make_stream(31, Stream::kPolicy);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int seq = 0; seq < 100; ++seq) {
      std::vector<Eigen::VectorXd> zs;
      zs.reserve(500);
      for (int t = 0; t < 500; ++t) {
        Eigen::VectorXd z(12);
        for (int i = 0; i < 12; ++i) z[i] = normal(rng);
        z *= std::pow(unif(rng), 1.0 / 12.0) / z.norm();
        zs.push_back(std::move(z));
      }
      const PotentialAudit audit = elliptical_potential_audit(zs, 1.0);
      CHECK(audit.ok);
      CHECK(audit.lhs <= audit.bound);
    }
  }
  SUBCASE("preconditions refuse inapplicable bounds") {
    std::vector<Eigen::VectorXd> zs(5, Eigen::VectorXd::Ones(1) * 1.5);
    CHECK_THROWS_AS(elliptical_potential_audit(zs, 1.0), std::invalid_argument);
    std::vector<Eigen::VectorXd> ok(5, Eigen::VectorXd::Ones(1) * 0.5);
    CHECK_THROWS_AS(elliptical_potential_audit(ok, 0.5), std::invalid_argument);
  }
}
