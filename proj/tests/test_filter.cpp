#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "habdf/errors.hpp"
#include "habdf/filter.hpp"
#include "support/eigen_bridge.hpp"
#include "support/oracles.hpp"

using namespace habdf;
using testing_support::max_abs_diff;
using testing_support::random_matrix;
using testing_support::random_spd;
using testing_support::random_vector;
using testing_support::to_mat;
using testing_support::to_vec;

namespace {

LinearModel random_model(std::mt19937_64& rng, int n, int m, int p) {
  LinearModel model;
  model.A = Matrix::Identity(n, n) + random_matrix(rng, n, n, 0.2);
  model.B = random_matrix(rng, n, m, 1.0);
  model.C = random_matrix(rng, p, n, 1.0);
  model.Rww = random_spd(rng, n, 0.01, 0.5);
  model.Rvv = random_spd(rng, p, 0.1, 2.0);
  return model;
}

double min_eigenvalue(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(KfPredict, IdentityDynamicsLeaveStateUnchanged) {
  LinearModel model{Matrix::Identity(3, 3), Matrix::Zero(3, 1), Matrix::Identity(3, 3),
                    Matrix::Zero(3, 3), Matrix::Identity(3, 3)};
  GaussianState s{vec({1, 2, 3}), Matrix::Identity(3, 3) * 2.0};
  const GaussianState out = kf_predict(s, model);
  EXPECT_EQ(out.mean, s.mean);
  EXPECT_EQ(out.cov, s.cov);
}

TEST(KfPredict, ConstantVelocityEulerStep) {
  LinearModel model{(Matrix(2, 2) << 1, 1, 0, 1).finished(), Matrix::Zero(2, 1),
                    Matrix::Identity(1, 2), Matrix::Zero(2, 2), Matrix::Identity(1, 1)};
  const GaussianState out = kf_predict({vec({0, 1}), Matrix::Identity(2, 2)}, model);
  EXPECT_DOUBLE_EQ(out.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(out.mean[1], 1.0);
}

TEST(KfPredict, MatchesRecursionOracleOverTenSteps) {
  std::mt19937_64 rng(11);
  const LinearModel model = random_model(rng, 4, 2, 2);
  GaussianState s{random_vector(rng, 4, 1.0), random_spd(rng, 4, 0.1, 1.0)};
  oracle::Belief ref{to_vec(s.mean), to_mat(s.cov)};
  for (int k = 0; k < 10; ++k) {
    const Vector u = random_vector(rng, 2, 1.0);
    s = kf_predict(s, model, u);
    ref = oracle::kf_predict(ref, to_mat(model.A), to_mat(model.B), to_vec(u), to_mat(model.Rww));
  }
  const double scale = std::max(1.0, s.cov.cwiseAbs().maxCoeff());
  EXPECT_LE(max_abs_diff(s.mean, ref.mean), 1e-12 * std::max(1.0, s.mean.cwiseAbs().maxCoeff()));
  EXPECT_LE(max_abs_diff(s.cov, ref.cov), 1e-12 * scale);
}

TEST(KfPredict, RejectsDimensionMismatchAndNonFiniteInput) {
  const LinearModel model = build_track_model(1.0, 1.0, 1.0);
  GaussianState small{Vector::Zero(4), Matrix::Identity(4, 4)};
  EXPECT_THROW(kf_predict(small, model), ContractError);

  GaussianState s{Vector::Zero(8), Matrix::Identity(8, 8)};
  EXPECT_THROW(kf_predict(s, model, Vector::Zero(3)), ContractError);

  s.mean[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(kf_predict(s, model), ContractError);

  GaussianState asym{Vector::Zero(8), Matrix::Identity(8, 8)};
  asym.cov(0, 1) = 0.5;
  EXPECT_THROW(kf_predict(asym, model), ContractError);
}

TEST(KfUpdate, ExactMeasurementLimit) {
  const Eigen::Index n = 4;
  const Matrix C = Matrix::Identity(n, n);
  const Matrix R = 1e-12 * Matrix::Identity(n, n);
  const Vector y = vec({3, -1, 7, 2});
  const UpdateResult r = kf_update({Vector::Zero(n), Matrix::Identity(n, n)}, C, R, y);
  EXPECT_LE((r.posterior.mean - y).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(KfUpdate, ScalarGainOneHalf) {
  const UpdateResult r = kf_update({vec({0.0}), Matrix::Identity(1, 1)}, Matrix::Identity(1, 1),
                                   Matrix::Identity(1, 1), vec({2.0}));
  EXPECT_NEAR(r.posterior.mean[0], 1.0, 1e-15);
  EXPECT_NEAR(r.posterior.cov(0, 0), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(r.innovation[0], 2.0);
  EXPECT_DOUBLE_EQ(r.innovation_cov(0, 0), 2.0);
}

TEST(KfUpdate, TrackModelMatchesNaiveInverseOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 3.0);
  const LinearModel model = build_track_model(1.0, 0.5, 9.0);
  GaussianState s{vec({320, 240, 80, 60, 0, 0, 0, 0}), 25.0 * Matrix::Identity(8, 8)};
  oracle::Belief ref{to_vec(s.mean), to_mat(s.cov)};
  const auto A = to_mat(model.A), B = to_mat(model.B), C = to_mat(model.C);
  const auto Q = to_mat(model.Rww), R = to_mat(model.Rvv);
  for (int k = 0; k < 50; ++k) {
    Vector y(4);
    for (int i = 0; i < 4; ++i) y[i] = s.mean[i] + noise(rng);
    s = kf_update(kf_predict(s, model), model, y).posterior;
    ref = oracle::kf_update(oracle::kf_predict(ref, A, B, {0.0}, Q), C, R, to_vec(y));
  }
  EXPECT_LE(max_abs_diff(s.mean, ref.mean), 1e-9);
  EXPECT_LE(max_abs_diff(s.cov, ref.cov), 1e-9);
}

TEST(KfUpdate, SingularInnovationCovarianceIsDegenerate) {
  const GaussianState s{Vector::Zero(2), Matrix::Zero(2, 2)};
  try {
    kf_update(s, Matrix::Identity(2, 2), Matrix::Zero(2, 2), Vector::Zero(2));
    FAIL() << "expected DegenerateError";
  } catch (const DegenerateError& e) {
    EXPECT_GT(e.condition(), kMaxInnovationCondition);
  }
}

TEST(KfUpdate, IllConditionedInnovationCovarianceIsDegenerate) {
  const GaussianState s{Vector::Zero(2), Matrix::Zero(2, 2)};
  const Matrix R = (Matrix(2, 2) << 1.0, 0.0, 0.0, 1e-14).finished();
  EXPECT_THROW(kf_update(s, Matrix::Identity(2, 2), R, Vector::Zero(2)), DegenerateError);
}

TEST(KfUpdate, RejectsWrongMeasurementSize) {
  const LinearModel model = build_track_model(1.0, 1.0, 1.0);
  const GaussianState s{Vector::Zero(8), Matrix::Identity(8, 8)};
  EXPECT_THROW(kf_update(s, model, Vector::Zero(3)), ContractError);
}

TEST(TrackModel, ConstantVelocityCoupling) {
  const LinearModel m = build_track_model(1.0, 1.0, 4.0);
  EXPECT_EQ(m.A.rows(), 8);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(m.A(i, i + 4), 1.0);
  EXPECT_DOUBLE_EQ(m.A(0, 4), 1.0);
  EXPECT_TRUE(m.B.isZero());
  EXPECT_EQ(m.C, (Matrix(4, 8) << Matrix::Identity(4, 4), Matrix::Zero(4, 4)).finished());
  EXPECT_EQ(m.Rvv, 4.0 * Matrix::Identity(4, 4));
}

TEST(TrackModel, ZeroAccelerationVarianceGivesZeroProcessNoise) {
  EXPECT_TRUE(build_track_model(2.0, 0.0, 1.0).Rww.isZero());
}

TEST(TrackModel, ProcessNoiseMatchesDiscretizationOracle) {
  // A constant unit acceleration held over one step moves position by
  // integral_0^dt s ds and velocity by integral_0^dt ds. Those displacements,
  // integrated numerically, form the noise gain G; Rww = q G G'.
  for (double dt : {1.0, 0.5, 2.0}) {
    const double q = 1.0 + dt;
    const double dpos = oracle::simpson([](double s) { return s; }, 0.0, dt, 1000);
    const double dvel = oracle::simpson([](double) { return 1.0; }, 0.0, dt, 1000);
    const LinearModel m = build_track_model(dt, q, 1.0);
    for (int axis = 0; axis < 4; ++axis) {
      EXPECT_NEAR(m.Rww(axis, axis), q * dpos * dpos, 1e-12);
      EXPECT_NEAR(m.Rww(axis, axis + 4), q * dpos * dvel, 1e-12);
      EXPECT_NEAR(m.Rww(axis + 4, axis), q * dpos * dvel, 1e-12);
      EXPECT_NEAR(m.Rww(axis + 4, axis + 4), q * dvel * dvel, 1e-12);
      for (int other = 0; other < 4; ++other) {
        if (other != axis) EXPECT_EQ(m.Rww(axis, other), 0.0);
      }
    }
  }
}

TEST(TrackModel, RejectsNonPositiveStep) {
  EXPECT_THROW(build_track_model(0.0, 1.0, 1.0), ContractError);
  EXPECT_THROW(build_track_model(-1.0, 1.0, 1.0), ContractError);
  EXPECT_THROW(build_track_model(1.0, -1.0, 1.0), ContractError);
}

TEST(FilterProperties, CovarianceStaysSymmetricPsdOverRandomSequences) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const int p = 1 + static_cast<int>(rng() % n);
    const LinearModel model = random_model(rng, n, 1, p);
    GaussianState s{random_vector(rng, n, 5.0), random_spd(rng, n, 1e-3, 10.0)};
    for (int k = 0; k < 20; ++k) {
      s = kf_predict(s, model, random_vector(rng, 1, 1.0));
      s = kf_update(s, model, random_vector(rng, p, 5.0)).posterior;
      ASSERT_LE((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff(), 1e-9);
      ASSERT_GE(min_eigenvalue(s.cov), -1e-9);
    }
  }
}

TEST(FilterProperties, UpdateNeverIncreasesTraceWhenFullyObserved) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const GaussianState prior{random_vector(rng, n, 3.0), random_spd(rng, n, 1e-2, 20.0)};
    const Matrix R = random_spd(rng, n, 1e-2, 20.0);
    const UpdateResult r = kf_update(prior, Matrix::Identity(n, n), R, random_vector(rng, n, 3.0));
    ASSERT_LE(r.posterior.cov.trace(), prior.cov.trace() + 1e-12);
  }
}

TEST(FilterProperties, ScalarFilterAgreesWithGridBayes) {
  std::mt19937_64 rng(99);
  for (int seq = 0; seq < 3; ++seq) {
    const double a = 0.95, q = 0.3, r = 0.8;
    std::normal_distribution<double> w(0.0, std::sqrt(q)), v(0.0, std::sqrt(r));
    double x = 0.5;
    oracle::Vec ys;
    for (int t = 0; t < 20; ++t) {
      x = a * x + w(rng);
      ys.push_back(x + v(rng));
    }
    const oracle::Vec grid = oracle::grid_filter(0.0, 1.0, a, q, r, ys, -15.0, 15.0, 1500);

    const LinearModel model{Matrix::Constant(1, 1, a), Matrix::Zero(1, 1), Matrix::Identity(1, 1),
                            Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, r)};
    GaussianState s{Vector::Zero(1), Matrix::Identity(1, 1)};
    for (std::size_t t = 0; t < ys.size(); ++t) {
      s = kf_update(kf_predict(s, model), model, Vector::Constant(1, ys[t])).posterior;
      EXPECT_NEAR(s.mean[0], grid[t], 1e-3) << "step " << t;
    }
  }
}
