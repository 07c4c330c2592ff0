#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gpcc/gp_prior.hpp"

using namespace gpcc;

namespace {

KernelHyper hyper1(double lambda, double beta, double gamma) {
  KernelHyper h;
  h.lambda = Eigen::VectorXd::Constant(1, lambda);
  h.beta = beta;
  h.gamma = gamma;
  return h;
}

Inputs random_inputs(int n, std::mt19937_64 &gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Inputs z(n, 1);
  for (int i = 0; i < n; ++i) {
    z(i, 0) = u(gen);
  }
  return z;
}

struct DenseReference {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  double pred_mean;
  double pred_var;
};

// Dense Gaussian posterior for prior N(m, K) and sites (T, shift), plus the
// predictive at one query.
DenseReference dense_reference(const Inputs &z, const KernelHyper &h, double m,
                               const Eigen::VectorXd &T,
                               const Eigen::VectorXd &shift,
                               const Eigen::RowVectorXd &query) {
  const Eigen::MatrixXd K = kernel_matrix(z, z, h, true);
  const Eigen::MatrixXd Kinv = K.inverse();
  Eigen::MatrixXd P = Kinv;
  P.diagonal() += T;
  const Eigen::MatrixXd S = P.inverse();
  const Eigen::VectorXd mvec = Eigen::VectorXd::Constant(z.rows(), m);
  DenseReference r;
  r.mean = S * (Kinv * mvec + shift);
  r.var = S.diagonal();
  const Eigen::VectorXd ks = kernel_matrix(z, Inputs(query), h, false).col(0);
  const Eigen::VectorXd a = Kinv * ks;
  r.pred_mean = m + a.dot(r.mean - mvec);
  r.pred_var = h.beta + h.gamma - ks.dot(a) + a.dot(S * a);
  return r;
}

} // namespace

TEST(Kernel, ZeroDistanceAddsNoiseOnDiagonal) {
  Inputs z(1, 1);
  z << 0.3;
  const auto k = kernel_matrix(z, z, hyper1(5.0, 1.0, 0.1), true);
  EXPECT_NEAR(k(0, 0), 1.1, 1e-15);
}

TEST(Kernel, ZeroLambdaGivesConstantEntries) {
  Inputs z(3, 1);
  z << 0.0, 0.5, 2.0;
  const auto k = kernel_matrix(z, z, hyper1(0.0, 0.7, 0.2), true);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_DOUBLE_EQ(k(i, j), i == j ? 0.9 : 0.7);
    }
  }
}

TEST(Kernel, UnitDistanceValue) {
  Inputs a(1, 1);
  Inputs b(1, 1);
  a << 0.0;
  b << 1.0;
  const auto k = kernel_matrix(a, b, hyper1(1.0, 1.0, 0.0), false);
  EXPECT_NEAR(k(0, 0), 0.36787944117144233, 1e-15);
}

TEST(Kernel, DimensionMismatchThrows) {
  Inputs a(2, 1);
  Inputs b(2, 2);
  a.setZero();
  b.setZero();
  EXPECT_THROW(kernel_matrix(a, b, hyper1(1.0, 1.0, 0.0), false), ShapeError);
}

TEST(Kernel, SymmetricAndPsdWithJitter) {
  std::mt19937_64 gen(7);
  const Inputs z = random_inputs(30, gen);
  Eigen::MatrixXd k = kernel_matrix(z, z, hyper1(20.0, 1.3, 0.0), true);
  EXPECT_LE((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  k.diagonal().array() += 1e-8;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(Kernel, LargerLambdaShrinksOffDiagonal) {
  std::mt19937_64 gen(8);
  const Inputs z = random_inputs(10, gen);
  const auto k1 = kernel_matrix(z, z, hyper1(2.0, 1.0, 0.0), false);
  const auto k2 = kernel_matrix(z, z, hyper1(4.0, 1.0, 0.0), false);
  EXPECT_TRUE((k2.array() <= k1.array() + 1e-15).all());
}

TEST(KernelHyper, RejectsInvalid) {
  EXPECT_THROW(hyper1(-1.0, 1.0, 0.0).validate(), DomainError);
  EXPECT_THROW(hyper1(1.0, 0.0, 0.0).validate(), DomainError);
  EXPECT_NO_THROW(hyper1(1.0, 0.0, 0.1).validate());
}

TEST(Fitc, FullRankReproducesKernel) {
  std::mt19937_64 gen(11);
  const Inputs z = random_inputs(15, gen);
  GpPrior prior{0.0, hyper1(10.0, 1.0, 0.05), z};
  const auto f = fitc_decompose(z, prior);
  const auto dense = kernel_matrix(z, z, prior.hyper, true);
  EXPECT_LE((f.dense() - dense).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Fitc, FullRankHasNoDiagonalCorrection) {
  for (double lambda : {1.0, 10.0, 50.0, 200.0}) {
    std::mt19937_64 gen(static_cast<std::uint64_t>(lambda));
    const Inputs z = random_inputs(20, gen);
    GpPrior prior{0.0, hyper1(lambda, 1.3, 0.02), z};
    const auto f = fitc_decompose(z, prior);
    EXPECT_LE((f.D.array() - prior.hyper.gamma).abs().maxCoeff(), 1e-10) << lambda;
  }
}

TEST(Fitc, DiagonalIsExact) {
  std::mt19937_64 gen(12);
  const Inputs z = random_inputs(40, gen);
  GpPrior prior{0.0, hyper1(30.0, 0.8, 0.01), evenly_spaced_pseudo_inputs(z, 10)};
  const auto f = fitc_decompose(z, prior);
  const auto dense = kernel_matrix(z, z, prior.hyper, true);
  EXPECT_LE((f.dense().diagonal() - dense.diagonal()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fitc, LowRankIsPsd) {
  std::mt19937_64 gen(13);
  const Inputs z = random_inputs(40, gen);
  GpPrior prior{0.0, hyper1(50.0, 1.0, 0.0), evenly_spaced_pseudo_inputs(z, 10)};
  const auto f = fitc_decompose(z, prior);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.dense());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
}

TEST(Fitc, DuplicatePseudoInputsAreRejected) {
  Inputs z(3, 1);
  z << 0.1, 0.1, 0.1;
  GpPrior prior{0.0, hyper1(1.0, 1.0, 0.0), z};
  // Identical pseudo-inputs give a rank-one Gram matrix; the jitter keeps the
  // factorization alive, so decomposition succeeds with a valid result.
  EXPECT_NO_THROW(fitc_decompose(z, prior));
  GpPrior bad{0.0, hyper1(1.0, 1.0, 0.0), Inputs(0, 1)};
  EXPECT_THROW(fitc_decompose(z, bad), ShapeError);
}

TEST(PseudoInputs, IndependentOfRowOrder) {
  std::mt19937_64 gen(14);
  Inputs z = random_inputs(25, gen);
  const auto a = evenly_spaced_pseudo_inputs(z, 7);
  Inputs shuffled = z;
  std::vector<int> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  for (int i = 0; i < 25; ++i) {
    shuffled.row(i) = z.row(perm[static_cast<std::size_t>(i)]);
  }
  const auto b = evenly_spaced_pseudo_inputs(shuffled, 7);
  EXPECT_EQ(a, b);
  EXPECT_DOUBLE_EQ(a(0, 0), z.minCoeff());
  EXPECT_DOUBLE_EQ(a(6, 0), z.maxCoeff());
}

TEST(LatentPredict, MatchesDenseReferenceAtFullRank) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 gen(100 + seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Inputs z = random_inputs(5, gen);
    const KernelHyper h = hyper1(1.0 + 9.0 * u(gen), 0.5 + u(gen), 0.02);
    const double m = u(gen) - 0.5;
    GpPrior prior{m, h, z};
    Eigen::VectorXd T(5);
    Eigen::VectorXd shift(5);
    for (int i = 0; i < 5; ++i) {
      T[i] = 3.0 * u(gen) - 0.2;
      shift[i] = 2.0 * u(gen) - 1.0;
    }
    auto fitc = std::make_shared<const FitcFactor>(fitc_decompose(z, prior));
    LatentPosterior q(fitc, m, T, shift);
    Eigen::RowVectorXd query(1);
    query << u(gen);
    const auto ref = dense_reference(z, h, m, T, shift, query);
    EXPECT_LE((q.mean() - ref.mean).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((q.variance() - ref.var).cwiseAbs().maxCoeff(), 1e-6);
    const auto p = latent_predict(q, query);
    EXPECT_NEAR(p.mean, ref.pred_mean, 1e-6);
    EXPECT_NEAR(p.variance, ref.pred_var, 1e-6);
  }
}

TEST(LatentPredict, NoiselessInterpolationAtTrainingPoint) {
  Inputs z(4, 1);
  z << 0.0, 0.3, 0.6, 1.0;
  GpPrior prior{0.2, hyper1(4.0, 1.0, 0.0), z};
  auto fitc = std::make_shared<const FitcFactor>(fitc_decompose(z, prior));
  const Eigen::VectorXd fbar = (Eigen::VectorXd(4) << 0.5, -0.3, 1.1, 0.0).finished();
  const Eigen::VectorXd T = Eigen::VectorXd::Constant(4, 1e12);
  LatentPosterior q(fitc, 0.2, T, (T.array() * fbar.array()).matrix());
  Eigen::RowVectorXd query(1);
  query << 0.3;
  const auto p = latent_predict(q, query);
  EXPECT_NEAR(p.mean, -0.3, 1e-6);
}

TEST(LatentPredict, FarQueryRevertsToPrior) {
  Inputs z(3, 1);
  z << 0.0, 0.5, 1.0;
  GpPrior prior{0.7, hyper1(50.0, 1.5, 0.1), z};
  auto fitc = std::make_shared<const FitcFactor>(fitc_decompose(z, prior));
  LatentPosterior q(fitc, 0.7, Eigen::VectorXd::Constant(3, 2.0),
                    Eigen::VectorXd::Constant(3, 3.0));
  Eigen::RowVectorXd query(1);
  query << 40.0;
  const auto p = latent_predict(q, query);
  EXPECT_NEAR(p.mean, 0.7, 1e-12);
  EXPECT_NEAR(p.variance, 1.6, 1e-12);
}

TEST(LatentPredict, VarianceWithinPriorBounds) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Inputs z = random_inputs(40, gen);
  const KernelHyper h = hyper1(40.0, 1.0, 0.05);
  GpPrior prior{0.0, h, evenly_spaced_pseudo_inputs(z, 8)};
  auto fitc = std::make_shared<const FitcFactor>(fitc_decompose(z, prior));
  Eigen::VectorXd T(40);
  Eigen::VectorXd shift(40);
  for (int i = 0; i < 40; ++i) {
    T[i] = 5.0 * u(gen);
    shift[i] = u(gen) - 0.5;
  }
  LatentPosterior q(fitc, 0.0, T, shift);
  for (int r = 0; r < 200; ++r) {
    Eigen::RowVectorXd query(1);
    query << 2.0 * u(gen) - 0.5;
    const auto p = latent_predict(q, query);
    EXPECT_GE(p.variance, -1e-8);
    EXPECT_LE(p.variance, h.beta + h.gamma + 1e-8);
  }
}

TEST(LatentPredict, QueryDimensionMismatchThrows) {
  Inputs z(3, 1);
  z << 0.0, 0.5, 1.0;
  GpPrior prior{0.0, hyper1(5.0, 1.0, 0.1), z};
  auto fitc = std::make_shared<const FitcFactor>(fitc_decompose(z, prior));
  LatentPosterior q(fitc, 0.0, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3));
  Eigen::RowVectorXd query(2);
  query << 0.1, 0.2;
  EXPECT_THROW(latent_predict(q, query), ShapeError);
}

TEST(LatentPosterior, NormalizerMatchesDenseGaussianIntegral) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Inputs z = random_inputs(6, gen);
  const KernelHyper h = hyper1(8.0, 0.9, 0.03);
  GpPrior prior{0.3, h, z};
  Eigen::VectorXd T(6);
  Eigen::VectorXd shift(6);
  for (int i = 0; i < 6; ++i) {
    T[i] = 2.0 * u(gen);
    shift[i] = u(gen) - 0.5;
  }
  auto fitc = std::make_shared<const FitcFactor>(fitc_decompose(z, prior));
  LatentPosterior q(fitc, 0.3, T, shift);
  // log int N(f | m, K) exp(-f'Tf/2 + shift'f) df in closed form.
  const Eigen::MatrixXd K = kernel_matrix(z, z, h, true);
  const Eigen::VectorXd m = Eigen::VectorXd::Constant(6, 0.3);
  const Eigen::MatrixXd Kinv = K.inverse();
  Eigen::MatrixXd P = Kinv;
  P.diagonal() += T;
  const Eigen::VectorXd eta = Kinv * m + shift;
  const double expected = 0.5 * eta.dot(P.ldlt().solve(eta)) -
                          0.5 * m.dot(Kinv * m) -
                          0.5 * std::log(P.determinant() * K.determinant());
  EXPECT_NEAR(q.log_normalizer_ratio(), expected, 1e-6);
}
