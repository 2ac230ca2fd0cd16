#include "oracles.hpp"

#include "sroa/jacobi.hpp"
#include "sroa/perturbation.hpp"
#include "sroa/whitening.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>

using namespace sroa;

namespace {

TopicModelParams two_topic_identity() {
  TopicModelParams p;
  p.weights = Vector::Constant(2, 0.5);
  p.topic_vectors = Matrix::Identity(2, 2);
  return p;
}

Matrix random_symmetric_matrix(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return 0.5 * (a + a.transpose());
}

}  // namespace

TEST(Jacobi, MatchesSelfAdjointSolver) {
  for (int n : {1, 2, 3, 5, 10, 20}) {
    const Matrix a = random_symmetric_matrix(n, static_cast<std::uint64_t>(n));
    const auto ours = jacobi_eigen(a);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(ours.values[i], ref.eigenvalues()[n - 1 - i], 1e-12);
    EXPECT_LE((a * ours.vectors - ours.vectors * ours.values.asDiagonal()).norm(), 1e-12 * (1.0 + a.norm()));
    EXPECT_LE((ours.vectors.transpose() * ours.vectors - Matrix::Identity(n, n)).norm(), 1e-12);
    EXPECT_NEAR(symmetric_spectral_norm(a), ref.eigenvalues().cwiseAbs().maxCoeff(), 1e-12);
  }
  Matrix bad(2, 2);
  bad << 1, 2, 0, 1;
  EXPECT_THROW(jacobi_eigen(bad), std::invalid_argument);
}

TEST(Synthesize, TwoTopicIdentity) {
  const auto m = synthesize_moments(two_topic_identity(), 3);
  EXPECT_LE((m.m2 - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
  for (const auto& idx : oracle::all_indices(3, 2)) {
    const bool diag = idx[0] == idx[1] && idx[1] == idx[2];
    EXPECT_EQ(oracle::entry(m.mp, idx), diag ? 0.5 : 0.0);
  }
  EXPECT_FALSE(m.rank_deficient);
}

TEST(Synthesize, SingleTopicIsRankOne) {
  TopicModelParams p;
  p.weights = Vector::Ones(1);
  p.topic_vectors = Matrix(3, 1);
  p.topic_vectors << 0.2, 0.3, 0.5;
  const auto m = synthesize_moments(p, 3);
  EXPECT_LE((m.m2 - p.topic_vectors * p.topic_vectors.transpose()).norm(), 1e-15);
  EXPECT_EQ(numerical_rank(jacobi_eigen(m.m2).values, 1e-10), 1);
}

TEST(Synthesize, SecondMomentSumsToOne) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto p = random_topic_model(3, 6, s);
    const auto m = synthesize_moments(p, 3);
    double total = 0.0;
    for (Eigen::Index i = 0; i < m.m2.rows(); ++i)
      for (Eigen::Index j = 0; j < m.m2.cols(); ++j) total += m.m2(i, j);
    EXPECT_NEAR(total, 1.0, 1e-14);
    double t3 = 0.0;
    for (double x : m.mp.entries()) t3 += x;
    EXPECT_NEAR(t3, 1.0, 1e-14);
  }
}

TEST(Synthesize, FlagsDependentTopics) {
  TopicModelParams p;
  p.weights = Vector::Constant(3, 1.0 / 3.0);
  p.topic_vectors = Matrix(3, 3);
  p.topic_vectors << 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0;
  EXPECT_TRUE(synthesize_moments(p, 3).rank_deficient);
}

TEST(Synthesize, ValidatesParameters) {
  auto p = two_topic_identity();
  p.weights << 0.7, 0.7;
  EXPECT_THROW(synthesize_moments(p, 3), std::invalid_argument);
  p = two_topic_identity();
  p.topic_vectors(0, 0) = 0.9;
  EXPECT_THROW(synthesize_moments(p, 3), std::invalid_argument);
  EXPECT_THROW(synthesize_moments(two_topic_identity(), 2), std::invalid_argument);
}

TEST(Whitener, IsotropicCase) {
  const Matrix w = compute_whitener(0.5 * Matrix::Identity(2, 2), 2);
  EXPECT_LE((w.transpose() * w - 2.0 * Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LE((w.transpose() * (0.5 * Matrix::Identity(2, 2)) * w - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(Whitener, DefiningPropertyOnRandomRankThree) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto m = synthesize_moments(random_topic_model(3, 5, s), 3);
    const Matrix w = compute_whitener(m.m2, 3);
    EXPECT_EQ(w.rows(), 5);
    EXPECT_EQ(w.cols(), 3);
    EXPECT_LE((w.transpose() * m.m2 * w - Matrix::Identity(3, 3)).norm(), 1e-8);
  }
}

TEST(Whitener, RankDeficiencyNamesRank) {
  const auto m = synthesize_moments(random_topic_model(2, 5, 3), 3);
  try {
    compute_whitener(m.m2, 3);
    FAIL() << "expected rank-deficiency error";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.numerical_rank(), 2);
    EXPECT_NE(std::string(e.what()).find("rank 2"), std::string::npos);
  }
  EXPECT_THROW(compute_whitener(Matrix::Identity(2, 2), 3), RankDeficientError);
}

TEST(WhitenAndDecompose, TwoTopicWeights) {
  const auto wd = whiten_and_decompose(synthesize_moments(two_topic_identity(), 3), 2, SolverConfig{});
  ASSERT_EQ(wd.result.pairs.size(), 2u);
  for (const auto& pr : wd.result.pairs) EXPECT_NEAR(pr.weight, std::sqrt(2.0), 1e-10);
  // The whitened tensor is the rotation of sqrt(2) (e_1^3 + e_2^3) through W.
  Matrix v(2, 2);
  v << wd.result.pairs[0].vector, wd.result.pairs[1].vector;
  EXPECT_LE((v.transpose() * v - Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(WhitenAndDecompose, DegreeIdentityOnExactMoments) {
  for (int p : {3, 4}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto params = random_topic_model(3, 5, 40 + s);
      const auto wd = whiten_and_decompose(synthesize_moments(params, p), 3, SolverConfig{});
      const auto truth = whitened_truth(params, wd.whitener, p);
      const auto m = match_to_ground_truth(wd.result, truth, p % 2 == 0);
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_LE(m.weight_errors[j], 1e-6);
        EXPECT_LE(m.vector_errors[j], 1e-6);
        const double w = params.weights[m.permutation[j]];
        EXPECT_NEAR(wd.result.pairs[j].weight, std::pow(w, 1.0 - p / 2.0), 1e-6);
      }
      // Exact whitened vectors are orthonormal.
      Matrix acc = Matrix::Zero(3, 3);
      for (const auto& tp : truth) acc += tp.vector * tp.vector.transpose();
      EXPECT_LE((acc - Matrix::Identity(3, 3)).norm(), 1e-6);
      for (int i = 0; i < 3; ++i) {
        const Vector raw = std::sqrt(params.weights[i]) * (wd.whitener.transpose() * params.topic_vectors.col(i));
        EXPECT_NEAR(raw.norm(), 1.0, 1e-10);
      }
    }
  }
}

TEST(Recover, WeightFromLambda) {
  DecompositionResult r;
  r.order = 3;
  r.dim = 2;
  r.pairs = {{std::sqrt(2.0), Vector::Unit(2, 0)}, {std::sqrt(2.0), Vector::Unit(2, 1)}};
  const Matrix w = std::sqrt(2.0) * Matrix::Identity(2, 2);
  const auto rec = recover_parameters(r, w);
  EXPECT_NEAR(rec.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(rec.weights[1], 0.5, 1e-15);
  // Invertible W: mu = lambda W^{-T} v.
  EXPECT_LE((rec.topic_vectors - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(rec.clip_mass, 0.0);
}

TEST(Recover, NonPositiveLambdaIsFlagged) {
  DecompositionResult r;
  r.order = 3;
  r.dim = 2;
  r.pairs = {{1.0, Vector::Unit(2, 0)}, {-0.5, Vector::Unit(2, 1)}};
  const auto rec = recover_parameters(r, Matrix::Identity(2, 2));
  EXPECT_FALSE(rec.failed[0]);
  EXPECT_TRUE(rec.failed[1]);
}

TEST(Recover, ExactRoundTripTwoTopics) {
  const auto params = two_topic_identity();
  const auto wd = whiten_and_decompose(synthesize_moments(params, 3), 2, SolverConfig{});
  const auto rec = recover_parameters(wd.result, wd.whitener);
  const auto err = compare_parameters(rec, params);
  EXPECT_LE(err.max_weight_error, 1e-8);
  EXPECT_LE(err.max_topic_error, 1e-8);
}

TEST(Recover, ExactRoundTripReproducesMoments) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto params = random_topic_model(4, 7, 90 + s);
    const auto moments = synthesize_moments(params, 3);
    const auto wd = whiten_and_decompose(moments, 4, SolverConfig{});
    const auto rec = recover_parameters(wd.result, wd.whitener);
    const auto err = compare_parameters(rec, params);
    EXPECT_LE(err.max_weight_error, 1e-6);
    EXPECT_LE(err.max_topic_error, 1e-6);
    TopicModelParams back;
    back.weights = rec.weights / rec.weights.sum();
    back.topic_vectors = rec.topic_vectors;
    const auto again = synthesize_moments(back, 3);
    EXPECT_LE((again.m2 - moments.m2).norm(), 1e-6);
    EXPECT_LE(frobenius_norm(subtract(again.mp, moments.mp)), 1e-6);
  }
}

TEST(WhitenAndDecompose, PerturbedMomentWithinBounds) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto params = random_topic_model(3, 5, 200 + s);
    auto moments = synthesize_moments(params, 3);
    const auto noise = generate_perturbation({NoiseKind::gaussian, 1e-4}, 5, 3, 300 + s);
    moments.mp = add(moments.mp, noise);
    const auto wd = whiten_and_decompose(moments, 3, SolverConfig{});
    const auto truth = whitened_truth(params, wd.whitener, 3);
    std::vector<Vector> hints;
    for (const auto& pr : wd.result.pairs) hints.push_back(pr.vector);
    const double eps = operator_norm_estimate(multilinear_transform(noise, wd.whitener), SolverConfig{}, hints);
    GroundTruth gt;
    gt.basis.resize(3, 3);
    for (int i = 0; i < 3; ++i) {
      gt.weights.push_back(truth[static_cast<std::size_t>(i)].weight);
      gt.basis.col(i) = truth[static_cast<std::size_t>(i)].vector;
    }
    const auto rep = evaluate_full(gt, eps, match_to_ground_truth(wd.result, truth, false), 3);
    EXPECT_FALSE(rep.any_violation()) << "seed " << s;
    Matrix acc = Matrix::Zero(3, 3);
    for (const auto& pr : wd.result.pairs) acc += pr.vector * pr.vector.transpose();
    EXPECT_LE((acc - Matrix::Identity(3, 3)).norm(), 50.0 * 3 * eps);
  }
}
