#include "hfq/acquisition/greedy.hpp"
#include "hfq/acquisition/marginal.hpp"
#include "hfq/acquisition/oracle.hpp"
#include "hfq/acquisition/query.hpp"
#include "hfq/acquisition/retrain.hpp"
#include "hfq/baselines.hpp"
#include "hfq/multinomial.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace hfq {
namespace {

using testing::error_code_of;
using testing::random_binary;
using testing::random_conditionals;
using testing::random_joint;
using testing::ref_entropy;
using testing::ref_marginal;

struct Instance {
  JointModel model;
  ConditionalModels cond;
  Vector xm;
  Vector xh;
};

Instance random_instance(std::size_t dm, std::size_t dh, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  Instance in{random_joint(dm, dh, k, rng), random_conditionals(dm, dh, rng), {}, {}};
  in.xm = random_binary(dm, rng);
  in.xh = random_binary(dh, rng);
  return in;
}

std::vector<int> values_of(const AnswerSet& a) { return a.raw(); }

TEST(AnswerSet, Errors) {
  AnswerSet a(3);
  a.set(1, 1);
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(error_code_of([&] { a.set(3, 0); }), ErrorCode::invalid_input);
  EXPECT_EQ(error_code_of([&] { a.set(0, 2); }), ErrorCode::invalid_answer);
  EXPECT_EQ(error_code_of([&] { a.set(1, 0); }), ErrorCode::conflict);
  EXPECT_EQ(a.dims(), std::vector<std::size_t>{1});
  EXPECT_EQ(a.mask(2).popcount(), 1u);
  EXPECT_EQ(error_code_of([&] { a.mask(0).validate(); }), ErrorCode::invalid_input);
}

TEST(PredictMarginal, AllAnsweredEqualsFullPrediction) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto in = random_instance(4, 6, 3, s);
    AnswerSet all(6);
    for (std::size_t d = 0; d < 6; ++d) all.set(d, static_cast<int>(in.xh(static_cast<Eigen::Index>(d))));
    const Vector full = predict_proba(in.model, in.xm, in.xh);
    const Vector ex = predict_marginal(in.model, in.cond, in.xm, all, MarginalMode::exact());
    const Vector mc = predict_marginal(in.model, in.cond, in.xm, all, MarginalMode::monte_carlo(50, s));
    EXPECT_LT((ex - full).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((mc - full).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PredictMarginal, TwoTermExpectation) {
  Rng rng(3);
  JointModel m = random_joint(2, 1, 3, rng);
  ConditionalModels c = random_conditionals(2, 1, rng);
  c.weights.setZero();
  c.intercepts(0) = std::log(0.3 / 0.7);
  const Vector xm = Vector::Ones(2);
  const Vector one = Vector::Ones(1), zero = Vector::Zero(1);
  const Vector expected = 0.3 * predict_proba(m, xm, one) + 0.7 * predict_proba(m, xm, zero);
  const Vector got = predict_marginal(m, c, xm, AnswerSet(1), MarginalMode::exact());
  EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PredictMarginal, ExactMatchesEnumerationOracle) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto in = random_instance(5, 9, 4, 100 + s);
    AnswerSet a(9);
    Rng rng(s);
    for (std::size_t d = 0; d < 9; ++d) {
      if (rng.bernoulli(0.3)) a.set(d, rng.bernoulli(0.5));
    }
    const Vector got = predict_marginal(in.model, in.cond, in.xm, a, MarginalMode::exact());
    const Vector ref = ref_marginal(in.model, in.cond, in.xm, values_of(a));
    EXPECT_LT((got - ref).cwiseAbs().maxCoeff(), 1e-12) << "instance " << s;
    EXPECT_NEAR(got.sum(), 1.0, 1e-12);
  }
}

TEST(PredictMarginal, MonteCarloCloseToExact) {
  const auto in = random_instance(5, 8, 4, 77);
  const Vector ex = predict_marginal(in.model, in.cond, in.xm, AnswerSet(8), MarginalMode::exact());
  const Vector mc = predict_marginal(in.model, in.cond, in.xm, AnswerSet(8), MarginalMode::monte_carlo(5000, 9));
  EXPECT_LE(testing::total_variation(ex, mc), 0.02);
}

TEST(PredictMarginal, MonteCarloErrorShrinksWithSamples) {
  const std::vector<std::size_t> sizes = {10, 100, 1000, 5000};
  std::vector<std::vector<double>> tv(sizes.size());
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto in = random_instance(4, 8, 3, 500 + s);
    const Vector ex = predict_marginal(in.model, in.cond, in.xm, AnswerSet(8), MarginalMode::exact());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const Vector mc =
          predict_marginal(in.model, in.cond, in.xm, AnswerSet(8), MarginalMode::monte_carlo(sizes[i], s));
      tv[i].push_back(testing::total_variation(ex, mc));
    }
  }
  double prev = 1.0;
  for (auto& v : tv) {
    std::nth_element(v.begin(), v.begin() + 25, v.end());
    EXPECT_LE(v[25], prev);
    prev = v[25];
  }
}

TEST(PredictMarginal, MonteCarloIsReproducible) {
  const auto in = random_instance(4, 10, 3, 5);
  const auto mode = MarginalMode::monte_carlo(300, 42);
  const Vector a = predict_marginal(in.model, in.cond, in.xm, AnswerSet(10), mode);
  const Vector b = predict_marginal(in.model, in.cond, in.xm, AnswerSet(10), mode);
  EXPECT_TRUE(a == b);
  const Vector c = predict_marginal(in.model, in.cond, in.xm, AnswerSet(10), mode.derived(1));
  EXPECT_FALSE(a == c);
}

TEST(PredictMarginal, CapacityAndInputErrors) {
  const auto in = random_instance(3, 21, 2, 1);
  EXPECT_EQ(error_code_of([&] {
              predict_marginal(in.model, in.cond, in.xm, AnswerSet(21), MarginalMode::exact());
            }),
            ErrorCode::capacity);
  AnswerSet one(21);
  one.set(0, 1);
  EXPECT_EQ(error_code_of([&] { predict_marginal(in.model, in.cond, in.xm, one, MarginalMode::exact()); }),
            std::nullopt);
  EXPECT_EQ(error_code_of([&] {
              predict_marginal(in.model, in.cond, in.xm, AnswerSet(5), MarginalMode::exact());
            }),
            ErrorCode::invalid_input);
  EXPECT_EQ(error_code_of([&] {
              predict_marginal(in.model, in.cond, in.xm, AnswerSet(21), MarginalMode::monte_carlo(0, 0));
            }),
            ErrorCode::invalid_input);
}

TEST(ExpectedEntropy, IrrelevantCandidateLeavesEntropyUnchanged) {
  auto in = random_instance(3, 5, 3, 8);
  in.model.theta_h.col(2).setZero();
  const AnswerSet none(5);
  const double h = ref_entropy(predict_marginal(in.model, in.cond, in.xm, none, MarginalMode::exact()));
  EXPECT_NEAR(expected_entropy_after(in.model, in.cond, in.xm, none, 2, MarginalMode::exact()), h, 1e-12);
}

TEST(ExpectedEntropy, DeterministicConditionalTakesOneBranch) {
  auto in = random_instance(3, 5, 3, 9);
  in.cond.weights.row(1).setZero();
  in.cond.intercepts(1) = 800.0;  // sigmoid == 1 in double precision
  AnswerSet none(5), with(5);
  with.set(1, 1);
  const double h1 = ref_entropy(predict_marginal(in.model, in.cond, in.xm, with, MarginalMode::exact()));
  EXPECT_NEAR(expected_entropy_after(in.model, in.cond, in.xm, none, 1, MarginalMode::exact()), h1, 1e-12);
}

TEST(ExpectedEntropy, JensenGapAndOracleAgreement) {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto in = random_instance(4, 7, 4, 1000 + s);
    AnswerSet a(7);
    if (s % 2) a.set(s % 7, 1);
    const double h = ref_entropy(predict_marginal(in.model, in.cond, in.xm, a, MarginalMode::exact()));
    for (std::size_t d = 0; d < 7; ++d) {
      if (a.contains(d)) continue;
      const double e = expected_entropy_after(in.model, in.cond, in.xm, a, d, MarginalMode::exact());
      EXPECT_GE(e, 0.0);
      EXPECT_LE(e, h + 1e-9);
      EXPECT_NEAR(e, testing::ref_expected_entropy(in.model, in.cond, in.xm, values_of(a), d), 1e-12);
    }
  }
}

TEST(ExpectedEntropy, AnsweredCandidateIsInvalid) {
  const auto in = random_instance(3, 4, 2, 2);
  AnswerSet a(4);
  a.set(0, 1);
  EXPECT_EQ(error_code_of([&] { expected_entropy_after(in.model, in.cond, in.xm, a, 0, MarginalMode::exact()); }),
            ErrorCode::invalid_input);
}

TEST(CandidateTable, MatchesSingleCandidateEvaluation) {
  const auto in = random_instance(4, 9, 3, 4);
  const Marginalizer mz(in.model, in.cond, in.xm);
  AnswerSet a(9);
  a.set(3, 0);
  for (const auto& mode : {MarginalMode::exact(), MarginalMode::monte_carlo(400, 12)}) {
    const auto table = mz.candidate_table(a, mode);
    ASSERT_EQ(table.size(), 8u);
    for (const auto& c : table) {
      EXPECT_NEAR(c.expected_entropy, mz.expected_entropy_after(a, c.dimension, mode), 1e-12);
    }
  }
}

TEST(Greedy, ZeroBudget) {
  const auto in = random_instance(3, 5, 3, 10);
  const auto mode = MarginalMode::exact();
  const auto r = greedy_acquire(in.model, in.cond, in.xm, oracle_responder(in.xh), 0, mode);
  EXPECT_EQ(r.mask.popcount(), 0u);
  EXPECT_TRUE(r.trace.steps.empty());
  EXPECT_LT((r.trace.initial_prediction -
             predict_marginal(in.model, in.cond, in.xm, AnswerSet(5), mode))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

TEST(Greedy, FullBudgetRecoversFullPrediction) {
  for (const auto& mode : {MarginalMode::exact(), MarginalMode::monte_carlo(200, 3)}) {
    const auto in = random_instance(3, 6, 3, 11);
    const auto r = greedy_acquire(in.model, in.cond, in.xm, oracle_responder(in.xh), 6, mode);
    EXPECT_EQ(r.mask.popcount(), 6u);
    EXPECT_LT((r.trace.steps.back().prediction - predict_proba(in.model, in.xm, in.xh)).cwiseAbs().maxCoeff(),
              1e-12);
    auto order = r.trace.query_order();
    std::sort(order.begin(), order.end());
    EXPECT_EQ(std::unique(order.begin(), order.end()), order.end());
  }
}

TEST(Greedy, BudgetAboveHumanDimIsClampedWithWarning) {
  const auto in = random_instance(3, 4, 2, 12);
  const auto r = greedy_acquire(in.model, in.cond, in.xm, oracle_responder(in.xh), 9, MarginalMode::exact());
  EXPECT_EQ(r.mask.popcount(), 4u);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Greedy, NonBinaryResponderIsInvalidAnswer) {
  const auto in = random_instance(3, 4, 2, 13);
  EXPECT_EQ(error_code_of([&] {
              greedy_acquire(in.model, in.cond, in.xm, [](std::size_t) { return 7; }, 2, MarginalMode::exact());
            }),
            ErrorCode::invalid_answer);
}

TEST(Greedy, EachStepIsThePerStepArgmin) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const std::size_t dh = 3 + s % 6;
    const auto in = random_instance(4, dh, 3, 2000 + s);
    const auto r = greedy_acquire(in.model, in.cond, in.xm, oracle_responder(in.xh), dh, MarginalMode::exact());
    std::vector<int> values(dh, -1);
    for (const auto& step : r.trace.steps) {
      std::size_t best = dh;
      double best_e = 0;
      for (std::size_t d = 0; d < dh; ++d) {
        if (values[d] >= 0) continue;
        const double e = testing::ref_expected_entropy(in.model, in.cond, in.xm, values, d);
        if (best == dh || e < best_e - 1e-12) {
          best = d;
          best_e = e;
        }
      }
      EXPECT_EQ(step.dimension, best) << "instance " << s;
      double table_min = step.candidates.front().expected_entropy;
      for (const auto& c : step.candidates) table_min = std::min(table_min, c.expected_entropy);
      const auto chosen = std::find_if(step.candidates.begin(), step.candidates.end(),
                                       [&](const CandidateScore& c) { return c.dimension == step.dimension; });
      ASSERT_NE(chosen, step.candidates.end());
      EXPECT_LE(chosen->expected_entropy, table_min + kEntropyTieTolerance);
      values[step.dimension] = step.answer;
      EXPECT_EQ(step.answer, static_cast<int>(in.xh(static_cast<Eigen::Index>(step.dimension))));
    }
  }
}

TEST(Greedy, TiesGoToLowestIndex) {
  Rng rng(1);
  JointModel m = random_joint(2, 4, 3, rng);
  m.theta_h.setZero();  // every candidate has the same expected entropy
  const ConditionalModels c = random_conditionals(2, 4, rng);
  const auto r = greedy_acquire(m, c, Vector::Ones(2), oracle_responder(Vector::Zero(4)), 4, MarginalMode::exact());
  EXPECT_EQ(r.trace.query_order(), (std::vector<std::size_t>{0, 1, 2, 3}));
}

Dataset instance_dataset(const Instance& in, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.space = in.model.space;
  const auto dm = in.model.theta_m.cols(), dh = in.model.theta_h.cols();
  d.x_machine.resize(static_cast<Eigen::Index>(n), dm);
  d.x_human.resize(static_cast<Eigen::Index>(n), dh);
  for (std::size_t i = 0; i < n; ++i) {
    d.x_machine.row(static_cast<Eigen::Index>(i)) = random_binary(static_cast<std::size_t>(dm), rng).transpose();
    d.x_human.row(static_cast<Eigen::Index>(i)) = random_binary(static_cast<std::size_t>(dh), rng).transpose();
    d.labels.push_back(static_cast<int>(i % d.space.num_classes()));
  }
  return d;
}

TEST(TrainMasks, PopcountAndNesting) {
  const auto in = random_instance(3, 12, 3, 14);
  const Dataset d = instance_dataset(in, 25, 1);
  const auto mode = MarginalMode::monte_carlo(200, 5);
  const auto q10 = compute_train_masks(in.model, in.cond, d, 10, mode, 1);
  const auto q5 = compute_train_masks(in.model, in.cond, d, 5, mode, 1);
  EXPECT_TRUE((q10.mask(0).array() == 0).all());
  for (std::size_t b : {1u, 5u, 10u}) {
    const Matrix m = q10.mask(b);
    for (Eigen::Index r = 0; r < m.rows(); ++r) EXPECT_EQ(m.row(r).sum(), static_cast<double>(b));
  }
  EXPECT_TRUE(q5.mask(5) == q10.mask(5));
  for (std::size_t r = 0; r < q5.orders.size(); ++r) {
    EXPECT_TRUE(std::equal(q5.orders[r].begin(), q5.orders[r].end(), q10.orders[r].begin()));
  }
  EXPECT_EQ(error_code_of([&] { q5.mask(6); }), ErrorCode::invalid_input);
}

TEST(TrainMasks, ThreadCountDoesNotChangeResult) {
  const auto in = random_instance(3, 8, 3, 15);
  const Dataset d = instance_dataset(in, 30, 2);
  const auto mode = MarginalMode::monte_carlo(100, 6);
  EXPECT_EQ(compute_train_masks(in.model, in.cond, d, 4, mode, 1).orders,
            compute_train_masks(in.model, in.cond, d, 4, mode, 3).orders);
}

std::vector<Hyperparameters> small_grid() {
  Hyperparameters a, b;
  a.inverse_reg_strength = 1.0;
  b.inverse_reg_strength = 10.0;
  return {a, b};
}

TEST(RetrainMasked, AllOnesMaskMatchesAllFeaturesModel) {
  const Dataset train = testing::random_dataset(150, 3, 4, 3, 31);
  const Dataset valid = testing::random_dataset(60, 3, 4, 3, 32);
  const auto grid = small_grid();
  const Matrix ones_t = Matrix::Ones(150, 4), ones_v = Matrix::Ones(60, 4);
  const auto masked = retrain_masked(train, ones_t, valid, ones_v, grid, 4, 7);
  const auto joint = train_all_features(train, valid, grid, 7);
  EXPECT_TRUE(masked.theta_m_bar == joint.theta_m);
  EXPECT_TRUE(masked.theta_h_bar == joint.theta_h);
  EXPECT_TRUE(masked.phi_bar == joint.phi);
  AnswerSet all(4);
  const Vector xm = train.x_machine.row(0).transpose(), xh = train.x_human.row(0).transpose();
  for (std::size_t d = 0; d < 4; ++d) all.set(d, static_cast<int>(xh(static_cast<Eigen::Index>(d))));
  EXPECT_LT((predict_zero(masked, xm, all) - predict_proba(joint, xm, xh)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RetrainMasked, AllZeroMaskLeavesHumanWeightsAtZero) {
  const Dataset train = testing::random_dataset(150, 3, 4, 3, 33);
  const Dataset valid = testing::random_dataset(60, 3, 4, 3, 34);
  const auto masked =
      retrain_masked(train, Matrix::Zero(150, 4), valid, Matrix::Zero(60, 4), small_grid(), 0, 1);
  EXPECT_EQ(masked.theta_h_bar.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PredictZero, UnansweredDimensionsDoNotMatter) {
  Rng rng(5);
  MaskedModel m;
  m.theta_m_bar = Eigen::MatrixXd::Random(3, 2);
  m.theta_h_bar = Eigen::MatrixXd::Random(3, 4);
  m.phi_bar = Vector::Random(3);
  const Vector xm = Vector::Ones(2);
  const Vector empty = predict_zero(m, xm, AnswerSet(4));
  EXPECT_LT((empty - testing::ref_softmax(m.theta_m_bar * xm + m.phi_bar)).cwiseAbs().maxCoeff(), 1e-15);
  AnswerSet a(4);
  a.set(1, 1);
  const Vector p = predict_zero(m, xm, a);
  Vector xh = Vector::Zero(4);
  xh(1) = 1;
  EXPECT_LT((p - testing::ref_softmax(m.theta_m_bar * xm + m.theta_h_bar * xh + m.phi_bar)).cwiseAbs().maxCoeff(),
            1e-15);
  EXPECT_EQ(error_code_of([&] { predict_zero(m, Vector::Ones(3), a); }), ErrorCode::invalid_input);
  EXPECT_EQ(error_code_of([&] { predict_zero(m, xm, AnswerSet(5)); }), ErrorCode::invalid_input);
}

TEST(Oracle, ZeroAndFullBudget) {
  const auto in = random_instance(3, 6, 3, 40);
  const auto zero = brute_force_best_mask(in.model, in.cond, in.xm, in.xh, 1, 0);
  EXPECT_EQ(zero.mask.popcount(), 0u);
  const auto full = brute_force_best_mask(in.model, in.cond, in.xm, in.xh, 1, 6);
  QueryMask all(6, 6);
  std::fill(all.bits.begin(), all.bits.end(), 1);
  EXPECT_LE(full.loss, marginal_loss(in.model, in.cond, in.xm, in.xh, 1, all) + 1e-12);
  EXPECT_NEAR(full.loss, marginal_loss(in.model, in.cond, in.xm, in.xh, 1, full.mask), 1e-12);
}

TEST(Oracle, NeverWorseThanGreedy) {
  for (std::uint64_t s = 0; s < 120; ++s) {
    const std::size_t dh = 3 + s % 5;
    const std::size_t budget = 1 + s % 3;
    const auto in = random_instance(3, dh, 3, 3000 + s);
    const int label = static_cast<int>(s % 3);
    const auto greedy =
        greedy_acquire(in.model, in.cond, in.xm, oracle_responder(in.xh), budget, MarginalMode::exact());
    const auto best = brute_force_best_mask(in.model, in.cond, in.xm, in.xh, label, budget);
    EXPECT_LE(best.mask.popcount(), budget);
    EXPECT_GE(marginal_loss(in.model, in.cond, in.xm, in.xh, label, greedy.mask), best.loss - 1e-12);
  }
}

TEST(Oracle, CapacityAboveFifteen) {
  const auto in = random_instance(2, 16, 2, 41);
  EXPECT_EQ(error_code_of([&] { brute_force_best_mask(in.model, in.cond, in.xm, in.xh, 0, 1); }),
            ErrorCode::capacity);
}

}  // namespace
}  // namespace hfq
