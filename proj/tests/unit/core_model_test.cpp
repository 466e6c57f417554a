#include "hfq/conditional.hpp"
#include "hfq/error.hpp"
#include "hfq/grid_search.hpp"
#include "hfq/metrics.hpp"
#include "hfq/multinomial.hpp"
#include "hfq/optimizer.hpp"
#include "hfq/random.hpp"
#include "hfq/data/synthetic.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace hfq {
namespace {

using testing::make_space;

Dataset copy_feature_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.space = make_space(3, 2, 2);
  d.x_machine.resize(static_cast<Eigen::Index>(n), 3);
  d.x_human.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < 3; ++j) d.x_machine(r, j) = rng.bernoulli(0.5);
    d.x_human(r, 0) = d.x_machine(r, 1);  // copy of machine feature 1
    d.x_human(r, 1) = 1.0;                // constant
    d.labels.push_back(static_cast<int>(d.x_machine(r, 0)));
  }
  return d;
}

TEST(Softmax, UniformForEqualLogits) {
  const Vector p = predict_proba(Eigen::MatrixXd::Zero(4, 3), Vector::Zero(4), Vector::Ones(3));
  for (Eigen::Index k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(p(k), 0.25);
}

TEST(Softmax, LogThreeVersusZero) {
  Vector z(2);
  z << std::log(3.0), 0.0;
  const Vector p = softmax(z);
  EXPECT_NEAR(p(0), 0.75, 1e-15);
  EXPECT_NEAR(p(1), 0.25, 1e-15);
}

TEST(Softmax, ShiftInvarianceAndNormalization) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd w(5, 4);
    Vector b(5), x(4);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = 5 * rng.normal();
    for (Eigen::Index i = 0; i < 5; ++i) b(i) = 5 * rng.normal();
    for (Eigen::Index i = 0; i < 4; ++i) x(i) = rng.normal();
    const double c = 100 * rng.normal();
    const Vector p = predict_proba(w, b, x);
    const Vector q = predict_proba(w, Vector(b.array() + c), x);
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_LE((p - q).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Softmax, ExtremeLogitsStayFinite) {
  Vector z(3);
  z << 1000.0, -1000.0, 0.0;
  const Vector p = softmax(z);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(PredictProba, ShapeMismatchIsInvalidInput) {
  try {
    predict_proba(Eigen::MatrixXd::Zero(2, 3), Vector::Zero(2), Vector::Zero(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_input);
  }
}

TEST(Entropy, NatsOfUniform) {
  EXPECT_NEAR(entropy(Vector::Constant(4, 0.25)), std::log(4.0), 1e-15);
  Vector p(2);
  p << 1.0, 0.0;
  EXPECT_EQ(entropy(p), 0.0);
}

TEST(InstanceWeights, BalancedFormula) {
  const std::vector<int> y = {0, 0, 0, 1};
  const auto w = instance_weights(y, 2, ClassWeighting::balanced);
  EXPECT_DOUBLE_EQ(w[0], 4.0 / (2.0 * 3.0));
  EXPECT_DOUBLE_EQ(w[3], 4.0 / (2.0 * 1.0));
  const auto u = instance_weights(y, 2, ClassWeighting::none);
  EXPECT_EQ(u, std::vector<double>(4, 1.0));
}

// Central finite differences against the analytic gradient.
double gradient_relative_error(const Hyperparameters& h, std::uint64_t seed) {
  Rng rng(seed);
  const Dataset d = testing::random_dataset(60, 4, 3, 3, seed);
  const Matrix x = d.joint_features();
  MultinomialObjective obj(x, d.labels, 3, h);
  Vector params(static_cast<Eigen::Index>(obj.num_params()));
  for (Eigen::Index i = 0; i < params.size(); ++i) params(i) = rng.normal();
  Vector grad;
  obj(params, grad);
  Vector fd(params.size());
  Vector tmp;
  const double eps = 1e-6;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    Vector a = params, b = params;
    a(i) += eps;
    b(i) -= eps;
    fd(i) = (obj(a, tmp) - obj(b, tmp)) / (2 * eps);
  }
  return (grad - fd).norm() / std::max(1e-12, fd.norm());
}

TEST(MultinomialObjective, GradientMatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Hyperparameters h;
    h.penalty = s % 2 == 0 ? Penalty::l2 : Penalty::none;
    h.class_weighting = s % 3 == 0 ? ClassWeighting::balanced : ClassWeighting::none;
    h.inverse_reg_strength = 0.1;
    EXPECT_LT(gradient_relative_error(h, s), 1e-5) << "point " << s;
  }
}

TEST(MultinomialObjective, InterceptIsNotPenalized) {
  const Dataset d = testing::random_dataset(40, 2, 2, 2, 3);
  const Matrix x = d.joint_features();
  Hyperparameters strong;
  strong.inverse_reg_strength = 0.01;
  Hyperparameters none;
  none.penalty = Penalty::none;
  MultinomialObjective a(x, d.labels, 2, strong), b(x, d.labels, 2, none);
  Vector params = Vector::Zero(static_cast<Eigen::Index>(a.num_params()));
  params.tail(2) << 3.0, -3.0;
  Vector ga, gb;
  EXPECT_DOUBLE_EQ(a(params, ga), b(params, gb));
  EXPECT_EQ(a.penalized()[a.num_params() - 1], false);
}

TEST(Optimizer, MinimizesQuadratic) {
  const auto f = [](const Vector& x, Vector& g) {
    g = 2 * (x.array() - 3.0).matrix();
    return (x.array() - 3.0).square().sum();
  };
  const auto r = minimize(f, Vector::Zero(5), 0.0, std::vector<bool>(5, true), {});
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.x.array() - 3.0).abs().maxCoeff(), 1e-5);
}

TEST(Optimizer, L1ShrinksToSoftThreshold) {
  // argmin (x - 3)^2 + 4|x| = 1; penalized coordinate with a small target stays 0.
  const auto f = [](const Vector& x, Vector& g) {
    Vector t(2);
    t << 3.0, 1.0;
    g = 2 * (x - t);
    return (x - t).squaredNorm();
  };
  const auto r = minimize(f, Vector::Zero(2), 4.0, {true, true}, {});
  EXPECT_NEAR(r.x(0), 1.0, 1e-5);
  EXPECT_EQ(r.x(1), 0.0);
}

TEST(FitMultinomial, SeparableOneFeature) {
  Matrix x(2, 1);
  x << 0, 1;
  Hyperparameters h;
  h.penalty = Penalty::none;
  const auto m = fit_multinomial(x, std::vector<int>{0, 1}, 2, h, 0);
  EXPECT_EQ(predict_labels(m, x), (Labels{0, 1}));
}

TEST(FitMultinomial, ToyJointUnpenalizedIsPerfect) {
  const Dataset toy = make_toy_fig1();
  Hyperparameters h;
  h.penalty = Penalty::none;
  const auto m = fit_multinomial(toy.joint_features(), toy.labels, 2, h, 0);
  EXPECT_EQ(predict_labels(m, toy.joint_features()), toy.labels);
}

TEST(FitMultinomial, SingleClassIsDegenerate) {
  Matrix x = Matrix::Zero(3, 2);
  try {
    fit_multinomial(x, std::vector<int>{1, 1, 1}, 2, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_labels);
  }
}

TEST(FitMultinomial, NonFiniteInputIsInvalid) {
  Matrix x = Matrix::Zero(2, 1);
  x(0, 0) = std::nan("");
  try {
    fit_multinomial(x, std::vector<int>{0, 1}, 2, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_input);
  }
}

TEST(FitMultinomial, Deterministic) {
  const Dataset d = testing::random_dataset(200, 5, 4, 3, 11);
  for (auto p : {Penalty::l1, Penalty::l2, Penalty::none}) {
    Hyperparameters h;
    h.penalty = p;
    const auto a = fit_multinomial(d.joint_features(), d.labels, 3, h, 5);
    const auto b = fit_multinomial(d.joint_features(), d.labels, 3, h, 5);
    EXPECT_TRUE(a.weights == b.weights);
    EXPECT_TRUE(a.bias == b.bias);
  }
}

TEST(FitMultinomial, L2NormNonIncreasingAsStrengthGrows) {
  const Dataset d = testing::random_dataset(300, 5, 4, 3, 12);
  double prev = std::numeric_limits<double>::infinity();
  for (double c : {100.0, 10.0, 1.0, 0.1, 0.01}) {
    Hyperparameters h;
    h.inverse_reg_strength = c;
    const double norm = fit_multinomial(d.joint_features(), d.labels, 3, h, 0).weights.norm();
    EXPECT_LE(norm, prev + 1e-9) << "C = " << c;
    prev = norm;
  }
}

TEST(FitMultinomial, ReachesStationaryPoint) {
  const Dataset d = testing::random_dataset(300, 5, 4, 3, 13);
  Hyperparameters h;
  const Matrix x = d.joint_features();
  const auto m = fit_multinomial(x, d.labels, 3, h, 0);
  EXPECT_TRUE(m.converged);
  MultinomialObjective obj(x, d.labels, 3, h);
  Vector g;
  obj(obj.pack(m.weights, m.bias), g);
  EXPECT_LT(g.lpNorm<Eigen::Infinity>(), 1e-4);
}

TEST(FitMultinomial, L1ProducesZeros) {
  Rng rng(4);
  Dataset d = testing::random_dataset(300, 3, 2, 2, 14);
  // Append pure-noise columns.
  Matrix x(d.size(), 13);
  x.leftCols(5) = d.joint_features();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 5; c < 13; ++c) x(r, c) = rng.bernoulli(0.5);
  }
  Hyperparameters h;
  h.penalty = Penalty::l1;
  h.inverse_reg_strength = 0.1;
  const auto m = fit_multinomial(x, d.labels, 2, h, 0);
  EXPECT_GT((m.weights.array() == 0.0).count(), 0);
}

TEST(MacroF1, Examples) {
  EXPECT_DOUBLE_EQ(macro_f1(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 1}, 2), 1.0);
  EXPECT_DOUBLE_EQ(macro_f1(std::vector<int>{0, 0, 1, 1}, std::vector<int>{1, 1, 0, 0}, 2), 0.0);
  EXPECT_NEAR(macro_f1(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 1, 1}, 2), 11.0 / 15.0, 1e-15);
}

TEST(MacroF1, ZeroSupportClassCountsAsZero) {
  // Class 2 never occurs and is never predicted.
  EXPECT_NEAR(macro_f1(std::vector<int>{0, 1}, std::vector<int>{0, 1}, 3), 2.0 / 3.0, 1e-15);
}

TEST(MacroF1, EmptyInputIsInvalid) {
  EXPECT_THROW(macro_f1(std::vector<int>{}, std::vector<int>{}, 2), Error);
  EXPECT_THROW(macro_f1(std::vector<int>{0}, std::vector<int>{0, 1}, 2), Error);
}

TEST(Grid, ThirtyDistinctPointsPenaltyMajor) {
  const auto g = default_grid();
  ASSERT_EQ(g.size(), 30u);
  std::set<std::tuple<int, double, int>> seen;
  for (const auto& h : g) {
    seen.insert({static_cast<int>(h.penalty), h.inverse_reg_strength, static_cast<int>(h.class_weighting)});
    EXPECT_EQ(h.max_iterations, 5000);
    EXPECT_EQ(h.convergence_tolerance, 1e-6);
  }
  EXPECT_EQ(seen.size(), 30u);
  EXPECT_EQ(g.front().penalty, Penalty::l1);
  EXPECT_EQ(g.back().penalty, Penalty::none);
  const std::set<double> strengths = {0.01, 0.1, 1.0, 10.0, 100.0};
  for (const auto& h : g) EXPECT_TRUE(strengths.count(h.inverse_reg_strength));
}

TEST(GridSearch, SinglePointAndTies) {
  const Dataset d = testing::random_dataset(120, 4, 3, 3, 21);
  const Matrix x = d.joint_features();
  Hyperparameters h;
  h.inverse_reg_strength = 10.0;
  auto r = grid_search(x, d.labels, x, d.labels, 3, std::vector<Hyperparameters>{h}, SelectionObjective::macro_f1, 0);
  EXPECT_EQ(r.best, h);
  EXPECT_EQ(r.best_index, 0u);
  // Identical points tie; the first wins.
  Hyperparameters h2 = h;
  auto t = grid_search(x, d.labels, x, d.labels, 3, std::vector<Hyperparameters>{h, h2, h},
                       SelectionObjective::log_loss, 0);
  EXPECT_EQ(t.best_index, 0u);
}

TEST(GridSearch, EmptyGridIsInvalid) {
  const Dataset d = testing::random_dataset(30, 2, 2, 2, 1);
  EXPECT_THROW(grid_search(d.x_machine, d.labels, d.x_machine, d.labels, 2, std::vector<Hyperparameters>{},
                           SelectionObjective::macro_f1, 0),
               Error);
}

TEST(Conditionals, CopyFeatureAndConstantDimension) {
  const Dataset train = copy_feature_data(300, 1);
  const Dataset valid = copy_feature_data(100, 2);
  Hyperparameters weak;
  weak.inverse_reg_strength = 100.0;
  const auto cond = fit_conditionals(train, valid, std::vector<Hyperparameters>{weak}, 0);
  ASSERT_EQ(cond.human_dim(), 2u);
  Vector xm(3);
  xm << 0, 1, 0;
  EXPECT_GE(cond.probability(0, xm), 0.99);
  xm(1) = 0;
  EXPECT_LE(cond.probability(0, xm), 0.01);
  EXPECT_TRUE(cond.bias_only[1]);
  EXPECT_DOUBLE_EQ(cond.probability(1, xm), 1.0 - kConstantFeatureClamp);
}

TEST(Conditionals, OneModelPerDimensionMatchingSigmoid) {
  const Dataset d = testing::random_dataset(200, 4, 6, 2, 5);
  const auto cond = fit_conditionals(d, d, default_grid(), 0);
  EXPECT_EQ(cond.human_dim(), 6u);
  EXPECT_EQ(cond.machine_dim(), 4u);
  const Vector xm = d.x_machine.row(0).transpose();
  const Vector p = cond.probabilities(xm);
  for (std::size_t j = 0; j < 6; ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    EXPECT_NEAR(p(r), testing::ref_sigmoid(cond.weights.row(r).dot(xm) + cond.intercepts(r)), 1e-15);
  }
}

TEST(Types, FeatureSpaceValidation) {
  EXPECT_NO_THROW(make_space(1, 1, 2).validate());
  EXPECT_THROW(make_space(0, 1, 2).validate(), Error);
  EXPECT_THROW(make_space(1, 0, 2).validate(), Error);
  EXPECT_THROW(make_space(1, 1, 1).validate(), Error);
  auto s = make_space(1, 1, 2);
  s.human_names[0] = s.machine_names[0];
  EXPECT_THROW(s.validate(), Error);
}

TEST(Types, DatasetValidation) {
  Dataset d = testing::random_dataset(20, 2, 2, 2, 0);
  EXPECT_NO_THROW(d.validate());
  d.x_human(0, 0) = 0.5;
  EXPECT_THROW(d.validate(), Error);
  d.x_human(0, 0) = 1;
  d.labels[0] = 2;
  EXPECT_THROW(d.validate(), Error);
}

}  // namespace
}  // namespace hfq
