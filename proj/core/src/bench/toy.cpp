#include "hfq/bench/toy.hpp"

#include "hfq/error.hpp"
#include "hfq/multinomial.hpp"

#include <algorithm>
#include <set>

namespace hfq {
namespace {

double feature_value(const Dataset& d, std::size_t row, std::size_t feature) {
  const auto r = static_cast<Eigen::Index>(row);
  return feature == 0 ? d.x_machine(r, 0) : d.x_human(r, 0);
}

void score(ThresholdRule& rule, const Dataset& d) {
  rule.correct = 0;
  rule.errors.clear();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int pred = (feature_value(d, i, rule.feature) > rule.threshold) == rule.above ? 1 : 0;
    if (pred == d.labels[i]) {
      ++rule.correct;
    } else {
      rule.errors.push_back(i);
    }
  }
}

void check_toy_shape(const Dataset& d) {
  require(d.space.machine_dim() == 1 && d.space.human_dim() == 1 && d.space.num_classes() == 2,
          ErrorCode::invalid_input, "toy analysis needs one machine feature, one human feature, two classes");
}

}  // namespace

ThresholdRule fit_single_feature_rule(const Dataset& data, std::size_t feature) {
  check_toy_shape(data);
  require(feature <= 1, ErrorCode::invalid_input, "feature must be 0 or 1");
  const Matrix x = feature == 0 ? data.x_machine : data.x_human;
  Hyperparameters h;
  h.penalty = Penalty::none;
  const auto model = fit_multinomial(x, data.labels, 2, h, 0);
  // logit difference (class 1 - class 0) = a * v + c.
  const double a = model.weights(1, 0) - model.weights(0, 0);
  const double c = model.bias(1) - model.bias(0);
  require(a != 0.0, ErrorCode::degenerate_labels, "fitted rule ignores the feature");
  ThresholdRule rule;
  rule.feature = feature;
  rule.threshold = -c / a;
  rule.above = a > 0.0;
  score(rule, data);
  return rule;
}

std::vector<ThresholdRule> enumerate_threshold_rules(const Dataset& data, std::size_t feature) {
  check_toy_shape(data);
  std::set<double> values;
  for (std::size_t i = 0; i < data.size(); ++i) values.insert(feature_value(data, i, feature));
  std::vector<double> cuts;
  cuts.push_back(*values.begin() - 1.0);
  for (auto it = values.begin(); std::next(it) != values.end(); ++it) cuts.push_back(0.5 * (*it + *std::next(it)));
  cuts.push_back(*values.rbegin() + 1.0);
  std::vector<ThresholdRule> out;
  for (double t : cuts) {
    for (bool above : {true, false}) {
      ThresholdRule r;
      r.feature = feature;
      r.threshold = t;
      r.above = above;
      score(r, data);
      out.push_back(std::move(r));
    }
  }
  return out;
}

ToyReport analyze_toy(const Dataset& toy, std::size_t weight_grid) {
  check_toy_shape(toy);
  require(weight_grid >= 2, ErrorCode::invalid_input, "weight grid needs at least two points");
  ToyReport rep;
  rep.num_points = toy.size();

  Hyperparameters h;
  h.penalty = Penalty::l2;
  h.inverse_reg_strength = 100.0;
  const auto joint = fit_multinomial(toy.joint_features(), toy.labels, 2, h, 0);
  const auto pred = predict_labels(joint, toy.joint_features());
  for (std::size_t i = 0; i < toy.size(); ++i) rep.joint_correct += pred[i] == toy.labels[i];

  rep.machine_rule = fit_single_feature_rule(toy, 0);
  rep.human_rule = fit_single_feature_rule(toy, 1);
  rep.identical_errors = rep.machine_rule.errors == rep.human_rule.errors;

  auto hard = [&](const ThresholdRule& r, std::size_t i) {
    return (feature_value(toy, i, r.feature) > r.threshold) == r.above ? 1.0 : 0.0;
  };
  std::vector<std::size_t> shared;
  std::set_intersection(rep.machine_rule.errors.begin(), rep.machine_rule.errors.end(),
                        rep.human_rule.errors.begin(), rep.human_rule.errors.end(), std::back_inserter(shared));
  for (std::size_t g = 0; g < weight_grid; ++g) {
    const double w = static_cast<double>(g) / static_cast<double>(weight_grid - 1);
    ++rep.mixtures_checked;
    bool fixes = false;
    for (auto i : shared) {
      const double mix = w * hard(rep.machine_rule, i) + (1.0 - w) * hard(rep.human_rule, i);
      fixes |= (mix > 0.5 ? 1 : 0) == toy.labels[i];
    }
    rep.mixtures_fixing_any_shared_error += fixes;
  }

  for (const auto& r : enumerate_threshold_rules(toy, 0)) {
    rep.best_machine_threshold_correct = std::max(rep.best_machine_threshold_correct, r.correct);
  }
  for (const auto& r : enumerate_threshold_rules(toy, 1)) {
    rep.best_human_threshold_correct = std::max(rep.best_human_threshold_correct, r.correct);
  }
  return rep;
}

}  // namespace hfq
