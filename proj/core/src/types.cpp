#include "hfq/types.hpp"

#include "hfq/conditional.hpp"
#include "hfq/error.hpp"

#include <cmath>
#include <set>

namespace hfq {

void FeatureSpace::validate() const {
  require(machine_dim() >= 1, ErrorCode::invalid_input, "feature space needs at least one machine feature");
  require(human_dim() >= 1, ErrorCode::invalid_input, "feature space needs at least one human feature");
  require(num_classes() >= 2, ErrorCode::invalid_input, "feature space needs at least two classes");
  std::set<std::string> seen;
  for (const auto* block : {&machine_names, &human_names}) {
    for (const auto& name : *block) {
      require(seen.insert(name).second, ErrorCode::invalid_input,
              "duplicate feature name '" + name + "'");
    }
  }
}

void Dataset::validate(bool require_all_classes) const {
  space.validate();
  const auto n = static_cast<Eigen::Index>(labels.size());
  require(x_machine.rows() == n && x_human.rows() == n, ErrorCode::invalid_input,
          "feature matrices and labels disagree on the number of instances");
  require(x_machine.cols() == static_cast<Eigen::Index>(space.machine_dim()),
          ErrorCode::invalid_input, "machine block width does not match feature names");
  require(x_human.cols() == static_cast<Eigen::Index>(space.human_dim()),
          ErrorCode::invalid_input, "human block width does not match feature names");
  const int k = static_cast<int>(space.num_classes());
  std::vector<bool> present(space.num_classes(), false);
  for (int y : labels) {
    require(y >= 0 && y < k, ErrorCode::invalid_input, "label index out of range");
    present[static_cast<std::size_t>(y)] = true;
  }
  if (require_all_classes) {
    for (std::size_t c = 0; c < present.size(); ++c) {
      require(present[c], ErrorCode::invalid_input,
              "class '" + space.class_names[c] + "' has no instances");
    }
  }
  for (const Matrix* m : {&x_machine, &x_human}) {
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      const double v = m->data()[i];
      require(std::isfinite(v), ErrorCode::invalid_input, "non-finite feature value");
      if (binary) require(v == 0.0 || v == 1.0, ErrorCode::invalid_input, "feature value is not 0 or 1");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.space = space;
  out.binary = binary;
  out.x_machine.resize(static_cast<Eigen::Index>(rows.size()), x_machine.cols());
  out.x_human.resize(static_cast<Eigen::Index>(rows.size()), x_human.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    require(rows[i] < size(), ErrorCode::invalid_input, "subset row out of range");
    out.x_machine.row(static_cast<Eigen::Index>(i)) = x_machine.row(r);
    out.x_human.row(static_cast<Eigen::Index>(i)) = x_human.row(r);
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

Matrix Dataset::joint_features() const {
  Matrix x(x_machine.rows(), x_machine.cols() + x_human.cols());
  x << x_machine, x_human;
  return x;
}

std::string_view to_string(Penalty p) noexcept {
  switch (p) {
    case Penalty::l1: return "l1";
    case Penalty::l2: return "l2";
    case Penalty::none: return "none";
  }
  return "none";
}

std::string_view to_string(ClassWeighting w) noexcept {
  return w == ClassWeighting::balanced ? "balanced" : "none";
}

Penalty parse_penalty(std::string_view s) {
  if (s == "l1") return Penalty::l1;
  if (s == "l2") return Penalty::l2;
  if (s == "none") return Penalty::none;
  fail(ErrorCode::invalid_input, "unknown penalty '" + std::string(s) + "'");
}

ClassWeighting parse_class_weighting(std::string_view s) {
  if (s == "none") return ClassWeighting::none;
  if (s == "balanced") return ClassWeighting::balanced;
  fail(ErrorCode::invalid_input, "unknown class weighting '" + std::string(s) + "'");
}

std::vector<Hyperparameters> default_grid() {
  std::vector<Hyperparameters> grid;
  for (Penalty p : {Penalty::l1, Penalty::l2, Penalty::none}) {
    for (double c : {0.01, 0.1, 1.0, 10.0, 100.0}) {
      for (ClassWeighting w : {ClassWeighting::none, ClassWeighting::balanced}) {
        Hyperparameters h;
        h.penalty = p;
        h.inverse_reg_strength = c;
        h.class_weighting = w;
        grid.push_back(h);
      }
    }
  }
  return grid;
}

JointModel JointModel::from_linear(const LinearModel& m, const FeatureSpace& space) {
  const auto dm = static_cast<Eigen::Index>(space.machine_dim());
  const auto dh = static_cast<Eigen::Index>(space.human_dim());
  require(m.weights.cols() == dm + dh && m.weights.rows() == static_cast<Eigen::Index>(space.num_classes()),
          ErrorCode::invalid_input, "linear model shape does not match the joint feature space");
  JointModel j;
  j.theta_m = m.weights.leftCols(dm);
  j.theta_h = m.weights.rightCols(dh);
  j.phi = m.bias;
  j.space = space;
  j.hyper = m.hyper;
  j.seed = m.seed;
  return j;
}

void JointModel::validate() const {
  space.validate();
  const auto k = static_cast<Eigen::Index>(space.num_classes());
  require(theta_m.rows() == k && theta_h.rows() == k && phi.size() == k, ErrorCode::invalid_input,
          "joint model class count does not match its feature space");
  require(theta_m.cols() == static_cast<Eigen::Index>(space.machine_dim()) &&
              theta_h.cols() == static_cast<Eigen::Index>(space.human_dim()),
          ErrorCode::invalid_input, "joint model widths do not match its feature space");
  require(theta_m.allFinite() && theta_h.allFinite() && phi.allFinite(), ErrorCode::invalid_input,
          "joint model has non-finite parameters");
}

Vector ConditionalModels::probabilities(const Eigen::Ref<const Vector>& x_machine) const {
  require(x_machine.size() == weights.cols(), ErrorCode::invalid_input,
          "machine vector length does not match conditional models");
  Vector z = weights * x_machine + intercepts;
  for (Eigen::Index d = 0; d < z.size(); ++d) z(d) = sigmoid(z(d));
  return z;
}

double ConditionalModels::probability(std::size_t d, const Eigen::Ref<const Vector>& x_machine) const {
  require(d < human_dim(), ErrorCode::invalid_input, "human dimension out of range");
  require(x_machine.size() == weights.cols(), ErrorCode::invalid_input,
          "machine vector length does not match conditional models");
  const auto row = static_cast<Eigen::Index>(d);
  return sigmoid(weights.row(row).dot(x_machine) + intercepts(row));
}

void ConditionalModels::validate() const {
  require(weights.rows() == intercepts.size(), ErrorCode::invalid_input,
          "conditional models need exactly one row per human dimension");
  require(weights.allFinite() && intercepts.allFinite(), ErrorCode::invalid_input,
          "conditional models have non-finite parameters");
}

}  // namespace hfq
