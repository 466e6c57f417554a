#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hfq {

// Rows are instances.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

struct FeatureSpace {
  std::vector<std::string> machine_names;
  std::vector<std::string> human_names;
  std::vector<std::string> class_names;

  std::size_t machine_dim() const { return machine_names.size(); }
  std::size_t human_dim() const { return human_names.size(); }
  std::size_t num_classes() const { return class_names.size(); }

  // D_m >= 1, D_h >= 1, K >= 2, names unique across both blocks.
  void validate() const;

  bool operator==(const FeatureSpace&) const = default;
};

struct Dataset {
  Matrix x_machine;
  Matrix x_human;
  Labels labels;
  FeatureSpace space;
  // Only the continuous toy demonstration clears this.
  bool binary = true;

  std::size_t size() const { return labels.size(); }

  // Shapes, label range and (when `binary`) 0/1 entries. With
  // `require_all_classes`, every class must occur at least once.
  void validate(bool require_all_classes = true) const;

  Dataset subset(std::span<const std::size_t> rows) const;

  // [X^m, X^h] column concatenation.
  Matrix joint_features() const;
};

enum class Penalty { l1, l2, none };
enum class ClassWeighting { none, balanced };

std::string_view to_string(Penalty p) noexcept;
std::string_view to_string(ClassWeighting w) noexcept;
Penalty parse_penalty(std::string_view s);
ClassWeighting parse_class_weighting(std::string_view s);

struct Hyperparameters {
  Penalty penalty = Penalty::l2;
  double inverse_reg_strength = 1.0;
  ClassWeighting class_weighting = ClassWeighting::none;
  int max_iterations = 5000;
  double convergence_tolerance = 1e-6;

  bool operator==(const Hyperparameters&) const = default;
};

// penalties {l1, l2, none} x strengths {0.01, 0.1, 1, 10, 100} x weightings
// {none, balanced}, enumerated penalty-major.
std::vector<Hyperparameters> default_grid();

// Softmax-linear classifier: logits = weights * x + bias.
struct LinearModel {
  Eigen::MatrixXd weights;  // K x D
  Vector bias;              // K
  Hyperparameters hyper;
  std::uint64_t seed = 0;
  bool converged = true;
  int iterations = 0;

  std::size_t num_classes() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(weights.cols()); }
};

// f(x^m, x^h) = softmax(theta_m x^m + theta_h x^h + phi).
struct JointModel {
  Eigen::MatrixXd theta_m;  // K x D_m
  Eigen::MatrixXd theta_h;  // K x D_h
  Vector phi;               // K
  FeatureSpace space;
  Hyperparameters hyper;
  std::uint64_t seed = 0;

  static JointModel from_linear(const LinearModel& m, const FeatureSpace& space);

  std::size_t num_classes() const { return static_cast<std::size_t>(phi.size()); }
  void validate() const;
};

// p(x^h_d = 1 | x^m) = sigmoid(weights.row(d) . x^m + intercepts(d)).
struct ConditionalModels {
  Eigen::MatrixXd weights;  // D_h x D_m
  Vector intercepts;        // D_h
  std::vector<Hyperparameters> hyper;  // selected per dimension
  std::vector<bool> bias_only;         // constant-in-training dimensions

  std::size_t human_dim() const { return static_cast<std::size_t>(intercepts.size()); }
  std::size_t machine_dim() const { return static_cast<std::size_t>(weights.cols()); }

  // Probability that each human dimension is 1 given x^m.
  Vector probabilities(const Eigen::Ref<const Vector>& x_machine) const;
  double probability(std::size_t d, const Eigen::Ref<const Vector>& x_machine) const;

  void validate() const;
};

}  // namespace hfq
