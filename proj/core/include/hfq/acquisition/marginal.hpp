#pragma once

#include "hfq/acquisition/query.hpp"
#include "hfq/types.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace hfq {

inline constexpr std::size_t kMaxExactUnanswered = 20;

// How unanswered human dimensions are integrated out.
struct MarginalMode {
  enum class Kind { exact, monte_carlo };

  Kind kind = Kind::monte_carlo;
  std::size_t samples = 5000;
  std::uint64_t seed = 0;

  static MarginalMode exact() { return {Kind::exact, 0, 0}; }
  static MarginalMode monte_carlo(std::size_t samples, std::uint64_t seed) {
    return {Kind::monte_carlo, samples, seed};
  }

  bool is_exact() const { return kind == Kind::exact; }

  // Mode used for a state with `answered` answers. Monte Carlo draws are
  // keyed by (seed, answered) so that each acquisition stage has its own
  // reproducible sample set; exact mode is unaffected.
  MarginalMode at_stage(std::size_t answered) const;

  // Child mode with a seed derived from `key` (e.g. an instance index).
  MarginalMode derived(std::uint64_t key) const;
};

struct CandidateScore {
  std::size_t dimension = 0;
  double expected_entropy = 0.0;
};

// Marginalized prediction for one instance. Caches the machine-feature part
// of the logits and the conditional probabilities of every human dimension.
//
// Monte Carlo mode draws a uniform u[s][d] for every sample s and dimension
// d from mode.seed; unanswered d takes value u[s][d] < p_d and answered d
// its recorded value, so answered dimensions are exact in every sample.
class Marginalizer {
 public:
  Marginalizer(const JointModel& model, const ConditionalModels& cond,
               const Eigen::Ref<const Vector>& x_machine);

  std::size_t human_dim() const { return static_cast<std::size_t>(p_.size()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(base_.size()); }
  const Vector& conditional_probabilities() const { return p_; }

  // f^marg(x^m, answers). Throws capacity for exact mode with more than 20
  // unanswered dimensions.
  Vector predict(const AnswerSet& answers, const MarginalMode& mode) const;

  // p_d H(m_1) + (1 - p_d) H(m_0) with m_v the marginal under answers + {d -> v}.
  double expected_entropy_after(const AnswerSet& answers, std::size_t d,
                                const MarginalMode& mode) const;

  // Expected entropy of every unanswered dimension, increasing index order.
  // In Monte Carlo mode all candidates share one sample set.
  std::vector<CandidateScore> candidate_table(const AnswerSet& answers,
                                              const MarginalMode& mode) const;

 private:
  void check_answers(const AnswerSet& answers) const;
  Vector exact(const std::vector<int>& values) const;
  std::vector<double> draw_uniforms(const MarginalMode& mode) const;

  const JointModel* model_;
  Vector base_;  // theta_m x^m + phi
  Vector p_;     // conditional probabilities
};

Vector predict_marginal(const JointModel& model, const ConditionalModels& cond,
                        const Eigen::Ref<const Vector>& x_machine, const AnswerSet& answers,
                        const MarginalMode& mode);

double expected_entropy_after(const JointModel& model, const ConditionalModels& cond,
                              const Eigen::Ref<const Vector>& x_machine,
                              const AnswerSet& answers, std::size_t candidate,
                              const MarginalMode& mode);

}  // namespace hfq
