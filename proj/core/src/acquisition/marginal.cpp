#include "hfq/acquisition/marginal.hpp"

#include "hfq/error.hpp"
#include "hfq/multinomial.hpp"
#include "hfq/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hfq {

MarginalMode MarginalMode::at_stage(std::size_t answered) const {
  if (is_exact()) return *this;
  return monte_carlo(samples, derive_seed(seed, {answered}));
}

MarginalMode MarginalMode::derived(std::uint64_t key) const {
  if (is_exact()) return *this;
  return monte_carlo(samples, derive_seed(seed, {0x5eedULL, key}));
}

namespace {

// acc += softmax(z), without allocating.
inline void add_softmax(const double* z, std::size_t k, double* scratch, double* acc) {
  double m = z[0];
  for (std::size_t c = 1; c < k; ++c) m = std::max(m, z[c]);
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    scratch[c] = std::exp(z[c] - m);
    total += scratch[c];
  }
  for (std::size_t c = 0; c < k; ++c) acc[c] += scratch[c] / total;
}

}  // namespace

Marginalizer::Marginalizer(const JointModel& model, const ConditionalModels& cond,
                           const Eigen::Ref<const Vector>& x_machine)
    : model_(&model) {
  require(x_machine.size() == model.theta_m.cols(), ErrorCode::invalid_input,
          "machine vector length " + std::to_string(x_machine.size()) + " does not match model width " +
              std::to_string(model.theta_m.cols()));
  require(cond.human_dim() == static_cast<std::size_t>(model.theta_h.cols()) &&
              cond.machine_dim() == static_cast<std::size_t>(model.theta_m.cols()),
          ErrorCode::invalid_input, "conditional models do not match the joint model");
  require(x_machine.allFinite(), ErrorCode::invalid_input, "machine vector contains non-finite values");
  base_ = model.theta_m * x_machine + model.phi;
  p_ = cond.probabilities(x_machine);
}

void Marginalizer::check_answers(const AnswerSet& answers) const {
  require(answers.human_dim() == human_dim(), ErrorCode::invalid_input,
          "answer set covers " + std::to_string(answers.human_dim()) + " dimensions, model has " +
              std::to_string(human_dim()));
}

Vector Marginalizer::exact(const std::vector<int>& values) const {
  const auto& theta = model_->theta_h;
  Vector logits = base_;
  std::vector<std::size_t> free;
  for (std::size_t d = 0; d < values.size(); ++d) {
    if (values[d] < 0) {
      free.push_back(d);
    } else if (values[d] == 1) {
      logits += theta.col(static_cast<Eigen::Index>(d));
    }
  }
  require(free.size() <= kMaxExactUnanswered, ErrorCode::capacity,
          "exact marginalization over " + std::to_string(free.size()) +
              " unanswered dimensions exceeds the limit of " + std::to_string(kMaxExactUnanswered));

  // Depth-first over completions with one logit buffer per depth;
  // zero-probability branches are skipped.
  const auto k = static_cast<std::size_t>(base_.size());
  std::vector<double> stack((free.size() + 1) * k), scratch(k), acc(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) stack[c] = logits(static_cast<Eigen::Index>(c));
  auto visit = [&](auto&& self, std::size_t j, double weight) -> void {
    const double* cur = stack.data() + j * k;
    if (j == free.size()) {
      std::vector<double>& probs = scratch;
      double m = cur[0];
      for (std::size_t c = 1; c < k; ++c) m = std::max(m, cur[c]);
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        probs[c] = std::exp(cur[c] - m);
        total += probs[c];
      }
      for (std::size_t c = 0; c < k; ++c) acc[c] += weight * (probs[c] / total);
      return;
    }
    const auto d = static_cast<Eigen::Index>(free[j]);
    const double p = p_(d);
    double* next = stack.data() + (j + 1) * k;
    if (p < 1.0) {
      std::copy(cur, cur + k, next);
      self(self, j + 1, weight * (1.0 - p));
    }
    if (p > 0.0) {
      for (std::size_t c = 0; c < k; ++c) next[c] = cur[c] + theta(static_cast<Eigen::Index>(c), d);
      self(self, j + 1, weight * p);
    }
  };
  visit(visit, 0, 1.0);
  Vector out(static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) out(static_cast<Eigen::Index>(c)) = acc[c];
  return out;
}

std::vector<double> Marginalizer::draw_uniforms(const MarginalMode& mode) const {
  require(mode.samples >= 1, ErrorCode::invalid_input, "Monte Carlo mode needs at least one sample");
  Rng rng(mode.seed);
  std::vector<double> u(mode.samples * human_dim());
  for (auto& v : u) v = rng.uniform();
  return u;
}

Vector Marginalizer::predict(const AnswerSet& answers, const MarginalMode& mode) const {
  check_answers(answers);
  if (mode.is_exact()) return exact(answers.raw());

  const auto& theta = model_->theta_h;
  const auto& values = answers.raw();
  const std::size_t dh = human_dim();
  const auto k = static_cast<std::size_t>(base_.size());
  const auto u = draw_uniforms(mode);
  std::vector<double> sum(k, 0.0), logits(k), scratch(k);
  for (std::size_t s = 0; s < mode.samples; ++s) {
    for (std::size_t c = 0; c < k; ++c) logits[c] = base_(static_cast<Eigen::Index>(c));
    const double* row = u.data() + s * dh;
    for (std::size_t d = 0; d < dh; ++d) {
      const bool on = values[d] >= 0 ? values[d] == 1 : row[d] < p_(static_cast<Eigen::Index>(d));
      if (on) {
        for (std::size_t c = 0; c < k; ++c) logits[c] += theta(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d));
      }
    }
    add_softmax(logits.data(), k, scratch.data(), sum.data());
  }
  Vector out(static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) out(static_cast<Eigen::Index>(c)) = sum[c] / static_cast<double>(mode.samples);
  return out;
}

std::vector<CandidateScore> Marginalizer::candidate_table(const AnswerSet& answers,
                                                          const MarginalMode& mode) const {
  check_answers(answers);
  const std::size_t dh = human_dim();
  const auto& values = answers.raw();
  std::vector<CandidateScore> table;

  if (mode.is_exact()) {
    for (std::size_t d = 0; d < dh; ++d) {
      if (values[d] >= 0) continue;
      table.push_back({d, expected_entropy_after(answers, d, mode)});
    }
    return table;
  }

  const auto& theta = model_->theta_h;
  const auto k = static_cast<std::size_t>(base_.size());
  const std::size_t samples = mode.samples;
  const auto u = draw_uniforms(mode);
  // Row-major per-sample logits and probabilities, plus sampled values.
  std::vector<double> logits(samples * k), probs(samples * k, 0.0);
  std::vector<char> on(samples * dh, 0);
  std::vector<double> scratch(k), shifted(k);
  // Column-major copy of theta_h for contiguous per-dimension access.
  std::vector<double> cols(dh * k);
  for (std::size_t d = 0; d < dh; ++d) {
    for (std::size_t c = 0; c < k; ++c) cols[d * k + c] = theta(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d));
  }
  for (std::size_t s = 0; s < samples; ++s) {
    double* z = logits.data() + s * k;
    for (std::size_t c = 0; c < k; ++c) z[c] = base_(static_cast<Eigen::Index>(c));
    const double* row = u.data() + s * dh;
    char* flags = on.data() + s * dh;
    for (std::size_t d = 0; d < dh; ++d) {
      flags[d] = values[d] >= 0 ? values[d] == 1 : row[d] < p_(static_cast<Eigen::Index>(d));
      if (flags[d]) {
        for (std::size_t c = 0; c < k; ++c) z[c] += cols[d * k + c];
      }
    }
    add_softmax(z, k, scratch.data(), probs.data() + s * k);
  }

  std::vector<double> m0(k), m1(k);
  Vector v0(static_cast<Eigen::Index>(k)), v1(static_cast<Eigen::Index>(k));
  for (std::size_t d = 0; d < dh; ++d) {
    if (values[d] >= 0) continue;
    const double* col = cols.data() + d * k;
    std::fill(m0.begin(), m0.end(), 0.0);
    std::fill(m1.begin(), m1.end(), 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
      const double* z = logits.data() + s * k;
      const double* pr = probs.data() + s * k;
      if (on[s * dh + d]) {
        for (std::size_t c = 0; c < k; ++c) m1[c] += pr[c];
        for (std::size_t c = 0; c < k; ++c) shifted[c] = z[c] - col[c];
        add_softmax(shifted.data(), k, scratch.data(), m0.data());
      } else {
        for (std::size_t c = 0; c < k; ++c) m0[c] += pr[c];
        for (std::size_t c = 0; c < k; ++c) shifted[c] = z[c] + col[c];
        add_softmax(shifted.data(), k, scratch.data(), m1.data());
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      v0(static_cast<Eigen::Index>(c)) = m0[c] / static_cast<double>(samples);
      v1(static_cast<Eigen::Index>(c)) = m1[c] / static_cast<double>(samples);
    }
    const double p = p_(static_cast<Eigen::Index>(d));
    table.push_back({d, p * entropy(v1) + (1.0 - p) * entropy(v0)});
  }
  return table;
}

double Marginalizer::expected_entropy_after(const AnswerSet& answers, std::size_t d,
                                            const MarginalMode& mode) const {
  check_answers(answers);
  require(d < human_dim(), ErrorCode::invalid_input, "candidate dimension out of range");
  require(!answers.contains(d), ErrorCode::invalid_input,
          "candidate dimension " + std::to_string(d) + " is already answered");
  const double p = p_(static_cast<Eigen::Index>(d));
  if (mode.is_exact()) {
    std::vector<int> values = answers.raw();
    values[d] = 1;
    const double h1 = p > 0.0 ? entropy(exact(values)) : 0.0;
    values[d] = 0;
    const double h0 = p < 1.0 ? entropy(exact(values)) : 0.0;
    return p * h1 + (1.0 - p) * h0;
  }
  AnswerSet with1 = answers;
  with1.set(d, 1);
  AnswerSet with0 = answers;
  with0.set(d, 0);
  return p * entropy(predict(with1, mode)) + (1.0 - p) * entropy(predict(with0, mode));
}

Vector predict_marginal(const JointModel& model, const ConditionalModels& cond,
                        const Eigen::Ref<const Vector>& x_machine, const AnswerSet& answers,
                        const MarginalMode& mode) {
  return Marginalizer(model, cond, x_machine).predict(answers, mode);
}

double expected_entropy_after(const JointModel& model, const ConditionalModels& cond,
                              const Eigen::Ref<const Vector>& x_machine,
                              const AnswerSet& answers, std::size_t candidate,
                              const MarginalMode& mode) {
  return Marginalizer(model, cond, x_machine).expected_entropy_after(answers, candidate, mode);
}

}  // namespace hfq
