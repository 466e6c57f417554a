#pragma once

#include "hfq/acquisition/marginal.hpp"
#include "hfq/model_io.hpp"
#include "hfq/error.hpp"
#include "hfq/random.hpp"
#include "hfq/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hfq::testing {

// Code of the hfq::Error thrown by f, or nullopt when nothing is thrown.
template <class F>
std::optional<ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline FeatureSpace make_space(std::size_t dm, std::size_t dh, std::size_t k) {
  FeatureSpace s;
  for (std::size_t i = 0; i < dm; ++i) s.machine_names.push_back("m" + std::to_string(i));
  for (std::size_t i = 0; i < dh; ++i) s.human_names.push_back("h" + std::to_string(i));
  for (std::size_t i = 0; i < k; ++i) s.class_names.push_back("c" + std::to_string(i));
  return s;
}

// Random joint model with N(0, scale^2) parameters.
inline JointModel random_joint(std::size_t dm, std::size_t dh, std::size_t k, Rng& rng, double scale = 1.5) {
  JointModel m;
  m.space = make_space(dm, dh, k);
  m.theta_m.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dm));
  m.theta_h.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dh));
  m.phi.resize(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < m.theta_m.size(); ++i) m.theta_m.data()[i] = scale * rng.normal();
  for (Eigen::Index i = 0; i < m.theta_h.size(); ++i) m.theta_h.data()[i] = scale * rng.normal();
  for (Eigen::Index i = 0; i < m.phi.size(); ++i) m.phi(i) = 0.5 * rng.normal();
  return m;
}

inline ConditionalModels random_conditionals(std::size_t dm, std::size_t dh, Rng& rng, double scale = 1.0) {
  ConditionalModels c;
  c.weights.resize(static_cast<Eigen::Index>(dh), static_cast<Eigen::Index>(dm));
  c.intercepts.resize(static_cast<Eigen::Index>(dh));
  for (Eigen::Index i = 0; i < c.weights.size(); ++i) c.weights.data()[i] = scale * rng.normal();
  for (Eigen::Index i = 0; i < c.intercepts.size(); ++i) c.intercepts(i) = 0.5 * rng.normal();
  c.hyper.assign(dh, Hyperparameters{});
  c.bias_only.assign(dh, false);
  return c;
}

inline Vector random_binary(std::size_t n, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return v;
}

inline double ref_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline Vector ref_softmax(const Vector& z) {
  Vector e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

inline double ref_entropy(const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0) h -= p(i) * std::log(p(i));
  }
  return h;
}

// Exact marginal by explicit enumeration of completion bitmasks. `values`
// holds -1 for unanswered dimensions.
inline Vector ref_marginal(const JointModel& m, const ConditionalModels& c, const Vector& xm,
                           const std::vector<int>& values) {
  std::vector<std::size_t> free;
  for (std::size_t d = 0; d < values.size(); ++d) {
    if (values[d] < 0) free.push_back(d);
  }
  Vector out = Vector::Zero(m.phi.size());
  for (std::uint64_t bits = 0; bits < (1ULL << free.size()); ++bits) {
    Vector xh(static_cast<Eigen::Index>(values.size()));
    double w = 1.0;
    for (std::size_t d = 0; d < values.size(); ++d) xh(static_cast<Eigen::Index>(d)) = values[d] > 0 ? 1.0 : 0.0;
    for (std::size_t j = 0; j < free.size(); ++j) {
      const double p = ref_sigmoid(c.weights.row(static_cast<Eigen::Index>(free[j])).dot(xm) +
                                   c.intercepts(static_cast<Eigen::Index>(free[j])));
      const bool on = (bits >> j) & 1U;
      xh(static_cast<Eigen::Index>(free[j])) = on ? 1.0 : 0.0;
      w *= on ? p : 1.0 - p;
    }
    out += w * ref_softmax(m.theta_m * xm + m.theta_h * xh + m.phi);
  }
  return out;
}

inline double ref_expected_entropy(const JointModel& m, const ConditionalModels& c, const Vector& xm,
                                   std::vector<int> values, std::size_t d) {
  const double p = ref_sigmoid(c.weights.row(static_cast<Eigen::Index>(d)).dot(xm) +
                               c.intercepts(static_cast<Eigen::Index>(d)));
  values[d] = 1;
  const double h1 = ref_entropy(ref_marginal(m, c, xm, values));
  values[d] = 0;
  const double h0 = ref_entropy(ref_marginal(m, c, xm, values));
  return p * h1 + (1.0 - p) * h0;
}

inline double total_variation(const Vector& a, const Vector& b) { return 0.5 * (a - b).cwiseAbs().sum(); }

// Small dataset where the label depends on machine and human features.
inline Dataset random_dataset(std::size_t n, std::size_t dm, std::size_t dh, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  const JointModel truth = random_joint(dm, dh, k, rng, 2.0);
  Dataset d;
  d.space = make_space(dm, dh, k);
  d.x_machine.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dm));
  d.x_human.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dh));
  for (std::size_t i = 0; i < n; ++i) {
    const Vector xm = random_binary(dm, rng);
    Vector xh(static_cast<Eigen::Index>(dh));
    for (std::size_t j = 0; j < dh; ++j) {
      // Human features correlated with the first machine feature.
      const double p = xm(0) > 0 ? 0.75 : 0.25;
      xh(static_cast<Eigen::Index>(j)) = rng.bernoulli(j % 2 == 0 ? p : 0.5) ? 1.0 : 0.0;
    }
    d.x_machine.row(static_cast<Eigen::Index>(i)) = xm.transpose();
    d.x_human.row(static_cast<Eigen::Index>(i)) = xh.transpose();
    const Vector pr = ref_softmax(truth.theta_m * xm + truth.theta_h * xh + truth.phi);
    double u = rng.uniform();
    int label = static_cast<int>(k) - 1;
    for (std::size_t c = 0; c < k; ++c) {
      u -= pr(static_cast<Eigen::Index>(c));
      if (u < 0) {
        label = static_cast<int>(c);
        break;
      }
    }
    d.labels.push_back(label);
  }
  // Guarantee every class appears at least three times.
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t r = 0; r < 3; ++r) d.labels[c * 3 + r] = static_cast<int>(c);
  }
  return d;
}

// Random joint and conditional models plus masked models for budgets 1..masked.
inline ModelBundle random_bundle(std::size_t dm, std::size_t dh, std::size_t k, std::uint64_t seed,
                                 std::size_t masked = 0) {
  Rng rng(seed);
  ModelBundle b;
  b.name = "random";
  b.joint = random_joint(dm, dh, k, rng);
  b.conditionals = random_conditionals(dm, dh, rng);
  for (std::size_t budget = 1; budget <= masked; ++budget) {
    MaskedModel m;
    m.theta_m_bar = b.joint.theta_m;
    m.theta_h_bar = b.joint.theta_h * 0.5;
    m.phi_bar = b.joint.phi;
    m.trained_budget = budget;
    b.masked.push_back(m);
  }
  return b;
}

}  // namespace hfq::testing
