#include "hfq/data/synthetic.hpp"

#include "hfq/error.hpp"
#include "hfq/multinomial.hpp"
#include "hfq/random.hpp"

#include <algorithm>
#include <string>

namespace hfq {

Dataset make_toy_fig1() {
  struct Point {
    double x, y;
    int label;
  };
  const Point points[] = {{1, 2, 1},   {2, 3, 1},   {-1, -0.5, 1},
                          {-1, -2, 0}, {-2, -3, 0}, {1, 0.5, 0}};
  Dataset d;
  d.binary = false;
  d.space.machine_names = {"x"};
  d.space.human_names = {"y"};
  d.space.class_names = {"below", "above"};
  d.x_machine.resize(6, 1);
  d.x_human.resize(6, 1);
  for (Eigen::Index i = 0; i < 6; ++i) {
    d.x_machine(i, 0) = points[i].x;
    d.x_human(i, 0) = points[i].y;
    d.labels.push_back(points[i].label);
  }
  return d;
}

Dataset make_planted(const PlantedOptions& o, std::uint64_t seed) {
  require(o.n >= 1 && o.machine_dim >= 1 && o.human_dim >= 1 && o.num_classes >= 2,
          ErrorCode::invalid_input, "planted generator needs n, d_m, d_h >= 1 and K >= 2");
  require(o.relevant <= o.human_dim, ErrorCode::invalid_input, "b_relevant exceeds d_h");
  require(o.inactive_rate >= 0.0 && o.inactive_rate <= 1.0, ErrorCode::invalid_input,
          "inactive rate must be a probability");

  const std::size_t contexts =
      o.relevant == 0 ? 0 : std::max<std::size_t>(1, std::min(o.max_contexts, o.human_dim / o.relevant));
  std::size_t context_bits = 0;
  while ((std::size_t{1} << context_bits) < contexts) ++context_bits;
  require(context_bits <= o.machine_dim, ErrorCode::invalid_input,
          "not enough machine features to encode the contexts");
  const std::size_t planted = contexts * o.relevant;

  Rng rng(seed);
  const auto k = static_cast<Eigen::Index>(o.num_classes);
  const auto dm = static_cast<Eigen::Index>(o.machine_dim);
  const auto dh = static_cast<Eigen::Index>(o.human_dim);
  Eigen::MatrixXd machine_w(k, dm);
  Eigen::MatrixXd human_w = Eigen::MatrixXd::Zero(k, dh);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < dm; ++j) machine_w(c, j) = o.machine_signal * rng.normal();
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(planted); ++j) {
      human_w(c, j) = o.human_signal * rng.normal();
    }
  }

  Dataset d;
  for (std::size_t j = 0; j < o.machine_dim; ++j) d.space.machine_names.push_back("m" + std::to_string(j));
  for (std::size_t j = 0; j < o.human_dim; ++j) d.space.human_names.push_back("h" + std::to_string(j));
  for (std::size_t c = 0; c < o.num_classes; ++c) d.space.class_names.push_back("c" + std::to_string(c));
  const auto n = static_cast<Eigen::Index>(o.n);
  d.x_machine.resize(n, dm);
  d.x_human.resize(n, dh);
  d.labels.resize(o.n);

  Vector xm(dm), xh(dh);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dm; ++j) xm(j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    std::size_t code = 0;
    for (std::size_t b = 0; b < context_bits; ++b) {
      if (xm(static_cast<Eigen::Index>(b)) != 0.0) code |= std::size_t{1} << b;
    }
    const std::size_t context = contexts == 0 ? 0 : code % contexts;
    for (Eigen::Index j = 0; j < dh; ++j) {
      double rate = 0.5;
      if (static_cast<std::size_t>(j) < planted) {
        const bool active = static_cast<std::size_t>(j) / o.relevant == context;
        rate = active ? 0.5 : o.inactive_rate;
      }
      xh(j) = rng.bernoulli(rate) ? 1.0 : 0.0;
    }
    const Vector p = softmax(machine_w * xm + human_w * xh);
    const double u = rng.uniform();
    double acc = 0.0;
    int label = static_cast<int>(k) - 1;
    for (Eigen::Index c = 0; c < k; ++c) {
      acc += p(c);
      if (u < acc) {
        label = static_cast<int>(c);
        break;
      }
    }
    d.x_machine.row(i) = xm.transpose();
    d.x_human.row(i) = xh.transpose();
    d.labels[static_cast<std::size_t>(i)] = label;
  }
  d.validate(true);
  return d;
}

}  // namespace hfq
