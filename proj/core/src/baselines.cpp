#include "hfq/baselines.hpp"

#include "detail/json_util.hpp"
#include "hfq/error.hpp"
#include "hfq/grid_search.hpp"
#include "hfq/multinomial.hpp"
#include "hfq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace hfq {

using detail::json;

std::string_view to_string(RankingSource s) noexcept {
  switch (s) {
    case RankingSource::forward_selection: return "forward_selection";
    case RankingSource::plausible_classes: return "plausible_classes";
    case RankingSource::surprising_features: return "surprising_features";
  }
  return "forward_selection";
}

void FeatureRanking::validate(std::size_t human_dim) const {
  require(dims.size() <= human_dim, ErrorCode::invalid_input, "ranking longer than the human block");
  require(scores.size() == dims.size(), ErrorCode::invalid_input, "ranking needs one score per entry");
  std::set<std::size_t> seen;
  for (auto d : dims) {
    require(d < human_dim, ErrorCode::invalid_input, "ranking index out of range");
    require(seen.insert(d).second, ErrorCode::invalid_input, "ranking repeats an index");
  }
}

std::vector<std::size_t> FeatureRanking::prefix(std::size_t b) const {
  return {dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(std::min(b, dims.size()))};
}

JointModel train_all_features(const Dataset& train, const Dataset& valid,
                              std::span<const Hyperparameters> grid, std::uint64_t seed) {
  const auto fit = grid_search(train.joint_features(), train.labels, valid.joint_features(), valid.labels,
                               train.space.num_classes(), grid, SelectionObjective::macro_f1, seed);
  return JointModel::from_linear(fit.model, train.space);
}

LinearModel train_machine_only(const Dataset& train, const Dataset& valid,
                               std::span<const Hyperparameters> grid, std::uint64_t seed) {
  return grid_search(train.x_machine, train.labels, valid.x_machine, valid.labels,
                     train.space.num_classes(), grid, SelectionObjective::macro_f1, seed)
      .model;
}

namespace {

Matrix with_columns(const Matrix& machine, const Matrix& human, const std::vector<std::size_t>& cols) {
  Matrix x(machine.rows(), machine.cols() + static_cast<Eigen::Index>(cols.size()));
  x.leftCols(machine.cols()) = machine;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    x.col(machine.cols() + static_cast<Eigen::Index>(j)) = human.col(static_cast<Eigen::Index>(cols[j]));
  }
  return x;
}

FeatureRanking sorted_ranking(const std::vector<double>& scores, bool descending, RankingSource source) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  FeatureRanking r;
  r.source = source;
  r.dims = order;
  for (auto d : order) r.scores.push_back(scores[d]);
  return r;
}

}  // namespace

FeatureRanking forward_feature_selection(const Dataset& train, const Dataset& valid,
                                         std::span<const Hyperparameters> grid,
                                         std::size_t budget, std::uint64_t seed,
                                         const ForwardSelectionOptions& options) {
  const std::size_t dh = train.space.human_dim();
  require(budget <= dh, ErrorCode::invalid_input, "forward selection budget exceeds the human block");
  require(!grid.empty(), ErrorCode::invalid_input, "hyperparameter grid is empty");

  FeatureRanking ranking;
  ranking.source = RankingSource::forward_selection;
  std::vector<bool> used(dh, false);
  std::vector<Hyperparameters> step_grid(grid.begin(), grid.end());

  for (std::size_t step = 0; step < budget; ++step) {
    std::vector<std::size_t> candidates;
    for (std::size_t d = 0; d < dh; ++d) {
      if (!used[d]) candidates.push_back(d);
    }
    std::vector<double> scores(candidates.size(), 0.0);
    std::vector<Hyperparameters> chosen(candidates.size());
    parallel_for(
        candidates.size(),
        [&](std::size_t i) {
          auto cols = ranking.dims;
          cols.push_back(candidates[i]);
          const Matrix xt = with_columns(train.x_machine, train.x_human, cols);
          const Matrix xv = with_columns(valid.x_machine, valid.x_human, cols);
          const auto fit = grid_search(xt, train.labels, xv, valid.labels, train.space.num_classes(),
                                       step_grid, SelectionObjective::macro_f1, seed);
          scores[i] = fit.score;
          chosen[i] = fit.best;
        },
        options.threads);

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    used[candidates[best]] = true;
    ranking.dims.push_back(candidates[best]);
    ranking.scores.push_back(scores[best]);
    if (options.reuse_hyperparameters) step_grid = {chosen[best]};
  }
  return ranking;
}

FeatureRanking plausible_classes_rank(const JointModel& model,
                                      const Eigen::Ref<const Vector>& class_probabilities) {
  const auto k = model.theta_h.rows();
  require(class_probabilities.size() == k, ErrorCode::invalid_input,
          "class distribution does not match the model");
  const double uniform = 1.0 / static_cast<double>(k);
  std::vector<Eigen::Index> plausible;
  for (Eigen::Index c = 0; c < k; ++c) {
    if (class_probabilities(c) > uniform) plausible.push_back(c);
  }
  if (plausible.empty()) {
    for (Eigen::Index c = 0; c < k; ++c) plausible.push_back(c);
  }
  std::vector<double> scores(static_cast<std::size_t>(model.theta_h.cols()), 0.0);
  for (Eigen::Index d = 0; d < model.theta_h.cols(); ++d) {
    for (auto c : plausible) {
      scores[static_cast<std::size_t>(d)] = std::max(scores[static_cast<std::size_t>(d)], std::abs(model.theta_h(c, d)));
    }
  }
  return sorted_ranking(scores, true, RankingSource::plausible_classes);
}

FeatureRanking plausible_classes_rank(const JointModel& model, const ConditionalModels& cond,
                                      const Eigen::Ref<const Vector>& x_machine,
                                      const MarginalMode& mode) {
  const Vector p = predict_marginal(model, cond, x_machine, AnswerSet(cond.human_dim()), mode);
  return plausible_classes_rank(model, p);
}

FeatureRanking surprising_features_rank(const ConditionalModels& cond,
                                        const Eigen::Ref<const Vector>& x_machine) {
  const Vector p = cond.probabilities(x_machine);
  std::vector<double> scores(static_cast<std::size_t>(p.size()));
  for (Eigen::Index d = 0; d < p.size(); ++d) scores[static_cast<std::size_t>(d)] = std::abs(0.5 - p(d));
  return sorted_ranking(scores, false, RankingSource::surprising_features);
}

std::string serialize(const FeatureRanking& ranking, const FeatureSpace& space) {
  ranking.validate(space.human_dim());
  json features = json::array();
  for (std::size_t i = 0; i < ranking.dims.size(); ++i) {
    features.push_back({{"name", space.human_names[ranking.dims[i]]},
                        {"index", ranking.dims[i]},
                        {"score", ranking.scores[i]}});
  }
  return json{{"source", std::string(to_string(ranking.source))}, {"features", features}}.dump(1);
}

FeatureRanking parse_feature_ranking(std::string_view text, const FeatureSpace& space) {
  const json doc = detail::parse_json(text, "feature ranking");
  return detail::guarded("feature ranking", [&] {
    FeatureRanking r;
    const auto source = doc.at("source").get<std::string>();
    if (source == "plausible_classes") {
      r.source = RankingSource::plausible_classes;
    } else if (source == "surprising_features") {
      r.source = RankingSource::surprising_features;
    } else {
      r.source = RankingSource::forward_selection;
    }
    for (const auto& f : doc.at("features")) {
      const auto name = f.at("name").get<std::string>();
      auto it = std::find(space.human_names.begin(), space.human_names.end(), name);
      require(it != space.human_names.end(), ErrorCode::parse,
              "ranking names unknown human feature '" + name + "'");
      r.dims.push_back(static_cast<std::size_t>(it - space.human_names.begin()));
      r.scores.push_back(f.at("score").get<double>());
    }
    r.validate(space.human_dim());
    return r;
  });
}

}  // namespace hfq
