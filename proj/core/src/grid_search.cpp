#include "hfq/grid_search.hpp"

#include "hfq/error.hpp"
#include "hfq/metrics.hpp"
#include "hfq/multinomial.hpp"

namespace hfq {

GridSearchResult grid_search(const Matrix& train_x, std::span<const int> train_y,
                             const Matrix& valid_x, std::span<const int> valid_y,
                             std::size_t num_classes, std::span<const Hyperparameters> grid,
                             SelectionObjective objective, std::uint64_t seed) {
  require(!grid.empty(), ErrorCode::invalid_input, "hyperparameter grid is empty");
  require(train_x.cols() == valid_x.cols(), ErrorCode::invalid_input,
          "training and validation splits have different widths");

  GridSearchResult best;
  bool have = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    LinearModel model = fit_multinomial(train_x, train_y, num_classes, grid[i], seed);
    double score = 0.0;
    bool better = false;
    if (objective == SelectionObjective::macro_f1) {
      const Labels pred = predict_labels(model, valid_x);
      score = macro_f1(valid_y, pred, num_classes);
      better = !have || score > best.score;
    } else {
      score = log_loss(model, valid_x, valid_y);
      better = !have || score < best.score;
    }
    if (better) {
      best.best = grid[i];
      best.model = std::move(model);
      best.score = score;
      best.best_index = i;
      have = true;
    }
  }
  return best;
}

}  // namespace hfq
