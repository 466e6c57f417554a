#include "hfq/metrics.hpp"

#include "hfq/error.hpp"

#include <vector>

namespace hfq {

double macro_f1(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes) {
  require(!y_true.empty(), ErrorCode::invalid_input, "macro F1 of an empty label set");
  require(y_true.size() == y_pred.size(), ErrorCode::invalid_input,
          "true and predicted labels differ in length");
  require(num_classes >= 1, ErrorCode::invalid_input, "macro F1 needs at least one class");
  std::vector<double> tp(num_classes, 0.0), fp(num_classes, 0.0), fn(num_classes, 0.0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    require(t >= 0 && static_cast<std::size_t>(t) < num_classes && p >= 0 &&
                static_cast<std::size_t>(p) < num_classes,
            ErrorCode::invalid_input, "label out of range");
    if (t == p) {
      tp[static_cast<std::size_t>(t)] += 1.0;
    } else {
      fp[static_cast<std::size_t>(p)] += 1.0;
      fn[static_cast<std::size_t>(t)] += 1.0;
    }
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    const double denom = 2.0 * tp[k] + fp[k] + fn[k];
    sum += denom > 0.0 ? 2.0 * tp[k] / denom : 0.0;
  }
  return sum / static_cast<double>(num_classes);
}

}  // namespace hfq
