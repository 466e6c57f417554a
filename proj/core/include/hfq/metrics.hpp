#pragma once

#include <cstddef>
#include <span>

namespace hfq {

// Unweighted mean of per-class F1 over all K classes. A class with no true
// and no predicted instances scores 0.
double macro_f1(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes);

}  // namespace hfq
