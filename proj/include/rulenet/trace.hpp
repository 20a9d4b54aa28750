#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace rulenet {

// One per-mini-batch accuracy sample: the batch the flips were just
// scored on, the full training set, and the optional holdout.
struct TraceRecord {
    std::size_t batch_index = 0;  // 1-based, strictly increasing
    double minibatch_accuracy = 0.0;
    double train_accuracy = 0.0;
    std::optional<double> test_accuracy;
};

using TraceSink = std::function<void(const TraceRecord&)>;

}  // namespace rulenet
