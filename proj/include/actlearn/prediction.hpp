#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "actlearn/tpminer.hpp"

namespace actlearn {

struct Prediction {
    std::string activity_label;
    PredictionRule rule;
    double score = 0.0;  // the rule's predictability

    bool operator==(const Prediction&) const = default;
};

inline constexpr std::size_t kDefaultPredictionWindow = 12;

/// The last `window` slots of history.
EndpointSequence recent_window(const EndpointSequence& history, std::size_t window);

/// Next-activity candidates from the rules whose prefix occurs in the last
/// `window` slots of history and whose predicted symbol starts an activity
/// not already open in that window. One prediction per label (highest
/// scoring rule), ranked by score desc, support desc, label asc. Throws
/// std::invalid_argument if window is 0.
std::vector<Prediction> predict_next(const EndpointSequence& history, std::span<const PredictionRule> rules,
                                     std::size_t window = kDefaultPredictionWindow);

}  // namespace actlearn
