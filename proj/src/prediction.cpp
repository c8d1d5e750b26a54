#include "actlearn/prediction.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace actlearn {

EndpointSequence recent_window(const EndpointSequence& history, std::size_t window) {
    EndpointSequence out;
    out.sid = history.sid;
    const std::size_t skip = history.slots.size() > window ? history.slots.size() - window : 0;
    out.slots.assign(history.slots.begin() + static_cast<std::ptrdiff_t>(skip), history.slots.end());
    return out;
}

std::vector<Prediction> predict_next(const EndpointSequence& history, std::span<const PredictionRule> rules,
                                     std::size_t window) {
    if (window == 0) {
        throw std::invalid_argument("prediction window must be >= 1");
    }
    const auto recent = recent_window(history, window);

    std::map<std::string, long> open;
    for (const auto& slot : recent.slots) {
        for (const auto& s : slot.symbols) {
            open[s.label] += s.is_start() ? 1 : -1;
        }
    }

    auto better = [](const PredictionRule& a, const PredictionRule& b) {
        if (a.predictability != b.predictability) {
            return a.predictability > b.predictability;
        }
        if (a.support != b.support) {
            return a.support > b.support;
        }
        return a.full.str() < b.full.str();
    };

    std::map<std::string, const PredictionRule*> best;
    for (const auto& rule : rules) {
        const auto& next = rule.predicted_symbol;
        if (!next.is_start()) {
            continue;
        }
        if (const auto it = open.find(next.label); it != open.end() && it->second > 0) {
            continue;
        }
        if (!contains(recent, rule.prefix)) {
            continue;
        }
        auto& slot = best[next.label];
        if (slot == nullptr || better(rule, *slot)) {
            slot = &rule;
        }
    }

    std::vector<Prediction> out;
    out.reserve(best.size());
    for (const auto& [label, rule] : best) {
        out.push_back({label, *rule, rule->predictability});
    }
    std::sort(out.begin(), out.end(), [](const Prediction& a, const Prediction& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        if (a.rule.support != b.rule.support) {
            return a.rule.support > b.rule.support;
        }
        return a.activity_label < b.activity_label;
    });
    return out;
}

}  // namespace actlearn
