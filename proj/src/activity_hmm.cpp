#include "actlearn/activity_hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace actlearn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

void check_distribution(std::span<const double> row, std::size_t expected_size, const std::string& what) {
    if (row.size() != expected_size) {
        throw ModelError(fmt::format("{} has {} entries, expected {}", what, row.size(), expected_size));
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (!std::isfinite(row[k]) || row[k] < 0.0) {
            throw ModelError(fmt::format("{} entry {} is {}", what, k, row[k]));
        }
        sum += row[k];
    }
    if (std::abs(sum - 1.0) > ActivityHMM::kRowTolerance) {
        throw ModelError(fmt::format("{} sums to {:.17g}, not 1", what, sum));
    }
}

}  // namespace

ActivityHMM ActivityHMM::create(int cluster_id, std::vector<EventTypeKey> states, std::vector<EventTypeKey> vocabulary,
                                Matrix transition, Matrix emission, std::vector<double> initial,
                                double emission_floor) {
    const auto where = fmt::format("hmm for cluster {}", cluster_id);
    if (states.empty()) {
        throw ModelError(where + ": no states");
    }
    if (!std::is_sorted(vocabulary.begin(), vocabulary.end()) ||
        std::adjacent_find(vocabulary.begin(), vocabulary.end()) != vocabulary.end()) {
        throw ModelError(where + ": vocabulary must be strictly sorted");
    }
    if (!(emission_floor > 0.0 && emission_floor < 1.0)) {
        throw ModelError(fmt::format("{}: emission_floor {} outside (0, 1)", where, emission_floor));
    }
    const std::size_t n = states.size();
    const std::size_t v = vocabulary.size();
    check_distribution(initial, n, where + ": initial vector");
    if (transition.size() != n) {
        throw ModelError(fmt::format("{}: transition has {} rows, expected {}", where, transition.size(), n));
    }
    if (emission.size() != n) {
        throw ModelError(fmt::format("{}: emission has {} rows, expected {}", where, emission.size(), n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        check_distribution(transition[i], n, fmt::format("{}: transition row {}", where, i));
        check_distribution(emission[i], v, fmt::format("{}: emission row {}", where, i));
    }

    ActivityHMM m;
    m.cluster_id_ = cluster_id;
    m.states_ = std::move(states);
    m.vocabulary_ = std::move(vocabulary);
    m.transition_ = std::move(transition);
    m.emission_ = std::move(emission);
    m.initial_ = std::move(initial);
    m.emission_floor_ = emission_floor;

    m.log_initial_.resize(n);
    m.log_transition_.resize(n * n);
    m.log_emission_.resize(n * v);
    for (std::size_t i = 0; i < n; ++i) {
        m.log_initial_[i] = safe_log(m.initial_[i]);
        for (std::size_t j = 0; j < n; ++j) {
            m.log_transition_[i * n + j] = safe_log(m.transition_[i][j]);
        }
        for (std::size_t k = 0; k < v; ++k) {
            m.log_emission_[i * v + k] = safe_log(m.emission_[i][k]);
        }
    }
    return m;
}

std::optional<std::size_t> ActivityHMM::symbol_index(const EventTypeKey& key) const {
    const auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), key);
    if (it == vocabulary_.end() || *it != key) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - vocabulary_.begin());
}

double ActivityHMM::log_emission(std::size_t i, std::optional<std::size_t> symbol) const {
    if (!symbol) {
        return std::log(emission_floor_);
    }
    return log_emission_[i * vocabulary_size() + *symbol];
}

bool ActivityHMM::operator==(const ActivityHMM& other) const {
    return cluster_id_ == other.cluster_id_ && states_ == other.states_ && vocabulary_ == other.vocabulary_ &&
           transition_ == other.transition_ && emission_ == other.emission_ && initial_ == other.initial_ &&
           emission_floor_ == other.emission_floor_;
}

ActivityHMM build_hmm(const Cluster& cluster, std::span<const ActivityOccurrence> corpus, double smoothing,
                      double emission_floor) {
    if (cluster.members.empty()) {
        throw ValidationError(fmt::format("cluster {} is empty", cluster.cluster_id));
    }
    if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
        throw ValidationError(fmt::format("smoothing {} must be >= 0", smoothing));
    }
    std::unordered_map<std::string_view, const ActivityOccurrence*> by_sid;
    for (const auto& o : corpus) {
        by_sid.emplace(o.sid, &o);
    }
    std::vector<const ActivityOccurrence*> members;
    for (const auto& sid : cluster.members) {
        const auto it = by_sid.find(sid);
        if (it == by_sid.end()) {
            throw ValidationError(fmt::format("cluster {} references unknown sid '{}'", cluster.cluster_id, sid));
        }
        if (it->second->events.empty()) {
            throw ValidationError(fmt::format("occurrence '{}' has no events", sid));
        }
        members.push_back(it->second);
    }

    std::map<EventTypeKey, std::size_t> index;
    for (const auto* o : members) {
        for (const auto& e : o->events) {
            index.emplace(e.key(), 0);
        }
    }
    std::vector<EventTypeKey> states;
    for (auto& [key, idx] : index) {
        idx = states.size();
        states.push_back(key);
    }
    const std::size_t n = states.size();
    const double floor_mass = emission_floor * static_cast<double>(n - 1);
    if (!(floor_mass < 1.0 - emission_floor)) {
        throw ValidationError(fmt::format("emission_floor {} too large for a vocabulary of {} symbols",
                                          emission_floor, n));
    }

    std::vector<double> first_counts(n, 0.0);
    Matrix pair_counts(n, std::vector<double>(n, 0.0));
    for (const auto* o : members) {
        const auto& ev = o->events.events();
        first_counts[index.at(ev.front().key())] += 1.0;
        for (std::size_t t = 1; t < ev.size(); ++t) {
            pair_counts[index.at(ev[t - 1].key())][index.at(ev[t].key())] += 1.0;
        }
    }

    const double dn = static_cast<double>(n);
    std::vector<double> initial(n);
    const double first_total = static_cast<double>(members.size()) + smoothing * dn;
    for (std::size_t i = 0; i < n; ++i) {
        initial[i] = (first_counts[i] + smoothing) / first_total;
    }
    Matrix transition(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double out = 0.0;
        for (double c : pair_counts[i]) {
            out += c;
        }
        const double total = out + smoothing * dn;
        for (std::size_t j = 0; j < n; ++j) {
            transition[i][j] = total > 0.0 ? (pair_counts[i][j] + smoothing) / total : 1.0 / dn;
        }
    }
    Matrix emission(n, std::vector<double>(n, emission_floor));
    for (std::size_t i = 0; i < n; ++i) {
        emission[i][i] = 1.0 - floor_mass;
    }

    auto vocabulary = states;
    return ActivityHMM::create(cluster.cluster_id, std::move(states), std::move(vocabulary), std::move(transition),
                               std::move(emission), std::move(initial), emission_floor);
}

namespace {

double log_sum_exp(std::span<const double> xs) {
    double hi = kNegInf;
    for (double x : xs) {
        hi = std::max(hi, x);
    }
    if (hi == kNegInf) {
        return kNegInf;
    }
    double acc = 0.0;
    for (double x : xs) {
        acc += std::exp(x - hi);
    }
    return hi + std::log(acc);
}

}  // namespace

double forward(const ActivityHMM& model, std::span<const EventTypeKey> obs) {
    if (obs.empty()) {
        throw std::invalid_argument("forward needs a non-empty observation sequence");
    }
    const std::size_t n = model.num_states();
    std::vector<double> alpha(n), next(n), terms(n);

    auto symbol = model.symbol_index(obs[0]);
    for (std::size_t i = 0; i < n; ++i) {
        alpha[i] = model.log_initial(i) + model.log_emission(i, symbol);
    }
    for (std::size_t t = 1; t < obs.size(); ++t) {
        symbol = model.symbol_index(obs[t]);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                terms[i] = alpha[i] + model.log_transition(i, j);
            }
            next[j] = log_sum_exp(terms) + model.log_emission(j, symbol);
        }
        alpha.swap(next);
    }
    return log_sum_exp(alpha);
}

Recognition recognize(std::span<const EventTypeKey> obs, std::span<const ActivityHMM> models) {
    if (models.empty()) {
        throw std::invalid_argument("recognize needs at least one model");
    }
    Recognition out;
    out.ranking.reserve(models.size());
    for (const auto& m : models) {
        out.ranking.emplace_back(m.cluster_id(), forward(m, obs));
    }
    std::sort(out.ranking.begin(), out.ranking.end(), [](const auto& a, const auto& b) {
        return a.second > b.second || (a.second == b.second && a.first < b.first);
    });
    out.best_cluster_id = out.ranking.front().first;
    return out;
}

}  // namespace actlearn
