#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "actlearn/clustering.hpp"
#include "actlearn/core.hpp"

namespace actlearn {

using Matrix = std::vector<std::vector<double>>;

/// Raised for malformed or non-normalized model parameters.
class ModelError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Discrete HMM describing how one discovered activity is performed.
/// Hidden states and observation symbols are both event types. Immutable
/// once created; create() enforces every row-stochastic invariant.
class ActivityHMM {
public:
    static constexpr double kRowTolerance = 1e-9;

    /// Throws ModelError naming the offending row when a transition or
    /// emission row, or the initial vector, does not sum to 1 within
    /// kRowTolerance, or holds a negative or non-finite entry. The
    /// vocabulary must be strictly sorted.
    static ActivityHMM create(int cluster_id, std::vector<EventTypeKey> states, std::vector<EventTypeKey> vocabulary,
                              Matrix transition, Matrix emission, std::vector<double> initial,
                              double emission_floor);

    int cluster_id() const noexcept { return cluster_id_; }
    const std::vector<EventTypeKey>& states() const noexcept { return states_; }
    const std::vector<EventTypeKey>& vocabulary() const noexcept { return vocabulary_; }
    const Matrix& transition() const noexcept { return transition_; }
    const Matrix& emission() const noexcept { return emission_; }
    const std::vector<double>& initial() const noexcept { return initial_; }
    /// Emission probability assigned to out-of-vocabulary symbols.
    double emission_floor() const noexcept { return emission_floor_; }

    std::size_t num_states() const noexcept { return states_.size(); }
    std::size_t vocabulary_size() const noexcept { return vocabulary_.size(); }
    std::optional<std::size_t> symbol_index(const EventTypeKey& key) const;

    double log_initial(std::size_t i) const { return log_initial_[i]; }
    double log_transition(std::size_t i, std::size_t j) const { return log_transition_[i * num_states() + j]; }
    /// log b_i(symbol); symbol == nullopt means out of vocabulary.
    double log_emission(std::size_t i, std::optional<std::size_t> symbol) const;

    bool operator==(const ActivityHMM& other) const;

private:
    ActivityHMM() = default;

    int cluster_id_ = 0;
    std::vector<EventTypeKey> states_;
    std::vector<EventTypeKey> vocabulary_;
    Matrix transition_;
    Matrix emission_;
    std::vector<double> initial_;
    double emission_floor_ = 1e-3;

    std::vector<double> log_initial_;
    std::vector<double> log_transition_;  // row-major N x N
    std::vector<double> log_emission_;    // row-major N x V
};

/// Estimates an HMM from the member occurrences of a cluster.
///
/// States and vocabulary are the sorted distinct event types of the
/// members. Initial and transition probabilities are Laplace-smoothed
/// counts of first events and adjacent pairs; a transition row with no
/// observed pairs and no smoothing becomes uniform. Emission is the
/// identity softened by emission_floor: b_i(v_i) = 1 - floor (V - 1).
///
/// Throws ValidationError for an empty cluster, an unknown member sid, a
/// member without events, or a floor too large for the vocabulary.
ActivityHMM build_hmm(const Cluster& cluster, std::span<const ActivityOccurrence> corpus, double smoothing,
                      double emission_floor);

/// log P(obs | model) by the forward recursion in log space. Throws
/// std::invalid_argument on an empty observation list.
double forward(const ActivityHMM& model, std::span<const EventTypeKey> obs);

struct Recognition {
    int best_cluster_id = 0;
    std::vector<std::pair<int, double>> ranking;  // (cluster_id, log P), best first
};

/// Scores obs under every model; ranking is by log-probability descending,
/// ties by smaller cluster id.
Recognition recognize(std::span<const EventTypeKey> obs, std::span<const ActivityHMM> models);

}  // namespace actlearn
