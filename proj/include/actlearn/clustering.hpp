#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "actlearn/core.hpp"

namespace actlearn {

/// A discovered activity: a set of occurrence sids.
struct Cluster {
    int cluster_id = 0;
    std::vector<std::string> members;
    std::optional<std::string> label_hint;  // majority ground-truth label, evaluation only

    bool operator==(const Cluster&) const = default;
};

/// How occurrence intervals are laid on the time axis before comparing them.
/// kTimeOfDay projects each interval onto the clock (start modulo one day,
/// same duration) and compares at the best of -1/0/+1 day shifts, so an
/// activity repeated on different days at the same hour scores high.
/// kAbsolute compares the raw instants.
enum class TimeAxis { kTimeOfDay, kAbsolute };

/// 1 if the locations are equal, else 0.
double location_similarity(const ActivityOccurrence& a, const ActivityOccurrence& b);

/// Integral of f_a + f_b over the joint span divided by twice the span,
/// where f is the interval indicator. Equals (|a| + |b|) / (2 |span|).
/// Zero when either interval has zero duration.
double time_similarity(const ActivityOccurrence& a, const ActivityOccurrence& b,
                       TimeAxis axis = TimeAxis::kTimeOfDay);

/// Jaccard index of the two event-type sets; 1 when both are empty.
double structure_similarity(const ActivityOccurrence& a, const ActivityOccurrence& b);

/// Sum of the three components above, in [0, 3].
double similarity(const ActivityOccurrence& a, const ActivityOccurrence& b, TimeAxis axis = TimeAxis::kTimeOfDay);

/// Symmetric n x n matrix of values in [0, 1] with a zero diagonal.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double d) {
        values_[i * n_ + j] = d;
        values_[j * n_ + i] = d;
    }

private:
    std::size_t n_;
    std::vector<double> values_;
};

/// d(i, j) = 1 - similarity(i, j) / 3.
DistanceMatrix distance_matrix(std::span<const ActivityOccurrence> data, TimeAxis axis = TimeAxis::kTimeOfDay);

/// Mean distance over all cross pairs of the two index sets (matrix rows).
double average_linkage(std::span<const std::size_t> a, std::span<const std::size_t> b, const DistanceMatrix& m);

struct Merge {
    std::vector<std::string> left;   // members before the merge
    std::vector<std::string> right;
    double distance = 0.0;
};

struct ClusteringResult {
    std::vector<Cluster> clusters;
    std::vector<Merge> merges;  // in merge order
};

/// Average-linkage agglomeration that repeatedly merges the closest pair of
/// clusters while that distance is below rho.
///
/// Occurrences are first put in canonical order (by sid), which fixes the
/// provisional cluster ids; among equally close pairs the one with the
/// smallest (min id, max id) merges first. The output is therefore
/// independent of input order. Final clusters are numbered 0..k-1 by their
/// first member in sid order, members listed in sid order. When the data is
/// labeled, each cluster gets its majority label as label_hint.
ClusteringResult agglomerate(std::span<const ActivityOccurrence> data, double rho,
                             TimeAxis axis = TimeAxis::kTimeOfDay);

/// Majority label among the members (ties: smallest label) and its share of
/// the cluster. Members without a label count toward the size only.
struct ClusterPurity {
    std::optional<std::string> majority_label;
    double purity = 0.0;
};
ClusterPurity cluster_purity(const Cluster& cluster, std::span<const ActivityOccurrence> corpus);

}  // namespace actlearn
