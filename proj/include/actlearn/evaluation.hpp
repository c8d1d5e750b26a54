#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actlearn/clustering.hpp"
#include "actlearn/core.hpp"

namespace actlearn {

/// Ground-truth category and assigned cluster of every evaluated object.
class LabeledAssignment {
public:
    struct Object {
        std::string sid;
        std::string category;
        int cluster = 0;
    };

    /// Throws ValidationError on duplicate sids.
    explicit LabeledAssignment(std::vector<Object> objects);

    /// Pairs each clustered sid with its label in corpus. Throws
    /// ValidationError for an unlabeled or unknown member.
    static LabeledAssignment from_clusters(std::span<const Cluster> clusters,
                                           std::span<const ActivityOccurrence> corpus);

    const std::vector<Object>& objects() const noexcept { return objects_; }
    std::size_t size() const noexcept { return objects_.size(); }
    /// Throws ValidationError for an unknown sid.
    const Object& at(std::string_view sid) const;

private:
    std::vector<Object> objects_;
};

/// 1 when "same category" and "same cluster" agree for the pair, else 0.
int correctness(const LabeledAssignment& assignment, std::string_view a, std::string_view b);

struct BCubed {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Per-object BCubed precision and recall (self-pairs included), averaged
/// over all objects, and their harmonic mean. Throws
/// std::invalid_argument on an empty assignment.
BCubed bcubed(const LabeledAssignment& assignment);

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepParameter { kRho, kMinsup, kMinPre };

SweepParameter parse_sweep_parameter(std::string_view name);
std::string_view to_string(SweepParameter p);

/// "start:stop:step" (inclusive, values rounded to 1e-9) or a comma list.
/// Throws ValidationError when empty or not ascending.
std::vector<double> parse_grid(std::string_view text);

struct SweepSettings {
    MiningConfig config;
    TimeAxis axis = TimeAxis::kTimeOfDay;
    Duration period{86400};  // mining window
    int timing_repeats = 3;
};

struct SweepPoint {
    double value = 0.0;
    double f1 = 0.0;            // rho
    std::size_t clusters = 0;   // rho
    std::size_t patterns = 0;   // minsup: well-formed patterns
    double milliseconds = 0.0;  // minsup: median wall-clock of mine
    std::size_t rules = 0;      // min_pre
};

struct SweepReport {
    SweepParameter parameter = SweepParameter::kRho;
    std::vector<SweepPoint> points;

    /// `rho,f1` / `minsup,patterns,ms` / `min_pre,rules`
    std::string csv() const;
};

/// Runs the stage governed by `parameter` once per grid value. Rho sweeps
/// need labeled data for F1. Minsup grid values below 1 are fractions of
/// the mining database, others counts. Min_pre sweeps mine once with
/// settings.config.minsup and count the rules at each threshold.
SweepReport sweep_report(std::span<const ActivityOccurrence> corpus, SweepParameter parameter,
                         std::span<const double> grid, const SweepSettings& settings = {});

}  // namespace actlearn
