#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "actlearn/activity_hmm.hpp"
#include "actlearn/clustering.hpp"
#include "actlearn/tpminer.hpp"

namespace actlearn {

inline constexpr int kBundleSchemaVersion = 1;

/// Unreadable, unwritable, truncated or inconsistent model bundle.
class BundleError : public Error {
public:
    using Error::Error;
};

struct ModelBundle {
    std::vector<Cluster> clusters;
    std::vector<ActivityHMM> hmms;
    std::vector<PredictionRule> rules;

    bool operator==(const ModelBundle&) const = default;
};

// Model bundle: one JSON document with `schema_version`, `clusters`, `hmms`
// and `rules`. Probabilities are written in shortest round-trip decimal
// form, so reading gives back the identical doubles.

std::string render_model_bundle(const ModelBundle& bundle);
ModelBundle parse_model_bundle(std::string_view text);

/// Throws BundleError on a non-finite probability, an HMM whose cluster is
/// not in the bundle (when the bundle has clusters), or an I/O failure.
void write_model_bundle(std::span<const Cluster> clusters, std::span<const ActivityHMM> hmms,
                        std::span<const PredictionRule> rules, const std::filesystem::path& path);

/// Throws BundleError for a missing file, malformed JSON, a schema version
/// mismatch, or any matrix row failing normalization (the message names
/// the row). Nothing is returned on failure.
ModelBundle read_model_bundle(const std::filesystem::path& path);

// Shared JSON fragments, also used by the standalone cluster and pattern files.

nlohmann::json pattern_to_json(const TemporalPattern& pattern);  // [["a+"], ["a-", "b+"]]
TemporalPattern pattern_from_json(const nlohmann::json& slots, std::size_t support = 0);

nlohmann::json cluster_to_json(const Cluster& cluster);
Cluster cluster_from_json(const nlohmann::json& j);

/// {"minsup": n, "sequences": n, "patterns": [{"slots", "support", "well_formed"}]}
std::string render_patterns(std::span<const TemporalPattern> patterns, std::size_t minsup, std::size_t sequences);
std::vector<TemporalPattern> parse_patterns(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for a batch tool: to a sibling temp file, then rename.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace actlearn
