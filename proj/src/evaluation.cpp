#include "actlearn/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "actlearn/tpminer.hpp"

namespace actlearn {

LabeledAssignment::LabeledAssignment(std::vector<Object> objects) : objects_(std::move(objects)) {
    std::unordered_set<std::string_view> seen;
    for (const auto& o : objects_) {
        if (!seen.insert(o.sid).second) {
            throw ValidationError(fmt::format("sid '{}' assigned twice", o.sid));
        }
    }
}

LabeledAssignment LabeledAssignment::from_clusters(std::span<const Cluster> clusters,
                                                   std::span<const ActivityOccurrence> corpus) {
    std::unordered_map<std::string_view, const ActivityOccurrence*> by_sid;
    for (const auto& o : corpus) {
        by_sid.emplace(o.sid, &o);
    }
    std::vector<Object> objects;
    for (const auto& c : clusters) {
        for (const auto& sid : c.members) {
            const auto it = by_sid.find(sid);
            if (it == by_sid.end()) {
                throw ValidationError(fmt::format("cluster {} references unknown sid '{}'", c.cluster_id, sid));
            }
            if (!it->second->label) {
                throw ValidationError(fmt::format("occurrence '{}' has no ground-truth label", sid));
            }
            objects.push_back({sid, *it->second->label, c.cluster_id});
        }
    }
    return LabeledAssignment(std::move(objects));
}

const LabeledAssignment::Object& LabeledAssignment::at(std::string_view sid) const {
    const auto it = std::find_if(objects_.begin(), objects_.end(), [&](const Object& o) { return o.sid == sid; });
    if (it == objects_.end()) {
        throw ValidationError(fmt::format("unknown sid '{}'", sid));
    }
    return *it;
}

int correctness(const LabeledAssignment& assignment, std::string_view a, std::string_view b) {
    const auto& x = assignment.at(a);
    const auto& y = assignment.at(b);
    return ((x.category == y.category) == (x.cluster == y.cluster)) ? 1 : 0;
}

BCubed bcubed(const LabeledAssignment& assignment) {
    if (assignment.size() == 0) {
        throw std::invalid_argument("bcubed of an empty assignment");
    }
    // Within a shared cluster a pair is correct iff the categories match, and
    // within a shared category iff the clusters match, so both inner averages
    // reduce to |cluster ∩ category| over the cluster or category size.
    std::map<int, std::size_t> cluster_size;
    std::map<std::string_view, std::size_t> category_size;
    std::map<std::pair<int, std::string_view>, std::size_t> both;
    for (const auto& o : assignment.objects()) {
        ++cluster_size[o.cluster];
        ++category_size[o.category];
        ++both[{o.cluster, o.category}];
    }
    double precision = 0.0;
    double recall = 0.0;
    for (const auto& o : assignment.objects()) {
        const auto shared = static_cast<double>(both[{o.cluster, o.category}]);
        precision += shared / static_cast<double>(cluster_size[o.cluster]);
        recall += shared / static_cast<double>(category_size[o.category]);
    }
    const auto n = static_cast<double>(assignment.size());
    BCubed out;
    out.precision = precision / n;
    out.recall = recall / n;
    const double denom = out.precision + out.recall;
    out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
    return out;
}

// ---------------------------------------------------------------------------

SweepParameter parse_sweep_parameter(std::string_view name) {
    if (name == "rho") {
        return SweepParameter::kRho;
    }
    if (name == "minsup") {
        return SweepParameter::kMinsup;
    }
    if (name == "min_pre" || name == "min-pre") {
        return SweepParameter::kMinPre;
    }
    throw ValidationError(fmt::format("unknown sweep parameter '{}'", name));
}

std::string_view to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::kRho:
            return "rho";
        case SweepParameter::kMinsup:
            return "minsup";
        case SweepParameter::kMinPre:
            return "min_pre";
    }
    return "?";
}

namespace {

double to_double(std::string_view text) {
    const std::string buf(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(buf, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (buf.empty() || used != buf.size() || !std::isfinite(v)) {
        throw ValidationError(fmt::format("invalid number '{}' in grid", text));
    }
    return v;
}

double round9(double v) { return std::round(v * 1e9) / 1e9; }

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
    std::vector<double> grid;
    if (std::count(text.begin(), text.end(), ':') == 2) {
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        const double start = to_double(text.substr(0, c1));
        const double stop = to_double(text.substr(c1 + 1, c2 - c1 - 1));
        const double step = to_double(text.substr(c2 + 1));
        if (!(step > 0.0) || stop < start) {
            throw ValidationError(fmt::format("invalid grid '{}'", text));
        }
        const auto steps = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= steps; ++i) {
            grid.push_back(round9(start + static_cast<double>(i) * step));
        }
    } else {
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto comma = std::min(text.find(',', pos), text.size());
            grid.push_back(to_double(text.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    if (grid.empty() || !std::is_sorted(grid.begin(), grid.end())) {
        throw ValidationError(fmt::format("grid '{}' must be non-empty and ascending", text));
    }
    return grid;
}

std::string SweepReport::csv() const {
    std::string out;
    switch (parameter) {
        case SweepParameter::kRho:
            out = "rho,f1\n";
            for (const auto& p : points) {
                out += fmt::format("{},{}\n", p.value, p.f1);
            }
            break;
        case SweepParameter::kMinsup:
            out = "minsup,patterns,ms\n";
            for (const auto& p : points) {
                out += fmt::format("{},{},{:.3f}\n", p.value, p.patterns, p.milliseconds);
            }
            break;
        case SweepParameter::kMinPre:
            out = "min_pre,rules\n";
            for (const auto& p : points) {
                out += fmt::format("{},{}\n", p.value, p.rules);
            }
            break;
    }
    return out;
}

SweepReport sweep_report(std::span<const ActivityOccurrence> corpus, SweepParameter parameter,
                         std::span<const double> grid, const SweepSettings& settings) {
    if (grid.empty()) {
        throw std::invalid_argument("sweep grid is empty");
    }
    SweepReport report;
    report.parameter = parameter;

    if (parameter == SweepParameter::kRho) {
        for (double rho : grid) {
            if (!(rho >= 0.0 && rho <= 1.0)) {
                throw ValidationError(fmt::format("rho {} outside [0, 1]", rho));
            }
            const auto result = agglomerate(corpus, rho, settings.axis);
            const auto score = bcubed(LabeledAssignment::from_clusters(result.clusters, corpus));
            SweepPoint p;
            p.value = rho;
            p.f1 = score.f1;
            p.clusters = result.clusters.size();
            report.points.push_back(p);
        }
        return report;
    }

    const auto db = build_interval_database(corpus, settings.period);
    if (parameter == SweepParameter::kMinsup) {
        for (double v : grid) {
            const auto minsup = v < 1.0 ? MinSupport::fraction(v) : MinSupport::count(static_cast<std::size_t>(v));
            const auto count = minsup.resolve(db.size());
            std::vector<double> times;
            std::size_t patterns = 0;
            for (int r = 0; r < std::max(1, settings.timing_repeats); ++r) {
                const auto t0 = std::chrono::steady_clock::now();
                patterns = mine(db, count).size();
                const auto t1 = std::chrono::steady_clock::now();
                times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            }
            std::sort(times.begin(), times.end());
            SweepPoint p;
            p.value = v;
            p.patterns = patterns;
            p.milliseconds = times[times.size() / 2];
            report.points.push_back(p);
        }
        return report;
    }

    const auto all = mine(db, settings.config.minsup.resolve(db.size()), MineOptions{.include_partial = true});
    for (double min_pre : grid) {
        SweepPoint p;
        p.value = min_pre;
        p.rules = generate_rules(all, min_pre).size();
        report.points.push_back(p);
    }
    return report;
}

}  // namespace actlearn
