#include "actlearn/clustering.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace actlearn {

double location_similarity(const ActivityOccurrence& a, const ActivityOccurrence& b) {
    return a.location == b.location ? 1.0 : 0.0;
}

namespace {

double overlap_score(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
    const std::int64_t span = std::max(a1, b1) - std::min(a0, b0);
    if (span <= 0) {
        return 0.0;
    }
    return static_cast<double>((a1 - a0) + (b1 - b0)) / (2.0 * static_cast<double>(span));
}

std::set<EventTypeKey> event_types(const ActivityOccurrence& o) {
    std::set<EventTypeKey> out;
    for (const auto& e : o.events) {
        out.insert(e.key());
    }
    return out;
}

}  // namespace

double time_similarity(const ActivityOccurrence& a, const ActivityOccurrence& b, TimeAxis axis) {
    const std::int64_t la = a.duration().count();
    const std::int64_t lb = b.duration().count();
    if (la <= 0 || lb <= 0) {
        return 0.0;
    }
    if (axis == TimeAxis::kAbsolute) {
        return overlap_score(a.start.time_since_epoch().count(), a.end.time_since_epoch().count(),
                             b.start.time_since_epoch().count(), b.end.time_since_epoch().count());
    }
    constexpr std::int64_t kDay = 86400;
    const std::int64_t a0 = seconds_of_day(a.start);
    const std::int64_t b0 = seconds_of_day(b.start);
    double best = 0.0;
    for (std::int64_t shift : {-kDay, std::int64_t{0}, kDay}) {
        best = std::max(best, overlap_score(a0, a0 + la, b0 + shift, b0 + shift + lb));
    }
    return best;
}

double structure_similarity(const ActivityOccurrence& a, const ActivityOccurrence& b) {
    const auto sa = event_types(a);
    const auto sb = event_types(b);
    if (sa.empty() && sb.empty()) {
        return 1.0;
    }
    std::size_t common = 0;
    for (const auto& k : sa) {
        common += sb.count(k);
    }
    const std::size_t united = sa.size() + sb.size() - common;
    return static_cast<double>(common) / static_cast<double>(united);
}

double similarity(const ActivityOccurrence& a, const ActivityOccurrence& b, TimeAxis axis) {
    return location_similarity(a, b) + time_similarity(a, b, axis) + structure_similarity(a, b);
}

DistanceMatrix distance_matrix(std::span<const ActivityOccurrence> data, TimeAxis axis) {
    DistanceMatrix m(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            const double d = 1.0 - similarity(data[i], data[j], axis) / 3.0;
            m.set(i, j, std::clamp(d, 0.0, 1.0));
        }
    }
    return m;
}

double average_linkage(std::span<const std::size_t> a, std::span<const std::size_t> b, const DistanceMatrix& m) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("average_linkage of an empty cluster");
    }
    double total = 0.0;
    for (auto i : a) {
        for (auto j : b) {
            total += m(i, j);
        }
    }
    return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

namespace {

// Nearest active neighbour of one provisional cluster.
struct Nearest {
    double distance;
    std::size_t partner;
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

bool closer(const Nearest& x, const Nearest& y) {
    return x.distance < y.distance || (x.distance == y.distance && x.partner < y.partner);
}

}  // namespace

ClusteringResult agglomerate(std::span<const ActivityOccurrence> data, double rho, TimeAxis axis) {
    if (data.empty()) {
        throw std::invalid_argument("agglomerate needs at least one occurrence");
    }
    const std::size_t n = data.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return data[x].sid < data[y].sid; });
    for (std::size_t p = 1; p < n; ++p) {
        if (data[order[p]].sid == data[order[p - 1]].sid) {
            throw ValidationError(fmt::format("duplicate sid '{}'", data[order[p]].sid));
        }
    }
    std::vector<ActivityOccurrence> canonical;
    canonical.reserve(n);
    for (auto idx : order) {
        canonical.push_back(data[idx]);
    }

    // totals(i, j): sum of point distances between provisional clusters i and j.
    DistanceMatrix totals = distance_matrix(canonical, axis);
    std::vector<std::vector<std::size_t>> members(n);
    std::vector<bool> active(n, true);
    for (std::size_t p = 0; p < n; ++p) {
        members[p] = {p};
    }

    auto linkage = [&](std::size_t i, std::size_t j) {
        return totals(i, j) / (static_cast<double>(members[i].size()) * static_cast<double>(members[j].size()));
    };
    auto scan = [&](std::size_t i) {
        Nearest best{0.0, kNone};
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) {
                continue;
            }
            const Nearest cand{linkage(i, j), j};
            if (best.partner == kNone || closer(cand, best)) {
                best = cand;
            }
        }
        return best;
    };

    std::vector<Nearest> nearest(n);
    for (std::size_t p = 0; p < n; ++p) {
        nearest[p] = scan(p);
    }

    auto sids_of = [&](const std::vector<std::size_t>& ms) {
        std::vector<std::string> out;
        out.reserve(ms.size());
        for (auto p : ms) {
            out.push_back(canonical[p].sid);
        }
        std::sort(out.begin(), out.end());
        return out;
    };

    ClusteringResult result;
    for (;;) {
        // Global minimum by (distance, min id, max id).
        std::size_t a = kNone, b = kNone;
        double best = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            if (!active[p] || nearest[p].partner == kNone) {
                continue;
            }
            const std::size_t lo = std::min(p, nearest[p].partner);
            const std::size_t hi = std::max(p, nearest[p].partner);
            const double d = nearest[p].distance;
            if (a == kNone || d < best || (d == best && std::pair(lo, hi) < std::pair(a, b))) {
                a = lo;
                b = hi;
                best = d;
            }
        }
        if (a == kNone || !(best < rho)) {
            break;
        }

        result.merges.push_back({sids_of(members[a]), sids_of(members[b]), best});
        members[a].insert(members[a].end(), members[b].begin(), members[b].end());
        members[b].clear();
        active[b] = false;
        for (std::size_t k = 0; k < n; ++k) {
            if (active[k] && k != a) {
                totals.set(a, k, totals(a, k) + totals(b, k));
            }
        }

        nearest[a] = scan(a);
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a) {
                continue;
            }
            if (nearest[k].partner == a || nearest[k].partner == b) {
                nearest[k] = scan(k);
            } else {
                const Nearest cand{linkage(k, a), a};
                if (closer(cand, nearest[k])) {
                    nearest[k] = cand;
                }
            }
        }
    }

    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t p = 0; p < n; ++p) {
        if (active[p]) {
            auto g = members[p];
            std::sort(g.begin(), g.end());
            groups.push_back(std::move(g));
        }
    }
    std::sort(groups.begin(), groups.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });

    for (std::size_t c = 0; c < groups.size(); ++c) {
        Cluster cluster;
        cluster.cluster_id = static_cast<int>(c);
        for (auto p : groups[c]) {
            cluster.members.push_back(canonical[p].sid);
        }
        cluster.label_hint = cluster_purity(cluster, canonical).majority_label;
        result.clusters.push_back(std::move(cluster));
    }
    return result;
}

ClusterPurity cluster_purity(const Cluster& cluster, std::span<const ActivityOccurrence> corpus) {
    std::unordered_map<std::string_view, const ActivityOccurrence*> by_sid;
    for (const auto& o : corpus) {
        by_sid.emplace(o.sid, &o);
    }
    std::map<std::string, std::size_t> votes;
    for (const auto& sid : cluster.members) {
        const auto it = by_sid.find(sid);
        if (it == by_sid.end()) {
            throw ValidationError(fmt::format("cluster {} references unknown sid '{}'", cluster.cluster_id, sid));
        }
        if (it->second->label) {
            ++votes[*it->second->label];
        }
    }
    ClusterPurity out;
    std::size_t best = 0;
    for (const auto& [label, count] : votes) {
        if (count > best) {
            best = count;
            out.majority_label = label;
        }
    }
    if (!cluster.members.empty()) {
        out.purity = static_cast<double>(best) / static_cast<double>(cluster.members.size());
    }
    return out;
}

}  // namespace actlearn
