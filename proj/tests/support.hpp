#pragma once

// Fixtures and brute-force oracles shared by the unit tests and the
// acceptance runner. The oracles deliberately avoid the library's own
// algorithms: they enumerate, loop literally, or recurse.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "actlearn/activity_hmm.hpp"
#include "actlearn/clustering.hpp"
#include "actlearn/core.hpp"
#include "actlearn/evaluation.hpp"
#include "actlearn/ingest.hpp"
#include "actlearn/tpminer.hpp"

namespace testing {

using namespace actlearn;

inline Instant at(const char* text) { return parse_instant(text); }

/// Occurrence whose events are spread evenly inside [start, end].
inline ActivityOccurrence make_occurrence(std::string sid, std::optional<std::string> label, std::string location,
                                          Instant start, Instant end, const std::vector<std::string>& keys) {
    ActivityOccurrence o;
    o.sid = std::move(sid);
    o.label = std::move(label);
    o.location = location;
    o.start = start;
    o.end = end;
    std::vector<Event> events;
    const auto n = static_cast<std::int64_t>(keys.size());
    for (std::int64_t k = 0; k < n; ++k) {
        const auto key = EventTypeKey::parse(keys[static_cast<std::size_t>(k)]);
        const auto t = start + (end - start) * (k + 1) / (n + 1);
        events.push_back({key.service_id, key.event_type, t, location});
    }
    o.events = EventSequence(std::move(events));
    return o;
}

inline SymbolSet symbols(std::initializer_list<const char*> texts) {
    SymbolSet out;
    for (const char* t : texts) {
        out.push_back(EndpointSymbol::parse(t));
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline TemporalPattern pattern(std::initializer_list<std::initializer_list<const char*>> slots) {
    std::vector<SymbolSet> out;
    for (const auto& s : slots) {
        out.push_back(symbols(s));
    }
    return TemporalPattern::from_slots(std::move(out));
}

inline EndpointSequence sequence_of(std::string sid, const std::vector<SymbolSet>& slots) {
    EndpointSequence seq;
    seq.sid = std::move(sid);
    Instant t = at("2003-05-03T00:00:00");
    for (const auto& s : slots) {
        seq.slots.push_back({t, s});
        t += Duration{60};
    }
    return seq;
}

// ---------------------------------------------------------------------------
// HMM oracles

/// Random row-stochastic model with strictly positive entries.
inline ActivityHMM random_hmm(std::mt19937_64& rng, int cluster_id, std::size_t n, std::size_t v,
                              double floor = 1e-3) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    auto row = [&](std::size_t len) {
        std::vector<double> r(len);
        double sum = 0.0;
        for (auto& x : r) {
            x = u(rng);
            sum += x;
        }
        for (auto& x : r) {
            x /= sum;
        }
        return r;
    };
    std::vector<EventTypeKey> states;
    std::vector<EventTypeKey> vocab;
    for (std::size_t i = 0; i < n; ++i) {
        states.push_back({std::to_string(i), "ON"});
    }
    for (std::size_t k = 0; k < v; ++k) {
        vocab.push_back({"v" + std::to_string(k), "ON"});
    }
    Matrix a;
    Matrix b;
    for (std::size_t i = 0; i < n; ++i) {
        a.push_back(row(n));
        b.push_back(row(v));
    }
    return ActivityHMM::create(cluster_id, states, vocab, a, b, row(n), floor);
}

/// Emission probability of a key as the model's plain tables define it.
inline double emission_of(const ActivityHMM& m, std::size_t state, const EventTypeKey& key) {
    const auto& vocab = m.vocabulary();
    for (std::size_t k = 0; k < vocab.size(); ++k) {
        if (vocab[k] == key) {
            return m.emission()[state][k];
        }
    }
    return m.emission_floor();
}

/// P(obs) as the sum over all N^T hidden state paths.
inline double path_sum_probability(const ActivityHMM& m, const std::vector<EventTypeKey>& obs) {
    const std::size_t n = m.num_states();
    const std::size_t t_len = obs.size();
    std::vector<std::size_t> path(t_len, 0);
    double total = 0.0;
    while (true) {
        double p = m.initial()[path[0]] * emission_of(m, path[0], obs[0]);
        for (std::size_t t = 1; t < t_len; ++t) {
            p *= m.transition()[path[t - 1]][path[t]] * emission_of(m, path[t], obs[t]);
        }
        total += p;
        std::size_t pos = 0;
        while (pos < t_len && ++path[pos] == n) {
            path[pos++] = 0;
        }
        if (pos == t_len) {
            break;
        }
    }
    return total;
}

/// Textbook forward recursion in linear probability space.
inline double linear_forward(const ActivityHMM& m, const std::vector<EventTypeKey>& obs) {
    const std::size_t n = m.num_states();
    std::vector<double> alpha(n);
    for (std::size_t i = 0; i < n; ++i) {
        alpha[i] = m.initial()[i] * emission_of(m, i, obs[0]);
    }
    for (std::size_t t = 1; t < obs.size(); ++t) {
        std::vector<double> next(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                next[j] += alpha[i] * m.transition()[i][j];
            }
            next[j] *= emission_of(m, j, obs[t]);
        }
        alpha = std::move(next);
    }
    double p = 0.0;
    for (double x : alpha) {
        p += x;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Clustering oracle

inline double linkage_oracle(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                             const DistanceMatrix& m) {
    double sum = 0.0;
    for (std::size_t x : a) {
        for (std::size_t y : b) {
            sum += m(x, y);
        }
    }
    return sum / static_cast<double>(a.size() * b.size());
}

// ---------------------------------------------------------------------------
// Temporal-pattern oracles

inline bool subset_of(const SymbolSet& small, const SymbolSet& big) {
    return std::all_of(small.begin(), small.end(),
                       [&](const EndpointSymbol& s) { return std::find(big.begin(), big.end(), s) != big.end(); });
}

/// Exhaustive recursive subsequence matcher (no greedy shortcut).
inline bool contains_oracle(const EndpointSequence& seq, const std::vector<SymbolSet>& pat, std::size_t pi = 0,
                            std::size_t si = 0) {
    if (pi == pat.size()) {
        return true;
    }
    if (si == seq.slots.size()) {
        return false;
    }
    if (subset_of(pat[pi], seq.slots[si].symbols) && contains_oracle(seq, pat, pi + 1, si + 1)) {
        return true;
    }
    return contains_oracle(seq, pat, pi, si + 1);
}

/// Per label, cumulative ends never exceed cumulative starts after any
/// slot, and the totals agree.
inline bool well_formed_oracle(const std::vector<SymbolSet>& slots) {
    std::map<std::string, long> balance;
    for (const auto& slot : slots) {
        for (const auto& s : slot) {
            balance[s.label] += s.is_start() ? 1 : -1;
        }
        for (const auto& [label, b] : balance) {
            if (b < 0) {
                return false;
            }
        }
    }
    return std::all_of(balance.begin(), balance.end(), [](const auto& kv) { return kv.second == 0; });
}

/// Walking the symbols in slot order (starts before ends inside a slot),
/// no end appears without an unmatched start of its label.
inline bool admissible_oracle(const std::vector<SymbolSet>& slots) {
    std::map<std::string, long> open;
    for (const auto& slot : slots) {
        for (const auto& s : slot) {
            if (s.is_start()) {
                ++open[s.label];
            } else if (open[s.label]-- <= 0) {
                return false;
            }
        }
    }
    return true;
}

using PatternCounts = std::map<std::vector<SymbolSet>, std::size_t>;

/// Every slot-subsequence of a sequence is a choice of a subset of its
/// symbols; enumerate them all and count distinct ones per sequence.
inline PatternCounts enumerate_patterns(const std::vector<EndpointSequence>& db, std::size_t minsup,
                                        const std::function<bool(const std::vector<SymbolSet>&)>& keep) {
    PatternCounts counts;
    for (const auto& seq : db) {
        std::vector<std::pair<std::size_t, EndpointSymbol>> flat;
        for (std::size_t i = 0; i < seq.slots.size(); ++i) {
            for (const auto& s : seq.slots[i].symbols) {
                flat.emplace_back(i, s);
            }
        }
        std::set<std::vector<SymbolSet>> seen;
        const std::uint64_t limit = std::uint64_t{1} << flat.size();
        for (std::uint64_t mask = 1; mask < limit; ++mask) {
            std::vector<SymbolSet> slots;
            std::size_t last = static_cast<std::size_t>(-1);
            for (std::size_t k = 0; k < flat.size(); ++k) {
                if ((mask >> k) & 1U) {
                    if (flat[k].first != last) {
                        slots.emplace_back();
                        last = flat[k].first;
                    }
                    slots.back().push_back(flat[k].second);
                }
            }
            if (keep(slots)) {
                seen.insert(slots);
            }
        }
        for (const auto& p : seen) {
            ++counts[p];
        }
    }
    for (auto it = counts.begin(); it != counts.end();) {
        it = it->second < minsup ? counts.erase(it) : std::next(it);
    }
    return counts;
}

inline PatternCounts to_counts(const std::vector<TemporalPattern>& patterns) {
    PatternCounts out;
    for (const auto& p : patterns) {
        out[p.slots] = p.support;
    }
    return out;
}

/// Random interval database: up to max_seqs days, labels "a".."d", up to
/// max_intervals intervals each, with coarse times so that slots get shared.
inline std::vector<EndpointSequence> random_interval_db(std::mt19937_64& rng, int max_seqs = 6, int max_labels = 4,
                                                        int max_intervals = 4) {
    std::uniform_int_distribution<int> n_seqs(1, max_seqs);
    std::uniform_int_distribution<int> n_int(1, max_intervals);
    std::uniform_int_distribution<int> lab(0, max_labels - 1);
    std::uniform_int_distribution<int> t(0, 6);
    std::uniform_int_distribution<int> len(1, 4);
    std::vector<EndpointSequence> db;
    const int seqs = n_seqs(rng);
    for (int s = 0; s < seqs; ++s) {
        std::vector<LabeledInterval> intervals;
        const int k = n_int(rng);
        for (int i = 0; i < k; ++i) {
            const std::string label(1, static_cast<char>('a' + lab(rng)));
            const auto start = at("2003-05-03T00:00:00") + Duration{60 * t(rng)};
            intervals.push_back({label, start, start + Duration{60 * len(rng)}});
        }
        db.push_back(to_endpoint_sequence(intervals, "s" + std::to_string(s)));
    }
    return db;
}

// ---------------------------------------------------------------------------
// BCubed, written as the literal double average over object pairs.

inline BCubed bcubed_oracle(const LabeledAssignment& assignment) {
    const auto& objs = assignment.objects();
    double p = 0.0;
    double r = 0.0;
    for (const auto& e : objs) {
        double same_cluster = 0.0;
        double correct_in_cluster = 0.0;
        double same_category = 0.0;
        double correct_in_category = 0.0;
        for (const auto& f : objs) {
            const bool correct = (e.category == f.category) == (e.cluster == f.cluster);
            if (e.cluster == f.cluster) {
                same_cluster += 1.0;
                correct_in_cluster += correct ? 1.0 : 0.0;
            }
            if (e.category == f.category) {
                same_category += 1.0;
                correct_in_category += correct ? 1.0 : 0.0;
            }
        }
        p += correct_in_cluster / same_cluster;
        r += correct_in_category / same_category;
    }
    BCubed out;
    out.precision = p / static_cast<double>(objs.size());
    out.recall = r / static_cast<double>(objs.size());
    out.f1 = out.precision + out.recall > 0 ? 2 * out.precision * out.recall / (out.precision + out.recall) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------

inline std::filesystem::path bundled_spec_path() {
    return std::filesystem::path(ACTLEARN_SOURCE_DIR) / "data" / "synthetic_spec.json";
}

/// A fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("actlearn_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
