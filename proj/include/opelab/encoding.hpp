#pragma once

#include <cstdint>
#include <vector>

namespace opelab {

using Id = std::uint64_t;

struct ObsAction {
    int obs = 0;
    int act = 0;
    friend bool operator==(const ObsAction&, const ObsAction&) = default;
};

using Sequence = std::vector<ObsAction>;

/// Cardinalities that fix the history/future index spaces.
struct SequenceSpace {
    int horizon = 1;
    int observations = 1;
    int actions = 1;

    Id pair_count() const { return static_cast<Id>(observations) * static_cast<Id>(actions); }
    Id pair_code(int o, int a) const { return static_cast<Id>(o) * actions + a; }
    /// Number of histories before 0-based step h: (OA)^h.
    Id history_count(int h) const;
    /// Number of futures from 0-based step h: (OA)^(H-h). Step H is the empty future.
    Id future_count(int h) const;
};

struct HistoryIndex {
    int step = 0;
    Id id = 0;
    friend bool operator==(const HistoryIndex&, const HistoryIndex&) = default;
};

struct FutureIndex {
    int step = 0;
    Id id = 0;
    friend bool operator==(const FutureIndex&, const FutureIndex&) = default;
};

// Lexicographic packing: leftmost (o, a) pair most significant, observation-major
// within a pair.
HistoryIndex encode_history(const SequenceSpace& space, int h, const Sequence& seq);
Sequence decode_history(const SequenceSpace& space, HistoryIndex index);
FutureIndex encode_future(const SequenceSpace& space, int h, const Sequence& seq);
Sequence decode_future(const SequenceSpace& space, FutureIndex index);

/// Integer power with overflow detection; returns false on overflow.
bool checked_pow(Id base, int exponent, Id& out);

}  // namespace opelab
