#include "opelab/encoding.hpp"

#include <limits>
#include <string>

#include "opelab/errors.hpp"

namespace opelab {

bool checked_pow(Id base, int exponent, Id& out) {
    Id result = 1;
    for (int i = 0; i < exponent; ++i) {
        if (base != 0 && result > std::numeric_limits<Id>::max() / base) return false;
        result *= base;
    }
    out = result;
    return true;
}

namespace {

Id count_or_throw(Id base, int length) {
    Id n = 0;
    if (!checked_pow(base, length, n)) throw EncodingError("index space overflows 64 bits");
    return n;
}

Id pack(const SequenceSpace& space, const Sequence& seq) {
    Id id = 0;
    for (const auto& p : seq) {
        if (p.obs < 0 || p.obs >= space.observations || p.act < 0 || p.act >= space.actions)
            throw EncodingError("symbol (" + std::to_string(p.obs) + "," + std::to_string(p.act) +
                                ") out of range");
        id = id * space.pair_count() + space.pair_code(p.obs, p.act);
    }
    return id;
}

Sequence unpack(const SequenceSpace& space, Id id, int length) {
    Sequence seq(length);
    const Id base = space.pair_count();
    for (int i = length - 1; i >= 0; --i) {
        const Id code = id % base;
        id /= base;
        seq[i] = {static_cast<int>(code / space.actions), static_cast<int>(code % space.actions)};
    }
    return seq;
}

void check_step(const SequenceSpace& space, int h, bool allow_end) {
    const int last = allow_end ? space.horizon : space.horizon - 1;
    if (h < 0 || h > last) throw EncodingError("step " + std::to_string(h) + " outside horizon");
}

}  // namespace

Id SequenceSpace::history_count(int h) const { return count_or_throw(pair_count(), h); }

Id SequenceSpace::future_count(int h) const { return count_or_throw(pair_count(), horizon - h); }

HistoryIndex encode_history(const SequenceSpace& space, int h, const Sequence& seq) {
    check_step(space, h, true);
    if (static_cast<int>(seq.size()) != h)
        throw EncodingError("history at step " + std::to_string(h) + " needs " + std::to_string(h) +
                            " pairs, got " + std::to_string(seq.size()));
    return {h, pack(space, seq)};
}

Sequence decode_history(const SequenceSpace& space, HistoryIndex index) {
    check_step(space, index.step, true);
    if (index.id >= space.history_count(index.step)) throw EncodingError("history id out of range");
    return unpack(space, index.id, index.step);
}

FutureIndex encode_future(const SequenceSpace& space, int h, const Sequence& seq) {
    check_step(space, h, true);
    const int length = space.horizon - h;
    if (static_cast<int>(seq.size()) != length)
        throw EncodingError("future at step " + std::to_string(h) + " needs " + std::to_string(length) +
                            " pairs, got " + std::to_string(seq.size()));
    return {h, pack(space, seq)};
}

Sequence decode_future(const SequenceSpace& space, FutureIndex index) {
    check_step(space, index.step, true);
    if (index.id >= space.future_count(index.step)) throw EncodingError("future id out of range");
    return unpack(space, index.id, space.horizon - index.step);
}

}  // namespace opelab
