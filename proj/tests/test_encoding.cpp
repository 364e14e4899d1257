#include <doctest.h>

#include "opelab/encoding.hpp"
#include "opelab/errors.hpp"

using namespace opelab;

TEST_CASE("empty history has id 0") {
    const SequenceSpace sp{3, 2, 2};
    CHECK(encode_history(sp, 0, {}).id == 0);
    CHECK(sp.history_count(0) == 1);
    CHECK(decode_history(sp, {0, 0}).empty());
}

TEST_CASE("single pair history packs observation-major") {
    const SequenceSpace sp{3, 2, 2};
    CHECK(encode_history(sp, 1, {{1, 0}}).id == 2);
    CHECK(encode_history(sp, 1, {{1, 1}}).id == 3);
    CHECK(encode_history(sp, 2, {{1, 0}, {0, 1}}).id == 9);
}

TEST_CASE("history round trip over every id") {
    const SequenceSpace sp{4, 2, 2};
    REQUIRE(sp.history_count(2) == 16);
    for (Id id = 0; id < sp.history_count(2); ++id) {
        const Sequence seq = decode_history(sp, {2, id});
        CHECK(seq.size() == 2);
        CHECK(encode_history(sp, 2, seq).id == id);
    }
}

TEST_CASE("future round trip and counts") {
    const SequenceSpace sp{3, 3, 2};
    CHECK(sp.future_count(0) == 216);
    CHECK(sp.future_count(3) == 1);
    for (Id id = 0; id < sp.future_count(1); ++id) {
        const Sequence seq = decode_future(sp, {1, id});
        CHECK(seq.size() == 2);
        CHECK(encode_future(sp, 1, seq).id == id);
    }
}

TEST_CASE("future at step h is the trailing part of the trajectory id") {
    const SequenceSpace sp{3, 2, 2};
    const Sequence traj{{1, 0}, {0, 1}, {1, 1}};
    const Id t = encode_future(sp, 0, traj).id;
    const Id tail = encode_future(sp, 1, {traj[1], traj[2]}).id;
    CHECK(t % sp.future_count(1) == tail);
    CHECK(t / sp.future_count(1) == encode_history(sp, 1, {traj[0]}).id);
}

TEST_CASE("bad sequences are rejected") {
    const SequenceSpace sp{3, 2, 2};
    CHECK_THROWS_AS(encode_history(sp, 1, {{2, 0}}), EncodingError);
    CHECK_THROWS_AS(encode_history(sp, 1, {{0, -1}}), EncodingError);
    CHECK_THROWS_AS(encode_history(sp, 2, {{0, 0}}), EncodingError);
    CHECK_THROWS_AS(encode_future(sp, 0, {{0, 0}}), EncodingError);
    CHECK_THROWS_AS(decode_history(sp, {1, 4}), EncodingError);
}

TEST_CASE("checked_pow detects overflow") {
    Id out = 0;
    CHECK(checked_pow(4, 3, out));
    CHECK(out == 64);
    CHECK(checked_pow(7, 0, out));
    CHECK(out == 1);
    CHECK_FALSE(checked_pow(1000, 7, out));
}
