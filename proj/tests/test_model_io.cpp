#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "opelab/errors.hpp"
#include "opelab/model_io.hpp"
#include "support.hpp"

using namespace opelab;

TEST_CASE("model json round trip") {
    const Fixture fx = test::random_fixture(5);
    const Json j = model_to_json(fx.model);
    const TabularPOMDP back = model_from_json(j);
    CHECK(model_to_json(back).dump() == j.dump());
    CHECK(model_fingerprint(back) == model_fingerprint(fx.model));
    CHECK(policy_to_json(policy_from_json(policy_to_json(fx.pi_b))).dump() == policy_to_json(fx.pi_b).dump());
}

TEST_CASE("strict model parsing") {
    Json j = model_to_json(test::bandit().model);
    Json extra = j;
    extra["comment"] = "x";
    CHECK_THROWS_AS(model_from_json(extra), ParseError);
    Json missing = j;
    missing.erase("d1");
    CHECK_THROWS_AS(model_from_json(missing), ParseError);
    Json wrong = j;
    wrong["H"] = "one";
    CHECK_THROWS_AS(model_from_json(wrong), ParseError);
    CHECK_THROWS_AS(policy_from_json(Json{{"pi", 3}}), ParseError);
}

TEST_CASE("fingerprints differ across models and print as 16 hex digits") {
    const std::uint64_t a = model_fingerprint(test::bandit().model);
    const std::uint64_t b = model_fingerprint(test::random_fixture(1).model);
    CHECK(a != b);
    CHECK(fingerprint_hex(a).size() == 16);
    CHECK(fingerprint_hex(0x1f) == "000000000000001f");
}

TEST_CASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "opelab_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "m.json").string();
    write_json_file(path, model_to_json(test::bandit().model));
    CHECK(model_to_json(load_model(path)).dump() == model_to_json(test::bandit().model).dump());
    CHECK_THROWS_AS(read_json_file((dir / "absent.json").string()), ParseError);
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("{\"H\": ", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_model(path), ParseError);
    std::filesystem::remove_all(dir);
}
