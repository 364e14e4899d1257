#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "opelab/verify.hpp"
#include "support.hpp"

using namespace opelab;

TEST_CASE("registry matches the manifest") {
    std::ifstream in(std::string(OPELAB_TEST_DIR) + "/check_manifest.txt");
    REQUIRE(in);
    std::vector<std::string> manifest;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string name;
        ls >> name;
        manifest.push_back(name);
    }
    const std::vector<std::string> registry = check_registry();
    CHECK(std::set<std::string>(registry.begin(), registry.end()).size() == registry.size());
    CHECK(registry == manifest);
}

TEST_CASE("default fixture set passes") {
    SuiteOptions opt;
    opt.threads = 4;
    const SuiteReport r = run_verification_suite(default_fixture_set(0), opt);
    for (const CheckRow& row : r.rows)
        if (row.status == "fail") FAIL_CHECK(row.check << " on " << row.fixture << " step " << row.step << ": " << row.note);
    CHECK(r.passed());
    // Every registered check produced at least one row per fixture.
    std::map<std::string, std::set<std::string>> seen;
    for (const CheckRow& row : r.rows) seen[row.check].insert(row.fixture);
    for (const std::string& name : check_registry()) CHECK(seen[name].size() == fixture_kinds().size());
}

TEST_CASE("on-policy identities pass rather than skip") {
    const SuiteReport r = run_verification_suite({generate_fixture("onpolicy", {}, 0)});
    for (const CheckRow& row : r.rows)
        if (row.check.rfind("onpolicy_", 0) == 0) CHECK(row.status == "pass");
}

TEST_CASE("corrupted solutions fail with the expected magnitude") {
    SuiteOptions opt;
    opt.fdvf_perturbation = 0.1;
    const SuiteReport r = run_verification_suite({test::bandit()}, opt);
    CHECK_FALSE(r.passed());
    // pinv features are u(f); the offset moves M_F V by M_F M_F^T 0.1 = 0.05.
    bool found = false;
    for (const CheckRow& row : r.rows) {
        if (row.check != "fdvf_residual.pinv") continue;
        found = true;
        CHECK(row.status == "fail");
        CHECK(row.achieved == doctest::Approx(0.05).epsilon(1e-12));
    }
    CHECK(found);
}

TEST_CASE("output is independent of the thread count") {
    std::vector<Fixture> fx = default_fixture_set(1);
    for (std::uint64_t s = 0; s < 4; ++s) fx.push_back(test::random_fixture(s));
    SuiteOptions one, many;
    many.threads = 5;
    const std::string a = suite_to_csv(run_verification_suite(fx, one));
    const std::string b = suite_to_csv(run_verification_suite(fx, many));
    CHECK(a == b);
    CHECK(a.rfind("check,fixture,step,status,achieved,tolerance,note\n", 0) == 0);
}

TEST_CASE("json report") {
    const SuiteReport r = run_verification_suite({test::bandit()});
    const Json j = suite_to_json(r);
    CHECK(j["failures"] == 0);
    CHECK(j["rows"].size() == r.rows.size());
    CHECK(j["rows"][0]["achieved"].is_string());
}
