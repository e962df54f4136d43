#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "fmig/io.hpp"

using namespace fmig;

TEST_CASE("prior round trip") {
    const auto q = generate_prior(3, 4, 2, 8);
    const auto doc = to_json(q);
    const auto back = prior_from_json(doc);
    CHECK(back == q);
    // doubles survive text serialization exactly
    CHECK(prior_from_json(json::parse(doc.dump())) == q);

    auto extra = doc;
    extra["comment"] = "x";
    CHECK_THROWS_WITH_AS(prior_from_json(extra), doctest::Contains("comment"), std::invalid_argument);
    auto missing = doc;
    missing.erase("cond_b");
    CHECK_THROWS_AS(prior_from_json(missing), std::invalid_argument);
    auto wrong = doc;
    wrong["sigma_a"] = 5;
    CHECK_THROWS_AS(prior_from_json(wrong), std::invalid_argument);
}

TEST_CASE("prior file") {
    const auto dir = std::filesystem::temp_directory_path() / "fmig_test_io";
    std::filesystem::create_directories(dir);
    const auto q = generate_prior(2, 2, 2, 1);
    write_json_file(dir / "prior.json", to_json(q));
    CHECK(read_prior_file(dir / "prior.json") == q);
    CHECK_THROWS(read_prior_file(dir / "missing.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("optimizer config") {
    const auto cfg = optimizer_config_from_json(json{{"restarts", 3}, {"optimize_p", false}});
    CHECK(cfg.restarts == 3);
    CHECK_FALSE(cfg.optimize_p);
    CHECK(cfg.max_iters == OptimizerConfig{}.max_iters);
    CHECK_THROWS_AS(optimizer_config_from_json(json{{"learning_rate", 0.1}}), std::invalid_argument);
    CHECK_THROWS_AS(optimizer_config_from_json(json{{"restarts", 0}}), std::invalid_argument);
    const auto round = optimizer_config_from_json(to_json(cfg));
    CHECK(round.restarts == 3);
}

TEST_CASE("hypothesis") {
    const auto h = hypothesis_from_json(json::parse("[[0.7,0.3],[0.1,0.9]]"));
    CHECK(h.rows().size() == 2);
    CHECK(to_json(h) == json::parse("[[0.7,0.3],[0.1,0.9]]"));
    CHECK_THROWS_AS(hypothesis_from_json(json::parse("[[0.7,0.4]]")), std::invalid_argument);
}

TEST_CASE("config hash") {
    const auto a = json::parse(R"({"x": 1, "y": [1, 2]})");
    const auto b = json::parse(R"({"y": [1, 2], "x": 1})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash(json::parse(R"({"x": 2, "y": [1, 2]})")));
    CHECK(provenance_line(config_hash(a)) == "# fmig " + version() + " config " + config_hash(a));
}

TEST_CASE("samples csv") {
    std::istringstream in("# comment\ntask_id,x_a,x_b\n0,1,2\n1,,0\n\n2,3,\n");
    const auto s = read_samples_csv(in);
    REQUIRE(s.size() == 3);
    CHECK(s[0].task_id == 0);
    CHECK(*s[0].x_a == 1);
    CHECK(*s[0].x_b == 2);
    CHECK_FALSE(s[1].x_a);
    CHECK_FALSE(s[2].x_b);

    std::ostringstream out;
    write_samples_csv(out, s, provenance_line("0123456789abcdef"));
    std::istringstream again(out.str());
    CHECK(read_samples_csv(again) == s);
    CHECK(out.str().rfind("# fmig", 0) == 0);

    for (const char* bad : {"a,b,c\n0,1,2\n", "task_id,x_a,x_b\n0,1\n", "task_id,x_a,x_b\n0,-1,2\n",
                            "task_id,x_a,x_b\n0,x,2\n", "task_id,x_a,x_b\n0,1,2\n0,1,1\n"}) {
        std::istringstream is(bad);
        CHECK_THROWS_AS(read_samples_csv(is), std::invalid_argument);
    }
}

TEST_CASE("format_double") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5, 0.2096677096373839}) CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("report serialization") {
    const auto q = generate_prior(3, 3, 2, 1, 1.0, true);
    const auto st = to_json(check_stable(q));
    CHECK(st.at("stable").get<bool>());
    const auto wd = to_json(check_well_defined(q, 0.1));
    CHECK(wd.contains("verdict"));
    const auto tr = to_json(verify_truthful(q, Mechanism::single(), 0.25));
    CHECK(tr.contains("margin"));
}
