#include <catch_amalgamated.hpp>

#include "swingbench/scenario.hpp"

using namespace swingbench;

TEST_CASE("builtin scenarios expose the documented event sets") {
    const Scenario s1 = find_scenario("S1");
    REQUIRE(s1.faults.size() == 1);
    CHECK(s1.faults[0].t_start == 0.2);
    CHECK(s1.faults[0].duration == 0.5);
    REQUIRE(s1.load_steps.size() == 1);
    CHECK(s1.load_steps[0].t == 8.0);
    CHECK(s1.load_steps[0].fraction == 0.1);
    CHECK(s1.pe0 == 0.8);

    const Scenario s2 = find_scenario("S2");
    CHECK(s2.faults[0].duration == 1.0);
    CHECK(s2.load_steps.empty());

    const Scenario s3 = find_scenario("S3");
    CHECK(s3.pe0 == 1.0);
    CHECK(s3.faults[0].duration == 0.5);

    // V shares the S1 event set
    const Scenario v = find_scenario("V");
    CHECK(v.faults[0].t_start == s1.faults[0].t_start);
    CHECK(v.load_steps.size() == 1);

    for (const auto& s : builtin_scenarios()) CHECK_NOTHROW(s.validate());
    CHECK_THROWS(find_scenario("S4"));
}

TEST_CASE("validate rejects malformed scenarios") {
    Scenario s;
    s.name = "bad";
    s.t_end = 15.0;
    s.faults = {{-0.1, 0.5, -1.0}};
    CHECK_THROWS(s.validate()); // negative start
    s.faults = {{0.2, 0.0, -1.0}};
    CHECK_THROWS(s.validate()); // zero duration
    s.faults = {{0.2, 0.5, -1.0}, {0.4, 0.5, -1.0}};
    CHECK_THROWS(s.validate()); // overlap
    s.faults = {{0.2, 0.5, -1.0}};
    s.load_steps = {{8.0, -1.0}};
    CHECK_THROWS(s.validate()); // -100% load
    s.load_steps = {{14.5, 0.1}};
    CHECK_THROWS(s.validate()); // < 2 s of tail after the last event
    s.load_steps.clear();
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("first_event_time is the earliest fault or load step") {
    Scenario s;
    s.name = "x";
    s.t_end = 15.0;
    s.faults = {{3.0, 0.5, -1.0}};
    s.load_steps = {{1.5, 0.1}};
    CHECK(s.first_event_time() == 1.5);
    s.load_steps.clear();
    CHECK(s.first_event_time() == 3.0);
    s.faults.clear();
    CHECK(s.first_event_time() == s.t_end);
}

TEST_CASE("mechanical_power applies load steps at and after their time") {
    std::vector<LoadStepEvent> steps = {{8.0, 0.1}};
    CHECK(mechanical_power(0.8, 7.999, steps) == 0.8);
    CHECK(mechanical_power(0.8, 8.0, steps) == Catch::Approx(0.88));
    CHECK(mechanical_power(0.8, 12.0, steps) == Catch::Approx(0.88));
}
