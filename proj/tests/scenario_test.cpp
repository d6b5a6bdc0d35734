// Copyright 2026 The protosel Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "invariants.hpp"
#include "protosel/errors.hpp"
#include "protosel/scenario.hpp"
#include "support.hpp"

namespace protosel::scenario {
namespace {

using testsupport::fixture_path;
using testsupport::load_scenario;

Content raw(const std::string& name) {
    return Content::parse(testsupport::read_file(fixture_path("scenarios/" + name + ".json")));
}

Scenario from(const Content& j) { return scenario_from_json(j, fixture_path("scenarios")); }

TEST(Parse, DocumentSearchScenario) {
    const auto s = load_scenario("t1_joint");
    EXPECT_EQ(s.mode, SelectionMode::Joint);
    EXPECT_EQ(s.seed, 7u);
    EXPECT_EQ(s.agents.size(), 8u);
    ASSERT_EQ(s.tasks.size(), 1u);
    EXPECT_EQ(s.tasks[0].initiator, "q1");
    EXPECT_EQ(s.tasks[0].identified.at("IPS"),
              (std::set<AgentId>{"d1", "d2", "d4", "d5", "d7"}));
    EXPECT_NE(s.registry.find("CNP"), nullptr);
    EXPECT_EQ(s.compatibility.pairs().size(), 1u);
    EXPECT_EQ(s.find_agent("ghost"), nullptr);
}

TEST(Parse, EveryFixtureLoads) {
    const auto names = testsupport::scenario_names();
    EXPECT_GE(names.size(), 13u);
    for (const auto& n : names) EXPECT_NO_THROW(load_scenario(n)) << n;
}

TEST(Parse, ModeNames) {
    EXPECT_EQ(selection_mode_from_string("seq"), SelectionMode::IndividualSequential);
    EXPECT_EQ(selection_mode_from_string("individual_mixed"), SelectionMode::IndividualMixed);
    EXPECT_EQ(selection_mode_from_string("joint"), SelectionMode::Joint);
    EXPECT_THROW(selection_mode_from_string("both"), ParseError);
}

TEST(Parse, DanglingNamesAreUnresolved) {
    auto j = raw("t1_joint");
    j["agents"][1]["model"][0]["roles"] = {"ghost"};
    EXPECT_THROW(from(j), UnresolvedReference);

    auto k = raw("t1_joint");
    k["tasks"][0]["initiator"] = "nobody";
    EXPECT_THROW(from(k), UnresolvedReference);

    auto c = raw("t1_joint");
    c["compatibility"] = Content::array({Content::array({"IPS.initiator", "Nope.participant"})});
    EXPECT_THROW(from(c), UnresolvedReference);
}

TEST(Parse, MalformedInput) {
    auto j = raw("t1_joint");
    j["agents"] = "many";
    EXPECT_THROW(from(j), ParseError);
    EXPECT_THROW(parse_scenario("/nonexistent/s.json"), ParseError);
    auto m = raw("t1_joint");
    m["selection_mode"] = "both";
    EXPECT_THROW(from(m), ParseError);
}

TEST(Parse, RoundTrip) {
    for (const auto& n : testsupport::scenario_names()) {
        const auto s = load_scenario(n);
        const auto j = scenario_to_json(s);
        const auto back = from(j);
        EXPECT_EQ(scenario_to_json(back), j) << n;
        EXPECT_EQ(sim::to_jsonl(run_scenario(back).trace), sim::to_jsonl(run_scenario(s).trace))
            << n;
    }
}

TEST(Run, NoTasksIsAnEmptySummary) {
    auto j = raw("t1_joint");
    j["tasks"] = Content::array();
    const auto r = run_scenario(from(j));
    EXPECT_TRUE(r.summary.tasks.empty());
    EXPECT_TRUE(r.summary.all_succeeded());
    EXPECT_TRUE(r.trace.empty());
}

TEST(Run, ExpectedSummaries) {
    struct Case {
        const char* name;
        TaskStatus status;
        const char* protocol;
        int recoveries;
    };
    for (const auto& c : std::vector<Case>{{"t1_joint", TaskStatus::Succeeded, "IPS", 0},
                                           {"t1_all_refuse", TaskStatus::Failed, "", 0},
                                           {"t2_sequential_fault", TaskStatus::Succeeded,
                                            "ask_tell", 1},
                                           {"t2_singleton_fault", TaskStatus::Failed, "ask_tell",
                                            0},
                                           {"t3_contract_net", TaskStatus::Succeeded, "CNP", 0},
                                           {"t4_auction", TaskStatus::Succeeded, "Auction", 0}}) {
        const auto s = load_scenario(c.name);
        const auto r = run_scenario(s);
        const auto& t = r.summary.tasks.at(0);
        EXPECT_EQ(t.status, c.status) << c.name;
        EXPECT_EQ(t.protocol, c.protocol) << c.name;
        EXPECT_EQ(t.recoveries, c.recoveries) << c.name;
        EXPECT_TRUE(invariants::summary_matches(s, r).empty()) << c.name;
        EXPECT_EQ(summary_to_json(r.summary).at("all_succeeded"), r.summary.all_succeeded());
    }
}

TEST(Run, DeterministicPerSeed) {
    for (const auto& n : testsupport::scenario_names()) {
        const auto s = load_scenario(n);
        const auto a = run_scenario(s);
        const auto b = run_scenario(s);
        EXPECT_EQ(sim::to_jsonl(a.trace), sim::to_jsonl(b.trace)) << n;
        EXPECT_EQ(summary_to_json(a.summary), summary_to_json(b.summary)) << n;
    }
}

TEST(Run, OtherSeedsKeepInvariants) {
    for (const auto& n : testsupport::scenario_names()) {
        auto s = load_scenario(n);
        for (std::uint64_t seed = 100; seed < 110; ++seed) {
            s.seed = seed;
            const auto r = run_scenario(s);
            const auto bad = invariants::all(s, r);
            EXPECT_TRUE(bad.empty()) << n << " seed " << seed << ": " << bad.front();
        }
    }
}

TEST(Run, TinyBudgetThrows) {
    auto s = load_scenario("t2_sequential_fault");
    s.max_ticks = 2;
    EXPECT_THROW(run_scenario(s), BudgetExceeded);
}

}  // namespace
}  // namespace protosel::scenario
