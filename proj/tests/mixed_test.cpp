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

#include "generators.hpp"
#include "invariants.hpp"
#include "oracles.hpp"
#include "protosel/errors.hpp"
#include "protosel/mixed.hpp"
#include "protosel/scenario.hpp"
#include "support.hpp"

namespace protosel::mixed {
namespace {

using individual::ErrorKind;
using testsupport::fixture_registry;
using testsupport::load_scenario;

RoleRef R(const std::string& text) { return RoleRef::parse(text); }

Message ask() {
    Message m;
    m.performative = {"ask-one"};
    m.content = {{"query", "price(ibm, X)"}};
    m.language = "kif";
    m.ontology = "rules";
    m.sender = "q2";
    m.receiver = "c1";
    m.conversation_id = "t2/ask_tell/c1";
    m.reply_with = "q2#1";
    return m;
}

class RuleZone : public ::testing::Test {
protected:
    ProtocolRegistry reg = fixture_registry();
    int ids = 0;
    MessageFactory make = [this](const MessageSchema& s, Content content) {
        Message m;
        m.performative = s.performative;
        m.content = std::move(content);
        m.language = s.language;
        m.ontology = s.ontology;
        m.sender = "c1";
        m.receiver = "q2";
        m.conversation_id = "t2/ask_tell/c1";
        m.in_reply_to = "q2#1";
        m.reply_with = "c1#" + std::to_string(++ids);
        return m;
    };

    ControlZone all_rules() {
        const RoleCollection c("t2", {R("rule_r1.r1"), R("rule_r2.r2"), R("rule_r3.r3"),
                                      R("rule_r4.r4")});
        return instantiate_all(c, ask(), reg, make, Journal("c1", "t2/ask_tell/c1"));
    }

    static std::vector<std::string> performatives(const ControlZone& cz) {
        std::vector<std::string> out;
        for (const auto& e : cz.outbox) {
            out.push_back(e.messages.empty() ? "" : e.messages.back().performative.name);
        }
        return out;
    }
};

TEST_F(RuleZone, EveryRoleAnswersTheFirstMessage) {
    const auto cz = all_rules();
    ASSERT_EQ(cz.instances.size(), 4u);
    EXPECT_EQ(cz.with(Activation::Active).size(), 4u);
    // First-declared transitions.
    EXPECT_EQ(performatives(cz), (std::vector<std::string>{"insert", "error", "sorry", "tell"}));
    EXPECT_FALSE(cz.outbox[0].weak);
    EXPECT_TRUE(cz.outbox[1].weak);
    EXPECT_TRUE(cz.outbox[2].weak);
    EXPECT_FALSE(cz.outbox[3].weak);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(cz.outbox[i].instance, i);
}

TEST_F(RuleZone, UnacceptingRolesAreStopped) {
    auto m0 = ask();
    m0.performative = {"tell"};
    const RoleCollection c("t2", {R("rule_r1.r1"), R("rule_r4.r4")});
    const auto cz = instantiate_all(c, m0, reg, make);
    EXPECT_TRUE(cz.outbox.empty());
    EXPECT_EQ(cz.with(Activation::Stopped).size(), 2u);
}

TEST_F(RuleZone, SelectionPrefersMessagesThatContinue) {
    const auto cz = all_rules();
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        seen.insert(performatives(cz)[select_outgoing(cz, rng)]);
    }
    EXPECT_EQ(seen, (std::set<std::string>{"insert", "tell"}));
    Rng rng(0);
    EXPECT_EQ(select_outgoing(cz, rng, {1, 2, 3}), 3u);
    EXPECT_THROW(select_outgoing(cz, rng, {}), std::invalid_argument);
}

TEST_F(RuleZone, DisagreeingStepKeepsOneGroup) {
    auto cz = all_rules();
    Rng rng(4);
    const auto pick = reconcile_after_step(cz, rng);
    ASSERT_TRUE(pick);
    EXPECT_EQ(cz.with(Activation::Active), (std::vector<std::size_t>{cz.outbox[*pick].instance}));
    for (auto i : cz.with(Activation::Deactivated)) {
        EXPECT_EQ(cz.instances[i].deactivation_stamp, cz.step);
    }
    // Now only one active instance remains, so reconciliation is a no-op.
    const auto again = reconcile_after_step(cz, rng);
    EXPECT_EQ(again, pick);
    EXPECT_EQ(cz.with(Activation::Active).size(), 1u);
}

TEST_F(RuleZone, IdenticalMessagesStayActiveTogether) {
    const RoleCollection c("t2", {R("rule_r4.r4"), R("rule_r3.r3"), R("rule_r4.r4")});
    auto cz = instantiate_all(c, ask(), reg, make);
    // Two r4 instances say the same tell; r3 says sorry.
    Rng rng(1);
    const auto pick = reconcile_after_step(cz, rng);
    ASSERT_TRUE(pick);
    EXPECT_EQ(cz.outbox[*pick].messages.back().performative.name, "tell");
    // Keys differ in the reply-with id but not in structure or content.
    EXPECT_EQ(cz.outbox[0].key, cz.outbox[2].key);
    EXPECT_EQ(cz.with(Activation::Active), (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(cz.with(Activation::Deactivated), (std::vector<std::size_t>{1}));
}

TEST_F(RuleZone, ReactivationTakesTheNewestClass) {
    ControlZone cz;
    auto add = [&](const std::string& ref, Activation a, std::uint64_t stamp) {
        RoleInstance inst{R(ref), RoleExecution(BoundRole::resolve(reg, R(ref))), Journal{}};
        inst.activation = a;
        inst.deactivation_stamp = stamp;
        cz.instances.push_back(std::move(inst));
    };
    add("rule_r1.r1", Activation::Active, 0);
    add("rule_r2.r2", Activation::Deactivated, 3);
    add("rule_r3.r3", Activation::Stopped, 0);
    add("rule_r4.r4", Activation::Deactivated, 1);
    add("rule_r1.r1", Activation::Deactivated, 3);
    cz.journal = Journal("c1", "conv");
    cz.journal.append("r2_answer", MessageReception{ask()}, {});
    cz.journal.append("r2_again", MessageReception{ask()}, {});

    const auto r = reactivate(cz);
    EXPECT_EQ(r.instances, (std::vector<std::size_t>{1, 4}));
    EXPECT_EQ(r.per_role, (std::vector<individual::RecoveryPoints>{{2, 2}, {1, 1}}));
    EXPECT_EQ(r.point, (individual::RecoveryPoints{1, 1}));

    for (auto& inst : cz.instances) {
        if (inst.activation == Activation::Deactivated) inst.activation = Activation::Stopped;
    }
    EXPECT_THROW(reactivate(cz), NoDeactivatedRole);
}

TEST_F(RuleZone, ControlZoneDump) {
    auto cz = all_rules();
    Rng rng(2);
    const auto pick = reconcile_after_step(cz, rng);
    ASSERT_TRUE(pick);
    cz.journal = cz.instances[cz.outbox[*pick].instance].journal;
    std::vector<Activation> col;
    for (const auto& inst : cz.instances) col.push_back(inst.activation);
    cz.activation_columns.assign(cz.journal.size(), col);

    const auto text = dump_control_zone(cz);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'),
              static_cast<long>(cz.journal.size()));
    for (const auto* r : {"r1=", "r2=", "r3=", "r4="}) EXPECT_NE(text.find(r), std::string::npos);
    const auto golden = testsupport::golden_path("control_zone.txt");
    if (std::getenv("PROTOSEL_UPDATE_GOLDEN")) testsupport::write_file(golden, text);
    EXPECT_EQ(text, testsupport::read_file(golden));
}

// ---------------------------------------------------------------------------
// Error rules against the entry-by-entry oracle

TEST(ErrorRules, MatchOracle) {
    Rng draw(31);
    for (int k = 0; k < 600; ++k) {
        auto c = gen::outbox_case(draw);
        const auto expect = oracle::mixed_error_rules(c.items, c.failed, c.kind);
        Rng rng(k);
        auto cz = c.zone;
        const auto pick = handle_error_mixed(cz, c.kind, rng);

        std::set<std::size_t> remaining;
        for (const auto& e : cz.outbox) remaining.insert(e.instance);
        for (std::size_t i = 0; i < c.items.size(); ++i) {
            ASSERT_EQ(remaining.count(i) == 0, expect.removed.count(i) == 1)
                << "instance " << k << " entry " << i;
        }
        for (auto i : expect.removed) {
            EXPECT_EQ(cz.instances[i].activation, Activation::Stopped) << "instance " << k;
        }
        for (std::size_t i = 0; i < c.items.size(); ++i) {
            if (c.items[i].active) {
                EXPECT_NE(cz.instances[i].activation, Activation::Active);
            }
        }
        ASSERT_EQ(pick.has_value(), !expect.admissible.empty()) << "instance " << k;
        if (!pick) {
            EXPECT_TRUE(cz.with(Activation::Active).empty());
            continue;
        }
        const auto chosen = cz.outbox[*pick].instance;
        EXPECT_TRUE(expect.admissible.count(chosen)) << "instance " << k << " chose " << chosen;
        EXPECT_EQ(cz.instances[chosen].activation, Activation::Active);
        for (auto i : cz.with(Activation::Active)) {
            EXPECT_EQ(cz.entry_for(i)->key, cz.outbox[*pick].key);
        }
    }
}

TEST(ErrorRules, NothingSentMeansNoReplacement) {
    Rng draw(5);
    auto c = gen::outbox_case(draw);
    c.zone.sent_history.clear();
    Rng rng(0);
    EXPECT_FALSE(handle_error_mixed(c.zone, ErrorKind::WrongContent, rng));
    EXPECT_TRUE(c.zone.with(Activation::Active).empty());
}

// ---------------------------------------------------------------------------
// Full runs

TEST(MixedRun, HappyPath) {
    const auto s = load_scenario("t2_mixed");
    const auto r = scenario::run_scenario(s);
    const auto bad = invariants::all(s, r);
    EXPECT_TRUE(bad.empty()) << bad.front();
    EXPECT_EQ(r.summary.tasks.at(0).status, TaskStatus::Succeeded);
    EXPECT_EQ(r.summary.tasks.at(0).recoveries, 0);
}

TEST(MixedRun, FaultIsAbsorbed) {
    const auto s = load_scenario("t2_mixed_fault");
    const auto r = scenario::run_scenario(s);
    const auto bad = invariants::all(s, r);
    EXPECT_TRUE(bad.empty()) << bad.front();
    const auto& t = r.summary.tasks.at(0);
    EXPECT_EQ(t.status, TaskStatus::Succeeded);
    EXPECT_GE(t.recoveries, 1);
    EXPECT_FALSE(testsupport::events_of(r.trace, sim::TraceKind::Fault).empty());
}

TEST(MixedRun, RandomFaultsKeepActiveRolesCoherent) {
    Rng rng(2718);
    for (int k = 0; k < 80; ++k) {
        auto s = load_scenario("t2_mixed_fault");
        s.seed = rng.next();
        auto& f = s.faults.at(0);
        f.ordinal = 1 + rng.uniform(4);
        if (rng.uniform(2)) {
            f.mutation.kind = sim::Mutation::Kind::CorruptStructure;
            f.mutation.target = rng.uniform(2) ? "performative" : "shape";
        }
        const auto r = scenario::run_scenario(s);
        const auto bad = invariants::all(s, r);
        ASSERT_TRUE(bad.empty()) << "instance " << k << ": " << bad.front();
        EXPECT_NE(r.summary.tasks.at(0).status, TaskStatus::Pending);
    }
}

}  // namespace
}  // namespace protosel::mixed
