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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// FAIL. Instance counts and time limits are fixed here.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "invariants.hpp"
#include "oracles.hpp"
#include "protosel/individual.hpp"
#include "protosel/joint.hpp"
#include "protosel/scenario.hpp"
#include "support.hpp"

using namespace protosel;
using testsupport::load_scenario;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

template <typename T>
std::string str(const T& v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

// 1. Candidate matrix incidences and the first explored vector.
Verdict candidate_matrix() {
    Verdict v;
    const auto s = load_scenario("t1_joint");
    const auto& t = s.tasks.at(0);
    const auto cand =
        match_task_to_protocols(t.task, s.find_agent(t.initiator)->model, s.registry);
    const auto m = joint::build_candidate_matrix(cand, t.identified, t.potential_participants);
    const std::set<std::pair<std::string, AgentId>> expect{
        {"IPS", "d1"},     {"IPS", "d2"},     {"IPS", "d4"},     {"IPS", "d5"}, {"IPS", "d7"},
        {"Request", "d3"}, {"Request", "d4"}, {"Request", "d5"}, {"Request", "d7"}};
    if (m.protocols != std::vector<std::string>{"IPS", "Request"}) v.fail("rows differ");
    if (m.agents != std::vector<AgentId>{"d1", "d2", "d3", "d4", "d5", "d6", "d7"}) {
        v.fail("columns differ");
    }
    if (m.cells != expect) v.fail("cells differ");
    const auto first = joint::next_vector(m, joint::Exploration::ProtocolOriented, {});
    if (first != "IPS") v.fail("first vector is " + first.value_or("none"));
    return v;
}

// 2. The t1 triple is offered by its agent; all-refuse fails.
Verdict joint_one_one() {
    Verdict v;
    const auto s = load_scenario("t1_joint");
    const auto r = scenario::run_scenario(s);
    const auto& t = r.summary.tasks.at(0);
    if (t.status != TaskStatus::Succeeded || t.assignment.size() != 1) {
        v.fail("t1 did not produce a single assignment");
        return v;
    }
    const auto& [agent, role] = *t.assignment.begin();
    if (RoleRef::parse(role).protocol != t.protocol) v.fail("role outside the chosen protocol");
    bool offered = false;
    for (const auto& e : testsupport::events_of(r.trace, sim::TraceKind::Send)) {
        if (e.payload.at("performative") != "ready-to-select" || e.payload.at("sender") != agent) {
            continue;
        }
        for (const auto& x : e.payload.at("content")) offered = offered || x == role;
    }
    if (!offered) v.fail(role + " not in " + agent + "'s payload");
    const auto bad = invariants::all(s, r);
    if (!bad.empty()) v.fail(bad.front());

    const auto refuse = scenario::run_scenario(load_scenario("t1_all_refuse"));
    if (refuse.summary.tasks.at(0).status != TaskStatus::Failed) v.fail("all-refuse succeeded");
    return v;
}

// 3. Largest set against the literal bitmask oracle.
Verdict largest_set() {
    Verdict v;
    Rng rng(3001);
    for (int k = 0; k < 2000; ++k) {
        const auto c = gen::largest_set_case(rng);
        if (joint::select_largest_set(c.replies, c.identified) !=
            oracle::largest_set(c.replies, c.identified)) {
            v.fail("instance " + str(k) + " disagrees");
            break;
        }
    }
    if (v.ok) v.detail = "2000 instances";
    return v;
}

// 4. 1-N trees: coverage, candidate sets, injectivity when possible.
Verdict one_n() {
    Verdict v;
    Rng draw(4001);
    int checked = 0;
    for (int k = 0; k < 1000 && v.ok; ++k) {
        const auto c = gen::forest_case(draw);
        std::vector<const Protocol*> protocols;
        for (const auto& p : c.protocols) protocols.push_back(&p);
        Rng rng(k);
        const auto got = joint::assign_roles_1_N(c.replies, protocols, rng);
        bool coverable = false;
        for (const auto& p : c.protocols) {
            const auto cand = oracle::candidates_for(p, c.replies);
            bool covers = true;
            for (const auto& [role, agents] : cand) covers = covers && !agents.empty();
            coverable = coverable || covers;
        }
        if (got.has_value() != coverable) {
            v.fail("instance " + str(k) + ": solution presence differs");
            break;
        }
        if (!got) continue;
        ++checked;
        const Protocol* proto = nullptr;
        for (const auto& p : c.protocols) {
            if (p.protocol_id == got->protocol) proto = &p;
        }
        const auto cand = oracle::candidates_for(*proto, c.replies);
        if (got->assignment.size() != cand.size()) v.fail("instance " + str(k) + ": a role is uncovered");
        std::set<AgentId> used;
        for (const auto& [role, agent] : got->assignment) {
            if (!cand.count(role) || !cand.at(role).count(agent)) {
                v.fail("instance " + str(k) + ": " + role + " given to a non-candidate");
            }
            used.insert(agent);
        }
        if (oracle::injective_assignment_exists(cand) && used.size() != got->assignment.size()) {
            v.fail("instance " + str(k) + ": not injective though the oracle found one");
        }
    }
    if (v.ok) v.detail = "1000 forests, " + str(checked) + " assigned";
    return v;
}

// 5. Recovery points against the replay interpreter, plus the rule example.
Verdict recovery_points() {
    Verdict v;
    Rng rng(5001);
    for (int k = 0; k < 2000; ++k) {
        const auto c = gen::journal_case(rng);
        const auto got = individual::compute_recovery_points(c.journal, c.graph);
        if (got != oracle::replay_recovery_points(c.journal, c.graph)) {
            v.fail("instance " + str(k) + " disagrees");
            break;
        }
        if (got.initiator < 1 || got.initiator > got.participant) {
            v.fail("instance " + str(k) + ": bounds violated");
            break;
        }
    }
    const auto r = scenario::run_scenario(load_scenario("t2_sequential_fault"));
    const auto rec = testsupport::events_of(r.trace, sim::TraceKind::Recovery);
    if (rec.empty() || rec[0].payload.at("initiator_point") != rec[0].payload.at("participant_point")) {
        v.fail("first recovery has unequal points");
    }
    if (v.ok) v.detail = "2000 instances";
    return v;
}

// 6. The faulted rule query: r1 purged, r3 chosen, one recovery, both ends
// terminate, trace equals the frozen golden copy.
Verdict sequential_golden() {
    Verdict v;
    const auto r = scenario::run_scenario(load_scenario("t2_sequential_fault"));
    const auto& t = r.summary.tasks.at(0);
    if (t.status != TaskStatus::Succeeded) v.fail("task failed");
    if (t.final_role != "rule_r3.r3") v.fail("final role " + t.final_role);
    const auto rec = testsupport::events_of(r.trace, sim::TraceKind::Recovery);
    if (rec.size() != 1) {
        v.fail(str(rec.size()) + " recoveries");
    } else {
        bool r1 = false;
        for (const auto& p : rec[0].payload.at("purged")) r1 = r1 || p.at("role") == "rule_r1.r1";
        if (!r1) v.fail("r1 not purged");
        if (rec[0].payload.at("to") != "rule_r3.r3") v.fail("replacement is not r3");
    }
    std::set<std::string> sides;
    for (const auto& e : testsupport::events_of(r.trace, sim::TraceKind::Termination)) {
        sides.insert(e.payload.value("side", ""));
    }
    if (sides != std::set<std::string>{"initiator", "participant"}) v.fail("termination not mutual");
    if (sim::to_jsonl(r.trace) !=
        testsupport::read_file(testsupport::golden_path("t2_sequential_fault.jsonl"))) {
        v.fail("trace differs from golden");
    }
    return v;
}

// A rule agent with a random nonempty subset of r1..r4 in random order.
scenario::Scenario random_mixed(Rng& rng) {
    auto s = load_scenario("t2_mixed_fault");
    s.seed = rng.next();
    for (auto& a : s.agents) {
        if (a.id != "c1") continue;
        std::vector<int> rules{1, 2, 3, 4};
        for (std::size_t i = rules.size(); i > 1; --i) std::swap(rules[i - 1], rules[rng.uniform(i)]);
        rules.resize(1 + rng.uniform(4));
        if (std::find(rules.begin(), rules.end(), 4) == rules.end() && rng.uniform(2)) {
            rules.back() = 4;
        }
        InteractionModel m;
        for (int k : rules) m.add("rule_r" + str(k), "r" + str(k));
        a.model = m;
    }
    auto& f = s.faults.at(0);
    f.ordinal = 1 + rng.uniform(4);
    switch (rng.uniform(3)) {
        case 0:
            f.mutation = {sim::Mutation::Kind::CorruptContent, ""};
            break;
        case 1:
            f.mutation = {sim::Mutation::Kind::CorruptStructure, "performative"};
            break;
        default:
            f.mutation = {sim::Mutation::Kind::CorruptStructure, "shape"};
            break;
    }
    if (rng.uniform(4) == 0) {
        auto second = f;
        second.ordinal = f.ordinal + 1 + rng.uniform(3);
        s.faults.push_back(second);
    }
    return s;
}

// 7. Mixed-mode runs with faults.
Verdict mixed_runs() {
    Verdict v;
    Rng rng(7001);
    int recovered = 0;
    for (int k = 0; k < 300 && v.ok; ++k) {
        const auto s = random_mixed(rng);
        scenario::RunResult r;
        try {
            r = scenario::run_scenario(s);
        } catch (const std::exception& e) {
            v.fail("run " + str(k) + ": " + e.what());
            break;
        }
        const auto bad = invariants::all(s, r);
        if (!bad.empty()) v.fail("run " + str(k) + ": " + bad.front());
        const auto& t = r.summary.tasks.at(0);
        if (t.status == TaskStatus::Pending) v.fail("run " + str(k) + " did not finish");
        bool initiator_done = false;
        for (const auto& e : testsupport::events_of(r.trace, sim::TraceKind::Termination)) {
            initiator_done = initiator_done || e.payload.value("side", "") == "initiator";
        }
        if (!initiator_done) v.fail("run " + str(k) + ": initiator never terminated");
        recovered += t.recoveries > 0;
    }
    if (v.ok) v.detail = "300 runs, " + str(recovered) + " with recoveries";
    return v;
}

// 8. Byte-identical reruns; other seeds keep every invariant.
Verdict determinism() {
    Verdict v;
    for (const auto& n : testsupport::scenario_names()) {
        auto s = load_scenario(n);
        if (sim::to_jsonl(scenario::run_scenario(s).trace) !=
            sim::to_jsonl(scenario::run_scenario(s).trace)) {
            v.fail(n + " is not reproducible");
        }
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            s.seed = seed * 7919;
            const auto r = scenario::run_scenario(s);
            const auto bad = invariants::all(s, r);
            if (!bad.empty()) v.fail(n + " seed " + str(s.seed) + ": " + bad.front());
        }
    }
    if (v.ok) v.detail = str(testsupport::scenario_names().size()) + " scenarios";
    return v;
}

struct Criterion {
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"1 candidate matrix and first vector", 1.0, candidate_matrix},
        {"2 joint 1-1 outcome and refusal", 1.0, joint_one_one},
        {"3 largest set vs oracle", 10.0, largest_set},
        {"4 1-N tree assignment", 10.0, one_n},
        {"5 recovery points vs replay", 5.0, recovery_points},
        {"6 sequential recovery golden run", 1.0, sequential_golden},
        {"7 mixed-mode coherence under faults", 20.0, mixed_runs},
        {"8 determinism across seeds", 10.0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.fail(std::string("threw: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (v.ok && secs > c.limit_s) v.fail("over the time limit");
        failures += !v.ok;
        std::printf("%s  %-38s %7.3fs / %4.1fs  %s\n", v.ok ? "PASS" : "FAIL", c.name, secs,
                    c.limit_s, v.detail.c_str());
    }
    return failures == 0 ? 0 : 1;
}
