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

#include "invariants.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace protosel::invariants {

using sim::TraceKind;

namespace {

std::string conversation_of(const sim::TraceEvent& e) {
    return e.payload.value("conversation_id", "");
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.compare(0, prefix.size(), prefix) == 0;
}

}  // namespace

std::vector<std::string> transport(const std::vector<sim::TraceEvent>& trace) {
    std::vector<std::string> out;
    sim::Tick last = 0;
    std::multiset<std::string> in_flight;
    for (const auto& e : trace) {
        if (e.tick < last) out.push_back("tick went backwards at " + std::to_string(e.tick));
        last = e.tick;
        switch (e.kind) {
            case TraceKind::Send:
                in_flight.insert(e.payload.dump());
                break;
            case TraceKind::Fault: {
                auto it = in_flight.find(e.payload.at("before").dump());
                if (it == in_flight.end()) {
                    out.push_back("fault on a message never sent");
                    break;
                }
                in_flight.erase(it);
                in_flight.insert(e.payload.at("after").dump());
                break;
            }
            case TraceKind::Deliver: {
                auto it = in_flight.find(e.payload.dump());
                if (it == in_flight.end()) {
                    out.push_back("delivery without a send at tick " + std::to_string(e.tick));
                } else {
                    in_flight.erase(it);
                }
                break;
            }
            default:
                break;
        }
    }
    if (!in_flight.empty()) {
        out.push_back(std::to_string(in_flight.size()) + " message(s) never delivered");
    }
    return out;
}

std::vector<std::string> summary_matches(const scenario::Scenario& s,
                                         const scenario::RunResult& r) {
    std::vector<std::string> out;
    for (const auto& t : s.tasks) {
        const auto& id = t.task.task_id;
        const auto* sum = r.summary.find(id);
        if (!sum) {
            out.push_back("task " + id + " missing from summary");
            continue;
        }
        if (sum->status == TaskStatus::Pending) out.push_back("task " + id + " still pending");
        int messages = 0;
        int recoveries = 0;
        for (const auto& e : r.trace) {
            if (e.kind == TraceKind::Send && starts_with(conversation_of(e), id + "/")) ++messages;
            if (e.kind == TraceKind::Recovery && e.payload.value("task", "") == id) ++recoveries;
        }
        if (messages != sum->messages) {
            out.push_back("task " + id + ": summary says " + std::to_string(sum->messages) +
                          " messages, trace has " + std::to_string(messages));
        }
        if (recoveries != sum->recoveries) {
            out.push_back("task " + id + ": summary says " + std::to_string(sum->recoveries) +
                          " recoveries, trace has " + std::to_string(recoveries));
        }
    }
    return out;
}

std::vector<std::string> joint_exchange(const scenario::Scenario& s,
                                        const std::vector<sim::TraceEvent>& trace) {
    std::vector<std::string> out;
    for (const auto& t : s.tasks) {
        const auto prefix = t.task.task_id + "/select/";
        std::set<std::string> protocols;
        std::set<AgentId> agents(t.potential_participants.begin(), t.potential_participants.end());
        for (const auto& [p, ids] : t.identified) {
            protocols.insert(p);
            agents.insert(ids.begin(), ids.end());
        }
        std::map<std::string, int> per_pair;
        std::map<std::string, std::vector<RoleRef>> offered;
        int total = 0;
        for (const auto& e : trace) {
            if (e.kind != TraceKind::Send) continue;
            const auto conv = conversation_of(e);
            if (!starts_with(conv, prefix)) continue;
            ++total;
            ++per_pair[conv];
            const auto perf = e.payload.at("performative").get<std::string>();
            const auto& content = e.payload.at("content");
            if (perf == "ready-to-select") {
                for (const auto& r : content) offered[conv].push_back(RoleRef::parse(r.get<std::string>()));
            } else if (perf == "notify-assignment") {
                std::vector<std::string> roles{content.at("role").get<std::string>()};
                for (const auto& x : content.value("additional_roles", Content::array())) {
                    roles.push_back(x.get<std::string>());
                }
                for (const auto& r : roles) {
                    const auto& o = offered[conv];
                    if (std::find(o.begin(), o.end(), RoleRef::parse(r)) == o.end()) {
                        out.push_back(conv + ": assigned " + r + " which was never offered");
                    }
                }
            }
        }
        for (const auto& [conv, n] : per_pair) {
            if (n > 3) out.push_back(conv + ": " + std::to_string(n) + " messages");
        }
        const auto bound = 3 * static_cast<int>(protocols.size() * agents.size());
        if (total > bound) {
            out.push_back("task " + t.task.task_id + ": " + std::to_string(total) +
                          " selection messages exceed " + std::to_string(bound));
        }
    }
    return out;
}

std::vector<std::string> mixed_coherence(const std::vector<sim::TraceEvent>& trace) {
    std::vector<std::string> out;
    for (const auto& e : trace) {
        if (e.kind != TraceKind::Selection || e.payload.value("phase", "") != "reconcile") continue;
        const auto& active = e.payload.at("active");
        const auto& keys = e.payload.at("active_keys");
        if (!active.empty() && keys.size() != 1) {
            out.push_back("tick " + std::to_string(e.tick) + ": " + std::to_string(keys.size()) +
                          " distinct messages among active roles");
        }
    }
    return out;
}

std::vector<std::string> initiator_sees_sequential(const scenario::Scenario& s,
                                                   const std::vector<sim::TraceEvent>& trace) {
    std::vector<std::string> out;
    for (const auto& t : s.tasks) {
        std::map<std::string, int> unanswered;  // per conversation
        for (const auto& e : trace) {
            const auto conv = conversation_of(e);
            if (!starts_with(conv, t.task.task_id + "/")) continue;
            if (e.kind == TraceKind::Send && e.payload.value("sender", "") == t.initiator) {
                unanswered[conv] = 0;
            } else if (e.kind == TraceKind::Deliver &&
                       e.payload.value("receiver", "") == t.initiator &&
                       is_domain_performative(e.payload.value("performative", ""))) {
                if (++unanswered[conv] > 1) {
                    out.push_back(conv + ": initiator received concurrent messages at tick " +
                                  std::to_string(e.tick));
                }
            }
        }
    }
    return out;
}

std::vector<std::string> recovery_bound(const std::vector<sim::TraceEvent>& trace,
                                        std::size_t factor) {
    std::vector<std::string> out;
    std::map<std::string, std::size_t> collection;
    std::map<std::string, std::size_t> recoveries;
    for (const auto& e : trace) {
        const auto conv = conversation_of(e);
        if (e.kind == TraceKind::Selection && e.payload.value("phase", "") == "collection") {
            collection[conv] = e.payload.at("roles").size();
        } else if (e.kind == TraceKind::Recovery) {
            ++recoveries[conv];
        }
    }
    for (const auto& [conv, n] : recoveries) {
        if (n > factor * collection[conv]) {
            out.push_back(conv + ": " + std::to_string(n) + " recoveries for a collection of " +
                          std::to_string(collection[conv]));
        }
    }
    return out;
}

std::vector<std::string> all(const scenario::Scenario& s, const scenario::RunResult& r) {
    std::vector<std::string> out;
    auto add = [&](std::vector<std::string> v) { out.insert(out.end(), v.begin(), v.end()); };
    add(transport(r.trace));
    add(summary_matches(s, r));
    switch (s.mode) {
        case scenario::SelectionMode::Joint:
            add(joint_exchange(s, r.trace));
            break;
        case scenario::SelectionMode::IndividualSequential:
            add(initiator_sees_sequential(s, r.trace));
            add(recovery_bound(r.trace, 1));
            break;
        case scenario::SelectionMode::IndividualMixed:
            add(mixed_coherence(r.trace));
            add(initiator_sees_sequential(s, r.trace));
            add(recovery_bound(r.trace, 2));
            break;
    }
    return out;
}

}  // namespace protosel::invariants
