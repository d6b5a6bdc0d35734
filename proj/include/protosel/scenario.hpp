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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "protosel/joint.hpp"
#include "protosel/protocol.hpp"
#include "protosel/session.hpp"
#include "protosel/sim.hpp"

namespace protosel::scenario {

enum class SelectionMode { Joint, IndividualSequential, IndividualMixed };
std::string to_string(SelectionMode m);
// Accepts the long names and the CLI short forms joint|seq|mixed.
SelectionMode selection_mode_from_string(const std::string& s);

struct AgentSpec {
    AgentId id;
    InteractionModel model;
    joint::Willingness willingness;
};

struct TaskSpec {
    AgentId initiator;
    TaskDescription task;
    std::map<std::string, std::set<AgentId>> identified;
    std::vector<AgentId> potential_participants;
    joint::Exploration exploration = joint::Exploration::ProtocolOriented;
    // Individual modes only: fixes the initiator's protocol instead of drawing it.
    std::optional<std::string> protocol;
};

struct Scenario {
    std::uint64_t seed = 0;
    SelectionMode mode = SelectionMode::Joint;
    // As written: file paths (relative to base_dir) or inline definitions.
    std::vector<Content> protocol_sources;
    std::filesystem::path base_dir;
    ProtocolRegistry registry;
    CompatibilityTable compatibility;
    std::vector<AgentSpec> agents;
    std::vector<TaskSpec> tasks;
    std::vector<sim::FaultSpec> faults;
    sim::Tick reply_deadline = 10;
    sim::Tick latency = 1;
    sim::Tick max_ticks = 10000;
    bool transport_down = false;

    const AgentSpec* find_agent(const AgentId& id) const;
};

// Throws ParseError (malformed input), UnresolvedReference (dangling
// agent/protocol/role names, all listed) or InvalidProtocol.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const Content& j, const std::filesystem::path& base_dir);
Content scenario_to_json(const Scenario& s);

struct TaskSummary {
    std::string task_id;
    TaskStatus status = TaskStatus::Pending;
    std::string protocol;
    std::map<AgentId, std::string> assignment;
    std::string final_role;
    std::string reason;
    int recoveries = 0;
    int messages = 0;
};

struct Summary {
    std::vector<TaskSummary> tasks;

    bool all_succeeded() const;
    const TaskSummary* find(const std::string& task_id) const;
};

Content summary_to_json(const Summary& s);

struct RunResult {
    std::vector<sim::TraceEvent> trace;
    Summary summary;
};

// Throws BudgetExceeded when the run does not settle within max_ticks.
RunResult run_scenario(const Scenario& s);

// Summary rebuilt from a trace: recoveries and messages are event counts.
Summary summarize(const Scenario& s, const std::vector<sim::TraceEvent>& trace,
                  const OutcomeSink& outcomes);

}  // namespace protosel::scenario
