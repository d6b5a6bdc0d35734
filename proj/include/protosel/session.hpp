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

#include <map>
#include <string>

#include "protosel/protocol.hpp"
#include "protosel/sim.hpp"

namespace protosel {

enum class TaskStatus { Pending, Succeeded, Failed };
std::string to_string(TaskStatus s);

// Per-task result reported by the sessions driving it.
struct TaskOutcome {
    std::string task_id;
    TaskStatus status = TaskStatus::Pending;
    std::string protocol;
    std::map<AgentId, std::string> assignment;  // agent -> role ref text
    std::string final_role;
    std::string reason;
    int recoveries = 0;
};

using OutcomeSink = std::map<std::string, TaskOutcome>;

// One conversation (or family of conversations) handled by an agent.
class Session {
public:
    virtual ~Session() = default;
    virtual void on_message(const Message& msg, sim::AgentContext& ctx) = 0;
    virtual void on_timer(const std::string& token, sim::AgentContext& ctx) {
        (void)token;
        (void)ctx;
    }
};

}  // namespace protosel
