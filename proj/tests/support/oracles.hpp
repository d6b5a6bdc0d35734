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

// Brute-force reference implementations. Each one is written from the rule
// text, shares no code with the library, and trades speed for obviousness.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "protosel/individual.hpp"
#include "protosel/joint.hpp"
#include "protosel/scenario.hpp"

namespace protosel::oracle {

// ---------------------------------------------------------------------------
// Largest-set arbitration over bitmasks of agents.

std::optional<joint::LargestSet> largest_set(const std::map<AgentId, joint::Payload>& replies,
                                             const std::set<std::string>& identified);

// ---------------------------------------------------------------------------
// Role assignment by enumeration.

using Candidates = std::map<std::string, std::set<AgentId>>;

// Every total map role -> agent drawn from the candidate sets.
std::vector<std::map<std::string, AgentId>> all_assignments(const Candidates& cand);
bool injective_assignment_exists(const Candidates& cand);
Candidates candidates_for(const Protocol& p, const std::map<AgentId, joint::Payload>& replies);

// ---------------------------------------------------------------------------
// Recovery points by replaying the journal as a walk over the method graph.

individual::RecoveryPoints replay_recovery_points(const Journal& journal,
                                                  const individual::MethodGraph& graph);

// ---------------------------------------------------------------------------
// Mixed-mode error rules evaluated entry by entry.

struct OutboxItem {
    std::string structure;
    std::string pattern;
    bool weak = false;
    bool silent = false;
    bool stopped = false;  // owning instance already stopped
    bool active = false;   // owning instance sent the failed message
};

struct ErrorRuleResult {
    std::set<std::size_t> removed;
    // Indices (into the original outbox) that the next selection may pick.
    std::set<std::size_t> admissible;
};

ErrorRuleResult mixed_error_rules(const std::vector<OutboxItem>& outbox, std::size_t failed,
                                  individual::ErrorKind kind);

// ---------------------------------------------------------------------------
// The 1-1 meta-protocol exchange walked contact by contact.

struct OneOneWalk {
    std::optional<joint::OneOneSolution> solution;
    std::vector<std::pair<std::string, AgentId>> contacts;  // in order
};

// Reads the first task of a joint scenario whose candidates are all 1-1.
OneOneWalk walk_one_one(const scenario::Scenario& s);

}  // namespace protosel::oracle
