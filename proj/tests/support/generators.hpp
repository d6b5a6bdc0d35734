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
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "protosel/individual.hpp"
#include "protosel/joint.hpp"
#include "protosel/mixed.hpp"
#include "protosel/rng.hpp"

namespace protosel::gen {

struct LargestSetCase {
    std::map<AgentId, joint::Payload> replies;
    std::set<std::string> identified;
};

// Up to 6 agents and 5 roles spread over protocols P and Q.
LargestSetCase largest_set_case(Rng& rng);

struct ForestCase {
    std::vector<Protocol> protocols;
    std::map<AgentId, joint::Payload> replies;
};

// One or two 1-N protocols, each with an initiator and up to 5 participant
// roles under a random father forest; up to 6 agents.
ForestCase forest_case(Rng& rng);

struct JournalCase {
    individual::MethodGraph graph;
    Journal journal;
};

// Up to 8 nodes and 8 records. Records mostly follow graph edges so long
// matches are common.
JournalCase journal_case(Rng& rng);

struct OutboxCase {
    mixed::ControlZone zone;
    std::vector<oracle::OutboxItem> items;
    std::size_t failed = 0;
    individual::ErrorKind kind = individual::ErrorKind::WrongStructure;
};

// A control zone whose last sent message belongs to `failed`; structures and
// patterns are drawn from small alphabets so collisions happen.
OutboxCase outbox_case(Rng& rng);

}  // namespace protosel::gen
