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

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "protosel/journal.hpp"
#include "protosel/protocol.hpp"

namespace protosel {

// A role together with the protocol that declares its schemas.
struct BoundRole {
    const Protocol* protocol = nullptr;
    const RoleStateMachine* role = nullptr;

    RoleRef ref() const { return {protocol->protocol_id, role->role_id}; }
    const MessageSchema& schema(const std::string& id) const;

    static BoundRole resolve(const ProtocolRegistry& registry, const RoleRef& ref);
};

// A schema is weak for a role iff every transition it labels (as reception
// or emission) leads into a terminal state of that role.
bool is_weak_schema(const RoleStateMachine& role, const std::string& schema_id);
// The receiving role's view: does accepting `msg` in `state` only lead to
// terminal states?
bool is_weak_reception(const BoundRole& role, const std::string& state, const Message& msg);

// Steers the choice between alternative transitions after a recovery.
struct ChoiceHint {
    std::optional<Message> same_structure_as;
    bool avoid_weak = false;

    bool empty() const { return !same_structure_as && !avoid_weak; }
};

struct ExecutedStep {
    const Transition* transition = nullptr;
    std::string method;
    InputEvent input;
    std::vector<OutputEvent> outputs;
};

// Builds an addressed message for an emitted schema.
using MessageFactory = std::function<Message(const MessageSchema&, Content)>;

// Live execution of one role state machine.
class RoleExecution {
public:
    RoleExecution() = default;
    explicit RoleExecution(BoundRole role);
    RoleExecution(BoundRole role, std::string state);

    const BoundRole& role() const { return role_; }
    RoleRef ref() const { return role_.ref(); }
    const std::string& state() const { return state_; }
    bool terminal() const { return role_.role->is_terminal(state_); }

    // Schemas this role can receive in its current state.
    std::vector<const MessageSchema*> receivable() const;
    // Receive transitions whose schema structure- and content-matches `msg`.
    std::vector<const Transition*> accepting(const Message& msg) const;
    bool accepts(const Message& msg) const { return !accepting(msg).empty(); }

    // Fires the accepting transition then any internal cascade. Returns
    // nothing when no transition accepts `msg`.
    std::optional<std::vector<ExecutedStep>> receive(const Message& msg, const MessageFactory& make,
                                                     const ChoiceHint& hint = {});
    // Fires internal transitions available from the current state.
    std::vector<ExecutedStep> run_internal(const MessageFactory& make, const ChoiceHint& hint = {},
                                           std::optional<DataChange> cause = std::nullopt);

private:
    ExecutedStep fire(const Transition& t, InputEvent input, const MessageFactory& make);
    const Transition* choose(const std::vector<const Transition*>& options,
                             const ChoiceHint& hint) const;

    BoundRole role_;
    std::string state_;
};

// --- journal replay -------------------------------------------------------

bool input_matches(const BoundRole& role, const Transition& t, const InputEvent& input);
bool outputs_match(const BoundRole& role, const Transition& t,
                   const std::vector<OutputEvent>& outputs);

// States the role can be in after replaying `records` from its initial
// state (empty when the role cannot replay them).
std::set<std::string> replay_states(const BoundRole& role, std::span<const JournalRecord> records);

// Transitions out of `states` whose trigger accepts `input`.
std::vector<const Transition*> transitions_on(const BoundRole& role,
                                              const std::set<std::string>& states,
                                              const InputEvent& input);

// Positions a fresh execution of `role` after the given records (matched by
// method id first, then by event replay), without re-running them.
RoleExecution resume_after(const BoundRole& role, std::span<const JournalRecord> records);

}  // namespace protosel
