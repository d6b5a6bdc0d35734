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

#include "protosel/role_engine.hpp"

#include <algorithm>

#include "protosel/errors.hpp"

namespace protosel {

namespace {
constexpr int kMaxInternalCascade = 64;
}

const MessageSchema& BoundRole::schema(const std::string& id) const {
    if (const auto* s = protocol->find_schema(id)) return *s;
    throw InvalidProtocol("protocol '" + protocol->protocol_id + "' has no schema '" + id + "'");
}

BoundRole BoundRole::resolve(const ProtocolRegistry& registry, const RoleRef& ref) {
    const auto& role = registry.resolve(ref);
    return {&registry.at(ref.protocol), &role};
}

bool is_weak_schema(const RoleStateMachine& role, const std::string& schema_id) {
    bool labelled = false;
    for (const auto& t : role.transitions) {
        const bool labels = (t.action.kind == Action::Kind::Send && t.action.ref == schema_id) ||
                            (t.trigger.kind == Trigger::Kind::Receive && t.trigger.ref == schema_id);
        if (!labels) continue;
        labelled = true;
        if (!role.is_terminal(t.to)) return false;
    }
    return labelled;
}

bool is_weak_reception(const BoundRole& role, const std::string& state, const Message& msg) {
    RoleExecution exec(role, state);
    const auto options = exec.accepting(msg);
    if (options.empty()) return false;
    return std::all_of(options.begin(), options.end(),
                       [&](const Transition* t) { return role.role->is_terminal(t->to); });
}

RoleExecution::RoleExecution(BoundRole role) : role_(role), state_(role.role->initial_state) {}

RoleExecution::RoleExecution(BoundRole role, std::string state)
    : role_(role), state_(std::move(state)) {}

std::vector<const MessageSchema*> RoleExecution::receivable() const {
    std::vector<const MessageSchema*> out;
    for (const auto* t : role_.role->outgoing(state_)) {
        if (t->trigger.kind != Trigger::Kind::Receive) continue;
        const auto* s = &role_.schema(t->trigger.ref);
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    return out;
}

std::vector<const Transition*> RoleExecution::accepting(const Message& msg) const {
    std::vector<const Transition*> out;
    for (const auto* t : role_.role->outgoing(state_)) {
        if (t->trigger.kind == Trigger::Kind::Receive &&
            content_matches(role_.schema(t->trigger.ref), msg)) {
            out.push_back(t);
        }
    }
    return out;
}

const Transition* RoleExecution::choose(const std::vector<const Transition*>& options,
                                        const ChoiceHint& hint) const {
    auto pool = options;
    if (hint.same_structure_as) {
        std::vector<const Transition*> same;
        for (const auto* t : pool) {
            if (t->action.kind == Action::Kind::Send &&
                structure_matches(role_.schema(t->action.ref), *hint.same_structure_as)) {
                same.push_back(t);
            }
        }
        if (!same.empty()) pool = std::move(same);
    }
    if (hint.avoid_weak) {
        std::vector<const Transition*> strong;
        for (const auto* t : pool) {
            if (!role_.role->is_terminal(t->to)) strong.push_back(t);
        }
        if (!strong.empty()) pool = std::move(strong);
    }
    return pool.front();
}

ExecutedStep RoleExecution::fire(const Transition& t, InputEvent input, const MessageFactory& make) {
    ExecutedStep step{&t, t.method, std::move(input), {}};
    switch (t.action.kind) {
        case Action::Kind::Send: {
            const auto& schema = role_.schema(t.action.ref);
            Content content =
                t.action.value.is_null() ? schema.content_pattern.instantiate() : t.action.value;
            step.outputs.emplace_back(MessageEmission{make(schema, std::move(content))});
            break;
        }
        case Action::Kind::DataChange:
            step.outputs.emplace_back(DataChange{t.action.ref, t.action.value});
            break;
        case Action::Kind::None: break;
    }
    state_ = t.to;
    return step;
}

std::optional<std::vector<ExecutedStep>> RoleExecution::receive(const Message& msg,
                                                                const MessageFactory& make,
                                                                const ChoiceHint& hint) {
    const auto options = accepting(msg);
    if (options.empty()) return std::nullopt;
    std::vector<ExecutedStep> steps;
    steps.push_back(fire(*choose(options, hint), MessageReception{msg}, make));
    std::optional<DataChange> cause;
    for (const auto& o : steps.back().outputs) {
        if (const auto* d = std::get_if<DataChange>(&o)) cause = *d;
    }
    auto more = run_internal(make, hint, cause);
    steps.insert(steps.end(), std::make_move_iterator(more.begin()),
                 std::make_move_iterator(more.end()));
    return steps;
}

std::vector<ExecutedStep> RoleExecution::run_internal(const MessageFactory& make,
                                                      const ChoiceHint& hint,
                                                      std::optional<DataChange> cause) {
    std::vector<ExecutedStep> steps;
    for (int i = 0; i < kMaxInternalCascade; ++i) {
        std::vector<const Transition*> options;
        for (const auto* t : role_.role->outgoing(state_)) {
            if (t->trigger.kind == Trigger::Kind::Internal) options.push_back(t);
        }
        if (options.empty()) break;
        InputEvent input = cause ? InputEvent{*cause} : InputEvent{DataChange{"state", state_}};
        steps.push_back(fire(*choose(options, hint), std::move(input), make));
        cause.reset();
        for (const auto& o : steps.back().outputs) {
            if (const auto* d = std::get_if<DataChange>(&o)) cause = *d;
        }
    }
    return steps;
}

bool input_matches(const BoundRole& role, const Transition& t, const InputEvent& input) {
    if (t.trigger.kind == Trigger::Kind::Receive) {
        const auto* rec = std::get_if<MessageReception>(&input);
        return rec && content_matches(role.schema(t.trigger.ref), rec->message);
    }
    return std::holds_alternative<DataChange>(input);
}

bool outputs_match(const BoundRole& role, const Transition& t,
                   const std::vector<OutputEvent>& outputs) {
    switch (t.action.kind) {
        case Action::Kind::None: return outputs.empty();
        case Action::Kind::Send: {
            if (outputs.size() != 1) return false;
            const auto* e = std::get_if<MessageEmission>(&outputs.front());
            return e && structure_matches(role.schema(t.action.ref), e->message);
        }
        case Action::Kind::DataChange: {
            if (outputs.size() != 1) return false;
            const auto* d = std::get_if<DataChange>(&outputs.front());
            return d && d->variable == t.action.ref;
        }
    }
    return false;
}

std::vector<const Transition*> transitions_on(const BoundRole& role,
                                              const std::set<std::string>& states,
                                              const InputEvent& input) {
    std::vector<const Transition*> out;
    for (const auto& t : role.role->transitions) {
        if (states.count(t.from) && input_matches(role, t, input)) out.push_back(&t);
    }
    return out;
}

std::set<std::string> replay_states(const BoundRole& role, std::span<const JournalRecord> records) {
    std::set<std::string> states{role.role->initial_state};
    for (const auto& r : records) {
        std::set<std::string> next;
        for (const auto* t : transitions_on(role, states, r.input)) {
            if (outputs_match(role, *t, r.outputs)) next.insert(t->to);
        }
        states = std::move(next);
        if (states.empty()) break;
    }
    return states;
}

RoleExecution resume_after(const BoundRole& role, std::span<const JournalRecord> records) {
    std::string state = role.role->initial_state;
    for (const auto& r : records) {
        const Transition* next = nullptr;
        for (const auto* t : role.role->outgoing(state)) {
            if (t->method == r.method) {
                next = t;
                break;
            }
        }
        if (!next) {
            for (const auto* t : transitions_on(role, {state}, r.input)) {
                if (outputs_match(role, *t, r.outputs)) {
                    next = t;
                    break;
                }
            }
        }
        if (!next) break;
        state = next->to;
    }
    return RoleExecution(role, state);
}

}  // namespace protosel
