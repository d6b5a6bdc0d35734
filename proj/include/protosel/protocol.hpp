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
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "protosel/content.hpp"

namespace protosel {

using AgentId = std::string;

// ---------------------------------------------------------------------------
// Performatives

struct Performative {
    std::string name;

    friend auto operator<=>(const Performative&, const Performative&) = default;
};

namespace performatives {
// selection meta-protocol
inline const std::string kCallForCollaboration = "call-for-collaboration";
inline const std::string kUnableToSelect = "unable-to-select";
inline const std::string kStopSelection = "stop-selection";
inline const std::string kReadyToSelect = "ready-to-select";
inline const std::string kNotifyAssignment = "notify-assignment";
// recovery and termination control
inline const std::string kErrorNotify = "error-notify";
inline const std::string kRecoverAt = "recover-at";
inline const std::string kPrematureWarning = "premature-warning";
inline const std::string kEndInteraction = "end-interaction";
}  // namespace performatives

bool is_selection_performative(const Performative& p);
bool is_selection_performative(const std::string& name);
// Recovery/termination notices exchanged next to a running protocol.
bool is_control_performative(const std::string& name);
inline bool is_domain_performative(const std::string& name) {
    return !is_selection_performative(name) && !is_control_performative(name);
}

// ---------------------------------------------------------------------------
// Messages

struct MessageSchema {
    std::string schema_id;
    Performative performative;
    ContentPattern content_pattern;
    std::string language;
    std::string ontology;
};

struct Message {
    Performative performative;
    Content content = Content::object();
    std::string language;
    std::string ontology;
    AgentId sender;
    AgentId receiver;
    std::string conversation_id;
    std::optional<std::string> in_reply_to;
    std::optional<std::string> reply_with;

    friend bool operator==(const Message&, const Message&) = default;
};

// Performative, language, ontology and content shape.
bool structure_matches(const MessageSchema& schema, const Message& msg);
// structure_matches plus the pattern's leaf predicates.
bool content_matches(const MessageSchema& schema, const Message& msg);
// Two concrete messages with identical structure.
bool same_structure(const Message& a, const Message& b);
std::string structure_key(const Message& msg);

Content message_to_json(const Message& msg);
Message message_from_json(const Content& j);

// ---------------------------------------------------------------------------
// Roles and protocols

struct RoleRef {
    std::string protocol;
    std::string role;

    std::string str() const { return protocol + "." + role; }
    static RoleRef parse(const std::string& text);

    friend auto operator<=>(const RoleRef&, const RoleRef&) = default;
};

enum class RoleKind { Initiator, Participant };

struct Multiplicity {
    bool many = false;
    int count = 1;

    friend bool operator==(const Multiplicity&, const Multiplicity&) = default;
};

struct Trigger {
    enum class Kind { Receive, Internal };
    Kind kind = Kind::Receive;
    std::string ref;  // schema id for Receive, method id for Internal
};

struct Action {
    enum class Kind { None, Send, DataChange };
    Kind kind = Kind::None;
    std::string ref;               // schema id for Send, variable for DataChange
    Content value = Content();     // send: concrete content (null -> from pattern)
};

struct Transition {
    std::string from;
    Trigger trigger;
    Action action;
    std::string to;
    std::string method;
};

struct RoleStateMachine {
    std::string role_id;
    RoleKind kind = RoleKind::Participant;
    Multiplicity multiplicity;
    std::vector<std::string> states;
    std::string initial_state;
    std::vector<std::string> terminal_states;
    std::vector<Transition> transitions;
    // Explicit father role; derived from the first received schema otherwise.
    std::optional<std::string> father;

    bool is_terminal(const std::string& state) const;
    std::vector<const Transition*> outgoing(const std::string& state) const;
};

struct Protocol {
    std::string protocol_id;
    std::vector<RoleStateMachine> roles;
    std::vector<MessageSchema> schemas;
    Content omega = Content::object();  // carried, never interpreted
    std::vector<std::string> capability_tags;

    const RoleStateMachine* find_role(const std::string& role_id) const;
    const MessageSchema* find_schema(const std::string& schema_id) const;
    const RoleStateMachine* initiator() const;
    std::vector<const RoleStateMachine*> participants() const;
};

enum class ProtocolCategory { OneOne, OneOneN, OneN };
std::string to_string(ProtocolCategory c);

struct Violation {
    std::string element;
    std::string message;
};
using ValidationReport = std::vector<Violation>;

ValidationReport validate_protocol(const Protocol& p);

// Throws CompositeProtocol when the roles mix category traits.
ProtocolCategory classify_protocol(const Protocol& p);

// ---------------------------------------------------------------------------
// Registry, interaction models, compatibility, tasks

class ProtocolRegistry {
public:
    void add(Protocol p);
    const Protocol* find(const std::string& protocol_id) const;
    const Protocol& at(const std::string& protocol_id) const;
    // Throws UnknownRole.
    const RoleStateMachine& resolve(const RoleRef& ref) const;
    bool contains(const RoleRef& ref) const;
    const std::map<std::string, Protocol>& all() const { return protocols_; }
    bool empty() const { return protocols_.empty(); }

private:
    std::map<std::string, Protocol> protocols_;
};

// Declaration order is the agent's preference order.
class InteractionModel {
public:
    struct Entry {
        std::string protocol_id;
        std::vector<std::string> roles;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    InteractionModel() = default;
    explicit InteractionModel(std::vector<Entry> entries) : entries_(std::move(entries)) {}

    void add(const std::string& protocol_id, const std::string& role_id);
    bool enacts(const RoleRef& ref) const;
    std::vector<RoleRef> roles() const;
    const std::vector<Entry>& entries() const { return entries_; }

    friend bool operator==(const InteractionModel&, const InteractionModel&) = default;

private:
    std::vector<Entry> entries_;
};

class CompatibilityTable {
public:
    void add(const RoleRef& a, const RoleRef& b) { pairs_.insert({a, b}); }
    const std::set<std::pair<RoleRef, RoleRef>>& pairs() const { return pairs_; }

    friend bool operator==(const CompatibilityTable&, const CompatibilityTable&) = default;

private:
    std::set<std::pair<RoleRef, RoleRef>> pairs_;
};

// Reflexive closure of the declared pairs; not symmetric. Throws UnknownRole.
bool compatible(const RoleRef& a, const RoleRef& b, const CompatibilityTable& table,
                const ProtocolRegistry& registry);

struct TaskDescription {
    std::string task_id;
    std::set<std::string> required_capabilities;
    Content constraints = Content::object();

    friend bool operator==(const TaskDescription&, const TaskDescription&) = default;
};

struct ProtocolCandidate {
    std::string protocol_id;
    std::string initiator_role;

    friend auto operator<=>(const ProtocolCandidate&, const ProtocolCandidate&) = default;
};

std::vector<ProtocolCandidate> match_task_to_protocols(const TaskDescription& task,
                                                       const InteractionModel& model,
                                                       const ProtocolRegistry& registry);

// Father of each participant role (the sender of its first message); roots
// map to nullopt. Throws CyclicFatherRelation.
std::map<std::string, std::optional<std::string>> father_relation(const Protocol& p);

}  // namespace protosel
