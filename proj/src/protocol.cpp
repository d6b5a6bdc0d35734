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

#include "protosel/protocol.hpp"

#include <algorithm>
#include <deque>

#include "protosel/errors.hpp"

namespace protosel {

bool is_selection_performative(const std::string& name) {
    using namespace performatives;
    return name == kCallForCollaboration || name == kUnableToSelect || name == kStopSelection ||
           name == kReadyToSelect || name == kNotifyAssignment;
}

bool is_selection_performative(const Performative& p) { return is_selection_performative(p.name); }

bool is_control_performative(const std::string& name) {
    using namespace performatives;
    return name == kErrorNotify || name == kRecoverAt || name == kPrematureWarning ||
           name == kEndInteraction;
}

bool structure_matches(const MessageSchema& schema, const Message& msg) {
    return schema.performative == msg.performative && schema.language == msg.language &&
           schema.ontology == msg.ontology && schema.content_pattern.shape_matches(msg.content);
}

bool content_matches(const MessageSchema& schema, const Message& msg) {
    return structure_matches(schema, msg) && schema.content_pattern.content_matches(msg.content);
}

bool same_structure(const Message& a, const Message& b) {
    return structure_key(a) == structure_key(b);
}

std::string structure_key(const Message& msg) {
    return msg.performative.name + "|" + msg.language + "|" + msg.ontology + "|" +
           shape_key(msg.content);
}

Content message_to_json(const Message& msg) {
    Content j = Content::object();
    j["performative"] = msg.performative.name;
    j["sender"] = msg.sender;
    j["receiver"] = msg.receiver;
    j["conversation_id"] = msg.conversation_id;
    j["language"] = msg.language;
    j["ontology"] = msg.ontology;
    j["content"] = msg.content;
    if (msg.in_reply_to) j["in_reply_to"] = *msg.in_reply_to;
    if (msg.reply_with) j["reply_with"] = *msg.reply_with;
    return j;
}

Message message_from_json(const Content& j) {
    Message m;
    m.performative.name = j.at("performative").get<std::string>();
    m.sender = j.value("sender", "");
    m.receiver = j.value("receiver", "");
    m.conversation_id = j.value("conversation_id", "");
    m.language = j.value("language", "");
    m.ontology = j.value("ontology", "");
    m.content = j.value("content", Content::object());
    if (j.contains("in_reply_to")) m.in_reply_to = j.at("in_reply_to").get<std::string>();
    if (j.contains("reply_with")) m.reply_with = j.at("reply_with").get<std::string>();
    return m;
}

RoleRef RoleRef::parse(const std::string& text) {
    auto dot = text.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == text.size()) {
        throw ParseError("malformed role reference '" + text + "' (expected protocol.role)");
    }
    return RoleRef{text.substr(0, dot), text.substr(dot + 1)};
}

bool RoleStateMachine::is_terminal(const std::string& state) const {
    return std::find(terminal_states.begin(), terminal_states.end(), state) !=
           terminal_states.end();
}

std::vector<const Transition*> RoleStateMachine::outgoing(const std::string& state) const {
    std::vector<const Transition*> out;
    for (const auto& t : transitions) {
        if (t.from == state) out.push_back(&t);
    }
    return out;
}

const RoleStateMachine* Protocol::find_role(const std::string& role_id) const {
    for (const auto& r : roles) {
        if (r.role_id == role_id) return &r;
    }
    return nullptr;
}

const MessageSchema* Protocol::find_schema(const std::string& schema_id) const {
    for (const auto& s : schemas) {
        if (s.schema_id == schema_id) return &s;
    }
    return nullptr;
}

const RoleStateMachine* Protocol::initiator() const {
    for (const auto& r : roles) {
        if (r.kind == RoleKind::Initiator) return &r;
    }
    return nullptr;
}

std::vector<const RoleStateMachine*> Protocol::participants() const {
    std::vector<const RoleStateMachine*> out;
    for (const auto& r : roles) {
        if (r.kind == RoleKind::Participant) out.push_back(&r);
    }
    return out;
}

std::string to_string(ProtocolCategory c) {
    switch (c) {
        case ProtocolCategory::OneOne: return "1-1";
        case ProtocolCategory::OneOneN: return "1-1^N";
        case ProtocolCategory::OneN: return "1-N";
    }
    return "?";
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void validate_role(const Protocol& p, const RoleStateMachine& r, ValidationReport& out) {
    const std::string role_el = "role:" + r.role_id;
    if (r.states.empty()) {
        out.push_back({role_el, "role has no states"});
        return;
    }
    {
        auto sorted = r.states;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            out.push_back({role_el, "duplicate state names"});
        }
    }
    if (!contains(r.states, r.initial_state)) {
        out.push_back({role_el, "initial state '" + r.initial_state + "' is not declared"});
    }
    for (const auto& t : r.terminal_states) {
        if (!contains(r.states, t)) {
            out.push_back({role_el, "terminal state '" + t + "' is not declared"});
        }
    }
    if (r.kind == RoleKind::Initiator && r.multiplicity != Multiplicity{}) {
        out.push_back({role_el, "initiator role must have multiplicity 1"});
    }
    if (r.father && !p.find_role(*r.father)) {
        out.push_back({role_el, "father role '" + *r.father + "' does not exist"});
    }

    for (std::size_t i = 0; i < r.transitions.size(); ++i) {
        const auto& t = r.transitions[i];
        const std::string el = "transition:" + r.role_id + "#" + std::to_string(i) + " (" +
                               t.from + " -> " + t.to + ")";
        if (!contains(r.states, t.from)) out.push_back({el, "source state is not declared"});
        if (!contains(r.states, t.to)) out.push_back({el, "target state is not declared"});
        if (t.method.empty()) out.push_back({el, "transition has no method"});
        if (t.trigger.kind == Trigger::Kind::Receive && !p.find_schema(t.trigger.ref)) {
            out.push_back({el, "receives undeclared schema '" + t.trigger.ref + "'"});
        }
        if (t.action.kind == Action::Kind::Send && !p.find_schema(t.action.ref)) {
            out.push_back({el, "sends undeclared schema '" + t.action.ref + "'"});
        }
        if (t.action.kind == Action::Kind::Send && !t.action.value.is_null()) {
            if (const auto* s = p.find_schema(t.action.ref);
                s && !s->content_pattern.content_matches(t.action.value)) {
                out.push_back({el, "send content does not satisfy schema '" + t.action.ref + "'"});
            }
        }
        if (r.is_terminal(t.from)) {
            out.push_back({el, "terminal state '" + t.from + "' has an outgoing transition"});
        }
    }

    const auto first = r.outgoing(r.initial_state);
    if (first.empty() && contains(r.states, r.initial_state)) {
        out.push_back({role_el, "initial state has no outgoing transition"});
    }
    for (const auto* t : first) {
        if (r.kind == RoleKind::Participant && t->trigger.kind != Trigger::Kind::Receive) {
            out.push_back({role_el, "participant role must start with a reception"});
            break;
        }
        if (r.kind == RoleKind::Initiator && t->action.kind != Action::Kind::Send) {
            out.push_back({role_el, "initiator role must start with a send"});
            break;
        }
    }

    // reachability
    std::set<std::string> seen{r.initial_state};
    std::deque<std::string> queue{r.initial_state};
    while (!queue.empty()) {
        auto s = queue.front();
        queue.pop_front();
        for (const auto* t : r.outgoing(s)) {
            if (seen.insert(t->to).second) queue.push_back(t->to);
        }
    }
    for (const auto& s : r.states) {
        if (!seen.count(s)) out.push_back({role_el, "state '" + s + "' is unreachable"});
    }
}

}  // namespace

ValidationReport validate_protocol(const Protocol& p) {
    ValidationReport out;
    const std::string proto_el = "protocol:" + p.protocol_id;
    if (p.protocol_id.empty()) out.push_back({proto_el, "protocol has no id"});
    if (p.roles.size() < 2) out.push_back({proto_el, "protocol needs at least two roles"});

    std::vector<std::string> initiators;
    std::set<std::string> role_ids;
    for (const auto& r : p.roles) {
        if (r.kind == RoleKind::Initiator) initiators.push_back(r.role_id);
        if (!role_ids.insert(r.role_id).second) {
            out.push_back({"role:" + r.role_id, "duplicate role id"});
        }
    }
    if (initiators.empty()) out.push_back({proto_el, "no initiator role"});
    if (initiators.size() > 1) {
        std::string names;
        for (const auto& n : initiators) names += (names.empty() ? "" : ", ") + n;
        for (const auto& n : initiators) {
            out.push_back({"role:" + n, "more than one initiator role (" + names + ")"});
        }
    }

    std::set<std::string> schema_ids;
    for (const auto& s : p.schemas) {
        if (!schema_ids.insert(s.schema_id).second) {
            out.push_back({"schema:" + s.schema_id, "duplicate schema id"});
        }
        if (auto err = s.content_pattern.validate(); !err.empty()) {
            out.push_back({"schema:" + s.schema_id, err});
        }
    }
    for (const auto& r : p.roles) validate_role(p, r, out);
    if (out.empty()) {
        try {
            (void)father_relation(p);
        } catch (const CyclicFatherRelation& e) {
            out.push_back({proto_el, e.what()});
        }
    }
    return out;
}

ProtocolCategory classify_protocol(const Protocol& p) {
    const auto parts = p.participants();
    if (p.roles.size() == 2 && parts.size() == 1) {
        return parts.front()->multiplicity.many ? ProtocolCategory::OneOneN
                                                : ProtocolCategory::OneOne;
    }
    if (p.roles.size() > 2) {
        bool all_single = std::all_of(p.roles.begin(), p.roles.end(), [](const auto& r) {
            return !r.multiplicity.many && r.multiplicity.count == 1;
        });
        if (all_single) return ProtocolCategory::OneN;
    }
    throw CompositeProtocol("protocol '" + p.protocol_id +
                            "' combines category traits and cannot be classified");
}

void ProtocolRegistry::add(Protocol p) {
    auto id = p.protocol_id;
    protocols_.insert_or_assign(std::move(id), std::move(p));
}

const Protocol* ProtocolRegistry::find(const std::string& protocol_id) const {
    auto it = protocols_.find(protocol_id);
    return it == protocols_.end() ? nullptr : &it->second;
}

const Protocol& ProtocolRegistry::at(const std::string& protocol_id) const {
    if (const auto* p = find(protocol_id)) return *p;
    throw UnresolvedReference("unknown protocol '" + protocol_id + "'");
}

const RoleStateMachine& ProtocolRegistry::resolve(const RoleRef& ref) const {
    const auto* p = find(ref.protocol);
    const auto* r = p ? p->find_role(ref.role) : nullptr;
    if (!r) throw UnknownRole("unknown role '" + ref.str() + "'");
    return *r;
}

bool ProtocolRegistry::contains(const RoleRef& ref) const {
    const auto* p = find(ref.protocol);
    return p && p->find_role(ref.role);
}

void InteractionModel::add(const std::string& protocol_id, const std::string& role_id) {
    for (auto& e : entries_) {
        if (e.protocol_id == protocol_id) {
            if (std::find(e.roles.begin(), e.roles.end(), role_id) == e.roles.end()) {
                e.roles.push_back(role_id);
            }
            return;
        }
    }
    entries_.push_back({protocol_id, {role_id}});
}

bool InteractionModel::enacts(const RoleRef& ref) const {
    for (const auto& e : entries_) {
        if (e.protocol_id == ref.protocol) {
            return std::find(e.roles.begin(), e.roles.end(), ref.role) != e.roles.end();
        }
    }
    return false;
}

std::vector<RoleRef> InteractionModel::roles() const {
    std::vector<RoleRef> out;
    for (const auto& e : entries_) {
        for (const auto& r : e.roles) out.push_back({e.protocol_id, r});
    }
    return out;
}

bool compatible(const RoleRef& a, const RoleRef& b, const CompatibilityTable& table,
                const ProtocolRegistry& registry) {
    (void)registry.resolve(a);
    (void)registry.resolve(b);
    return a == b || table.pairs().count({a, b}) > 0;
}

std::vector<ProtocolCandidate> match_task_to_protocols(const TaskDescription& task,
                                                       const InteractionModel& model,
                                                       const ProtocolRegistry& registry) {
    std::vector<ProtocolCandidate> out;
    for (const auto& [id, p] : registry.all()) {
        const std::set<std::string> tags(p.capability_tags.begin(), p.capability_tags.end());
        if (!std::includes(tags.begin(), tags.end(), task.required_capabilities.begin(),
                           task.required_capabilities.end())) {
            continue;
        }
        const auto* init = p.initiator();
        if (init && model.enacts({id, init->role_id})) out.push_back({id, init->role_id});
    }
    return out;
}

std::map<std::string, std::optional<std::string>> father_relation(const Protocol& p) {
    std::map<std::string, std::optional<std::string>> father;
    for (const auto& r : p.roles) {
        if (r.kind == RoleKind::Initiator) {
            father[r.role_id] = std::nullopt;
            continue;
        }
        if (r.father) {
            father[r.role_id] = r.father;
            continue;
        }
        std::optional<std::string> found;
        for (const auto* t : r.outgoing(r.initial_state)) {
            if (t->trigger.kind != Trigger::Kind::Receive) continue;
            std::vector<std::string> senders;
            for (const auto& other : p.roles) {
                if (other.role_id == r.role_id) continue;
                for (const auto& ot : other.transitions) {
                    if (ot.action.kind == Action::Kind::Send && ot.action.ref == t->trigger.ref) {
                        senders.push_back(other.role_id);
                        break;
                    }
                }
            }
            if (!senders.empty()) {
                found = *std::min_element(senders.begin(), senders.end());
                break;
            }
        }
        father[r.role_id] = found;
    }
    for (const auto& [role, _] : father) {
        std::set<std::string> chain{role};
        auto cur = father[role];
        while (cur) {
            if (!chain.insert(*cur).second) {
                throw CyclicFatherRelation("father relation of '" + p.protocol_id +
                                           "' has a cycle through '" + *cur + "'");
            }
            auto it = father.find(*cur);
            if (it == father.end()) break;
            cur = it->second;
        }
    }
    return father;
}

}  // namespace protosel
