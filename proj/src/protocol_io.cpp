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

#include "protosel/protocol_io.hpp"

#include <fstream>
#include <sstream>

#include "protosel/errors.hpp"

namespace protosel {
namespace {

template <typename T>
T field(const Content& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ParseError(where + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + ": field '" + key + "': " + e.what());
    }
}

Trigger trigger_from_json(const Content& j, const std::string& where) {
    if (j.is_object() && j.contains("receive")) {
        return {Trigger::Kind::Receive, field<std::string>(j, "receive", where)};
    }
    if (j.is_object() && j.contains("internal")) {
        return {Trigger::Kind::Internal, field<std::string>(j, "internal", where)};
    }
    throw ParseError(where + ": trigger must be {\"receive\": schema} or {\"internal\": method}");
}

Action action_from_json(const Content& j, const std::string& where) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "none")) return {};
    if (j.is_object() && j.contains("send")) {
        return {Action::Kind::Send, field<std::string>(j, "send", where), j.value("content", Content())};
    }
    if (j.is_object() && j.contains("data_change")) {
        return {Action::Kind::DataChange, field<std::string>(j, "data_change", where),
                j.value("value", Content())};
    }
    throw ParseError(where + ": action must be \"none\", {\"send\": ...} or {\"data_change\": ...}");
}

Content trigger_to_json(const Trigger& t) {
    return t.kind == Trigger::Kind::Receive ? Content{{"receive", t.ref}}
                                            : Content{{"internal", t.ref}};
}

Content action_to_json(const Action& a) {
    switch (a.kind) {
        case Action::Kind::None: return "none";
        case Action::Kind::Send: {
            Content j{{"send", a.ref}};
            if (!a.value.is_null()) j["content"] = a.value;
            return j;
        }
        case Action::Kind::DataChange: return Content{{"data_change", a.ref}, {"value", a.value}};
    }
    return "none";
}

std::string describe(const Trigger& t) {
    return (t.kind == Trigger::Kind::Receive ? "receive(" : "internal(") + t.ref + ")";
}

std::string describe(const Action& a) {
    switch (a.kind) {
        case Action::Kind::None: return "none";
        case Action::Kind::Send: return "send(" + a.ref + ")";
        case Action::Kind::DataChange: return "data_change(" + a.ref + ")";
    }
    return "?";
}

}  // namespace

Protocol protocol_from_json(const Content& j) {
    Protocol p;
    p.protocol_id = field<std::string>(j, "protocol_id", "protocol");
    const std::string where = "protocol '" + p.protocol_id + "'";
    p.capability_tags = j.value("capability_tags", std::vector<std::string>{});
    p.omega = j.value("omega", Content::object());

    for (const auto& sj : field<Content>(j, "schemas", where)) {
        MessageSchema s;
        s.schema_id = field<std::string>(sj, "id", where + " schema");
        const auto swhere = where + " schema '" + s.schema_id + "'";
        s.performative.name = field<std::string>(sj, "performative", swhere);
        s.language = sj.value("language", "");
        s.ontology = sj.value("ontology", "");
        s.content_pattern = ContentPattern(sj.value("content", Content::object()));
        p.schemas.push_back(std::move(s));
    }

    for (const auto& rj : field<Content>(j, "roles", where)) {
        RoleStateMachine r;
        r.role_id = field<std::string>(rj, "role_id", where + " role");
        const auto rwhere = where + " role '" + r.role_id + "'";
        const auto kind = field<std::string>(rj, "kind", rwhere);
        if (kind == "initiator") {
            r.kind = RoleKind::Initiator;
        } else if (kind == "participant") {
            r.kind = RoleKind::Participant;
        } else {
            throw ParseError(rwhere + ": kind must be initiator or participant");
        }
        if (rj.contains("multiplicity")) {
            const auto& m = rj.at("multiplicity");
            if (m.is_string() && m.get<std::string>() == "N") {
                r.multiplicity = {true, 0};
            } else if (m.is_number_integer() && m.get<int>() >= 1) {
                r.multiplicity = {false, m.get<int>()};
            } else {
                throw ParseError(rwhere + ": multiplicity must be a positive integer or \"N\"");
            }
        }
        r.states = field<std::vector<std::string>>(rj, "states", rwhere);
        r.initial_state = field<std::string>(rj, "initial", rwhere);
        r.terminal_states = rj.value("terminals", std::vector<std::string>{});
        if (rj.contains("father")) r.father = field<std::string>(rj, "father", rwhere);
        for (const auto& tj : rj.value("transitions", Content::array())) {
            Transition t;
            t.from = field<std::string>(tj, "from", rwhere + " transition");
            t.to = field<std::string>(tj, "to", rwhere + " transition");
            t.method = field<std::string>(tj, "method", rwhere + " transition");
            t.trigger = trigger_from_json(field<Content>(tj, "trigger", rwhere), rwhere);
            t.action = action_from_json(tj.value("action", Content()), rwhere);
            r.transitions.push_back(std::move(t));
        }
        p.roles.push_back(std::move(r));
    }
    return p;
}

Content protocol_to_json(const Protocol& p) {
    Content j;
    j["protocol_id"] = p.protocol_id;
    j["capability_tags"] = p.capability_tags;
    j["omega"] = p.omega;
    j["schemas"] = Content::array();
    for (const auto& s : p.schemas) {
        j["schemas"].push_back({{"id", s.schema_id},
                                {"performative", s.performative.name},
                                {"language", s.language},
                                {"ontology", s.ontology},
                                {"content", s.content_pattern.tree()}});
    }
    j["roles"] = Content::array();
    for (const auto& r : p.roles) {
        Content rj;
        rj["role_id"] = r.role_id;
        rj["kind"] = r.kind == RoleKind::Initiator ? "initiator" : "participant";
        if (r.multiplicity.many) {
            rj["multiplicity"] = "N";
        } else {
            rj["multiplicity"] = r.multiplicity.count;
        }
        rj["states"] = r.states;
        rj["initial"] = r.initial_state;
        rj["terminals"] = r.terminal_states;
        if (r.father) rj["father"] = *r.father;
        rj["transitions"] = Content::array();
        for (const auto& t : r.transitions) {
            rj["transitions"].push_back({{"from", t.from},
                                         {"trigger", trigger_to_json(t.trigger)},
                                         {"action", action_to_json(t.action)},
                                         {"to", t.to},
                                         {"method", t.method}});
        }
        j["roles"].push_back(std::move(rj));
    }
    return j;
}

Protocol load_protocol_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open protocol file " + path.string());
    Content j;
    try {
        j = Content::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        return protocol_from_json(j);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string dump_protocol(const Protocol& p) {
    std::ostringstream os;
    os << "protocol " << p.protocol_id;
    try {
        os << " [" << to_string(classify_protocol(p)) << "]";
    } catch (const CompositeProtocol&) {
        os << " [composite]";
    }
    os << "\n";
    for (const auto& s : p.schemas) {
        os << "  schema " << s.schema_id << ": " << s.performative.name << " lang=" << s.language
           << " onto=" << s.ontology << " content=" << s.content_pattern.key() << "\n";
    }
    for (const auto& r : p.roles) {
        os << "  role " << r.role_id << " ("
           << (r.kind == RoleKind::Initiator ? "initiator" : "participant") << ", x"
           << (r.multiplicity.many ? std::string("N") : std::to_string(r.multiplicity.count))
           << ") initial=" << r.initial_state << " terminals=";
        for (std::size_t i = 0; i < r.terminal_states.size(); ++i) {
            os << (i ? "," : "") << r.terminal_states[i];
        }
        os << "\n";
        for (const auto& t : r.transitions) {
            os << "    " << t.from << " --" << describe(t.trigger) << " / " << describe(t.action)
               << " [" << t.method << "]--> " << t.to << "\n";
        }
    }
    return os.str();
}

}  // namespace protosel
