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

#include "protosel/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include "protosel/errors.hpp"
#include "protosel/individual.hpp"
#include "protosel/mixed.hpp"
#include "protosel/protocol_io.hpp"

namespace protosel::scenario {

std::string to_string(SelectionMode m) {
    switch (m) {
        case SelectionMode::Joint: return "joint";
        case SelectionMode::IndividualSequential: return "individual_sequential";
        case SelectionMode::IndividualMixed: return "individual_mixed";
    }
    return "joint";
}

SelectionMode selection_mode_from_string(const std::string& s) {
    if (s == "joint") return SelectionMode::Joint;
    if (s == "individual_sequential" || s == "seq" || s == "sequential") {
        return SelectionMode::IndividualSequential;
    }
    if (s == "individual_mixed" || s == "mixed") return SelectionMode::IndividualMixed;
    throw ParseError("unknown selection mode '" + s + "'");
}

const AgentSpec* Scenario::find_agent(const AgentId& id) const {
    for (const auto& a : agents) {
        if (a.id == id) return &a;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

template <typename T>
T field(const Content& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + "." + key + ": " + e.what());
    }
}

const Content& required(const Content& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing '" + key + "'");
    return j.at(key);
}

sim::Mutation mutation_from_json(const Content& j, const std::string& where) {
    sim::Mutation m;
    if (j.contains("corrupt_content")) {
        m.kind = sim::Mutation::Kind::CorruptContent;
        m.target = field<std::string>(j, "corrupt_content", "", where);
    } else if (j.contains("corrupt_structure")) {
        m.kind = sim::Mutation::Kind::CorruptStructure;
        m.target = field<std::string>(j, "corrupt_structure", "", where);
        static const std::set<std::string> kFields{"performative", "language", "ontology", "shape"};
        if (!kFields.count(m.target)) {
            throw ParseError(where + ": unknown structure field '" + m.target + "'");
        }
    } else {
        throw ParseError(where + ": mutation needs corrupt_content or corrupt_structure");
    }
    return m;
}

Content mutation_to_json(const sim::Mutation& m) {
    if (m.kind == sim::Mutation::Kind::CorruptContent) return {{"corrupt_content", m.target}};
    return {{"corrupt_structure", m.target}};
}

RoleRef role_ref(const Content& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where + ": role reference must be a string");
    try {
        return RoleRef::parse(j.get<std::string>());
    } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
    }
}

void check_references(const Scenario& s) {
    std::vector<std::string> errors;
    auto known_agent = [&](const AgentId& id) { return s.find_agent(id) != nullptr; };
    std::set<AgentId> seen;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        const auto& a = s.agents[i];
        const auto where = "agents[" + std::to_string(i) + "]";
        if (!seen.insert(a.id).second) errors.push_back(where + ": duplicate agent '" + a.id + "'");
        for (const auto& ref : a.model.roles()) {
            if (!s.registry.contains(ref)) {
                errors.push_back(where + ".model: unknown role '" + ref.str() + "'");
            }
        }
        for (const auto& p : a.willingness.refuse) {
            if (!s.registry.find(p)) errors.push_back(where + ".refuse: unknown protocol '" + p + "'");
        }
    }
    for (const auto& [a, b] : s.compatibility.pairs()) {
        for (const auto& r : {a, b}) {
            if (!s.registry.contains(r)) {
                errors.push_back("compatibility: unknown role '" + r.str() + "'");
            }
        }
    }
    std::set<std::string> task_ids;
    for (std::size_t i = 0; i < s.tasks.size(); ++i) {
        const auto& t = s.tasks[i];
        const auto where = "tasks[" + std::to_string(i) + "]";
        if (!task_ids.insert(t.task.task_id).second) {
            errors.push_back(where + ": duplicate task '" + t.task.task_id + "'");
        }
        if (t.task.task_id.empty() || t.task.task_id.find('/') != std::string::npos) {
            errors.push_back(where + ": task_id must be nonempty and contain no '/'");
        }
        if (!known_agent(t.initiator)) {
            errors.push_back(where + ".initiator: unknown agent '" + t.initiator + "'");
        }
        for (const auto& [p, ids] : t.identified) {
            if (!s.registry.find(p)) {
                errors.push_back(where + ".identified: unknown protocol '" + p + "'");
            }
            for (const auto& a : ids) {
                if (!known_agent(a)) {
                    errors.push_back(where + ".identified." + p + ": unknown agent '" + a + "'");
                }
            }
        }
        for (const auto& a : t.potential_participants) {
            if (!known_agent(a)) {
                errors.push_back(where + ".potential_participants: unknown agent '" + a + "'");
            }
        }
        if (t.protocol && !s.registry.find(*t.protocol)) {
            errors.push_back(where + ".protocol: unknown protocol '" + *t.protocol + "'");
        }
    }
    if (!errors.empty()) {
        std::string text = "unresolved references:";
        for (const auto& e : errors) text += "\n  " + e;
        throw UnresolvedReference(text);
    }
}

}  // namespace

namespace {

Scenario build_scenario(const Content& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario s;
    s.base_dir = base_dir;
    s.seed = field<std::uint64_t>(j, "seed", 0, "scenario");
    s.mode = selection_mode_from_string(field<std::string>(j, "selection_mode", "joint", "scenario"));
    s.reply_deadline = field<sim::Tick>(j, "reply_deadline", 10, "scenario");
    s.latency = field<sim::Tick>(j, "latency", 1, "scenario");
    s.max_ticks = field<sim::Tick>(j, "max_ticks", 10000, "scenario");
    s.transport_down = field<bool>(j, "transport_down", false, "scenario");

    for (const auto& src : j.value("protocols", Content::array())) {
        s.protocol_sources.push_back(src);
        Protocol p;
        if (src.is_string()) {
            p = load_protocol_file(base_dir / src.get<std::string>());
        } else if (src.is_object()) {
            p = protocol_from_json(src);
        } else {
            throw ParseError("protocols: entries must be file paths or inline definitions");
        }
        const auto report = validate_protocol(p);
        if (!report.empty()) {
            std::string text = "protocol '" + p.protocol_id + "' is invalid:";
            for (const auto& v : report) text += "\n  " + v.element + ": " + v.message;
            throw InvalidProtocol(text);
        }
        if (s.registry.find(p.protocol_id)) {
            throw ParseError("protocols: duplicate protocol '" + p.protocol_id + "'");
        }
        s.registry.add(std::move(p));
    }

    const auto compat = j.value("compatibility", Content::array());
    for (std::size_t i = 0; i < compat.size(); ++i) {
        const auto where = "compatibility[" + std::to_string(i) + "]";
        if (!compat[i].is_array() || compat[i].size() != 2) {
            throw ParseError(where + ": expected a pair of role references");
        }
        s.compatibility.add(role_ref(compat[i][0], where), role_ref(compat[i][1], where));
    }

    const auto agents = j.value("agents", Content::array());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const auto& a = agents[i];
        const auto where = "agents[" + std::to_string(i) + "]";
        AgentSpec spec;
        spec.id = required(a, "id", where).get<std::string>();
        for (const auto& entry : a.value("model", Content::array())) {
            const auto protocol = required(entry, "protocol", where + ".model").get<std::string>();
            for (const auto& r : required(entry, "roles", where + ".model")) {
                spec.model.add(protocol, r.get<std::string>());
            }
        }
        spec.willingness.willing = field<bool>(a, "willing", true, where);
        spec.willingness.mute = field<bool>(a, "mute", false, where);
        for (const auto& p : a.value("refuse", Content::array())) {
            spec.willingness.refuse.insert(p.get<std::string>());
        }
        s.agents.push_back(std::move(spec));
    }

    const auto tasks = j.value("tasks", Content::array());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        const auto where = "tasks[" + std::to_string(i) + "]";
        TaskSpec spec;
        spec.initiator = required(t, "initiator", where).get<std::string>();
        const auto& desc = required(t, "task", where);
        spec.task.task_id = required(desc, "task_id", where + ".task").get<std::string>();
        for (const auto& c : desc.value("required_capabilities", Content::array())) {
            spec.task.required_capabilities.insert(c.get<std::string>());
        }
        spec.task.constraints = desc.value("constraints", Content::object());
        const auto identified = t.value("identified", Content::object());
        for (const auto& [p, ids] : identified.items()) {
            auto& set = spec.identified[p];
            for (const auto& a : ids) set.insert(a.get<std::string>());
        }
        for (const auto& a : t.value("potential_participants", Content::array())) {
            spec.potential_participants.push_back(a.get<std::string>());
        }
        spec.exploration =
            joint::exploration_from_string(field<std::string>(t, "exploration", "protocol", where));
        if (t.contains("protocol")) spec.protocol = t.at("protocol").get<std::string>();
        s.tasks.push_back(std::move(spec));
    }

    const auto faults = j.value("faults", Content::array());
    for (std::size_t i = 0; i < faults.size(); ++i) {
        const auto& f = faults[i];
        const auto where = "faults[" + std::to_string(i) + "]";
        sim::FaultSpec spec;
        spec.conversation_pattern = field<std::string>(f, "conversation", "*", where);
        spec.ordinal = field<std::size_t>(f, "ordinal", 1, where);
        if (spec.ordinal == 0) throw ParseError(where + ".ordinal: must be at least 1");
        spec.mutation = mutation_from_json(required(f, "mutation", where), where);
        s.faults.push_back(std::move(spec));
    }

    check_references(s);
    return s;
}

}  // namespace

Scenario scenario_from_json(const Content& j, const std::filesystem::path& base_dir) {
    try {
        return build_scenario(j, base_dir);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open scenario");
    Content j;
    try {
        j = Content::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    try {
        return scenario_from_json(j, path.parent_path());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

Content scenario_to_json(const Scenario& s) {
    Content j;
    j["seed"] = s.seed;
    j["selection_mode"] = to_string(s.mode);
    j["reply_deadline"] = s.reply_deadline;
    j["latency"] = s.latency;
    j["max_ticks"] = s.max_ticks;
    if (s.transport_down) j["transport_down"] = true;
    j["protocols"] = s.protocol_sources;
    Content compat = Content::array();
    for (const auto& [a, b] : s.compatibility.pairs()) compat.push_back({a.str(), b.str()});
    j["compatibility"] = compat;

    Content agents = Content::array();
    for (const auto& a : s.agents) {
        Content model = Content::array();
        for (const auto& e : a.model.entries()) {
            model.push_back({{"protocol", e.protocol_id}, {"roles", e.roles}});
        }
        Content entry = {{"id", a.id}, {"model", model}};
        entry["willing"] = a.willingness.willing;
        entry["mute"] = a.willingness.mute;
        entry["refuse"] = a.willingness.refuse;
        agents.push_back(entry);
    }
    j["agents"] = agents;

    Content tasks = Content::array();
    for (const auto& t : s.tasks) {
        Content entry;
        entry["initiator"] = t.initiator;
        entry["task"] = {{"task_id", t.task.task_id},
                         {"required_capabilities", t.task.required_capabilities},
                         {"constraints", t.task.constraints}};
        Content identified = Content::object();
        for (const auto& [p, ids] : t.identified) identified[p] = ids;
        entry["identified"] = identified;
        entry["potential_participants"] = t.potential_participants;
        entry["exploration"] = joint::to_string(t.exploration);
        if (t.protocol) entry["protocol"] = *t.protocol;
        tasks.push_back(entry);
    }
    j["tasks"] = tasks;

    Content faults = Content::array();
    for (const auto& f : s.faults) {
        faults.push_back({{"conversation", f.conversation_pattern},
                          {"ordinal", f.ordinal},
                          {"mutation", mutation_to_json(f.mutation)}});
    }
    j["faults"] = faults;
    return j;
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::string task_of(const std::string& conversation) {
    return conversation.substr(0, conversation.find('/'));
}

// One scenario agent: routes messages and timers to its sessions.
class Peer : public sim::Agent {
public:
    Peer(const Scenario& s, const AgentSpec& spec, OutcomeSink& sink)
        : scenario_(s), spec_(spec), sink_(sink) {}

    void on_message(const Message& msg, sim::AgentContext& ctx) override {
        const auto task = task_of(msg.conversation_id);
        if (auto it = initiators_.find(task); it != initiators_.end()) {
            it->second->on_message(msg, ctx);
            return;
        }
        auto it = sessions_.find(msg.conversation_id);
        if (it == sessions_.end()) {
            it = sessions_.emplace(msg.conversation_id, participant_for(msg, task)).first;
        }
        it->second->on_message(msg, ctx);
    }

    void on_timer(const std::string& token, sim::AgentContext& ctx) override {
        const auto bar = token.find('|');
        const auto head = token.substr(0, bar);
        if (head == "start" && bar != std::string::npos) {
            start_task(token.substr(bar + 1), ctx);
            return;
        }
        if (auto it = initiators_.find(head); it != initiators_.end()) {
            it->second->on_timer(token, ctx);
        }
    }

private:
    std::unique_ptr<Session> participant_for(const Message& msg, const std::string& task) {
        if (msg.performative.name == performatives::kCallForCollaboration) {
            return std::make_unique<joint::JointParticipantSession>(
                scenario_.registry,
                joint::JointParticipantConfig{spec_.model, &scenario_.compatibility,
                                              spec_.willingness},
                &sink_);
        }
        individual::ParticipantConfig config{task, spec_.model};
        if (scenario_.mode == SelectionMode::IndividualMixed) {
            return std::make_unique<mixed::MixedParticipantSession>(scenario_.registry,
                                                                    std::move(config), &sink_);
        }
        return std::make_unique<individual::SequentialParticipantSession>(
            scenario_.registry, std::move(config), &sink_);
    }

    void start_task(const std::string& task_id, sim::AgentContext& ctx) {
        const TaskSpec* spec = nullptr;
        for (const auto& t : scenario_.tasks) {
            if (t.task.task_id == task_id) spec = &t;
        }
        if (!spec) return;
        const auto candidates = match_task_to_protocols(spec->task, spec_.model, scenario_.registry);
        auto& out = sink_[task_id];
        out.task_id = task_id;

        if (scenario_.mode == SelectionMode::Joint) {
            auto session = std::make_unique<joint::JointInitiatorSession>(
                scenario_.registry,
                joint::JointInitiatorConfig{task_id, candidates, restrict(spec->identified, candidates),
                                            spec->potential_participants, spec->exploration},
                &sink_);
            auto* raw = session.get();
            initiators_[task_id] = std::move(session);
            raw->start(ctx);
            return;
        }

        std::vector<ProtocolCandidate> usable;
        for (const auto& c : candidates) {
            auto it = spec->identified.find(c.protocol_id);
            if (it == spec->identified.end() || it->second.empty()) continue;
            if (spec->protocol && *spec->protocol != c.protocol_id) continue;
            usable.push_back(c);
        }
        if (usable.empty()) {
            out.status = TaskStatus::Failed;
            out.reason = "no identified protocol";
            ctx.trace(sim::TraceKind::Termination, {{"task", task_id},
                                                    {"side", "initiator"},
                                                    {"status", "failed"},
                                                    {"reason", out.reason}});
            return;
        }
        const auto& pick = usable.size() == 1 ? usable.front() : ctx.rng().pick(usable);
        const auto participant = *spec->identified.at(pick.protocol_id).begin();
        auto session = std::make_unique<individual::InitiatorSession>(
            scenario_.registry,
            individual::InitiatorConfig{task_id,
                                        {pick.protocol_id, pick.initiator_role},
                                        participant,
                                        task_id + "/" + pick.protocol_id + "/" + participant},
            &sink_);
        auto* raw = session.get();
        initiators_[task_id] = std::move(session);
        try {
            raw->start(ctx);
        } catch (const TransportDown&) {
            out.status = TaskStatus::Failed;
            out.reason = "transport";
        }
    }

    static std::map<std::string, std::set<AgentId>> restrict(
        const std::map<std::string, std::set<AgentId>>& identified,
        const std::vector<ProtocolCandidate>& candidates) {
        std::map<std::string, std::set<AgentId>> out;
        for (const auto& c : candidates) {
            auto it = identified.find(c.protocol_id);
            if (it != identified.end()) out[c.protocol_id] = it->second;
        }
        return out;
    }

    const Scenario& scenario_;
    const AgentSpec& spec_;
    OutcomeSink& sink_;
    std::map<std::string, std::unique_ptr<Session>> initiators_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
};

}  // namespace

bool Summary::all_succeeded() const {
    return std::all_of(tasks.begin(), tasks.end(),
                       [](const TaskSummary& t) { return t.status == TaskStatus::Succeeded; });
}

const TaskSummary* Summary::find(const std::string& task_id) const {
    for (const auto& t : tasks) {
        if (t.task_id == task_id) return &t;
    }
    return nullptr;
}

Content summary_to_json(const Summary& s) {
    Content tasks = Content::array();
    for (const auto& t : s.tasks) {
        tasks.push_back({{"task_id", t.task_id},
                         {"status", to_string(t.status)},
                         {"protocol", t.protocol},
                         {"assignment", t.assignment},
                         {"final_role", t.final_role},
                         {"reason", t.reason},
                         {"recoveries", t.recoveries},
                         {"messages", t.messages}});
    }
    return {{"tasks", tasks}, {"all_succeeded", s.all_succeeded()}};
}

Summary summarize(const Scenario& s, const std::vector<sim::TraceEvent>& trace,
                  const OutcomeSink& outcomes) {
    Summary summary;
    for (const auto& t : s.tasks) {
        TaskSummary row;
        row.task_id = t.task.task_id;
        if (auto it = outcomes.find(row.task_id); it != outcomes.end()) {
            row.status = it->second.status;
            row.protocol = it->second.protocol;
            row.assignment = it->second.assignment;
            row.final_role = it->second.final_role;
            row.reason = it->second.reason;
        }
        if (row.status == TaskStatus::Pending) {
            row.status = TaskStatus::Failed;
            if (row.reason.empty()) row.reason = "did not terminate";
        }
        const auto prefix = row.task_id + "/";
        for (const auto& e : trace) {
            if (e.kind == sim::TraceKind::Send &&
                e.payload.value("conversation_id", "").rfind(prefix, 0) == 0) {
                ++row.messages;
            } else if (e.kind == sim::TraceKind::Recovery &&
                       e.payload.value("task", "") == row.task_id) {
                ++row.recoveries;
            }
        }
        summary.tasks.push_back(std::move(row));
    }
    return summary;
}

RunResult run_scenario(const Scenario& s) {
    sim::Simulator simulator(s.seed, s.latency, s.reply_deadline);
    OutcomeSink outcomes;
    for (const auto& a : s.agents) {
        simulator.add_agent(a.id, std::make_unique<Peer>(s, a, outcomes));
    }
    for (const auto& f : s.faults) simulator.inject_fault(f);
    for (const auto& t : s.tasks) simulator.schedule_timer(t.initiator, 0, "start|" + t.task.task_id);
    simulator.set_transport_down(s.transport_down);
    simulator.run_until_quiescent(s.max_ticks);
    RunResult result;
    result.trace = simulator.trace();
    result.summary = summarize(s, result.trace, outcomes);
    return result;
}

}  // namespace protosel::scenario
