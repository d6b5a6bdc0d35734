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

#include "protosel/sim.hpp"

#include <sstream>

#include "protosel/errors.hpp"

namespace protosel::sim {

std::string to_string(TraceKind k) {
    switch (k) {
        case TraceKind::Send: return "send";
        case TraceKind::Deliver: return "deliver";
        case TraceKind::Fault: return "fault";
        case TraceKind::Recovery: return "recovery";
        case TraceKind::Selection: return "selection";
        case TraceKind::Termination: return "termination";
    }
    return "?";
}

TraceKind trace_kind_from_string(const std::string& s) {
    for (auto k : {TraceKind::Send, TraceKind::Deliver, TraceKind::Fault, TraceKind::Recovery,
                   TraceKind::Selection, TraceKind::Termination}) {
        if (to_string(k) == s) return k;
    }
    throw ParseError("unknown trace event kind '" + s + "'");
}

std::string to_jsonl(const std::vector<TraceEvent>& trace) {
    std::string out;
    for (const auto& e : trace) {
        nlohmann::ordered_json line;
        line["tick"] = e.tick;
        line["kind"] = to_string(e.kind);
        line["payload"] = nlohmann::ordered_json::parse(e.payload.dump());
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<TraceEvent> from_jsonl(const std::string& text) {
    std::vector<TraceEvent> out;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            auto j = Content::parse(line);
            out.push_back({j.at("tick").get<Tick>(), trace_kind_from_string(j.at("kind")),
                           j.at("payload")});
        } catch (const Content::exception& e) {
            throw ParseError("trace line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

bool glob_match(const std::string& pattern, const std::string& text) {
    std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

namespace {

Content* find_leaf(Content& node, const std::string& path) {
    if (path.empty()) {
        if (node.is_object()) {
            for (auto& [k, v] : node.items()) {
                if (auto* leaf = find_leaf(v, "")) return leaf;
            }
            return nullptr;
        }
        if (node.is_array()) {
            for (auto& v : node) {
                if (auto* leaf = find_leaf(v, "")) return leaf;
            }
            return nullptr;
        }
        return &node;
    }
    Content* cur = &node;
    std::istringstream in(path);
    std::string part;
    while (std::getline(in, part, '/')) {
        if (part.empty()) continue;
        if (cur->is_object()) {
            auto it = cur->find(part);
            if (it == cur->end()) return nullptr;
            cur = &*it;
        } else if (cur->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(part);
            } catch (const std::exception&) {
                return nullptr;
            }
            if (idx >= cur->size()) return nullptr;
            cur = &(*cur)[idx];
        } else {
            return nullptr;
        }
    }
    return (cur->is_object() || cur->is_array()) ? nullptr : cur;
}

}  // namespace

Message apply_mutation(const Message& msg, const Mutation& m) {
    Message out = msg;
    if (m.kind == Mutation::Kind::CorruptStructure) {
        if (m.target == "performative") {
            out.performative.name = "garbled-" + out.performative.name;
        } else if (m.target == "language") {
            out.language = "garbled-" + out.language;
        } else if (m.target == "ontology") {
            out.ontology = "garbled-" + out.ontology;
        } else {
            if (out.content.is_object()) {
                out.content["__garbled__"] = "x";
            } else {
                out.content = Content::array({out.content});
            }
        }
        return out;
    }
    if (auto* leaf = find_leaf(out.content, m.target)) {
        if (leaf->is_number()) {
            *leaf = "garbled";
        } else {
            *leaf = -1;
        }
    }
    return out;
}

Tick AgentContext::now() const { return sim_.now(); }

void AgentContext::send(Message msg) { send(std::move(msg), sim_.latency()); }

void AgentContext::send(Message msg, Tick delay) {
    msg.sender = self_;
    sim_.schedule_send(std::move(msg), delay);
}

void AgentContext::set_timer(Tick delay, std::string token) {
    sim_.schedule_timer(self_, delay, std::move(token));
}

Rng& AgentContext::rng() { return sim_.rng(); }

void AgentContext::trace(TraceKind kind, Content payload) {
    if (!payload.contains("agent")) payload["agent"] = self_;
    sim_.record(kind, std::move(payload));
}

std::string AgentContext::next_message_id() { return sim_.next_message_id(self_); }

Tick AgentContext::reply_deadline() const { return sim_.reply_deadline(); }

Simulator::Simulator(std::uint64_t seed, Tick latency, Tick reply_deadline)
    : latency_(latency), reply_deadline_(reply_deadline), rng_(seed) {}

void Simulator::add_agent(const AgentId& id, std::unique_ptr<Agent> agent) {
    agents_[id] = std::move(agent);
}

Agent* Simulator::agent(const AgentId& id) const {
    auto it = agents_.find(id);
    return it == agents_.end() ? nullptr : it->second.get();
}

std::string Simulator::next_message_id(const AgentId& agent) {
    return agent + "#" + std::to_string(++message_ids_[agent]);
}

void Simulator::schedule_send(Message msg, Tick delay) {
    if (transport_down_) throw TransportDown("message bus is down");
    if (!has_agent(msg.receiver)) {
        throw UnknownReceiver("unknown receiver '" + msg.receiver + "'");
    }
    record(TraceKind::Send, message_to_json(msg));
    // Selection and control traffic is never perturbed and does not count.
    if (!is_domain_performative(msg.performative.name)) {
        queue_.emplace(std::make_pair(now_ + delay, enqueue_seq_++), std::move(msg));
        return;
    }
    const auto ordinal = ++conversation_ordinals_[msg.conversation_id];
    for (auto& f : faults_) {
        if (f.fired || f.spec.ordinal != ordinal ||
            !glob_match(f.spec.conversation_pattern, msg.conversation_id)) {
            continue;
        }
        f.fired = true;
        auto mutated = apply_mutation(msg, f.spec.mutation);
        record(TraceKind::Fault,
               {{"conversation_id", msg.conversation_id},
                {"ordinal", ordinal},
                {"mutation", f.spec.mutation.kind == Mutation::Kind::CorruptStructure
                                 ? "corrupt_structure"
                                 : "corrupt_content"},
                {"target", f.spec.mutation.target},
                {"reply_with", msg.reply_with.value_or("")},
                {"before", message_to_json(msg)},
                {"after", message_to_json(mutated)}});
        msg = std::move(mutated);
    }
    queue_.emplace(std::make_pair(now_ + delay, enqueue_seq_++), std::move(msg));
}

void Simulator::schedule_timer(const AgentId& agent, Tick delay, std::string token) {
    if (!has_agent(agent)) throw UnknownReceiver("unknown timer owner '" + agent + "'");
    queue_.emplace(std::make_pair(now_ + delay, enqueue_seq_++), Timer{agent, std::move(token)});
}

void Simulator::record(TraceKind kind, Content payload) {
    trace_.push_back({now_, kind, std::move(payload)});
}

void Simulator::dispatch(Item& item) {
    if (auto* msg = std::get_if<Message>(&item)) {
        record(TraceKind::Deliver, message_to_json(*msg));
        AgentContext ctx(*this, msg->receiver);
        agents_.at(msg->receiver)->on_message(*msg, ctx);
    } else {
        auto& timer = std::get<Timer>(item);
        AgentContext ctx(*this, timer.agent);
        agents_.at(timer.agent)->on_timer(timer.token, ctx);
    }
}

const std::vector<TraceEvent>& Simulator::run_until_quiescent(Tick max_ticks) {
    if (max_ticks == 0) throw std::invalid_argument("max_ticks must be positive");
    while (!queue_.empty()) {
        auto it = queue_.begin();
        if (it->first.first > max_ticks) {
            throw BudgetExceeded("pending work past tick " + std::to_string(max_ticks));
        }
        now_ = it->first.first;
        Item item = std::move(it->second);
        queue_.erase(it);
        dispatch(item);
    }
    return trace_;
}

}  // namespace protosel::sim
