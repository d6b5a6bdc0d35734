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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "protosel/protocol.hpp"
#include "protosel/rng.hpp"

namespace protosel::sim {

using Tick = std::uint64_t;

enum class TraceKind { Send, Deliver, Fault, Recovery, Selection, Termination };
std::string to_string(TraceKind k);
TraceKind trace_kind_from_string(const std::string& s);

struct TraceEvent {
    Tick tick = 0;
    TraceKind kind = TraceKind::Send;
    Content payload = Content::object();

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// One JSON object per line: {"tick", "kind", "payload"} in that order.
std::string to_jsonl(const std::vector<TraceEvent>& trace);
std::vector<TraceEvent> from_jsonl(const std::string& text);

struct Mutation {
    enum class Kind { CorruptStructure, CorruptContent };
    Kind kind = Kind::CorruptContent;
    // structure: performative | language | ontology | shape
    // content: '/'-separated path to a leaf; empty = first leaf
    std::string target;
};

struct FaultSpec {
    std::string conversation_pattern = "*";  // glob, '*' and '?'
    std::size_t ordinal = 1;                  // 1-based, domain messages per conversation
    Mutation mutation;
};

bool glob_match(const std::string& pattern, const std::string& text);
// The mutated copy; content corruption flips a leaf between string and
// number so typed wildcards and literals both reject it.
Message apply_mutation(const Message& msg, const Mutation& m);

class Simulator;

class AgentContext {
public:
    AgentContext(Simulator& sim, AgentId self) : sim_(sim), self_(std::move(self)) {}

    const AgentId& self() const { return self_; }
    Tick now() const;
    // Uses the simulator's default latency.
    void send(Message msg);
    void send(Message msg, Tick delay);
    void set_timer(Tick delay, std::string token);
    Rng& rng();
    void trace(TraceKind kind, Content payload);
    // Unique per agent; used for reply-with fields.
    std::string next_message_id();
    Tick reply_deadline() const;

private:
    Simulator& sim_;
    AgentId self_;
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual void on_message(const Message& msg, AgentContext& ctx) = 0;
    virtual void on_timer(const std::string& token, AgentContext& ctx) {
        (void)token;
        (void)ctx;
    }
};

class Simulator {
public:
    explicit Simulator(std::uint64_t seed, Tick latency = 1, Tick reply_deadline = 10);

    void add_agent(const AgentId& id, std::unique_ptr<Agent> agent);
    Agent* agent(const AgentId& id) const;
    bool has_agent(const AgentId& id) const { return agents_.count(id) > 0; }

    // Throws UnknownReceiver or TransportDown.
    void schedule_send(Message msg, Tick delay);
    void schedule_timer(const AgentId& agent, Tick delay, std::string token);
    void inject_fault(FaultSpec spec) { faults_.push_back({std::move(spec), false}); }
    void set_transport_down(bool down) { transport_down_ = down; }

    // Dispatches until nothing is pending. Throws BudgetExceeded when work
    // remains past max_ticks; the partial trace stays readable.
    const std::vector<TraceEvent>& run_until_quiescent(Tick max_ticks);

    void record(TraceKind kind, Content payload);
    const std::vector<TraceEvent>& trace() const { return trace_; }
    Tick now() const { return now_; }
    Rng& rng() { return rng_; }
    Tick latency() const { return latency_; }
    Tick reply_deadline() const { return reply_deadline_; }
    std::size_t pending() const { return queue_.size(); }
    std::string next_message_id(const AgentId& agent);

private:
    struct Timer {
        AgentId agent;
        std::string token;
    };
    using Item = std::variant<Message, Timer>;
    struct ArmedFault {
        FaultSpec spec;
        bool fired;
    };

    void dispatch(Item& item);

    std::map<AgentId, std::unique_ptr<Agent>> agents_;
    std::map<std::pair<Tick, std::uint64_t>, Item> queue_;
    std::uint64_t enqueue_seq_ = 0;
    Tick now_ = 0;
    Tick latency_;
    Tick reply_deadline_;
    Rng rng_;
    std::vector<TraceEvent> trace_;
    std::vector<ArmedFault> faults_;
    std::map<std::string, std::size_t> conversation_ordinals_;
    std::map<AgentId, std::uint64_t> message_ids_;
    bool transport_down_ = false;
};

}  // namespace protosel::sim
