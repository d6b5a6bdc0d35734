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
#include <variant>
#include <vector>

#include "protosel/protocol.hpp"
#include "protosel/rng.hpp"
#include "protosel/session.hpp"

namespace protosel::joint {

// ---------------------------------------------------------------------------
// Candidate matrix

struct CandidateMatrix {
    std::vector<std::string> protocols;
    std::vector<AgentId> agents;
    std::set<std::pair<std::string, AgentId>> cells;

    bool has(const std::string& protocol, const AgentId& agent) const {
        return cells.count({protocol, agent}) > 0;
    }
    std::vector<AgentId> row(const std::string& protocol) const;
    std::vector<std::string> column(const AgentId& agent) const;
};

// Rows follow candidate order; columns are the sorted union of identified
// agents and `extra_agents`. Throws UnresolvedReference when `identified`
// names a protocol that is not a candidate.
CandidateMatrix build_candidate_matrix(const std::vector<ProtocolCandidate>& candidates,
                                       const std::map<std::string, std::set<AgentId>>& identified,
                                       const std::vector<AgentId>& extra_agents = {});

enum class Exploration { ProtocolOriented, AgentOriented };
std::string to_string(Exploration e);
Exploration exploration_from_string(const std::string& s);

// Unexplored row (or column) with the most cells; ties go to the smaller id.
std::optional<std::string> next_vector(const CandidateMatrix& m, Exploration mode,
                                       const std::set<std::string>& explored);

// ---------------------------------------------------------------------------
// Payloads and outcomes

using Payload = std::vector<RoleRef>;  // preference order

bool valid_payload(const Payload& p);
Content payload_to_json(const Payload& p);
// Throws ParseError.
Payload payload_from_json(const Content& j);

struct OneOneSolution {
    AgentId agent;
    std::string protocol;
    RoleRef role;
};

struct OneOneNSolution {
    std::set<AgentId> agents;
    std::string protocol;
    RoleRef role;
};

struct OneNSolution {
    std::set<AgentId> agents;
    std::string protocol;
    std::map<std::string, AgentId> assignment;  // role id -> agent

    std::map<AgentId, std::vector<RoleRef>> roles_by_agent() const;
};

struct Failure {
    std::string reason;
};

using JointOutcome = std::variant<OneOneSolution, OneOneNSolution, OneNSolution, Failure>;

bool is_solution(const JointOutcome& o);
Content outcome_to_json(const JointOutcome& o);
// Every assigned role was offered by its agent.
bool outcome_respects_payloads(const JointOutcome& o, const std::map<AgentId, Payload>& replies);

// ---------------------------------------------------------------------------
// Arbitration

using LargestSet = std::pair<RoleRef, std::set<AgentId>>;

std::optional<LargestSet> select_largest_set(const std::map<AgentId, Payload>& replies,
                                             const std::set<std::string>& identified_protocols);

// One protocol's tree assignment and the scores used to pick between trees.
struct TreeAssignment {
    std::string protocol;
    std::map<std::string, AgentId> assignment;
    std::size_t multi_role_agents = 0;
    std::size_t singleton_conflicts = 0;
};

// Breadth-first over the father tree rooted at the initiator role.
std::vector<std::string> breadth_first_roles(const Protocol& p);

// Throws CyclicFatherRelation.
std::optional<TreeAssignment> assign_tree(const Protocol& p,
                                          const std::map<AgentId, Payload>& replies, Rng& rng);

// Prefers fewer multi-role agents, then fewer singleton conflicts, then the
// smaller protocol id.
std::optional<OneNSolution> assign_roles_1_N(const std::map<AgentId, Payload>& replies,
                                             const std::vector<const Protocol*>& protocols,
                                             Rng& rng);

// ---------------------------------------------------------------------------
// Participant side

struct Willingness {
    bool willing = true;
    std::set<std::string> refuse;  // protocol ids declined outright
    bool mute = false;             // never answers

    bool accepts(const std::string& protocol) const { return willing && !refuse.count(protocol); }
    friend bool operator==(const Willingness&, const Willingness&) = default;
};

struct ParticipantMetaState {
    enum class Phase { Idle, Offered, Declined, Assigned, Stopped };
    Phase phase = Phase::Idle;
    std::string task_id;
    std::string protocol;
    Payload offered;
    std::vector<RoleRef> assigned;
};

struct MetaStep {
    ParticipantMetaState state;
    std::optional<Message> outgoing;
};

// The roles this agent would list for a call naming `protocol`.
Payload offerable_roles(const std::string& protocol, const InteractionModel& model,
                        const CompatibilityTable& table, const ProtocolRegistry& registry);

// Throws ProtocolViolation on an out-of-phase performative or an assignment
// naming a role never offered.
MetaStep participant_meta_step(ParticipantMetaState state, const Message& incoming,
                               const InteractionModel& model, const CompatibilityTable& table,
                               const ProtocolRegistry& registry, const Willingness& willingness);

// ---------------------------------------------------------------------------
// Sessions

struct JointInitiatorConfig {
    std::string task_id;
    std::vector<ProtocolCandidate> candidates;
    std::map<std::string, std::set<AgentId>> identified;
    std::vector<AgentId> potential_participants;
    Exploration exploration = Exploration::ProtocolOriented;
};

// Drives selection for one task: 1-1 candidates first (sequential contacts),
// then 1-1^N and 1-N (broadcast with a reply deadline).
class JointInitiatorSession : public Session {
public:
    JointInitiatorSession(const ProtocolRegistry& registry, JointInitiatorConfig config,
                          OutcomeSink* sink);

    void start(sim::AgentContext& ctx);
    void on_message(const Message& msg, sim::AgentContext& ctx) override;
    void on_timer(const std::string& token, sim::AgentContext& ctx) override;

    const CandidateMatrix& matrix() const { return matrix_; }
    const std::optional<JointOutcome>& outcome() const { return outcome_; }
    // Messages exchanged per (protocol, agent) pair.
    const std::map<std::pair<std::string, AgentId>, int>& pair_counts() const {
        return pair_counts_;
    }

private:
    struct Contact {
        std::string protocol;
        AgentId agent;
        std::string conversation;
        bool answered = false;
        bool closed = false;  // stop-selection or notify-assignment sent
    };

    void next_group(sim::AgentContext& ctx);
    void next_vector_step(sim::AgentContext& ctx);
    void contact_next(sim::AgentContext& ctx);
    void broadcast(const std::string& protocol, sim::AgentContext& ctx);
    void arbitrate(sim::AgentContext& ctx);
    void handle_reply_1_1(Contact& c, const Message& msg, sim::AgentContext& ctx);
    bool send(const std::string& perf, Content content, Contact& c,
              const std::optional<std::string>& in_reply_to, sim::AgentContext& ctx);
    void finish(JointOutcome outcome, sim::AgentContext& ctx);
    std::set<std::string> group_protocols() const;

    const ProtocolRegistry& registry_;
    JointInitiatorConfig config_;
    OutcomeSink* sink_;

    std::vector<std::pair<ProtocolCategory, std::vector<ProtocolCandidate>>> groups_;
    std::size_t group_ = 0;
    CandidateMatrix matrix_;
    std::set<std::string> explored_;
    std::vector<Contact> queue_;   // 1-1 contacts still to make for the current vector
    std::vector<Contact> pending_; // outstanding contacts
    std::map<AgentId, Payload> replies_;
    std::map<std::pair<std::string, AgentId>, int> pair_counts_;
    std::optional<JointOutcome> outcome_;
    int round_ = 0;
};

struct JointParticipantConfig {
    InteractionModel model;
    const CompatibilityTable* table = nullptr;
    Willingness willingness;
};

class JointParticipantSession : public Session {
public:
    JointParticipantSession(const ProtocolRegistry& registry, JointParticipantConfig config,
                            OutcomeSink* sink);

    void on_message(const Message& msg, sim::AgentContext& ctx) override;
    const ParticipantMetaState& state() const { return state_; }

private:
    const ProtocolRegistry& registry_;
    JointParticipantConfig config_;
    OutcomeSink* sink_;
    ParticipantMetaState state_;
};

}  // namespace protosel::joint
