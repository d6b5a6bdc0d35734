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
#include <span>
#include <string>
#include <vector>

#include "protosel/journal.hpp"
#include "protosel/protocol.hpp"
#include "protosel/rng.hpp"
#include "protosel/role_engine.hpp"
#include "protosel/session.hpp"

namespace protosel::individual {

enum class ErrorKind { WrongStructure, WrongContent };
enum class Side { Initiator, Participant };
std::string to_string(ErrorKind k);
std::string to_string(Side s);
ErrorKind error_kind_from_string(const std::string& s);

struct InteractionError {
    ErrorKind kind = ErrorKind::WrongStructure;
    Side detected_by = Side::Initiator;
    std::size_t location = 1;  // participant journal index of the offending message
    Message offending;
};

// ---------------------------------------------------------------------------
// Candidate roles

enum class RoleStatus { Available, Active, Removed };

struct CollectionEntry {
    RoleRef role;
    RoleStatus status = RoleStatus::Available;
    std::string removed_because;
};

// collection(agent, task): removal is a mark, never an erase.
class RoleCollection {
public:
    RoleCollection() = default;
    RoleCollection(std::string task_id, std::vector<RoleRef> roles);

    const std::string& task_id() const { return task_id_; }
    const std::vector<CollectionEntry>& entries() const { return entries_; }
    std::vector<RoleRef> available() const;
    std::vector<RoleRef> removed() const;
    std::optional<RoleRef> active() const;
    RoleStatus status(const RoleRef& ref) const;
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    // Throws std::logic_error when another role is active or `ref` is removed.
    void activate(const RoleRef& ref);
    void remove(const RoleRef& ref, const std::string& reason);

private:
    CollectionEntry& entry(const RoleRef& ref);

    std::string task_id_;
    std::vector<CollectionEntry> entries_;
};

RoleCollection build_collection(const std::string& task_id, const InteractionModel& model,
                                const Message& m0, const ProtocolRegistry& registry);

// ---------------------------------------------------------------------------
// Message checks

// Structure first, then content.
std::optional<ErrorKind> classify_incoming(const Message& msg,
                                           std::span<const MessageSchema* const> expected);
std::optional<InteractionError> check_incoming(const Message& msg,
                                               std::span<const MessageSchema* const> expected,
                                               Side detected_by = Side::Participant,
                                               std::size_t location = 1);

// ---------------------------------------------------------------------------
// Purge and replacement

// The message the participant itself generated at the error location when
// the initiator blamed it; the error's offending message otherwise.
Message generated_offending(const Journal& journal, const InteractionError& e);

// Marks removed: the active (failing) role; roles that cannot replay the
// journal up to the error point; then the structure/content rules for the
// error's kind and detecting side.
RoleCollection purge_collection(const RoleCollection& c, const Journal& journal,
                                const InteractionError& e, const ProtocolRegistry& registry);

// Candidate messages a role could generate (initiator-detected) or receive
// (participant-detected) at the error point, offending structure withdrawn.
std::vector<std::string> error_point_subset(const BoundRole& role, const Journal& journal,
                                            const InteractionError& e);

std::optional<RoleRef> select_replacement_role(const RoleCollection& c, const InteractionError& e,
                                               const Journal& journal,
                                               const ProtocolRegistry& registry, Rng& rng);

// ---------------------------------------------------------------------------
// Recovery points

enum class InputKind { Message, DataChange };

struct MethodGraph {
    std::set<std::string> nodes;
    std::map<std::string, std::set<std::string>> edges;
    std::string initial;
    std::map<std::string, InputKind> input_kind;

    const std::set<std::string>& follow(const std::string& node) const;
};

// Nodes are method ids; m -> n when some transition of n leaves the state a
// transition of m enters. Throws InvalidProtocol if the initial method is
// ambiguous.
MethodGraph build_method_graph(const RoleStateMachine& role);

struct RecoveryPoints {
    std::size_t initiator = 1;    // last message the initiator keeps as sent
    std::size_t participant = 1;  // record the new role resumes from

    friend auto operator<=>(const RecoveryPoints&, const RecoveryPoints&) = default;
};

RecoveryPoints compute_recovery_points(const Journal& journal, const MethodGraph& graph);

// Initiator: keep through the record emitting its i-th message.
// Participant: keep the first j-1 records. Throws PointOutOfRange.
Journal truncate_after_recovery(const Journal& journal, const RecoveryPoints& point, Side side);

// ---------------------------------------------------------------------------
// Sessions

struct InitiatorConfig {
    std::string task_id;
    RoleRef role;
    AgentId participant;
    std::string conversation_id;
};

// Static initiator: runs one protocol, checks every reply, warns on a weak
// first reply and rolls back on recover-at.
class InitiatorSession : public Session {
public:
    InitiatorSession(const ProtocolRegistry& registry, InitiatorConfig config, OutcomeSink* sink);

    void start(sim::AgentContext& ctx);
    void on_message(const Message& msg, sim::AgentContext& ctx) override;

    const Journal& journal() const { return journal_; }
    bool closed() const { return phase_ == Phase::Closed; }

private:
    enum class Phase { AwaitingReply, AwaitingRecovery, Warned, AwaitingEnd, Closed };

    void send_all(const std::vector<ExecutedStep>& steps, sim::AgentContext& ctx);
    void finish(TaskStatus status, const std::string& reason, sim::AgentContext& ctx);
    MessageFactory factory(sim::AgentContext& ctx);

    const ProtocolRegistry& registry_;
    InitiatorConfig config_;
    OutcomeSink* sink_;
    RoleExecution exec_;
    Journal journal_;
    Phase phase_ = Phase::AwaitingReply;
    bool validated_ = false;
    bool sent_end_ = false;
    std::optional<std::string> last_in_;
};

struct ParticipantConfig {
    std::string task_id;
    InteractionModel model;
};

// Sequential role instantiation with journal-based recovery.
class SequentialParticipantSession : public Session {
public:
    SequentialParticipantSession(const ProtocolRegistry& registry, ParticipantConfig config,
                                 OutcomeSink* sink);

    void on_message(const Message& msg, sim::AgentContext& ctx) override;

    const Journal& journal() const { return journal_; }
    const RoleCollection& collection() const { return collection_; }
    int recoveries() const { return recoveries_; }
    bool closed() const { return closed_; }

private:
    void open(const Message& m0, sim::AgentContext& ctx);
    void process(const Message& msg, const ChoiceHint& hint, sim::AgentContext& ctx);
    void recover(const InteractionError& e, sim::AgentContext& ctx);
    void on_warning(const Message& msg, sim::AgentContext& ctx);
    // Switches to `next` at the recovery point and replays the resumed input.
    void resume_with(const RoleRef& next, const std::string& cause, const Content& details,
                     const ChoiceHint& hint, const std::optional<Message>& pending,
                     sim::AgentContext& ctx);
    void close(const std::string& reason, bool send_notice, sim::AgentContext& ctx);
    MessageFactory factory(sim::AgentContext& ctx);

    const ProtocolRegistry& registry_;
    ParticipantConfig config_;
    OutcomeSink* sink_;
    RoleCollection collection_;
    RoleExecution exec_;
    Journal journal_;
    AgentId initiator_;
    std::string conversation_;
    std::optional<std::string> last_in_;
    int recoveries_ = 0;
    bool opened_ = false;
    bool closed_ = false;
    bool sent_end_ = false;
};

}  // namespace protosel::individual
