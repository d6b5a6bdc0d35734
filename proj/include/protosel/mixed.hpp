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
#include <optional>
#include <string>
#include <vector>

#include "protosel/individual.hpp"
#include "protosel/journal.hpp"
#include "protosel/protocol.hpp"
#include "protosel/rng.hpp"
#include "protosel/role_engine.hpp"
#include "protosel/session.hpp"

namespace protosel::mixed {

using individual::RoleCollection;

enum class Activation { Active, Deactivated, Stopped };
std::string to_string(Activation a);

struct RoleInstance {
    RoleRef role;
    RoleExecution exec;
    Journal journal;
    Activation activation = Activation::Active;
    std::uint64_t deactivation_stamp = 0;

    const std::string& current_state() const { return exec.state(); }
};

// What one instance generated during the current step.
struct OutboxEntry {
    std::size_t instance = 0;
    std::vector<Message> messages;  // empty: accepted silently
    std::string key;                // structure + concrete content + pattern
    std::string structure;
    std::string pattern;
    bool weak = false;
};

struct ControlZone {
    std::vector<RoleInstance> instances;
    std::vector<OutboxEntry> outbox;
    std::vector<Message> inbox;
    std::vector<Message> sent_history;
    std::uint64_t step = 0;
    // Interaction journal: follows whichever instances are active.
    Journal journal;
    // Activation of every instance when each journal record was written.
    std::vector<std::vector<Activation>> activation_columns;

    std::vector<std::size_t> with(Activation a) const;
    const OutboxEntry* entry_for(std::size_t instance) const;
};

// Runs every available role on m0 and fills the outbox. Roles that cannot
// accept m0 are stopped.
ControlZone instantiate_all(const RoleCollection& c, const Message& m0,
                            const ProtocolRegistry& registry, const MessageFactory& make,
                            const Journal& empty_journal = {});

// Feeds `msg` to every active instance as one step. Instances that cannot
// accept it are stopped. Returns false when no active instance accepted.
bool deliver_to_active(ControlZone& cz, const Message& msg, const MessageFactory& make,
                       const ChoiceHint& hint = {});

// Seeded draw among entries that do not shorten the interaction, falling back
// to weak ones. `allowed` restricts the pool (outbox indices).
std::size_t select_outgoing(const ControlZone& cz, Rng& rng,
                            const std::vector<std::size_t>& allowed);
std::size_t select_outgoing(const ControlZone& cz, Rng& rng);

// Activates every instance whose entry shares `entry`'s key; the other active
// instances with an entry are deactivated with the current step as stamp.
void activate_group(ControlZone& cz, std::size_t entry);

// Keeps all active instances if their entries agree, otherwise selects one
// entry and deactivates the rest. Returns the selected outbox index; nullopt
// when no active instance produced an entry.
std::optional<std::size_t> reconcile_after_step(ControlZone& cz, Rng& rng);

// Stops the active roles and the roles of removed entries. Returns the
// replacement entry, if any.
std::optional<std::size_t> handle_error_mixed(ControlZone& cz, individual::ErrorKind kind, Rng& rng);

struct Reactivation {
    std::vector<std::size_t> instances;
    individual::RecoveryPoints point;
    std::vector<individual::RecoveryPoints> per_role;
};

// The class with the largest deactivation stamp, with the earliest recovery
// point over its members. Throws NoDeactivatedRole.
Reactivation reactivate(const ControlZone& cz);

// The journal dump format plus one activation column per instance.
std::string dump_control_zone(const ControlZone& cz);

// ---------------------------------------------------------------------------

class MixedParticipantSession : public Session {
public:
    MixedParticipantSession(const ProtocolRegistry& registry, individual::ParticipantConfig config,
                            OutcomeSink* sink);

    void on_message(const Message& msg, sim::AgentContext& ctx) override;

    const ControlZone& control_zone() const { return cz_; }
    const RoleCollection& collection() const { return collection_; }
    int recoveries() const { return recoveries_; }
    bool closed() const { return closed_; }

private:
    void open(const Message& m0, sim::AgentContext& ctx);
    void step(const Message& msg, const ChoiceHint& hint, sim::AgentContext& ctx);
    // Reconciles the step just run and sends the selected messages.
    void emit(sim::AgentContext& ctx);
    void send_entry(std::size_t entry, sim::AgentContext& ctx);
    void on_error(const Message& notice, sim::AgentContext& ctx);
    void on_warning(const Message& msg, sim::AgentContext& ctx);
    void recover_by_reactivation(const std::string& cause, const std::vector<std::string>& stopped,
                                 const ChoiceHint& hint, const std::optional<Message>& pending,
                                 sim::AgentContext& ctx);
    void record_columns();
    void trace_active(const std::string& phase, sim::AgentContext& ctx);
    void close(const std::string& reason, bool send_notice, sim::AgentContext& ctx);
    void note_outcome();
    MessageFactory factory(sim::AgentContext& ctx);
    Message control(const std::string& perf, Content content, sim::AgentContext& ctx);

    const ProtocolRegistry& registry_;
    individual::ParticipantConfig config_;
    OutcomeSink* sink_;
    RoleCollection collection_;
    ControlZone cz_;
    AgentId initiator_;
    std::string conversation_;
    std::optional<std::string> last_in_;
    int recoveries_ = 0;
    bool opened_ = false;
    bool closed_ = false;
    bool sent_end_ = false;
};

}  // namespace protosel::mixed
