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

#include "protosel/mixed.hpp"

#include <algorithm>
#include <sstream>

#include "protosel/errors.hpp"

namespace protosel::mixed {

using individual::ErrorKind;
using individual::RecoveryPoints;

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Active: return "active";
        case Activation::Deactivated: return "deactivated";
        case Activation::Stopped: return "stopped";
    }
    return "active";
}

std::vector<std::size_t> ControlZone::with(Activation a) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].activation == a) out.push_back(i);
    }
    return out;
}

const OutboxEntry* ControlZone::entry_for(std::size_t instance) const {
    for (const auto& e : outbox) {
        if (e.instance == instance) return &e;
    }
    return nullptr;
}

namespace {

OutboxEntry make_entry(const RoleInstance& inst, std::size_t index,
                       const std::vector<ExecutedStep>& steps) {
    OutboxEntry e;
    e.instance = index;
    std::string contents;
    std::string last_schema;
    for (const auto& s : steps) {
        for (const auto& o : s.outputs) {
            const auto* em = std::get_if<MessageEmission>(&o);
            if (!em) continue;
            e.messages.push_back(em->message);
            e.structure += structure_key(em->message) + ";";
            contents += em->message.content.dump() + ";";
            const auto& schema = inst.exec.role().schema(s.transition->action.ref);
            e.pattern += schema.content_pattern.key() + ";";
            last_schema = schema.schema_id;
        }
    }
    e.key = e.structure + "#" + contents + "#" + e.pattern;
    e.weak = last_schema.empty() ? inst.exec.terminal()
                                 : is_weak_schema(*inst.exec.role().role, last_schema);
    return e;
}

void journal_steps(Journal& j, const std::vector<ExecutedStep>& steps) {
    for (const auto& s : steps) j.append(s.method, s.input, s.outputs);
}

}  // namespace

ControlZone instantiate_all(const RoleCollection& c, const Message& m0,
                            const ProtocolRegistry& registry, const MessageFactory& make,
                            const Journal& empty_journal) {
    ControlZone cz;
    cz.journal = empty_journal;
    cz.step = 1;
    cz.inbox.push_back(m0);
    for (const auto& ref : c.available()) {
        RoleInstance inst{ref, RoleExecution(BoundRole::resolve(registry, ref)), empty_journal};
        const auto index = cz.instances.size();
        auto steps = inst.exec.receive(m0, make);
        if (!steps) {
            inst.activation = Activation::Stopped;
            cz.instances.push_back(std::move(inst));
            continue;
        }
        journal_steps(inst.journal, *steps);
        cz.outbox.push_back(make_entry(inst, index, *steps));
        cz.instances.push_back(std::move(inst));
    }
    cz.inbox.clear();
    return cz;
}

bool deliver_to_active(ControlZone& cz, const Message& msg, const MessageFactory& make,
                       const ChoiceHint& hint) {
    ++cz.step;
    cz.outbox.clear();
    cz.inbox.push_back(msg);
    bool accepted = false;
    for (auto i : cz.with(Activation::Active)) {
        auto& inst = cz.instances[i];
        auto steps = inst.exec.receive(msg, make, hint);
        if (!steps) {
            inst.activation = Activation::Stopped;
            continue;
        }
        accepted = true;
        journal_steps(inst.journal, *steps);
        cz.outbox.push_back(make_entry(inst, i, *steps));
    }
    cz.inbox.clear();
    return accepted;
}

std::size_t select_outgoing(const ControlZone& cz, Rng& rng,
                            const std::vector<std::size_t>& allowed) {
    if (allowed.empty()) throw std::invalid_argument("select_outgoing: empty outbox");
    std::vector<std::size_t> strong, weak, silent;
    for (auto i : allowed) {
        const auto& e = cz.outbox.at(i);
        if (e.messages.empty()) {
            silent.push_back(i);
        } else if (e.weak) {
            weak.push_back(i);
        } else {
            strong.push_back(i);
        }
    }
    const auto& pool = !strong.empty() ? strong : !weak.empty() ? weak : silent;
    return pool.size() == 1 ? pool.front() : rng.pick(pool);
}

std::size_t select_outgoing(const ControlZone& cz, Rng& rng) {
    std::vector<std::size_t> all(cz.outbox.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return select_outgoing(cz, rng, all);
}

void activate_group(ControlZone& cz, std::size_t entry) {
    const auto key = cz.outbox.at(entry).key;
    for (const auto& e : cz.outbox) {
        auto& inst = cz.instances[e.instance];
        if (inst.activation == Activation::Stopped) continue;
        if (e.key == key) {
            inst.activation = Activation::Active;
        } else if (inst.activation == Activation::Active) {
            inst.activation = Activation::Deactivated;
            inst.deactivation_stamp = cz.step;
        }
    }
}

std::optional<std::size_t> reconcile_after_step(ControlZone& cz, Rng& rng) {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < cz.outbox.size(); ++i) {
        if (cz.instances[cz.outbox[i].instance].activation == Activation::Active) live.push_back(i);
    }
    if (live.empty()) return std::nullopt;
    const bool agree = std::all_of(live.begin(), live.end(), [&](std::size_t i) {
        return cz.outbox[i].key == cz.outbox[live.front()].key;
    });
    if (agree) return live.front();
    const auto pick = select_outgoing(cz, rng, live);
    activate_group(cz, pick);
    return pick;
}

std::optional<std::size_t> handle_error_mixed(ControlZone& cz, ErrorKind kind, Rng& rng) {
    std::optional<std::size_t> failed;
    if (!cz.sent_history.empty()) {
        const auto& last = cz.sent_history.back();
        for (std::size_t i = 0; i < cz.outbox.size(); ++i) {
            const auto& msgs = cz.outbox[i].messages;
            if (!msgs.empty() && msgs.back().reply_with == last.reply_with) failed = i;
        }
    }
    for (auto i : cz.with(Activation::Active)) cz.instances[i].activation = Activation::Stopped;
    if (!failed) return std::nullopt;

    const auto reference = cz.outbox[*failed];
    std::vector<OutboxEntry> kept;
    for (auto& e : cz.outbox) {
        const bool same = kind == ErrorKind::WrongStructure ? e.structure == reference.structure
                                                            : e.pattern == reference.pattern;
        if (same) {
            cz.instances[e.instance].activation = Activation::Stopped;
        } else {
            kept.push_back(std::move(e));
        }
    }
    cz.outbox = std::move(kept);

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < cz.outbox.size(); ++i) {
        const auto& e = cz.outbox[i];
        if (cz.instances[e.instance].activation == Activation::Stopped || e.messages.empty()) {
            continue;
        }
        if (kind == ErrorKind::WrongContent && e.structure != reference.structure) continue;
        eligible.push_back(i);
    }
    if (eligible.empty()) return std::nullopt;
    const auto pick = select_outgoing(cz, rng, eligible);
    activate_group(cz, pick);
    return pick;
}

Reactivation reactivate(const ControlZone& cz) {
    const auto deactivated = cz.with(Activation::Deactivated);
    if (deactivated.empty()) throw NoDeactivatedRole("no deactivated role left to reactivate");
    std::uint64_t top = 0;
    for (auto i : deactivated) top = std::max(top, cz.instances[i].deactivation_stamp);

    Reactivation r;
    bool first = true;
    for (auto i : deactivated) {
        const auto& inst = cz.instances[i];
        if (inst.deactivation_stamp != top) continue;
        r.instances.push_back(i);
        const auto p = individual::compute_recovery_points(
            cz.journal, individual::build_method_graph(*inst.exec.role().role));
        r.per_role.push_back(p);
        if (first || std::tie(p.participant, p.initiator) <
                         std::tie(r.point.participant, r.point.initiator)) {
            r.point = p;
            first = false;
        }
    }
    return r;
}

std::string dump_control_zone(const ControlZone& cz) {
    std::ostringstream out;
    const auto& recs = cz.journal.records();
    for (std::size_t k = 0; k < recs.size(); ++k) {
        out << dump_record(recs[k]) << " |";
        if (k < cz.activation_columns.size()) {
            const auto& col = cz.activation_columns[k];
            for (std::size_t i = 0; i < col.size() && i < cz.instances.size(); ++i) {
                out << ' ' << cz.instances[i].role.role << '=' << to_string(col[i]).front();
            }
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Session

MixedParticipantSession::MixedParticipantSession(const ProtocolRegistry& registry,
                                                 individual::ParticipantConfig config,
                                                 OutcomeSink* sink)
    : registry_(registry), config_(std::move(config)), sink_(sink) {}

MessageFactory MixedParticipantSession::factory(sim::AgentContext& ctx) {
    return [this, &ctx](const MessageSchema& schema, Content content) {
        Message m;
        m.performative = schema.performative;
        m.content = std::move(content);
        m.language = schema.language;
        m.ontology = schema.ontology;
        m.sender = ctx.self();
        m.receiver = initiator_;
        m.conversation_id = conversation_;
        m.in_reply_to = last_in_;
        m.reply_with = ctx.next_message_id();
        return m;
    };
}

Message MixedParticipantSession::control(const std::string& perf, Content content,
                                         sim::AgentContext& ctx) {
    Message m;
    m.performative.name = perf;
    m.content = std::move(content);
    m.language = "control";
    m.ontology = "interaction";
    m.receiver = initiator_;
    m.conversation_id = conversation_;
    m.in_reply_to = last_in_;
    m.reply_with = ctx.next_message_id();
    return m;
}

namespace {

std::vector<std::string> role_names(const ControlZone& cz, const std::vector<std::size_t>& ids) {
    std::vector<std::string> out;
    for (auto i : ids) out.push_back(cz.instances[i].role.str());
    return out;
}

std::size_t message_inputs(const Journal& j) {
    return static_cast<std::size_t>(std::count_if(j.records().begin(), j.records().end(),
                                                  [](const JournalRecord& r) {
                                                      return is_message_input(r.input);
                                                  }));
}

}  // namespace

void MixedParticipantSession::on_message(const Message& msg, sim::AgentContext& ctx) {
    using namespace performatives;
    if (closed_) return;
    if (!opened_) {
        open(msg, ctx);
        return;
    }
    const auto& perf = msg.performative.name;
    if (perf == kEndInteraction) {
        close("ack", !sent_end_, ctx);
    } else if (perf == kErrorNotify) {
        on_error(msg, ctx);
    } else if (perf == kPrematureWarning) {
        on_warning(msg, ctx);
    } else if (is_domain_performative(perf)) {
        step(msg, {}, ctx);
    }
}

void MixedParticipantSession::open(const Message& m0, sim::AgentContext& ctx) {
    opened_ = true;
    initiator_ = m0.sender;
    conversation_ = m0.conversation_id;
    last_in_ = m0.reply_with;
    collection_ = individual::build_collection(config_.task_id, config_.model, m0, registry_);
    Content roles = Content::array();
    for (const auto& e : collection_.entries()) roles.push_back(e.role.str());
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "collection"},
                                          {"mode", "mixed"},
                                          {"roles", roles},
                                          {"conversation_id", conversation_}});
    if (collection_.empty()) {
        close("no-role", true, ctx);
        return;
    }
    cz_ = instantiate_all(collection_, m0, registry_, factory(ctx),
                          Journal(ctx.self(), conversation_));
    ctx.trace(sim::TraceKind::Selection,
              {{"task", config_.task_id},
               {"phase", "instantiate"},
               {"roles", role_names(cz_, cz_.with(Activation::Active))},
               {"stopped", role_names(cz_, cz_.with(Activation::Stopped))},
               {"conversation_id", conversation_}});
    if (cz_.outbox.empty()) {
        close("no-viable-role", true, ctx);
        return;
    }
    emit(ctx);
}

void MixedParticipantSession::record_columns() {
    if (cz_.activation_columns.size() > cz_.journal.size()) {
        cz_.activation_columns.resize(cz_.journal.size());
    }
    std::vector<Activation> col;
    for (const auto& inst : cz_.instances) col.push_back(inst.activation);
    while (cz_.activation_columns.size() < cz_.journal.size()) cz_.activation_columns.push_back(col);
}

void MixedParticipantSession::trace_active(const std::string& phase, sim::AgentContext& ctx) {
    const auto active = cz_.with(Activation::Active);
    std::set<std::string> keys;
    for (auto i : active) {
        if (const auto* e = cz_.entry_for(i)) keys.insert(e->structure + "#" + e->pattern);
    }
    ctx.trace(sim::TraceKind::Selection,
              {{"task", config_.task_id},
               {"phase", phase},
               {"step", cz_.step},
               {"active", role_names(cz_, active)},
               {"deactivated", role_names(cz_, cz_.with(Activation::Deactivated))},
               {"stopped", role_names(cz_, cz_.with(Activation::Stopped))},
               {"active_keys", keys},
               {"conversation_id", conversation_}});
}

void MixedParticipantSession::send_entry(std::size_t entry, sim::AgentContext& ctx) {
    const auto& e = cz_.outbox.at(entry);
    cz_.journal = cz_.instances[e.instance].journal;
    for (const auto& m : e.messages) {
        ctx.send(m);
        cz_.sent_history.push_back(m);
    }
    record_columns();
    note_outcome();
}

void MixedParticipantSession::emit(sim::AgentContext& ctx) {
    const auto pick = reconcile_after_step(cz_, ctx.rng());
    if (!pick) return;
    send_entry(*pick, ctx);
    trace_active("reconcile", ctx);
}

void MixedParticipantSession::step(const Message& msg, const ChoiceHint& hint,
                                   sim::AgentContext& ctx) {
    std::vector<const MessageSchema*> expected;
    for (auto i : cz_.with(Activation::Active)) {
        for (const auto* s : cz_.instances[i].exec.receivable()) expected.push_back(s);
    }
    const auto before_stop = cz_.with(Activation::Active);
    last_in_ = msg.reply_with;
    if (deliver_to_active(cz_, msg, factory(ctx), hint)) {
        emit(ctx);
        return;
    }
    const auto kind = individual::classify_incoming(msg, expected).value_or(ErrorKind::WrongStructure);
    ctx.send(control(performatives::kErrorNotify,
                     {{"kind", individual::to_string(kind)},
                      {"detected_by", "participant"},
                      {"offending", msg.reply_with.value_or("")}},
                     ctx));
    recover_by_reactivation("error", role_names(cz_, before_stop), {}, msg, ctx);
}

void MixedParticipantSession::on_error(const Message& notice, sim::AgentContext& ctx) {
    if (cz_.sent_history.empty() ||
        notice.content.value("offending", "") != cz_.sent_history.back().reply_with.value_or("")) {
        return;
    }
    const auto kind = individual::error_kind_from_string(notice.content.value("kind", ""));
    const auto stopped_before = cz_.with(Activation::Stopped);
    const auto next = handle_error_mixed(cz_, kind, ctx.rng());
    std::vector<std::string> stopped;
    for (auto i : cz_.with(Activation::Stopped)) {
        if (std::find(stopped_before.begin(), stopped_before.end(), i) == stopped_before.end()) {
            stopped.push_back(cz_.instances[i].role.str());
        }
    }
    if (!next) {
        recover_by_reactivation("error", stopped, {}, std::nullopt, ctx);
        return;
    }
    const auto& inst = cz_.instances[cz_.outbox[*next].instance];
    const RecoveryPoints point{message_inputs(inst.journal), inst.journal.size()};
    ++recoveries_;
    ctx.send(control(performatives::kRecoverAt,
                     {{"initiator_point", point.initiator},
                      {"participant_point", point.participant}},
                     ctx));
    ctx.trace(sim::TraceKind::Recovery,
              {{"task", config_.task_id},
               {"cause", "error"},
               {"kind", individual::to_string(kind)},
               {"detected_by", "initiator"},
               {"via", "outbox"},
               {"stopped", stopped},
               {"to", role_names(cz_, {cz_.outbox[*next].instance})},
               {"initiator_point", point.initiator},
               {"participant_point", point.participant},
               {"restart_from_m0", false},
               {"conversation_id", conversation_}});
    send_entry(*next, ctx);
    trace_active("reconcile", ctx);
}

void MixedParticipantSession::on_warning(const Message& msg, sim::AgentContext& ctx) {
    if (cz_.sent_history.empty() || msg.in_reply_to != cz_.sent_history.back().reply_with) return;
    const auto active = cz_.with(Activation::Active);
    for (auto i : active) cz_.instances[i].activation = Activation::Stopped;
    ChoiceHint hint;
    hint.avoid_weak = true;
    recover_by_reactivation("premature-warning", role_names(cz_, active), hint, std::nullopt, ctx);
}

void MixedParticipantSession::recover_by_reactivation(const std::string& cause,
                                                      const std::vector<std::string>& stopped,
                                                      const ChoiceHint& hint,
                                                      const std::optional<Message>& pending,
                                                      sim::AgentContext& ctx) {
    for (auto i : cz_.with(Activation::Active)) cz_.instances[i].activation = Activation::Stopped;
    Reactivation r;
    try {
        r = reactivate(cz_);
    } catch (const NoDeactivatedRole&) {
        close(cause == "premature-warning" ? "confirm-termination" : "no-viable-role", true, ctx);
        return;
    }
    const Journal before = cz_.journal;
    const auto kept =
        individual::truncate_after_recovery(before, r.point, individual::Side::Participant);
    for (auto i : r.instances) {
        auto& inst = cz_.instances[i];
        inst.journal = kept;
        inst.exec = resume_after(inst.exec.role(), kept.records());
        inst.activation = Activation::Active;
    }
    cz_.journal = kept;
    record_columns();
    ++recoveries_;

    ctx.send(control(performatives::kRecoverAt,
                     {{"initiator_point", r.point.initiator},
                      {"participant_point", r.point.participant}},
                     ctx));
    Content per_role = Content::array();
    for (std::size_t k = 0; k < r.instances.size(); ++k) {
        per_role.push_back({{"role", cz_.instances[r.instances[k]].role.str()},
                            {"initiator_point", r.per_role[k].initiator},
                            {"participant_point", r.per_role[k].participant}});
    }
    ctx.trace(sim::TraceKind::Recovery, {{"task", config_.task_id},
                                         {"cause", cause},
                                         {"via", "reactivation"},
                                         {"stopped", stopped},
                                         {"to", role_names(cz_, r.instances)},
                                         {"initiator_point", r.point.initiator},
                                         {"participant_point", r.point.participant},
                                         {"per_role", per_role},
                                         {"kept_records", kept.size()},
                                         {"restart_from_m0", r.point.participant == 1},
                                         {"conversation_id", conversation_}});
    note_outcome();

    if (r.point.participant <= before.size()) {
        const auto& rec = before.at(r.point.participant);
        if (const auto* in = std::get_if<MessageReception>(&rec.input)) {
            step(in->message, hint, ctx);
            return;
        }
        ++cz_.step;
        cz_.outbox.clear();
        for (auto i : cz_.with(Activation::Active)) {
            auto& inst = cz_.instances[i];
            auto steps = inst.exec.run_internal(factory(ctx), hint, std::get<DataChange>(rec.input));
            journal_steps(inst.journal, steps);
            cz_.outbox.push_back(make_entry(inst, i, steps));
        }
        emit(ctx);
        return;
    }
    if (pending) {
        step(*pending, hint, ctx);
        return;
    }
    trace_active("reconcile", ctx);
}

void MixedParticipantSession::note_outcome() {
    if (!sink_) return;
    auto& out = (*sink_)[config_.task_id];
    out.recoveries = recoveries_;
    std::string roles;
    for (auto i : cz_.with(Activation::Active)) {
        roles += (roles.empty() ? "" : ",") + cz_.instances[i].role.str();
    }
    out.final_role = roles;
}

void MixedParticipantSession::close(const std::string& reason, bool send_notice,
                                    sim::AgentContext& ctx) {
    if (send_notice && !sent_end_) {
        ctx.send(control(performatives::kEndInteraction, {{"reason", reason}}, ctx));
        sent_end_ = true;
    }
    closed_ = true;
    if (sink_ && reason == "no-viable-role") (*sink_)[config_.task_id].reason = "NoViableRole";
    ctx.trace(sim::TraceKind::Termination, {{"task", config_.task_id},
                                            {"side", "participant"},
                                            {"reason", reason},
                                            {"conversation_id", conversation_}});
}

}  // namespace protosel::mixed
