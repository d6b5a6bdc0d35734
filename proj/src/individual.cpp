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

#include "protosel/individual.hpp"

#include <algorithm>
#include <stdexcept>

#include "protosel/errors.hpp"

namespace protosel::individual {

std::string to_string(ErrorKind k) {
    return k == ErrorKind::WrongStructure ? "wrong-structure" : "wrong-content";
}

std::string to_string(Side s) { return s == Side::Initiator ? "initiator" : "participant"; }

ErrorKind error_kind_from_string(const std::string& s) {
    if (s == "wrong-structure") return ErrorKind::WrongStructure;
    if (s == "wrong-content") return ErrorKind::WrongContent;
    throw ParseError("unknown error kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// RoleCollection

RoleCollection::RoleCollection(std::string task_id, std::vector<RoleRef> roles)
    : task_id_(std::move(task_id)) {
    for (auto& r : roles) entries_.push_back({std::move(r), RoleStatus::Available, {}});
}

std::vector<RoleRef> RoleCollection::available() const {
    std::vector<RoleRef> out;
    for (const auto& e : entries_) {
        if (e.status == RoleStatus::Available) out.push_back(e.role);
    }
    return out;
}

std::vector<RoleRef> RoleCollection::removed() const {
    std::vector<RoleRef> out;
    for (const auto& e : entries_) {
        if (e.status == RoleStatus::Removed) out.push_back(e.role);
    }
    return out;
}

std::optional<RoleRef> RoleCollection::active() const {
    for (const auto& e : entries_) {
        if (e.status == RoleStatus::Active) return e.role;
    }
    return std::nullopt;
}

RoleStatus RoleCollection::status(const RoleRef& ref) const {
    for (const auto& e : entries_) {
        if (e.role == ref) return e.status;
    }
    throw UnknownRole("role '" + ref.str() + "' is not in the collection");
}

CollectionEntry& RoleCollection::entry(const RoleRef& ref) {
    for (auto& e : entries_) {
        if (e.role == ref) return e;
    }
    throw UnknownRole("role '" + ref.str() + "' is not in the collection");
}

void RoleCollection::activate(const RoleRef& ref) {
    auto& e = entry(ref);
    if (e.status == RoleStatus::Removed) {
        throw std::logic_error("role '" + ref.str() + "' was removed from the collection");
    }
    if (auto cur = active(); cur && *cur != ref) {
        throw std::logic_error("role '" + cur->str() + "' is still active");
    }
    e.status = RoleStatus::Active;
}

void RoleCollection::remove(const RoleRef& ref, const std::string& reason) {
    auto& e = entry(ref);
    if (e.status == RoleStatus::Removed) return;
    e.status = RoleStatus::Removed;
    e.removed_because = reason;
}

RoleCollection build_collection(const std::string& task_id, const InteractionModel& model,
                                const Message& m0, const ProtocolRegistry& registry) {
    std::vector<RoleRef> roles;
    for (const auto& ref : model.roles()) {
        const auto* p = registry.find(ref.protocol);
        const auto* r = p ? p->find_role(ref.role) : nullptr;
        if (!r || r->kind != RoleKind::Participant) continue;
        for (const auto* t : r->outgoing(r->initial_state)) {
            if (t->trigger.kind != Trigger::Kind::Receive) continue;
            const auto* s = p->find_schema(t->trigger.ref);
            if (s && structure_matches(*s, m0)) {
                roles.push_back(ref);
                break;
            }
        }
    }
    return RoleCollection(task_id, std::move(roles));
}

// ---------------------------------------------------------------------------
// Checks

std::optional<ErrorKind> classify_incoming(const Message& msg,
                                           std::span<const MessageSchema* const> expected) {
    bool structure_ok = false;
    for (const auto* s : expected) {
        if (!structure_matches(*s, msg)) continue;
        structure_ok = true;
        if (s->content_pattern.content_matches(msg.content)) return std::nullopt;
    }
    return structure_ok ? ErrorKind::WrongContent : ErrorKind::WrongStructure;
}

std::optional<InteractionError> check_incoming(const Message& msg,
                                               std::span<const MessageSchema* const> expected,
                                               Side detected_by, std::size_t location) {
    auto kind = classify_incoming(msg, expected);
    if (!kind) return std::nullopt;
    return InteractionError{*kind, detected_by, location, msg};
}

// ---------------------------------------------------------------------------
// Purge

namespace {

std::span<const JournalRecord> prefix_before(const Journal& j, std::size_t location) {
    const auto n = std::min(location == 0 ? 0 : location - 1, j.size());
    return {j.records().data(), n};
}

const JournalRecord* record_at(const Journal& j, std::size_t location) {
    return (location >= 1 && location <= j.size()) ? &j.at(location) : nullptr;
}

bool uses_method(const RoleStateMachine& role, const std::string& method) {
    return std::any_of(role.transitions.begin(), role.transitions.end(),
                       [&](const Transition& t) { return t.method == method; });
}

std::vector<const Transition*> receptions_from(const BoundRole& role,
                                               const std::set<std::string>& states) {
    std::vector<const Transition*> out;
    for (const auto& t : role.role->transitions) {
        if (states.count(t.from) && t.trigger.kind == Trigger::Kind::Receive) out.push_back(&t);
    }
    return out;
}

}  // namespace

Message generated_offending(const Journal& journal, const InteractionError& e) {
    if (e.detected_by == Side::Initiator) {
        if (const auto* rec = record_at(journal, e.location)) {
            for (const auto& o : rec->outputs) {
                if (const auto* em = std::get_if<MessageEmission>(&o);
                    em && em->message.reply_with == e.offending.reply_with) {
                    return em->message;
                }
            }
            for (const auto& o : rec->outputs) {
                if (const auto* em = std::get_if<MessageEmission>(&o)) return em->message;
            }
        }
    }
    return e.offending;
}

RoleCollection purge_collection(const RoleCollection& c, const Journal& journal,
                                const InteractionError& e, const ProtocolRegistry& registry) {
    RoleCollection out = c;
    if (auto a = out.active()) out.remove(*a, "failing role");

    const auto prefix = prefix_before(journal, e.location);
    const auto* at = e.detected_by == Side::Initiator ? record_at(journal, e.location) : nullptr;
    const Message generated = generated_offending(journal, e);

    for (const auto& ref : out.available()) {
        const auto role = BoundRole::resolve(registry, ref);
        const auto states = replay_states(role, prefix);
        if (states.empty()) {
            out.remove(ref, "rule 1: cannot replay the journal");
            continue;
        }
        if (e.detected_by == Side::Initiator) {
            std::vector<const Transition*> here;
            if (at) {
                here = transitions_on(role, states, at->input);
                if (here.empty()) {
                    out.remove(ref, "rule 1: cannot handle the input at the error point");
                    continue;
                }
            }
            const bool same_structure = std::any_of(here.begin(), here.end(), [&](const auto* t) {
                return t->action.kind == Action::Kind::Send &&
                       structure_matches(role.schema(t->action.ref), generated);
            });
            if (e.kind == ErrorKind::WrongStructure) {
                if (same_structure) out.remove(ref, "rule 2: generates the wrong message");
            } else if (!same_structure) {
                out.remove(ref, "rule 3: cannot generate the same structure");
            } else if (at && uses_method(*role.role, at->method)) {
                out.remove(ref, "rule 3: uses the failing method");
            }
        } else {
            const auto recv = receptions_from(role, states);
            const bool structure_ok = std::any_of(recv.begin(), recv.end(), [&](const auto* t) {
                return structure_matches(role.schema(t->trigger.ref), e.offending);
            });
            const bool content_ok = std::any_of(recv.begin(), recv.end(), [&](const auto* t) {
                return content_matches(role.schema(t->trigger.ref), e.offending);
            });
            if (e.kind == ErrorKind::WrongStructure) {
                if (!content_ok) out.remove(ref, "rule 2: cannot receive the erroneous message");
            } else if (!structure_ok) {
                out.remove(ref, "rule 3: does not receive the same structure");
            } else if (!content_ok) {
                out.remove(ref, "rule 3: does not receive the same content");
            }
        }
    }
    return out;
}

std::vector<std::string> error_point_subset(const BoundRole& role, const Journal& journal,
                                            const InteractionError& e) {
    const auto states = replay_states(role, prefix_before(journal, e.location));
    std::vector<std::string> subset;
    auto add = [&](const std::string& id) {
        if (std::find(subset.begin(), subset.end(), id) == subset.end()) subset.push_back(id);
    };
    if (e.detected_by == Side::Initiator) {
        const auto* at = record_at(journal, e.location);
        if (!at) return subset;
        const Message generated = generated_offending(journal, e);
        for (const auto* t : transitions_on(role, states, at->input)) {
            if (t->action.kind != Action::Kind::Send) continue;
            if (structure_matches(role.schema(t->action.ref), generated)) continue;
            add(t->action.ref);
        }
    } else {
        for (const auto* t : receptions_from(role, states)) {
            if (structure_matches(role.schema(t->trigger.ref), e.offending)) continue;
            add(t->trigger.ref);
        }
    }
    return subset;
}

std::optional<RoleRef> select_replacement_role(const RoleCollection& c, const InteractionError& e,
                                               const Journal& journal,
                                               const ProtocolRegistry& registry, Rng& rng) {
    const auto available = c.available();
    if (available.empty()) return std::nullopt;
    if (e.kind == ErrorKind::WrongStructure) return rng.pick(available);

    std::vector<RoleRef> best;
    std::size_t best_weak = 0;
    for (const auto& ref : available) {
        const auto role = BoundRole::resolve(registry, ref);
        const auto subset = error_point_subset(role, journal, e);
        const auto weak = static_cast<std::size_t>(
            std::count_if(subset.begin(), subset.end(),
                          [&](const auto& id) { return is_weak_schema(*role.role, id); }));
        if (best.empty() || weak > best_weak) {
            best = {ref};
            best_weak = weak;
        } else if (weak == best_weak) {
            best.push_back(ref);
        }
    }
    if (best.size() == 1) return best.front();
    return rng.pick(best);
}

// ---------------------------------------------------------------------------
// Recovery points

const std::set<std::string>& MethodGraph::follow(const std::string& node) const {
    static const std::set<std::string> kNone;
    auto it = edges.find(node);
    return it == edges.end() ? kNone : it->second;
}

MethodGraph build_method_graph(const RoleStateMachine& role) {
    MethodGraph g;
    for (const auto& t : role.transitions) {
        g.nodes.insert(t.method);
        g.input_kind.try_emplace(t.method, t.trigger.kind == Trigger::Kind::Receive
                                               ? InputKind::Message
                                               : InputKind::DataChange);
        for (const auto& next : role.transitions) {
            if (next.from == t.to) g.edges[t.method].insert(next.method);
        }
    }
    std::set<std::string> initial;
    for (const auto* t : role.outgoing(role.initial_state)) initial.insert(t->method);
    if (initial.size() != 1) {
        throw InvalidProtocol("role '" + role.role_id + "' needs exactly one initial method, has " +
                              std::to_string(initial.size()));
    }
    g.initial = *initial.begin();
    return g;
}

RecoveryPoints compute_recovery_points(const Journal& journal, const MethodGraph& graph) {
    RecoveryPoints p{1, 1};
    const auto& recs = journal.records();
    if (recs.empty() || recs.front().method != graph.initial) return p;
    std::string current = graph.initial;
    for (std::size_t k = 1; k < recs.size(); ++k) {
        const auto& rec = recs[k];
        if (!graph.follow(current).count(rec.method)) break;
        current = rec.method;
        ++p.participant;
        if (is_message_input(rec.input)) ++p.initiator;
    }
    return p;
}

Journal truncate_after_recovery(const Journal& journal, const RecoveryPoints& point, Side side) {
    Journal out = journal;
    if (side == Side::Participant) {
        if (point.participant == 0 || point.participant > journal.size() + 1) {
            throw PointOutOfRange("participant point " + std::to_string(point.participant) +
                                  " beyond journal of " + std::to_string(journal.size()));
        }
        out.truncate(point.participant - 1);
        return out;
    }
    std::size_t sent = 0;
    for (const auto& rec : journal.records()) {
        for (const auto& o : rec.outputs) {
            if (std::holds_alternative<MessageEmission>(o)) ++sent;
        }
        if (point.initiator >= 1 && sent >= point.initiator) {
            out.truncate(rec.seq);
            return out;
        }
    }
    throw PointOutOfRange("initiator journal has " + std::to_string(sent) +
                          " emissions, recovery point is " + std::to_string(point.initiator));
}

// ---------------------------------------------------------------------------
// Sessions

namespace {

Message control(const std::string& perf, Content content, const AgentId& to,
                const std::string& conversation, const std::optional<std::string>& in_reply_to,
                sim::AgentContext& ctx) {
    Message m;
    m.performative.name = perf;
    m.content = std::move(content);
    m.language = "control";
    m.ontology = "interaction";
    m.receiver = to;
    m.conversation_id = conversation;
    m.in_reply_to = in_reply_to;
    m.reply_with = ctx.next_message_id();
    return m;
}

void journal_and_send(Journal& journal, const std::vector<ExecutedStep>& steps,
                      sim::AgentContext& ctx) {
    for (const auto& step : steps) {
        journal.append(step.method, step.input, step.outputs);
        for (const auto& o : step.outputs) {
            if (const auto* em = std::get_if<MessageEmission>(&o)) ctx.send(em->message);
        }
    }
}

std::optional<std::string> last_reception(const Journal& journal) {
    for (auto it = journal.records().rbegin(); it != journal.records().rend(); ++it) {
        if (const auto* r = std::get_if<MessageReception>(&it->input)) return r->message.reply_with;
    }
    return std::nullopt;
}

}  // namespace

InitiatorSession::InitiatorSession(const ProtocolRegistry& registry, InitiatorConfig config,
                                   OutcomeSink* sink)
    : registry_(registry), config_(std::move(config)), sink_(sink) {}

MessageFactory InitiatorSession::factory(sim::AgentContext& ctx) {
    return [this, &ctx](const MessageSchema& schema, Content content) {
        Message m;
        m.performative = schema.performative;
        m.content = std::move(content);
        m.language = schema.language;
        m.ontology = schema.ontology;
        m.receiver = config_.participant;
        m.conversation_id = config_.conversation_id;
        m.in_reply_to = last_in_;
        m.reply_with = ctx.next_message_id();
        return m;
    };
}

void InitiatorSession::send_all(const std::vector<ExecutedStep>& steps, sim::AgentContext& ctx) {
    journal_and_send(journal_, steps, ctx);
}

void InitiatorSession::start(sim::AgentContext& ctx) {
    journal_ = Journal(ctx.self(), config_.conversation_id);
    exec_ = RoleExecution(BoundRole::resolve(registry_, config_.role));
    if (sink_) {
        auto& out = (*sink_)[config_.task_id];
        out.task_id = config_.task_id;
        out.protocol = config_.role.protocol;
    }
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "initiator-protocol"},
                                          {"role", config_.role.str()},
                                          {"participant", config_.participant},
                                          {"conversation_id", config_.conversation_id}});
    send_all(exec_.run_internal(factory(ctx)), ctx);
    phase_ = Phase::AwaitingReply;
}

void InitiatorSession::finish(TaskStatus status, const std::string& reason,
                              sim::AgentContext& ctx) {
    phase_ = Phase::Closed;
    if (sink_) {
        auto& out = (*sink_)[config_.task_id];
        out.status = status;
        out.reason = reason;
    }
    ctx.trace(sim::TraceKind::Termination, {{"task", config_.task_id},
                                            {"side", "initiator"},
                                            {"status", to_string(status)},
                                            {"reason", reason},
                                            {"conversation_id", config_.conversation_id}});
}

void InitiatorSession::on_message(const Message& msg, sim::AgentContext& ctx) {
    using namespace performatives;
    if (phase_ == Phase::Closed) return;
    const auto& perf = msg.performative.name;

    if (perf == kEndInteraction) {
        const auto reason = msg.content.value("reason", "");
        if (!sent_end_) {
            ctx.send(control(kEndInteraction, {{"reason", "ack"}}, config_.participant,
                             config_.conversation_id, msg.reply_with, ctx));
            sent_end_ = true;
        }
        const bool failed = reason == "no-viable-role" || reason == "no-role";
        finish(failed ? TaskStatus::Failed : TaskStatus::Succeeded,
               reason == "ack" ? "completed" : reason, ctx);
        return;
    }
    if (perf == kErrorNotify) {
        phase_ = Phase::AwaitingRecovery;
        return;
    }
    if (perf == kRecoverAt) {
        const auto point = msg.content.value("initiator_point", std::size_t{1});
        try {
            journal_ = truncate_after_recovery(journal_, {point, 1}, Side::Initiator);
        } catch (const PointOutOfRange& e) {
            finish(TaskStatus::Failed, e.what(), ctx);
            return;
        }
        exec_ = resume_after(BoundRole::resolve(registry_, config_.role), journal_.records());
        last_in_ = last_reception(journal_);
        validated_ = last_in_.has_value();
        phase_ = Phase::AwaitingReply;
        return;
    }
    if (!is_domain_performative(perf) || phase_ != Phase::AwaitingReply) return;

    const auto expected = exec_.receivable();
    if (auto kind = classify_incoming(msg, expected)) {
        journal_.append("reject", MessageReception{msg}, {});
        ctx.send(control(kErrorNotify,
                         {{"kind", to_string(*kind)},
                          {"detected_by", "initiator"},
                          {"offending", msg.reply_with.value_or("")}},
                         config_.participant, config_.conversation_id, msg.reply_with, ctx));
        phase_ = Phase::AwaitingRecovery;
        return;
    }
    const bool weak = is_weak_reception(exec_.role(), exec_.state(), msg);
    last_in_ = msg.reply_with;
    send_all(*exec_.receive(msg, factory(ctx)), ctx);
    if (!exec_.terminal()) {
        validated_ = true;
        return;
    }
    if (weak && !validated_) {
        ctx.send(control(kPrematureWarning, {{"text", "May be premature interaction termination!"}},
                         config_.participant, config_.conversation_id, msg.reply_with, ctx));
        phase_ = Phase::Warned;
        return;
    }
    ctx.send(control(kEndInteraction, {{"reason", "completed"}}, config_.participant,
                     config_.conversation_id, msg.reply_with, ctx));
    sent_end_ = true;
    phase_ = Phase::AwaitingEnd;
}

SequentialParticipantSession::SequentialParticipantSession(const ProtocolRegistry& registry,
                                                           ParticipantConfig config,
                                                           OutcomeSink* sink)
    : registry_(registry), config_(std::move(config)), sink_(sink) {}

MessageFactory SequentialParticipantSession::factory(sim::AgentContext& ctx) {
    return [this, &ctx](const MessageSchema& schema, Content content) {
        Message m;
        m.performative = schema.performative;
        m.content = std::move(content);
        m.language = schema.language;
        m.ontology = schema.ontology;
        m.receiver = initiator_;
        m.conversation_id = conversation_;
        m.in_reply_to = last_in_;
        m.reply_with = ctx.next_message_id();
        return m;
    };
}

void SequentialParticipantSession::on_message(const Message& msg, sim::AgentContext& ctx) {
    using namespace performatives;
    if (closed_) return;
    if (!opened_) {
        open(msg, ctx);
        return;
    }
    const auto& perf = msg.performative.name;
    if (perf == kEndInteraction) {
        close("ack", !sent_end_, ctx);
        return;
    }
    if (perf == kErrorNotify) {
        const auto offending = msg.content.value("offending", "");
        const auto loc = journal_.find_emission(offending);
        if (loc == 0) return;
        InteractionError e;
        e.kind = error_kind_from_string(msg.content.value("kind", "wrong-structure"));
        e.detected_by = Side::Initiator;
        e.location = loc;
        e.offending.reply_with = offending;
        e.offending = generated_offending(journal_, e);
        recover(e, ctx);
        return;
    }
    if (perf == kPrematureWarning) {
        on_warning(msg, ctx);
        return;
    }
    if (!is_domain_performative(perf)) return;
    process(msg, {}, ctx);
}

void SequentialParticipantSession::open(const Message& m0, sim::AgentContext& ctx) {
    opened_ = true;
    initiator_ = m0.sender;
    conversation_ = m0.conversation_id;
    journal_ = Journal(ctx.self(), conversation_);
    collection_ = build_collection(config_.task_id, config_.model, m0, registry_);
    Content roles = Content::array();
    for (const auto& e : collection_.entries()) roles.push_back(e.role.str());
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "collection"},
                                          {"mode", "sequential"},
                                          {"roles", roles},
                                          {"conversation_id", conversation_}});
    if (collection_.empty()) {
        last_in_ = m0.reply_with;
        close("no-role", true, ctx);
        return;
    }
    const auto first = ctx.rng().pick(collection_.available());
    collection_.activate(first);
    exec_ = RoleExecution(BoundRole::resolve(registry_, first));
    if (sink_) (*sink_)[config_.task_id].final_role = first.str();
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "instantiate"},
                                          {"role", first.str()},
                                          {"conversation_id", conversation_}});
    process(m0, {}, ctx);
}

void SequentialParticipantSession::process(const Message& msg, const ChoiceHint& hint,
                                           sim::AgentContext& ctx) {
    last_in_ = msg.reply_with;
    auto steps = exec_.receive(msg, factory(ctx), hint);
    if (!steps) {
        const auto kind = classify_incoming(msg, exec_.receivable()).value_or(ErrorKind::WrongStructure);
        ctx.send(control(performatives::kErrorNotify,
                         {{"kind", to_string(kind)},
                          {"detected_by", "participant"},
                          {"offending", msg.reply_with.value_or("")}},
                         initiator_, conversation_, msg.reply_with, ctx));
        recover({kind, Side::Participant, journal_.size() + 1, msg}, ctx);
        return;
    }
    journal_and_send(journal_, *steps, ctx);
}

void SequentialParticipantSession::recover(const InteractionError& e, sim::AgentContext& ctx) {
    const Message generated = generated_offending(journal_, e);
    collection_ = purge_collection(collection_, journal_, e, registry_);
    Content purged = Content::array();
    for (const auto& entry : collection_.entries()) {
        if (entry.status == RoleStatus::Removed) {
            purged.push_back({{"role", entry.role.str()}, {"reason", entry.removed_because}});
        }
    }
    const auto next = select_replacement_role(collection_, e, journal_, registry_, ctx.rng());
    if (!next) {
        ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                              {"phase", "exhausted"},
                                              {"purged", purged},
                                              {"conversation_id", conversation_}});
        close("no-viable-role", true, ctx);
        return;
    }
    ChoiceHint hint;
    if (e.kind == ErrorKind::WrongContent && e.detected_by == Side::Initiator) {
        hint.same_structure_as = generated;
    }
    const Content details = {{"kind", to_string(e.kind)},
                             {"detected_by", to_string(e.detected_by)},
                             {"location", e.location},
                             {"purged", purged}};
    std::optional<Message> pending;
    if (e.detected_by == Side::Participant) pending = e.offending;
    resume_with(*next, "error", details, hint, pending, ctx);
}

void SequentialParticipantSession::on_warning(const Message& msg, sim::AgentContext& ctx) {
    const auto loc = msg.in_reply_to ? journal_.find_emission(*msg.in_reply_to) : 0;
    if (loc == 0) return;
    if (auto a = collection_.active()) collection_.remove(*a, "weak reply");
    const std::span<const JournalRecord> prefix(journal_.records().data(), loc - 1);
    const auto& at = journal_.at(loc);
    for (const auto& ref : collection_.available()) {
        const auto role = BoundRole::resolve(registry_, ref);
        const auto states = replay_states(role, prefix);
        if (states.empty() || transitions_on(role, states, at.input).empty()) {
            collection_.remove(ref, "rule 1: cannot replay the journal");
        }
    }
    const auto available = collection_.available();
    if (available.empty()) {
        close("confirm-termination", true, ctx);
        return;
    }
    ChoiceHint hint;
    hint.avoid_weak = true;
    resume_with(ctx.rng().pick(available), "premature-warning", {{"location", loc}}, hint,
                std::nullopt, ctx);
}

void SequentialParticipantSession::resume_with(const RoleRef& next, const std::string& cause,
                                               const Content& details, const ChoiceHint& hint,
                                               const std::optional<Message>& pending,
                                               sim::AgentContext& ctx) {
    const auto previous = exec_.ref();
    const auto role = BoundRole::resolve(registry_, next);
    const auto points = compute_recovery_points(journal_, build_method_graph(*role.role));
    const Journal before = journal_;
    journal_ = truncate_after_recovery(journal_, points, Side::Participant);
    collection_.activate(next);
    exec_ = resume_after(role, journal_.records());
    ++recoveries_;
    if (sink_) {
        auto& out = (*sink_)[config_.task_id];
        out.recoveries = recoveries_;
        out.final_role = next.str();
    }

    ctx.send(control(performatives::kRecoverAt,
                     {{"initiator_point", points.initiator},
                      {"participant_point", points.participant}},
                     initiator_, conversation_, last_in_, ctx));
    Content payload = {{"task", config_.task_id},
                       {"cause", cause},
                       {"from", previous.str()},
                       {"to", next.str()},
                       {"initiator_point", points.initiator},
                       {"participant_point", points.participant},
                       {"kept_records", journal_.size()},
                       {"restart_from_m0", points.participant == 1},
                       {"conversation_id", conversation_}};
    for (const auto& [k, v] : details.items()) payload[k] = v;
    ctx.trace(sim::TraceKind::Recovery, payload);

    if (points.participant <= before.size()) {
        const auto& rec = before.at(points.participant);
        if (const auto* r = std::get_if<MessageReception>(&rec.input)) {
            process(r->message, hint, ctx);
        } else {
            last_in_ = last_reception(journal_);
            journal_and_send(journal_,
                             exec_.run_internal(factory(ctx), hint, std::get<DataChange>(rec.input)),
                             ctx);
        }
    } else if (pending) {
        process(*pending, hint, ctx);
    }
}

void SequentialParticipantSession::close(const std::string& reason, bool send_notice,
                                         sim::AgentContext& ctx) {
    if (send_notice && !sent_end_) {
        ctx.send(control(performatives::kEndInteraction, {{"reason", reason}}, initiator_,
                         conversation_, last_in_, ctx));
        sent_end_ = true;
    }
    closed_ = true;
    if (sink_ && reason == "no-viable-role") (*sink_)[config_.task_id].reason = "NoViableRole";
    ctx.trace(sim::TraceKind::Termination, {{"task", config_.task_id},
                                            {"side", "participant"},
                                            {"reason", reason},
                                            {"conversation_id", conversation_}});
}

}  // namespace protosel::individual
