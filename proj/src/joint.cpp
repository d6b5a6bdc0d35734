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

#include "protosel/joint.hpp"

#include <algorithm>
#include <functional>

#include "protosel/errors.hpp"

namespace protosel::joint {

// ---------------------------------------------------------------------------
// Matrix

std::vector<AgentId> CandidateMatrix::row(const std::string& protocol) const {
    std::vector<AgentId> out;
    for (const auto& a : agents) {
        if (has(protocol, a)) out.push_back(a);
    }
    return out;
}

std::vector<std::string> CandidateMatrix::column(const AgentId& agent) const {
    std::vector<std::string> out;
    for (const auto& p : protocols) {
        if (has(p, agent)) out.push_back(p);
    }
    return out;
}

CandidateMatrix build_candidate_matrix(const std::vector<ProtocolCandidate>& candidates,
                                       const std::map<std::string, std::set<AgentId>>& identified,
                                       const std::vector<AgentId>& extra_agents) {
    CandidateMatrix m;
    for (const auto& c : candidates) {
        if (std::find(m.protocols.begin(), m.protocols.end(), c.protocol_id) == m.protocols.end()) {
            m.protocols.push_back(c.protocol_id);
        }
    }
    std::set<AgentId> agents(extra_agents.begin(), extra_agents.end());
    for (const auto& [protocol, ids] : identified) {
        if (std::find(m.protocols.begin(), m.protocols.end(), protocol) == m.protocols.end()) {
            throw UnresolvedReference("identified protocol '" + protocol + "' is not a candidate");
        }
        for (const auto& a : ids) {
            agents.insert(a);
            m.cells.insert({protocol, a});
        }
    }
    m.agents.assign(agents.begin(), agents.end());
    return m;
}

std::string to_string(Exploration e) {
    return e == Exploration::ProtocolOriented ? "protocol" : "agent";
}

Exploration exploration_from_string(const std::string& s) {
    if (s == "protocol" || s == "protocol_oriented") return Exploration::ProtocolOriented;
    if (s == "agent" || s == "agent_oriented") return Exploration::AgentOriented;
    throw ParseError("unknown exploration mode '" + s + "'");
}

std::optional<std::string> next_vector(const CandidateMatrix& m, Exploration mode,
                                       const std::set<std::string>& explored) {
    const auto& ids = mode == Exploration::ProtocolOriented ? m.protocols : m.agents;
    std::optional<std::string> best;
    std::size_t best_count = 0;
    for (const auto& id : ids) {
        if (explored.count(id)) continue;
        const auto count =
            mode == Exploration::ProtocolOriented ? m.row(id).size() : m.column(id).size();
        if (count == 0) continue;
        if (!best || count > best_count || (count == best_count && id < *best)) {
            best = id;
            best_count = count;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Payloads and outcomes

bool valid_payload(const Payload& p) {
    if (p.empty()) return false;
    std::set<RoleRef> seen(p.begin(), p.end());
    return seen.size() == p.size();
}

Content payload_to_json(const Payload& p) {
    Content j = Content::array();
    for (const auto& r : p) j.push_back(r.str());
    return j;
}

Payload payload_from_json(const Content& j) {
    if (!j.is_array()) throw ParseError("ready-to-select content must be a list of roles");
    Payload p;
    for (const auto& e : j) {
        if (!e.is_string()) throw ParseError("ready-to-select entries must be role references");
        p.push_back(RoleRef::parse(e.get<std::string>()));
    }
    if (!valid_payload(p)) throw ParseError("ready-to-select list must be nonempty and duplicate-free");
    return p;
}

std::map<AgentId, std::vector<RoleRef>> OneNSolution::roles_by_agent() const {
    std::map<AgentId, std::vector<RoleRef>> out;
    for (const auto& [role, agent] : assignment) out[agent].push_back({protocol, role});
    return out;
}

bool is_solution(const JointOutcome& o) { return !std::holds_alternative<Failure>(o); }

Content outcome_to_json(const JointOutcome& o) {
    struct Visitor {
        Content operator()(const OneOneSolution& s) const {
            return {{"kind", "1-1"}, {"agent", s.agent}, {"protocol", s.protocol},
                    {"role", s.role.str()}};
        }
        Content operator()(const OneOneNSolution& s) const {
            return {{"kind", "1-1^N"}, {"agents", s.agents}, {"protocol", s.protocol},
                    {"role", s.role.str()}};
        }
        Content operator()(const OneNSolution& s) const {
            return {{"kind", "1-N"}, {"agents", s.agents}, {"protocol", s.protocol},
                    {"assignment", s.assignment}};
        }
        Content operator()(const Failure& f) const {
            return {{"kind", "failure"}, {"reason", f.reason}};
        }
    };
    return std::visit(Visitor{}, o);
}

bool outcome_respects_payloads(const JointOutcome& o, const std::map<AgentId, Payload>& replies) {
    auto offered = [&](const AgentId& a, const RoleRef& r) {
        auto it = replies.find(a);
        return it != replies.end() &&
               std::find(it->second.begin(), it->second.end(), r) != it->second.end();
    };
    if (const auto* s = std::get_if<OneOneSolution>(&o)) return offered(s->agent, s->role);
    if (const auto* s = std::get_if<OneOneNSolution>(&o)) {
        return std::all_of(s->agents.begin(), s->agents.end(),
                           [&](const auto& a) { return offered(a, s->role); });
    }
    if (const auto* s = std::get_if<OneNSolution>(&o)) {
        return std::all_of(s->assignment.begin(), s->assignment.end(), [&](const auto& kv) {
            return offered(kv.second, RoleRef{s->protocol, kv.first});
        });
    }
    return true;
}

// ---------------------------------------------------------------------------
// Largest set

namespace {

using AgentSet = std::set<AgentId>;

AgentSet minus(const AgentSet& a, const AgentSet& b) {
    AgentSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

std::size_t intersection_size(const AgentSet& a, const AgentSet& b) {
    std::size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
}

// dif of each role against the union of the other roles at the same index.
std::map<RoleRef, AgentSet> dif_sets(const std::vector<RoleRef>& roles,
                                     const std::map<RoleRef, AgentSet>& cand) {
    std::map<RoleRef, AgentSet> out;
    for (const auto& r : roles) {
        AgentSet others;
        for (const auto& s : roles) {
            if (s != r) others.insert(cand.at(s).begin(), cand.at(s).end());
        }
        out[r] = minus(cand.at(r), others);
    }
    return out;
}

}  // namespace

std::optional<LargestSet> select_largest_set(const std::map<AgentId, Payload>& replies,
                                             const std::set<std::string>& identified_protocols) {
    std::map<RoleRef, AgentSet> cand;
    std::size_t n = 0;
    for (const auto& [agent, payload] : replies) {
        bool any = false;
        for (const auto& r : payload) {
            if (!identified_protocols.count(r.protocol)) continue;
            cand[r].insert(agent);
            any = true;
        }
        if (any) ++n;
    }
    if (n == 0) return std::nullopt;

    for (const auto& [role, agents] : cand) {
        if (agents.size() == n) return LargestSet{role, agents};
    }

    std::map<std::size_t, std::vector<RoleRef>> index;
    for (const auto& [role, agents] : cand) index[agents.size()].push_back(role);

    struct Saved {
        std::vector<RoleRef> roles;
        std::map<RoleRef, AgentSet> dif;
    };
    std::optional<Saved> saved;

    for (auto i = n - 1; i >= 1; --i) {
        auto it = index.find(i);
        if (it == index.end()) continue;
        const auto& roles = it->second;  // sorted: map iteration order

        std::optional<RoleRef> decision;
        const bool all_equal = std::all_of(roles.begin(), roles.end(), [&](const RoleRef& r) {
            return cand.at(r) == cand.at(roles.front());
        });
        if (all_equal) {
            decision = roles.front();
        } else {
            const auto dif = dif_sets(roles, cand);
            std::size_t best = 0;
            std::vector<RoleRef> top;
            for (const auto& r : roles) {
                const auto size = dif.at(r).size();
                if (top.empty() || size > best) {
                    best = size;
                    top = {r};
                } else if (size == best) {
                    top.push_back(r);
                }
            }
            if (top.size() == 1) {
                decision = top.front();
            } else if (!saved) {
                saved = Saved{roles, dif};
            }
        }
        if (!decision) continue;
        if (!saved) return LargestSet{*decision, cand.at(*decision)};

        const auto& current = cand.at(*decision);
        const RoleRef* pick = nullptr;
        std::size_t best = 0;
        for (const auto& r : saved->roles) {
            const auto overlap = intersection_size(cand.at(r), current);
            if (!pick || overlap > best) {
                pick = &r;
                best = overlap;
            }
        }
        return LargestSet{*pick, cand.at(*pick)};
    }

    if (saved) {
        const RoleRef* pick = nullptr;
        std::size_t best = 0;
        for (const auto& r : saved->roles) {
            const auto size = saved->dif.at(r).size();
            if (!pick || size > best) {
                pick = &r;
                best = size;
            }
        }
        return LargestSet{*pick, cand.at(*pick)};
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// 1-N trees

std::vector<std::string> breadth_first_roles(const Protocol& p) {
    const auto fathers = father_relation(p);
    std::map<std::string, std::vector<std::string>> children;
    std::vector<std::string> orphans;
    for (const auto* r : p.participants()) {
        const auto& f = fathers.at(r->role_id);
        if (f) {
            children[*f].push_back(r->role_id);
        } else {
            orphans.push_back(r->role_id);
        }
    }
    for (auto& [_, kids] : children) std::sort(kids.begin(), kids.end());

    std::vector<std::string> order;
    std::vector<std::string> frontier;
    if (const auto* init = p.initiator()) frontier.push_back(init->role_id);
    std::sort(orphans.begin(), orphans.end());
    frontier.insert(frontier.end(), orphans.begin(), orphans.end());
    std::set<std::string> seen(frontier.begin(), frontier.end());
    for (std::size_t k = 0; k < frontier.size(); ++k) {
        const auto& node = frontier[k];
        if (p.find_role(node) && p.find_role(node)->kind == RoleKind::Participant) {
            order.push_back(node);
        }
        for (const auto& kid : children[node]) {
            if (seen.insert(kid).second) frontier.push_back(kid);
        }
    }
    return order;
}

namespace {

// Kuhn's augmenting paths: can every role in `roles` get a distinct agent?
bool injective_completion(const std::vector<std::string>& roles,
                          const std::map<std::string, AgentSet>& cand, const AgentSet& used) {
    std::map<AgentId, std::string> owner;
    std::function<bool(const std::string&, std::set<AgentId>&)> augment =
        [&](const std::string& role, std::set<AgentId>& visited) {
            for (const auto& a : cand.at(role)) {
                if (used.count(a) || !visited.insert(a).second) continue;
                auto it = owner.find(a);
                if (it == owner.end() || augment(it->second, visited)) {
                    owner[a] = role;
                    return true;
                }
            }
            return false;
        };
    for (const auto& r : roles) {
        std::set<AgentId> visited;
        if (!augment(r, visited)) return false;
    }
    return true;
}

}  // namespace

std::optional<TreeAssignment> assign_tree(const Protocol& p,
                                          const std::map<AgentId, Payload>& replies, Rng& rng) {
    const auto order = breadth_first_roles(p);
    std::map<std::string, AgentSet> cand;
    for (const auto& role : order) {
        const RoleRef ref{p.protocol_id, role};
        auto& set = cand[role];
        for (const auto& [agent, payload] : replies) {
            if (std::find(payload.begin(), payload.end(), ref) != payload.end()) set.insert(agent);
        }
        if (set.empty()) return std::nullopt;
    }

    TreeAssignment out;
    out.protocol = p.protocol_id;
    std::set<std::pair<std::string, std::string>> conflicts;

    auto strip = [&](const AgentId& agent, const std::string& keep) {
        bool changed = false;
        for (auto& [role, set] : cand) {
            if (role == keep || out.assignment.count(role) || !set.count(agent)) continue;
            if (set.size() > 1) {
                set.erase(agent);
                changed = true;
            } else {
                conflicts.insert(std::minmax(role, keep));
            }
        }
        return changed;
    };
    auto propagate = [&] {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& role : order) {
                if (out.assignment.count(role) || cand[role].size() != 1) continue;
                changed = strip(*cand[role].begin(), role) || changed;
            }
        }
    };

    propagate();
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& role = order[k];
        AgentSet used;
        for (const auto& [_, a] : out.assignment) used.insert(a);
        const std::vector<std::string> rest(order.begin() + static_cast<long>(k) + 1, order.end());

        std::vector<AgentId> feasible;
        for (const auto& a : cand[role]) {
            if (used.count(a)) continue;
            auto with = used;
            with.insert(a);
            if (injective_completion(rest, cand, with)) feasible.push_back(a);
        }
        const std::vector<AgentId> pool =
            feasible.empty() ? std::vector<AgentId>(cand[role].begin(), cand[role].end()) : feasible;
        const AgentId pick = pool.size() == 1 ? pool.front() : rng.pick(pool);
        out.assignment[role] = pick;
        cand[role] = {pick};
        strip(pick, role);
        propagate();
    }

    std::map<AgentId, int> load;
    for (const auto& [_, a] : out.assignment) ++load[a];
    for (const auto& [_, n] : load) out.multi_role_agents += n > 1 ? 1 : 0;
    out.singleton_conflicts = conflicts.size();
    return out;
}

std::optional<OneNSolution> assign_roles_1_N(const std::map<AgentId, Payload>& replies,
                                             const std::vector<const Protocol*>& protocols,
                                             Rng& rng) {
    auto sorted = protocols;
    std::sort(sorted.begin(), sorted.end(),
              [](const Protocol* a, const Protocol* b) { return a->protocol_id < b->protocol_id; });
    std::optional<TreeAssignment> best;
    for (const auto* p : sorted) {
        auto tree = assign_tree(*p, replies, rng);
        if (!tree) continue;
        if (!best || std::tie(tree->multi_role_agents, tree->singleton_conflicts) <
                         std::tie(best->multi_role_agents, best->singleton_conflicts)) {
            best = std::move(tree);
        }
    }
    if (!best) return std::nullopt;
    OneNSolution s;
    s.protocol = best->protocol;
    s.assignment = best->assignment;
    for (const auto& [_, a] : s.assignment) s.agents.insert(a);
    return s;
}

// ---------------------------------------------------------------------------
// Participant meta-protocol

Payload offerable_roles(const std::string& protocol, const InteractionModel& model,
                        const CompatibilityTable& table, const ProtocolRegistry& registry) {
    Payload out;
    const auto* named = registry.find(protocol);
    const auto* init = named ? named->initiator() : nullptr;
    for (const auto& ref : model.roles()) {
        const auto* p = registry.find(ref.protocol);
        const auto* r = p ? p->find_role(ref.role) : nullptr;
        if (!r || r->kind != RoleKind::Participant) continue;
        const bool same = ref.protocol == protocol;
        const bool compat =
            init && table.pairs().count({RoleRef{protocol, init->role_id}, ref}) > 0;
        if ((same || compat) && std::find(out.begin(), out.end(), ref) == out.end()) {
            out.push_back(ref);
        }
    }
    return out;
}

namespace {

Message reply_to(const Message& in, const std::string& perf, Content content) {
    Message m;
    m.performative.name = perf;
    m.content = std::move(content);
    m.language = in.language;
    m.ontology = in.ontology;
    m.receiver = in.sender;
    m.conversation_id = in.conversation_id;
    m.in_reply_to = in.reply_with;
    return m;
}

using Phase = ParticipantMetaState::Phase;

std::string phase_name(Phase p) {
    switch (p) {
        case Phase::Idle: return "idle";
        case Phase::Offered: return "offered";
        case Phase::Declined: return "declined";
        case Phase::Assigned: return "assigned";
        case Phase::Stopped: return "stopped";
    }
    return "idle";
}

[[noreturn]] void violation(const Message& m, Phase p) {
    throw ProtocolViolation("'" + m.performative.name + "' is not allowed while " + phase_name(p));
}

}  // namespace

MetaStep participant_meta_step(ParticipantMetaState state, const Message& incoming,
                               const InteractionModel& model, const CompatibilityTable& table,
                               const ProtocolRegistry& registry, const Willingness& willingness) {
    using namespace performatives;
    const auto& perf = incoming.performative.name;
    MetaStep step;

    if (perf == kCallForCollaboration) {
        if (state.phase != Phase::Idle) violation(incoming, state.phase);
        const auto& c = incoming.content;
        const bool well_formed = c.is_object() && c.contains("protocol") &&
                                 c["protocol"].is_string() && c.contains("task") &&
                                 c["task"].is_string();
        Payload offered;
        if (well_formed) {
            state.protocol = c["protocol"].get<std::string>();
            state.task_id = c["task"].get<std::string>();
            if (registry.find(state.protocol) && willingness.accepts(state.protocol)) {
                offered = offerable_roles(state.protocol, model, table, registry);
            }
        }
        if (offered.empty()) {
            state.phase = Phase::Declined;
            step.outgoing = reply_to(incoming, kUnableToSelect,
                                     {{"reason", well_formed ? "declined" : "malformed"}});
        } else {
            state.phase = Phase::Offered;
            state.offered = offered;
            step.outgoing = reply_to(incoming, kReadyToSelect, payload_to_json(offered));
        }
    } else if (perf == kNotifyAssignment) {
        if (state.phase != Phase::Offered) violation(incoming, state.phase);
        std::vector<RoleRef> roles;
        try {
            roles.push_back(RoleRef::parse(incoming.content.at("role").get<std::string>()));
            for (const auto& extra : incoming.content.value("additional_roles", Content::array())) {
                roles.push_back(RoleRef::parse(extra.get<std::string>()));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolViolation(std::string("malformed notify-assignment: ") + e.what());
        } catch (const ParseError& e) {
            throw ProtocolViolation(std::string("malformed notify-assignment: ") + e.what());
        }
        for (const auto& r : roles) {
            if (std::find(state.offered.begin(), state.offered.end(), r) == state.offered.end()) {
                throw ProtocolViolation("assigned role '" + r.str() + "' was never offered");
            }
        }
        state.phase = Phase::Assigned;
        state.assigned = roles;
    } else if (perf == kStopSelection) {
        if (state.phase != Phase::Offered && state.phase != Phase::Declined) {
            violation(incoming, state.phase);
        }
        state.phase = Phase::Stopped;
    } else {
        violation(incoming, state.phase);
    }
    step.state = std::move(state);
    return step;
}

// ---------------------------------------------------------------------------
// Initiator session

namespace {
constexpr const char* kLanguage = "selection";
constexpr const char* kOntology = "meta-protocol";
}  // namespace

JointInitiatorSession::JointInitiatorSession(const ProtocolRegistry& registry,
                                             JointInitiatorConfig config, OutcomeSink* sink)
    : registry_(registry), config_(std::move(config)), sink_(sink) {}

void JointInitiatorSession::start(sim::AgentContext& ctx) {
    std::map<ProtocolCategory, std::vector<ProtocolCandidate>> by_category;
    Content skipped = Content::array();
    for (const auto& c : config_.candidates) {
        try {
            by_category[classify_protocol(registry_.at(c.protocol_id))].push_back(c);
        } catch (const CompositeProtocol& e) {
            skipped.push_back({{"protocol", c.protocol_id}, {"reason", e.what()}});
        }
    }
    Content groups = Content::object();
    for (auto cat : {ProtocolCategory::OneOne, ProtocolCategory::OneOneN, ProtocolCategory::OneN}) {
        auto it = by_category.find(cat);
        if (it == by_category.end()) continue;
        groups_.emplace_back(cat, it->second);
        Content ids = Content::array();
        for (const auto& c : it->second) ids.push_back(c.protocol_id);
        groups[to_string(cat)] = ids;
    }
    if (sink_) (*sink_)[config_.task_id].task_id = config_.task_id;
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "candidates"},
                                          {"groups", groups},
                                          {"skipped", skipped}});
    next_group(ctx);
}

std::set<std::string> JointInitiatorSession::group_protocols() const {
    std::set<std::string> out;
    if (group_ >= groups_.size()) return out;
    for (const auto& c : groups_[group_].second) {
        auto it = config_.identified.find(c.protocol_id);
        if (it != config_.identified.end() && !it->second.empty()) out.insert(c.protocol_id);
    }
    return out;
}

void JointInitiatorSession::next_group(sim::AgentContext& ctx) {
    if (group_ >= groups_.size()) {
        finish(Failure{"no more protocol and participant to explore"}, ctx);
        return;
    }
    const auto& [category, candidates] = groups_[group_];
    std::map<std::string, std::set<AgentId>> identified;
    for (const auto& c : candidates) {
        auto it = config_.identified.find(c.protocol_id);
        if (it != config_.identified.end()) identified[c.protocol_id] = it->second;
    }
    matrix_ = build_candidate_matrix(candidates, identified, config_.potential_participants);
    explored_.clear();

    Content cells = Content::array();
    for (const auto& [p, a] : matrix_.cells) cells.push_back({p, a});
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "matrix"},
                                          {"category", to_string(category)},
                                          {"protocols", matrix_.protocols},
                                          {"agents", matrix_.agents},
                                          {"cells", cells}});
    next_vector_step(ctx);
}

void JointInitiatorSession::next_vector_step(sim::AgentContext& ctx) {
    const auto category = groups_[group_].first;
    const auto mode = category == ProtocolCategory::OneOne ? config_.exploration
                                                           : Exploration::ProtocolOriented;
    const auto v = next_vector(matrix_, mode, explored_);
    if (!v) {
        ++group_;
        next_group(ctx);
        return;
    }
    explored_.insert(*v);
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "explore"},
                                          {"mode", to_string(mode)},
                                          {"vector", *v}});
    if (category != ProtocolCategory::OneOne) {
        broadcast(*v, ctx);
        return;
    }
    queue_.clear();
    auto contact = [&](const std::string& p, const AgentId& a) {
        queue_.push_back({p, a, config_.task_id + "/select/" + p + "/" + a});
    };
    if (mode == Exploration::ProtocolOriented) {
        for (const auto& a : matrix_.row(*v)) contact(*v, a);
    } else {
        for (const auto& p : matrix_.column(*v)) contact(p, *v);
    }
    contact_next(ctx);
}

bool JointInitiatorSession::send(const std::string& perf, Content content, Contact& c,
                                 const std::optional<std::string>& in_reply_to,
                                 sim::AgentContext& ctx) {
    Message m;
    m.performative.name = perf;
    m.content = std::move(content);
    m.language = kLanguage;
    m.ontology = kOntology;
    m.receiver = c.agent;
    m.conversation_id = c.conversation;
    m.in_reply_to = in_reply_to;
    m.reply_with = ctx.next_message_id();
    try {
        ctx.send(std::move(m));
    } catch (const TransportDown&) {
        finish(Failure{"transport"}, ctx);
        return false;
    }
    ++pair_counts_[{c.protocol, c.agent}];
    if (perf == performatives::kStopSelection || perf == performatives::kNotifyAssignment) {
        c.closed = true;
    }
    return true;
}

void JointInitiatorSession::contact_next(sim::AgentContext& ctx) {
    if (outcome_) return;
    pending_.clear();
    if (queue_.empty()) {
        next_vector_step(ctx);
        return;
    }
    pending_.push_back(queue_.front());
    queue_.erase(queue_.begin());
    ++round_;
    auto& c = pending_.front();
    if (!send(performatives::kCallForCollaboration,
              {{"protocol", c.protocol}, {"task", config_.task_id}}, c, std::nullopt, ctx)) {
        return;
    }
    ctx.set_timer(ctx.reply_deadline(), config_.task_id + "|" + std::to_string(round_));
}

void JointInitiatorSession::broadcast(const std::string& protocol, sim::AgentContext& ctx) {
    ++round_;
    pending_.clear();
    replies_.clear();
    for (const auto& a : matrix_.row(protocol)) {
        pending_.push_back({protocol, a, config_.task_id + "/select/" + protocol + "/" + a});
    }
    for (auto& c : pending_) {
        if (!send(performatives::kCallForCollaboration,
                  {{"protocol", c.protocol}, {"task", config_.task_id}}, c, std::nullopt, ctx)) {
            return;
        }
    }
    ctx.set_timer(ctx.reply_deadline(), config_.task_id + "|" + std::to_string(round_));
}

void JointInitiatorSession::on_timer(const std::string& token, sim::AgentContext& ctx) {
    if (outcome_) return;
    const auto bar = token.rfind('|');
    if (bar == std::string::npos || token.substr(bar + 1) != std::to_string(round_)) return;
    for (auto& c : pending_) {
        if (c.answered) continue;
        ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                              {"phase", "timeout"},
                                              {"protocol", c.protocol},
                                              {"agent", c.agent}});
        if (!send(performatives::kStopSelection, {{"reason", "deadline"}}, c, std::nullopt, ctx)) {
            return;
        }
    }
    if (groups_[group_].first == ProtocolCategory::OneOne) {
        contact_next(ctx);
    } else {
        arbitrate(ctx);
    }
}

void JointInitiatorSession::on_message(const Message& msg, sim::AgentContext& ctx) {
    if (outcome_) return;
    auto it = std::find_if(pending_.begin(), pending_.end(), [&](const Contact& c) {
        return c.conversation == msg.conversation_id && c.agent == msg.sender && !c.answered &&
               !c.closed;
    });
    if (it == pending_.end()) return;
    it->answered = true;
    ++pair_counts_[{it->protocol, it->agent}];

    if (groups_[group_].first == ProtocolCategory::OneOne) {
        handle_reply_1_1(*it, msg, ctx);
        return;
    }
    if (msg.performative.name == performatives::kReadyToSelect) {
        try {
            replies_[msg.sender] = payload_from_json(msg.content);
        } catch (const ParseError&) {
        }
    }
    const bool all = std::all_of(pending_.begin(), pending_.end(),
                                 [](const Contact& c) { return c.answered || c.closed; });
    if (all) arbitrate(ctx);
}

void JointInitiatorSession::handle_reply_1_1(Contact& c, const Message& msg,
                                             sim::AgentContext& ctx) {
    if (msg.performative.name == performatives::kReadyToSelect) {
        Payload payload;
        try {
            payload = payload_from_json(msg.content);
        } catch (const ParseError&) {
        }
        const auto allowed = group_protocols();
        for (const auto& r : payload) {
            if (!allowed.count(r.protocol)) continue;
            const auto* p = registry_.find(r.protocol);
            const auto* role = p ? p->find_role(r.role) : nullptr;
            if (!role || role->kind != RoleKind::Participant) continue;
            if (!send(performatives::kNotifyAssignment, {{"role", r.str()}}, c, msg.reply_with,
                      ctx)) {
                return;
            }
            finish(OneOneSolution{c.agent, r.protocol, r}, ctx);
            return;
        }
    }
    if (!send(performatives::kStopSelection, {{"reason", "no acceptable role"}}, c, msg.reply_with,
              ctx)) {
        return;
    }
    contact_next(ctx);
}

void JointInitiatorSession::arbitrate(sim::AgentContext& ctx) {
    ++round_;
    const auto category = groups_[group_].first;
    const auto allowed = group_protocols();
    std::map<AgentId, std::vector<RoleRef>> notify;
    std::optional<JointOutcome> result;

    if (category == ProtocolCategory::OneOneN) {
        if (auto best = select_largest_set(replies_, allowed)) {
            for (const auto& a : best->second) notify[a] = {best->first};
            result = OneOneNSolution{best->second, best->first.protocol, best->first};
        }
    } else {
        std::vector<const Protocol*> protocols;
        for (const auto& id : allowed) protocols.push_back(&registry_.at(id));
        if (auto best = assign_roles_1_N(replies_, protocols, ctx.rng())) {
            notify = best->roles_by_agent();
            result = *best;
        }
    }
    Content replies = Content::object();
    for (const auto& [a, p] : replies_) replies[a] = payload_to_json(p);
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "arbitrate"},
                                          {"category", to_string(category)},
                                          {"replies", replies},
                                          {"decided", result.has_value()}});

    for (auto& c : pending_) {
        if (c.closed) continue;
        auto it = notify.find(c.agent);
        if (it != notify.end()) {
            Content content = {{"role", it->second.front().str()}};
            if (it->second.size() > 1) {
                Content extra = Content::array();
                for (std::size_t k = 1; k < it->second.size(); ++k) {
                    extra.push_back(it->second[k].str());
                }
                content["additional_roles"] = extra;
            }
            if (!send(performatives::kNotifyAssignment, content, c, std::nullopt, ctx)) return;
        } else if (!send(performatives::kStopSelection, {{"reason", "not selected"}}, c,
                         std::nullopt, ctx)) {
            return;
        }
    }
    if (result) {
        finish(*result, ctx);
    } else {
        next_vector_step(ctx);
    }
}

void JointInitiatorSession::finish(JointOutcome outcome, sim::AgentContext& ctx) {
    if (outcome_) return;
    outcome_ = outcome;
    pending_.clear();
    queue_.clear();
    const bool ok = is_solution(outcome);
    if (sink_) {
        auto& out = (*sink_)[config_.task_id];
        out.task_id = config_.task_id;
        out.status = ok ? TaskStatus::Succeeded : TaskStatus::Failed;
        if (const auto* s = std::get_if<OneOneSolution>(&outcome)) {
            out.protocol = s->protocol;
            out.assignment[s->agent] = s->role.str();
        } else if (const auto* s = std::get_if<OneOneNSolution>(&outcome)) {
            out.protocol = s->protocol;
            for (const auto& a : s->agents) out.assignment[a] = s->role.str();
        } else if (const auto* s = std::get_if<OneNSolution>(&outcome)) {
            out.protocol = s->protocol;
            for (const auto& [a, roles] : s->roles_by_agent()) {
                std::string text;
                for (const auto& r : roles) text += (text.empty() ? "" : ",") + r.str();
                out.assignment[a] = text;
            }
        } else {
            out.reason = std::get<Failure>(outcome).reason;
        }
    }
    ctx.trace(sim::TraceKind::Selection, {{"task", config_.task_id},
                                          {"phase", "outcome"},
                                          {"outcome", outcome_to_json(outcome)}});
    ctx.trace(sim::TraceKind::Termination,
              {{"task", config_.task_id},
               {"side", "initiator"},
               {"status", ok ? "succeeded" : "failed"},
               {"reason", ok ? "selected" : std::get<Failure>(outcome).reason}});
}

// ---------------------------------------------------------------------------
// Participant session

JointParticipantSession::JointParticipantSession(const ProtocolRegistry& registry,
                                                 JointParticipantConfig config, OutcomeSink* sink)
    : registry_(registry), config_(std::move(config)), sink_(sink) {}

void JointParticipantSession::on_message(const Message& msg, sim::AgentContext& ctx) {
    if (config_.willingness.mute) return;
    static const CompatibilityTable kEmpty;
    MetaStep step;
    try {
        step = participant_meta_step(state_, msg, config_.model,
                                     config_.table ? *config_.table : kEmpty, registry_,
                                     config_.willingness);
    } catch (const ProtocolViolation& e) {
        ctx.trace(sim::TraceKind::Selection, {{"phase", "violation"},
                                              {"conversation_id", msg.conversation_id},
                                              {"error", e.what()}});
        return;
    }
    const bool newly_assigned = step.state.phase == ParticipantMetaState::Phase::Assigned &&
                                state_.phase != ParticipantMetaState::Phase::Assigned;
    state_ = std::move(step.state);
    if (step.outgoing) {
        step.outgoing->reply_with = ctx.next_message_id();
        ctx.send(std::move(*step.outgoing));
    }
    if (newly_assigned) {
        Content roles = Content::array();
        for (const auto& r : state_.assigned) roles.push_back(r.str());
        ctx.trace(sim::TraceKind::Selection, {{"task", state_.task_id},
                                              {"phase", "assigned"},
                                              {"roles", roles},
                                              {"conversation_id", msg.conversation_id}});
        ctx.trace(sim::TraceKind::Termination, {{"task", state_.task_id},
                                                {"side", "participant"},
                                                {"reason", "assigned"},
                                                {"conversation_id", msg.conversation_id}});
    }
    (void)sink_;
}

}  // namespace protosel::joint
