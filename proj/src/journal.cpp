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

#include "protosel/journal.hpp"

#include "protosel/errors.hpp"

namespace protosel {
namespace {

std::string describe(const Message& m) {
    std::string s = m.performative.name;
    if (m.reply_with) s += " " + *m.reply_with;
    s += " " + m.content.dump();
    return s;
}

struct EventText {
    std::string operator()(const MessageReception& e) const {
        return "message(" + describe(e.message) + ")";
    }
    std::string operator()(const MessageEmission& e) const {
        return "emit(" + describe(e.message) + ")";
    }
    std::string operator()(const DataChange& e) const {
        return "data(" + e.variable + "=" + e.value.dump() + ")";
    }
};

}  // namespace

const JournalRecord& Journal::append(std::string method, InputEvent input,
                                     std::vector<OutputEvent> outputs) {
    records_.push_back({records_.size() + 1, std::move(method), std::move(input), std::move(outputs)});
    return records_.back();
}

void Journal::truncate(std::size_t count) {
    if (count > records_.size()) {
        throw PointOutOfRange("cannot keep " + std::to_string(count) + " of " +
                              std::to_string(records_.size()) + " records");
    }
    records_.resize(count);
}

std::vector<Message> Journal::emissions() const {
    std::vector<Message> out;
    for (const auto& r : records_) {
        for (const auto& o : r.outputs) {
            if (const auto* e = std::get_if<MessageEmission>(&o)) out.push_back(e->message);
        }
    }
    return out;
}

std::size_t Journal::find_emission(const std::string& reply_with) const {
    for (const auto& r : records_) {
        for (const auto& o : r.outputs) {
            if (const auto* e = std::get_if<MessageEmission>(&o);
                e && e->message.reply_with == reply_with) {
                return r.seq;
            }
        }
    }
    return 0;
}

std::string dump_record(const JournalRecord& r) {
    std::string line = std::to_string(r.seq) + " | " + r.method + " | " +
                       std::visit(EventText{}, r.input) + " | [";
    for (std::size_t i = 0; i < r.outputs.size(); ++i) {
        if (i) line += ", ";
        line += std::visit(EventText{}, r.outputs[i]);
    }
    line += "]";
    return line;
}

std::string dump_journal(const Journal& j) {
    std::string out;
    for (const auto& r : j.records()) {
        out += dump_record(r);
        out += '\n';
    }
    return out;
}

}  // namespace protosel
