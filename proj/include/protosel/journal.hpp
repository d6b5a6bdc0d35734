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

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "protosel/protocol.hpp"

namespace protosel {

struct MessageReception {
    Message message;
    friend bool operator==(const MessageReception&, const MessageReception&) = default;
};

struct MessageEmission {
    Message message;
    friend bool operator==(const MessageEmission&, const MessageEmission&) = default;
};

struct DataChange {
    std::string variable;
    Content value;
    friend bool operator==(const DataChange&, const DataChange&) = default;
};

using InputEvent = std::variant<MessageReception, DataChange>;
using OutputEvent = std::variant<MessageEmission, DataChange>;

inline bool is_message_input(const InputEvent& e) {
    return std::holds_alternative<MessageReception>(e);
}

struct JournalRecord {
    std::size_t seq = 0;  // 1-based position
    std::string method;
    InputEvent input;
    std::vector<OutputEvent> outputs;

    friend bool operator==(const JournalRecord&, const JournalRecord&) = default;
};

// Ordered log of executed methods for one agent in one conversation.
// Truncation only ever drops a suffix, so seq is always the 1-based index.
class Journal {
public:
    Journal() = default;
    Journal(AgentId owner, std::string conversation_id)
        : owner_(std::move(owner)), conversation_id_(std::move(conversation_id)) {}

    const JournalRecord& append(std::string method, InputEvent input,
                                std::vector<OutputEvent> outputs);
    // Keeps the first `count` records.
    void truncate(std::size_t count);

    const std::vector<JournalRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const JournalRecord& at(std::size_t seq) const { return records_.at(seq - 1); }
    const AgentId& owner() const { return owner_; }
    const std::string& conversation_id() const { return conversation_id_; }

    // Emitted messages, in order.
    std::vector<Message> emissions() const;
    // Record (seq) whose outputs contain the message with this reply-with id.
    std::size_t find_emission(const std::string& reply_with) const;

private:
    AgentId owner_;
    std::string conversation_id_;
    std::vector<JournalRecord> records_;
};

// `seq | method | input_kind(payload) | [output events]`, one line per record.
std::string dump_record(const JournalRecord& r);
std::string dump_journal(const Journal& j);

}  // namespace protosel
