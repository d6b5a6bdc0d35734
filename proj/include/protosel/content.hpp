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

#include <string>
#include <string_view>

#include "json.hpp"

namespace protosel {

// Message content is a tree of key/value objects and lists with string or
// number leaves.
using Content = nlohmann::json;

// A content pattern mirrors the content tree; any leaf may be a typed
// wildcard (`?string`, `?number`, `?any`) instead of a literal. `?any` also
// matches a whole subtree.
class ContentPattern {
public:
    ContentPattern() = default;
    explicit ContentPattern(Content tree);

    const Content& tree() const { return tree_; }

    // Returns an empty string when the pattern is well-formed, otherwise a
    // description of the first offending node.
    std::string validate() const;

    // Same object keys, same list lengths and leaf positions.
    bool shape_matches(const Content& value) const;
    // Leaf predicates; assumes shape_matches.
    bool content_matches(const Content& value) const;

    // A concrete value satisfying the pattern (wildcards get neutral values).
    Content instantiate() const;

    // Canonical text of the pattern's shape, leaves erased.
    std::string shape_key() const;
    std::string key() const { return tree_.dump(); }

    friend bool operator==(const ContentPattern& a, const ContentPattern& b) {
        return a.tree_ == b.tree_;
    }

private:
    Content tree_ = Content::object();
};

bool is_wildcard(const Content& leaf);

// Shape of a concrete value, with its leaves erased; equal for two values
// iff they have identical structure.
std::string shape_key(const Content& value);

}  // namespace protosel
