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

#include "protosel/content.hpp"

namespace protosel {
namespace {

constexpr std::string_view kAnyString = "?string";
constexpr std::string_view kAnyNumber = "?number";
constexpr std::string_view kAny = "?any";

bool is_leaf(const Content& v) {
    return v.is_string() || v.is_number() || v.is_boolean() || v.is_null();
}

bool is_any(const Content& p) { return p.is_string() && p.get_ref<const std::string&>() == kAny; }

std::string validate_node(const Content& p, const std::string& path) {
    if (p.is_object()) {
        for (const auto& [k, v] : p.items()) {
            if (auto err = validate_node(v, path + "/" + k); !err.empty()) return err;
        }
        return {};
    }
    if (p.is_array()) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (auto err = validate_node(p[i], path + "/" + std::to_string(i)); !err.empty()) {
                return err;
            }
        }
        return {};
    }
    if (p.is_number()) return {};
    if (p.is_string()) {
        const auto& s = p.get_ref<const std::string&>();
        if (!s.empty() && s.front() == '?' && s != kAnyString && s != kAnyNumber && s != kAny) {
            return "unknown wildcard '" + s + "' at " + (path.empty() ? "/" : path);
        }
        return {};
    }
    return "unsupported leaf type at " + (path.empty() ? "/" : path);
}

bool shape_node(const Content& p, const Content& v) {
    if (is_any(p)) return true;
    if (p.is_object()) {
        if (!v.is_object() || v.size() != p.size()) return false;
        for (const auto& [k, sub] : p.items()) {
            auto it = v.find(k);
            if (it == v.end() || !shape_node(sub, *it)) return false;
        }
        return true;
    }
    if (p.is_array()) {
        if (!v.is_array() || v.size() != p.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!shape_node(p[i], v[i])) return false;
        }
        return true;
    }
    return is_leaf(v);
}

bool content_node(const Content& p, const Content& v) {
    if (is_any(p)) return true;
    if (p.is_object()) {
        for (const auto& [k, sub] : p.items()) {
            auto it = v.find(k);
            if (it == v.end() || !content_node(sub, *it)) return false;
        }
        return true;
    }
    if (p.is_array()) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!content_node(p[i], v[i])) return false;
        }
        return true;
    }
    if (p.is_string()) {
        const auto& s = p.get_ref<const std::string&>();
        if (s == kAnyString) return v.is_string();
        if (s == kAnyNumber) return v.is_number();
    }
    return p == v;
}

Content instantiate_node(const Content& p) {
    if (p.is_object()) {
        Content out = Content::object();
        for (const auto& [k, sub] : p.items()) out[k] = instantiate_node(sub);
        return out;
    }
    if (p.is_array()) {
        Content out = Content::array();
        for (const auto& sub : p) out.push_back(instantiate_node(sub));
        return out;
    }
    if (p.is_string()) {
        const auto& s = p.get_ref<const std::string&>();
        if (s == kAnyString || s == kAny) return "";
        if (s == kAnyNumber) return 0;
    }
    return p;
}

void shape_text(const Content& v, bool pattern, std::string& out) {
    if (v.is_object()) {
        out += '{';
        bool first = true;
        for (const auto& [k, sub] : v.items()) {
            if (!first) out += ',';
            first = false;
            out += k;
            out += ':';
            shape_text(sub, pattern, out);
        }
        out += '}';
    } else if (v.is_array()) {
        out += '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            shape_text(v[i], pattern, out);
        }
        out += ']';
    } else if (pattern && is_any(v)) {
        out += '*';
    } else {
        out += '_';
    }
}

}  // namespace

ContentPattern::ContentPattern(Content tree) : tree_(std::move(tree)) {}

std::string ContentPattern::validate() const { return validate_node(tree_, ""); }

bool ContentPattern::shape_matches(const Content& value) const { return shape_node(tree_, value); }

bool ContentPattern::content_matches(const Content& value) const {
    return shape_node(tree_, value) && content_node(tree_, value);
}

Content ContentPattern::instantiate() const { return instantiate_node(tree_); }

std::string ContentPattern::shape_key() const {
    std::string out;
    shape_text(tree_, true, out);
    return out;
}

bool is_wildcard(const Content& leaf) {
    if (!leaf.is_string()) return false;
    const auto& s = leaf.get_ref<const std::string&>();
    return s == kAnyString || s == kAnyNumber || s == kAny;
}

std::string shape_key(const Content& value) {
    std::string out;
    shape_text(value, false, out);
    return out;
}

}  // namespace protosel
