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

#include <filesystem>
#include <string>

#include "protosel/protocol.hpp"

namespace protosel {

// Protocol definition files. Throws ParseError with the offending path.
Protocol protocol_from_json(const Content& j);
Content protocol_to_json(const Protocol& p);
Protocol load_protocol_file(const std::filesystem::path& path);

// Human-readable listing of a protocol's role state machines.
std::string dump_protocol(const Protocol& p);

}  // namespace protosel
