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
#include <vector>

#include "protosel/protocol.hpp"
#include "protosel/scenario.hpp"
#include "protosel/sim.hpp"

namespace protosel::testsupport {

std::filesystem::path fixture_path(const std::string& relative);
std::filesystem::path golden_path(const std::string& name);

// Every protocol under fixtures/protocols.
ProtocolRegistry fixture_registry();
scenario::Scenario load_scenario(const std::string& name);
std::vector<std::string> scenario_names();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

// Trace helpers.
std::vector<sim::TraceEvent> events_of(const std::vector<sim::TraceEvent>& trace,
                                       sim::TraceKind kind);
std::vector<std::string> performatives_sent(const std::vector<sim::TraceEvent>& trace);

}  // namespace protosel::testsupport
