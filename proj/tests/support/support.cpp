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

#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "protosel/protocol_io.hpp"

namespace protosel::testsupport {

std::filesystem::path fixture_path(const std::string& relative) {
    return std::filesystem::path(PROTOSEL_FIXTURE_DIR) / relative;
}

std::filesystem::path golden_path(const std::string& name) {
    return std::filesystem::path(PROTOSEL_GOLDEN_DIR) / name;
}

ProtocolRegistry fixture_registry() {
    ProtocolRegistry r;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(fixture_path("protocols"))) {
        if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) r.add(load_protocol_file(f));
    return r;
}

scenario::Scenario load_scenario(const std::string& name) {
    return scenario::parse_scenario(fixture_path("scenarios/" + name + ".json"));
}

std::vector<std::string> scenario_names() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(fixture_path("scenarios"))) {
        if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::vector<sim::TraceEvent> events_of(const std::vector<sim::TraceEvent>& trace,
                                       sim::TraceKind kind) {
    std::vector<sim::TraceEvent> out;
    std::copy_if(trace.begin(), trace.end(), std::back_inserter(out),
                 [kind](const sim::TraceEvent& e) { return e.kind == kind; });
    return out;
}

std::vector<std::string> performatives_sent(const std::vector<sim::TraceEvent>& trace) {
    std::vector<std::string> out;
    for (const auto& e : events_of(trace, sim::TraceKind::Send)) {
        out.push_back(e.payload.at("performative").get<std::string>());
    }
    return out;
}

}  // namespace protosel::testsupport
