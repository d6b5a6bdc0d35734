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

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "protosel/errors.hpp"
#include "protosel/protocol_io.hpp"
#include "protosel/scenario.hpp"

namespace {

using namespace protosel;

int run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& trace_path,
        const std::string& mode, std::optional<sim::Tick> max_ticks) {
    auto s = scenario::parse_scenario(path);
    if (seed) s.seed = *seed;
    if (!mode.empty()) s.mode = scenario::selection_mode_from_string(mode);
    if (max_ticks) s.max_ticks = *max_ticks;

    const auto result = scenario::run_scenario(s);
    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw ParseError(trace_path + ": cannot write trace");
        out << sim::to_jsonl(result.trace);
    }
    std::cout << scenario::summary_to_json(result.summary).dump(2) << '\n';
    return result.summary.all_succeeded() ? 0 : 1;
}

int validate(const std::string& path) {
    const auto s = scenario::parse_scenario(path);
    std::cout << path << ": ok (" << s.registry.all().size() << " protocols, " << s.agents.size()
              << " agents, " << s.tasks.size() << " tasks)\n";
    return 0;
}

int dump(const std::string& path) {
    const auto p = load_protocol_file(path);
    std::cout << dump_protocol(p);
    const auto report = validate_protocol(p);
    for (const auto& v : report) std::cout << "violation: " << v.element << ": " << v.message << '\n';
    return report.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Protocol selection simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string trace_path;
    std::string mode;
    std::optional<sim::Tick> max_ticks;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and print its summary");
    run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    run_cmd->add_option("--seed", seed, "Override the scenario seed");
    run_cmd->add_option("--trace", trace_path, "Write the JSON Lines trace here");
    run_cmd->add_option("--mode", mode, "Override the selection mode")
        ->check(CLI::IsMember({"joint", "seq", "mixed"}));
    run_cmd->add_option("--max-ticks", max_ticks, "Override the tick budget");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Parse and resolve a scenario");
    validate_cmd->add_option("scenario", validate_path, "Scenario file")->required();

    std::string protocol_path;
    auto* dump_cmd = app.add_subcommand("dump-protocol", "Print a protocol's role state machines");
    dump_cmd->add_option("file", protocol_path, "Protocol file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return run(scenario_path, seed, trace_path, mode, max_ticks);
        if (*validate_cmd) return validate(validate_path);
        if (*dump_cmd) return dump(protocol_path);
    } catch (const protosel::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
