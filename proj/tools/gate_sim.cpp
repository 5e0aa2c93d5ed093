// Copyright 2026 The hcz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hcz/config.hpp"
#include "hcz/runner.hpp"

int main(int argc, char **argv) {
    CLI::App app{"gate_sim: heralded controlled-phase gate simulator"};
    std::string config_path;
    std::string output;
    unsigned jobs = 0;
    std::uint64_t seed = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "run configuration file")->required();
    auto *out_opt = app.add_option("--output", output, "output path (overrides the config)");
    auto *jobs_opt = app.add_option("--jobs", jobs, "worker threads (default: GATE_SIM_JOBS or 1)")
                         ->check(CLI::Range(1u, 1024u));
    auto *seed_opt = app.add_option("--seed", seed, "base seed (overrides the config)");
    app.add_flag("--quiet", quiet, "suppress progress output");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : hcz::kExitUsage;
    }

    hcz::RunConfig cfg;
    try {
        cfg = hcz::load_config(config_path);
    } catch (const std::exception &e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return hcz::kExitUsage;
    }
    if (*out_opt) cfg.output_path = output;
    if (*seed_opt) cfg.base_seed = seed;

    hcz::RunOptions opt;
    opt.quiet = quiet;
    opt.jobs = 1;
    if (*jobs_opt) {
        opt.jobs = jobs;
    } else if (const char *env = std::getenv("GATE_SIM_JOBS")) {
        try {
            long v = std::stol(env);
            if (v < 1 || v > 1024) throw std::out_of_range("GATE_SIM_JOBS");
            opt.jobs = static_cast<unsigned>(v);
        } catch (const std::exception &) {
            std::cerr << "GATE_SIM_JOBS must be an integer in [1, 1024]\n";
            return hcz::kExitUsage;
        }
    }
    return hcz::run(cfg, opt);
}
