// SPDX-License-Identifier: Apache-2.0
//
// agsim: link-level simulator for multiuser air-ground uplinks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Command-line driver: simulate --config <path> [--workers N] [--seed S]

#include "agsim/config.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

namespace
{

// Channel matrices of trial 0 at the first pilot symbol and at every grid
// point, for offline inspection.
void dump_trace(const agsim::TrialConfig &trial, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open trace file '" + path + "'");
    const agsim::World world0 = agsim::build_trial_world(trial, 0);
    out << "n,m,k,re,im\n";
    agsim::write_channel_trace(out, agsim::channel_matrix(world0, 0), false);
    for (double t : trial.elapsed_grid)
    {
        const auto n = static_cast<std::int64_t>(std::llround(t / trial.params.symbol_duration));
        if (n == 0)
            continue;
        agsim::write_channel_trace(out, agsim::channel_matrix(agsim::advance_world(world0, n), n), false);
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Monte Carlo outage simulator for multiuser air-ground uplinks"};

    std::string config_path;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::uint64_t seed = 0;
    std::string trace_path;

    app.add_option("--config", config_path, "Configuration file")->required();
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    auto *seed_opt = app.add_option("--seed", seed, "Master seed (overrides AGSIM_SEED and the config)");
    app.add_option("--trace", trace_path, "Write channel coefficients of trial 0 as CSV");

    CLI11_PARSE(app, argc, argv);

    agsim::RunConfig config;
    try
    {
        config = agsim::load_config(config_path);
        if (seed_opt->count() > 0)
            config.trial.master_seed = seed;
        else if (const char *env = std::getenv("AGSIM_SEED"))
        {
            char *end = nullptr;
            config.trial.master_seed = std::strtoull(env, &end, 10);
            if (end == env || *end != '\0')
                throw agsim::ConfigurationError(std::string("AGSIM_SEED is not an integer: ") + env);
        }
        if (!trace_path.empty())
            dump_trace(config.trial, trace_path);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return agsim::run(config, workers, std::cout);
}
