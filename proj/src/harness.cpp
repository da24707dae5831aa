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

#include "agsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

namespace agsim
{

namespace
{
// Independent random streams inside one trial.
enum Stream : std::uint64_t
{
    kMapStream = 1,
    kScenarioStream = 2,
    kLateralStream = 3,
    kNoiseStream = 4
};

int count_outages(Detector detector, const EstimatedChannel &est, const std::optional<ZfDetector> &zf,
                  const ChannelMatrix &H, const CfoVector &cfo, const Eigen::VectorXd &phase,
                  const SystemParams &params)
{
    const int K = static_cast<int>(H.entries.cols());
    switch (detector)
    {
    case Detector::ZF:
        // A singular estimate leaves nothing to separate the aircraft with.
        if (!zf)
            return K;
        return zf_outage_set(zf_rates(*zf, H.entries, params), params.rate_threshold).size();
    case Detector::VMS:
        return vms_outage_set(est.entries, H.entries, cfo, H.time_index, params, phase).size();
    }
    return K;
}
} // namespace

std::vector<double> default_eta_sweep()
{
    return {1.0, 0.99, 0.98, 0.97, 0.96, 0.95, 0.94, 0.93, 0.92, 0.91, 0.9, 0.85, 0.8};
}

std::vector<double> default_elapsed_grid()
{
    return {0.006, 0.06, 0.24, 0.6, 1.14, 2.12, 3.62};
}

void TrialConfig::validate() const
{
    scenario.validate();
    params.validate();
    lmp.validate();
    if (K < 1)
        throw ConfigurationError("Number of aircraft must be at least 1.");
    if (K > params.M)
        throw ConfigurationError("Number of aircraft must not exceed the number of antennas.");
    if (trials < 1)
        throw ConfigurationError("Number of trials must be at least 1.");
    if (estimators.empty() || detectors.empty() || eta_values.empty() || elapsed_grid.empty())
        throw ConfigurationError("Estimator, detector, eta and elapsed-time lists must be non-empty.");
    for (double eta : eta_values)
        if (!(eta >= -1.0 && eta <= 1.0))
            throw ConfigurationError("CFO compensation accuracy must lie in [-1, 1].");
    if (!std::is_sorted(elapsed_grid.begin(), elapsed_grid.end()) || !(elapsed_grid.front() >= 0.0))
        throw ConfigurationError("Elapsed-time grid must be non-negative and sorted ascending.");
    if (!(gs_height >= 0.0))
        throw ConfigurationError("Ground-station antenna height must be non-negative.");
    if (!(reflector_coverage >= 0.0 && reflector_coverage <= 1.0))
        throw ConfigurationError("Reflector coverage must lie in [0, 1].");
}

std::size_t TrialConfig::cell_count() const
{
    return estimators.size() * detectors.size() * eta_values.size() * elapsed_grid.size();
}

std::size_t TrialConfig::cell_index(std::size_t estimator, std::size_t detector, std::size_t eta,
                                    std::size_t elapsed) const
{
    return ((estimator * detectors.size() + detector) * eta_values.size() + eta) * elapsed_grid.size() + elapsed;
}

const CellResult &Report::cell(Estimator e, Detector d, double eta, double elapsed) const
{
    for (const CellResult &c : cells)
        if (c.estimator == e && c.detector == d && std::abs(c.eta - eta) < 1e-12 &&
            std::abs(c.elapsed - elapsed) < 1e-12)
            return c;
    throw std::out_of_range("No such cell in the report.");
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = (master ^ index) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

World build_trial_world(const TrialConfig &config, std::int64_t trial_index)
{
    const std::uint64_t seed = trial_seed(config.master_seed, static_cast<std::uint64_t>(trial_index));
    Rng map_rng(trial_seed(seed, kMapStream));
    Rng scenario_rng(trial_seed(seed, kScenarioStream));
    Rng lateral_rng(trial_seed(seed, kLateralStream));

    auto map = std::make_shared<const ReflectorMap>(sample_reflector_map(config.reflector_coverage, map_rng));
    auto aircraft = sample_scenario(config.scenario, config.K, scenario_rng);
    auto reflectors = sample_lmp_reflectors(config.lmp, lateral_rng);

    World world = make_world(config.params, std::move(aircraft), std::move(map), std::move(reflectors), config.ground,
                             ground_station_position(config.gs_height));
    world.carrier_phase = config.carrier_phase;
    return world;
}

TrialRecord run_trial(const TrialConfig &config, std::int64_t trial_index)
{
    const SystemParams &params = config.params;
    const int K = config.K;
    const World world0 = build_trial_world(config, trial_index);
    const CfoVector cfo = cfo_vector(world0);

    // Channels are shared by every cell of the trial.
    std::map<std::int64_t, ChannelMatrix> cache;
    const ChannelSource source = [&](std::int64_t n) -> ChannelMatrix
    {
        auto it = cache.find(n);
        if (it == cache.end())
            it = cache.emplace(n, channel_matrix(n == 0 ? world0 : advance_world(world0, n), n)).first;
        return it->second;
    };

    Rng noise_rng(trial_seed(trial_seed(config.master_seed, static_cast<std::uint64_t>(trial_index)), kNoiseStream));
    const PilotNoise noise = draw_pilot_noise(params.M, K + 1, params.noise_power, noise_rng);
    const PilotMatrix pilots = zc_pilots(K);
    const bool want_zf = std::find(config.detectors.begin(), config.detectors.end(), Detector::ZF) !=
                         config.detectors.end();

    TrialRecord record;
    record.trial_index = trial_index;
    record.K = K;
    record.outages.assign(config.cell_count(), 0);

    for (std::size_t ie = 0; ie < config.eta_values.size(); ++ie)
    {
        const CfoCompensation comp = precompensate(cfo, config.eta_values[ie]);
        for (std::size_t is = 0; is < config.estimators.size(); ++is)
        {
            EstimatedChannel est;
            switch (config.estimators[is])
            {
            case Estimator::TD:
                est = estimate_td(source, comp, params, noise);
                break;
            case Estimator::ZC:
                est = estimate_zc(source, pilots, comp, params, noise);
                break;
            case Estimator::Perfect:
                est = estimate_perfect(source, cfo);
                break;
            }

            std::optional<ZfDetector> zf;
            if (want_zf)
            {
                try
                {
                    zf = zf_detector(est);
                }
                catch (const SingularMatrixError &)
                {
                }
            }

            const Eigen::VectorXd phase = estimate_phase(est, cfo, comp);
            const std::int64_t pilot_end = est.estimation_index + 1;
            for (std::size_t ig = 0; ig < config.elapsed_grid.size(); ++ig)
            {
                const std::int64_t n =
                    pilot_end + std::llround(config.elapsed_grid[ig] / params.symbol_duration);
                const ChannelMatrix H = source(n);
                for (std::size_t id = 0; id < config.detectors.size(); ++id)
                    record.outages[config.cell_index(is, id, ie, ig)] =
                        count_outages(config.detectors[id], est, zf, H, cfo, phase, params);
            }
        }
    }
    return record;
}

Report aggregate(const TrialConfig &config, std::span<const TrialRecord> records)
{
    if (records.empty())
        throw std::invalid_argument("aggregate() needs at least one trial record.");

    Report report;
    report.scenario = config.scenario.name;
    report.K = config.K;
    report.M = config.params.M;
    report.cells.resize(config.cell_count());

    for (std::size_t is = 0; is < config.estimators.size(); ++is)
        for (std::size_t id = 0; id < config.detectors.size(); ++id)
            for (std::size_t ie = 0; ie < config.eta_values.size(); ++ie)
                for (std::size_t ig = 0; ig < config.elapsed_grid.size(); ++ig)
                {
                    const std::size_t c = config.cell_index(is, id, ie, ig);
                    CellResult &cell = report.cells[c];
                    cell.estimator = config.estimators[is];
                    cell.detector = config.detectors[id];
                    cell.eta = config.eta_values[ie];
                    cell.elapsed = config.elapsed_grid[ig];
                    for (const TrialRecord &r : records)
                        cell.outages += r.outages.at(c);
                    cell.estimate =
                        outage_from_counts(cell.outages, static_cast<std::int64_t>(records.size()), config.K);
                }
    return report;
}

Report run_experiment(const TrialConfig &config, int workers)
{
    config.validate();
    const auto trials = static_cast<std::size_t>(config.trials);
    std::vector<TrialRecord> records(trials);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = trials;
    std::exception_ptr error;

    auto work = [&]()
    {
        for (std::size_t i = next++; i < trials; i = next++)
        {
            try
            {
                records[i] = run_trial(config, static_cast<std::int64_t>(i));
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (i < error_index)
                {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(trials)));
    if (n_threads == 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
    return aggregate(config, records);
}

} // namespace agsim
