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

#ifndef AGSIM_HARNESS_HPP
#define AGSIM_HARNESS_HPP

#include "agsim/detection.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace agsim
{

std::vector<double> default_eta_sweep();
std::vector<double> default_elapsed_grid(); // [s]

struct TrialConfig
{
    ScenarioSpec scenario = scenario_spec(Scenario::EC);
    int K = 8;
    SystemParams params;
    std::vector<Estimator> estimators{Estimator::TD, Estimator::ZC};
    std::vector<Detector> detectors{Detector::ZF, Detector::VMS};
    std::vector<double> eta_values = default_eta_sweep();
    std::vector<double> elapsed_grid = default_elapsed_grid(); // [s] after the last pilot symbol
    std::int64_t trials = 2000;
    std::uint64_t master_seed = 1;

    double gs_height = kGroundStationHeight; // [m]
    double reflector_coverage = 0.5;
    LmpConfig lmp;
    GroundConstants ground;
    CarrierPhase carrier_phase = CarrierPhase::CfoReferenced;

    void validate() const;
    std::size_t cell_count() const;
    std::size_t cell_index(std::size_t estimator, std::size_t detector, std::size_t eta, std::size_t elapsed) const;
};

// Outage counts |S| of one trial, one per (estimator, detector, eta, elapsed)
// cell in the order given by TrialConfig::cell_index.
struct TrialRecord
{
    std::int64_t trial_index = 0;
    int K = 0;
    std::vector<int> outages;
};

struct CellResult
{
    Estimator estimator = Estimator::TD;
    Detector detector = Detector::ZF;
    double eta = 1.0;
    double elapsed = 0.0; // [s]
    std::int64_t outages = 0;
    OutageEstimate estimate;
};

struct Report
{
    Scenario scenario = Scenario::EC;
    int K = 0;
    int M = 0;
    std::vector<CellResult> cells; // TrialConfig::cell_index order

    const CellResult &cell(Estimator e, Detector d, double eta, double elapsed) const;
};

/// SplitMix64 output for state master ^ index.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Reflector map, aircraft and lateral scatterers of a trial at n = 0.
World build_trial_world(const TrialConfig &config, std::int64_t trial_index);

TrialRecord run_trial(const TrialConfig &config, std::int64_t trial_index);

Report aggregate(const TrialConfig &config, std::span<const TrialRecord> records);

/// Runs config.trials trials on `workers` threads. The result does not
/// depend on the worker count.
Report run_experiment(const TrialConfig &config, int workers = 1);

} // namespace agsim

#endif
