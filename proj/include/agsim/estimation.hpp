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

#ifndef AGSIM_ESTIMATION_HPP
#define AGSIM_ESTIMATION_HPP

#include "agsim/propagation.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace agsim
{

enum class Estimator
{
    TD,     // one pilot symbol per aircraft in its own slot
    ZC,     // simultaneous cyclically shifted Zadoff-Chu sequences
    Perfect // genie: slow gains of the true channel, no noise
};

std::string_view to_string(Estimator e);

// Transmitter-side CFO pre-compensation: compensated = eta * cfo.
struct CfoCompensation
{
    double eta = 1.0;
    CfoVector compensated;
};

CfoCompensation precompensate(const CfoVector &cfo, double eta);

// K x tau pilot matrix, tau = K + 1, unit-modulus entries,
// entries * entries^H = tau * I.
struct PilotMatrix
{
    Eigen::MatrixXcd entries;
    int tau = 0;
    int root = 1;
    std::vector<int> shifts;
};

PilotMatrix zc_pilots(int K);

struct EstimatedChannel
{
    Eigen::MatrixXcd entries; // M x K
    Estimator estimator = Estimator::TD;
    std::int64_t estimation_index = 0; // last pilot symbol
    // Per column, the time index [samples] at which the residual CFO phase
    // of the estimate is pinned: the pilot slot for TD, the block centre
    // for ZC.
    Eigen::VectorXd phase_reference;
};

/// Residual CFO phase [cycles] carried by each estimate column:
/// (cfo - compensated) * phase_reference.
Eigen::VectorXd estimate_phase(const EstimatedChannel &est, const CfoVector &cfo, const CfoCompensation &comp);

// H_n for the requested time index.
using ChannelSource = std::function<ChannelMatrix(std::int64_t)>;

// One complex Gaussian M-vector per pilot symbol, variance noise_power per element.
using PilotNoise = std::vector<Eigen::VectorXcd>;

PilotNoise draw_pilot_noise(int M, int symbols, double noise_power, Rng &rng);

/// Time-division estimate; aircraft k transmits at time index k - 1.
/// Uses noise[0 .. K-1].
EstimatedChannel estimate_td(const ChannelSource &source, const CfoCompensation &comp,
                             const SystemParams &params, const PilotNoise &noise);
EstimatedChannel estimate_td(const ChannelSource &source, const CfoCompensation &comp,
                             const SystemParams &params, Rng &rng);

/// Correlation estimate from the ZC block received at n = 0 .. tau - 1:
/// Hhat = R Phi^H / (tau sqrt(P)). Uses noise[0 .. tau-1].
EstimatedChannel estimate_zc(const ChannelSource &source, const PilotMatrix &pilots,
                             const CfoCompensation &comp, const SystemParams &params,
                             const PilotNoise &noise);
EstimatedChannel estimate_zc(const ChannelSource &source, const PilotMatrix &pilots,
                             const CfoCompensation &comp, const SystemParams &params, Rng &rng);

/// Genie estimate: H_0 Lambda_0^H, i.e. the true slow gains at n = 0.
EstimatedChannel estimate_perfect(const ChannelSource &source, const CfoVector &cfo);

} // namespace agsim

#endif
