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

#include "agsim/estimation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace agsim
{

std::string_view to_string(Estimator e)
{
    switch (e)
    {
    case Estimator::TD:
        return "TD";
    case Estimator::ZC:
        return "ZC";
    case Estimator::Perfect:
        return "PERFECT";
    }
    return "?";
}

CfoCompensation precompensate(const CfoVector &cfo, double eta)
{
    if (!(eta >= -1.0 && eta <= 1.0))
        throw std::invalid_argument("CFO compensation accuracy must lie in [-1, 1].");
    return {eta, eta * cfo};
}

PilotMatrix zc_pilots(int K)
{
    if (K < 1)
        throw std::invalid_argument("zc_pilots() needs at least one aircraft.");

    PilotMatrix p;
    p.tau = K + 1;
    p.root = 1;
    const int tau = p.tau;

    // Root sequence; the b(b+1) form for odd lengths, b^2 for even lengths.
    std::vector<cd> base(static_cast<std::size_t>(tau));
    for (int b = 0; b < tau; ++b)
    {
        const double q = (tau % 2 == 1) ? static_cast<double>(b) * (b + 1) : static_cast<double>(b) * b;
        base[static_cast<std::size_t>(b)] = std::polar(1.0, -std::numbers::pi * p.root * q / tau);
    }

    p.entries.resize(K, tau);
    for (int k = 0; k < K; ++k)
    {
        p.shifts.push_back(k);
        for (int b = 0; b < tau; ++b)
            p.entries(k, b) = base[static_cast<std::size_t>((b + k) % tau)];
    }
    return p;
}

PilotNoise draw_pilot_noise(int M, int symbols, double noise_power, Rng &rng)
{
    PilotNoise out(static_cast<std::size_t>(symbols), Eigen::VectorXcd::Zero(M));
    if (noise_power <= 0.0)
        return out;
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * noise_power));
    for (auto &z : out)
        for (int m = 0; m < M; ++m)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            z[m] = {re, im};
        }
    return out;
}

EstimatedChannel estimate_td(const ChannelSource &source, const CfoCompensation &comp,
                             const SystemParams &params, const PilotNoise &noise)
{
    const auto K = static_cast<int>(comp.compensated.size());
    if (static_cast<int>(noise.size()) < K)
        throw std::invalid_argument("estimate_td() needs one noise vector per aircraft.");

    const double amp = std::sqrt(params.tx_power);
    const cd pilot{1.0, 0.0};

    EstimatedChannel est;
    est.estimator = Estimator::TD;
    est.estimation_index = K - 1;
    est.phase_reference = Eigen::VectorXd::LinSpaced(K, 0.0, static_cast<double>(K - 1));
    for (int k = 0; k < K; ++k)
    {
        const std::int64_t n = k;
        const ChannelMatrix H = source(n);
        if (k == 0)
            est.entries.resize(H.entries.rows(), K);
        const cd precomp = std::polar(1.0, -2.0 * std::numbers::pi * comp.compensated[k] * static_cast<double>(n));
        const Eigen::VectorXcd r = H.entries.col(k) * (precomp * amp * pilot) + noise[static_cast<std::size_t>(k)];
        est.entries.col(k) = r / (pilot * amp);
    }
    return est;
}

EstimatedChannel estimate_td(const ChannelSource &source, const CfoCompensation &comp,
                             const SystemParams &params, Rng &rng)
{
    const auto K = static_cast<int>(comp.compensated.size());
    return estimate_td(source, comp, params, draw_pilot_noise(params.M, K, params.noise_power, rng));
}

EstimatedChannel estimate_zc(const ChannelSource &source, const PilotMatrix &pilots,
                             const CfoCompensation &comp, const SystemParams &params,
                             const PilotNoise &noise)
{
    const auto K = static_cast<int>(pilots.entries.rows());
    const int tau = pilots.tau;
    if (comp.compensated.size() != K)
        throw std::invalid_argument("Pilot matrix and CFO vector disagree on the number of aircraft.");
    if (static_cast<int>(noise.size()) < tau)
        throw std::invalid_argument("estimate_zc() needs one noise vector per pilot symbol.");

    const double amp = std::sqrt(params.tx_power);
    Eigen::MatrixXcd R;
    for (int b = 0; b < tau; ++b)
    {
        const std::int64_t n = b;
        const ChannelMatrix H = source(n);
        if (b == 0)
            R.resize(H.entries.rows(), tau);
        const Eigen::VectorXcd x =
            cfo_phasors(comp.compensated, n).conjugate().cwiseProduct(pilots.entries.col(b)) * amp;
        R.col(b) = H.entries * x + noise[static_cast<std::size_t>(b)];
    }

    EstimatedChannel est;
    est.estimator = Estimator::ZC;
    est.estimation_index = tau - 1;
    est.phase_reference = Eigen::VectorXd::Constant(K, 0.5 * static_cast<double>(tau - 1));
    est.entries = R * pilots.entries.adjoint() / (tau * amp);
    return est;
}

EstimatedChannel estimate_zc(const ChannelSource &source, const PilotMatrix &pilots,
                             const CfoCompensation &comp, const SystemParams &params, Rng &rng)
{
    return estimate_zc(source, pilots, comp, params,
                       draw_pilot_noise(params.M, pilots.tau, params.noise_power, rng));
}

EstimatedChannel estimate_perfect(const ChannelSource &source, const CfoVector &cfo)
{
    EstimatedChannel est;
    est.estimator = Estimator::Perfect;
    est.estimation_index = 0;
    est.phase_reference = Eigen::VectorXd::Zero(cfo.size());
    est.entries = slow_gains(source(0), cfo);
    return est;
}

Eigen::VectorXd estimate_phase(const EstimatedChannel &est, const CfoVector &cfo, const CfoCompensation &comp)
{
    if (cfo.size() != est.phase_reference.size() || comp.compensated.size() != cfo.size())
        throw std::invalid_argument("estimate_phase(): shapes disagree.");
    return (cfo - comp.compensated).cwiseProduct(est.phase_reference);
}

} // namespace agsim
