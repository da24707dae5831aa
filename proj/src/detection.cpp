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

#include "agsim/detection.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace agsim
{

std::string_view to_string(Detector d)
{
    switch (d)
    {
    case Detector::ZF:
        return "ZF";
    case Detector::VMS:
        return "VMS";
    }
    return "?";
}

bool OutageSet::contains(int id) const
{
    return std::find(members.begin(), members.end(), id) != members.end();
}

ZfDetector zf_detector(const Eigen::MatrixXcd &H_hat, double max_condition)
{
    const Eigen::Index M = H_hat.rows();
    const Eigen::Index K = H_hat.cols();
    if (K == 0 || M < K)
        throw SingularMatrixError("ZF detector needs M >= K >= 1.");

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd &s = svd.singularValues();
    const double smax = s[0];
    const double smin = s[K - 1];
    if (!(smin > 0.0) || smax / smin > max_condition)
        throw SingularMatrixError("Estimated channel is rank deficient (condition number " +
                                  std::to_string(smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity()) +
                                  ").");

    ZfDetector det;
    det.G = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().adjoint();
    return det;
}

Eigen::VectorXd zf_rates(const ZfDetector &det, const Eigen::MatrixXcd &H_true, const SystemParams &params)
{
    if (det.G.cols() != H_true.rows() || det.G.rows() != H_true.cols())
        throw std::invalid_argument("ZF filter and channel shapes disagree.");

    const Eigen::MatrixXd gain = (det.G * H_true).cwiseAbs2(); // |g_k h_a|^2
    const Eigen::VectorXd filter_norm = det.G.rowwise().squaredNorm();
    const Eigen::Index K = H_true.cols();

    Eigen::VectorXd rates(K);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const double signal = gain(k, k) * params.tx_power;
        const double interference = (gain.row(k).sum() - gain(k, k)) * params.tx_power;
        const double noise = params.noise_power * filter_norm[k];
        rates[k] = std::log2(1.0 + signal / (interference + noise));
    }
    return rates;
}

OutageSet zf_outage_set(const Eigen::VectorXd &rates, double rate_threshold)
{
    OutageSet out;
    out.rates = rates;
    for (Eigen::Index k = 0; k < rates.size(); ++k)
        if (rates[k] < rate_threshold)
            out.members.push_back(static_cast<int>(k) + 1);
    return out;
}

MmseKernel mmse_kernel(const Eigen::MatrixXcd &H_hat, double noise_ratio)
{
    if (!(noise_ratio > 0.0))
        throw std::invalid_argument("MMSE kernel needs a positive noise ratio.");
    const Eigen::Index K = H_hat.cols();
    Eigen::MatrixXcd A = H_hat.adjoint() * H_hat;
    A.diagonal().array() += noise_ratio;

    MmseKernel kernel;
    kernel.Q = A.llt().solve(Eigen::MatrixXcd::Identity(K, K));
    kernel.Q = 0.5 * (kernel.Q + kernel.Q.adjoint()).eval();
    return kernel;
}

OutageSet vms_outage_set(Eigen::MatrixXcd H_hat, Eigen::MatrixXcd H_true, const CfoVector &cfo,
                         std::int64_t n, const SystemParams &params)
{
    const Eigen::VectorXd no_phase = Eigen::VectorXd::Zero(H_hat.cols());
    return vms_outage_set(std::move(H_hat), std::move(H_true), cfo, n, params, no_phase);
}

OutageSet vms_outage_set(Eigen::MatrixXcd H_hat, Eigen::MatrixXcd H_true, const CfoVector &cfo,
                         std::int64_t n, const SystemParams &params, const Eigen::VectorXd &estimate_phase)
{
    const Eigen::Index K = H_hat.cols();
    if (H_true.cols() != K || H_true.rows() != H_hat.rows() || cfo.size() != K || estimate_phase.size() != K)
        throw std::invalid_argument("vms_outage_set(): shapes disagree.");

    OutageSet out;
    out.rates = Eigen::VectorXd::Constant(K, std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> decoded(static_cast<std::size_t>(K), false);
    const double noise_ratio = params.noise_ratio();

    for (Eigen::Index u = 0; u < K; ++u)
    {
        const MmseKernel kernel = mmse_kernel(H_hat, noise_ratio);

        Eigen::Index pick = -1;
        for (Eigen::Index k = 0; k < K; ++k)
            if (!decoded[static_cast<std::size_t>(k)] &&
                (pick < 0 || kernel.Q(k, k).real() < kernel.Q(pick, pick).real()))
                pick = k;

        const Eigen::RowVectorXcd g = kernel.Q.row(pick) * H_hat.adjoint();
        const Eigen::RowVectorXd gain = (g * H_true).cwiseAbs2();
        const double signal = gain[pick] * params.tx_power;
        const double interference = (gain.sum() - gain[pick]) * params.tx_power;
        const double noise = params.noise_power * g.squaredNorm();
        const double rate = std::log2(1.0 + signal / (interference + noise));
        out.rates[pick] = rate;

        if (rate < params.rate_threshold)
            break;

        const cd rotation = std::polar(1.0, 2.0 * std::numbers::pi * (cfo[pick] * static_cast<double>(n) - estimate_phase[pick]));
        H_true.col(pick) -= H_hat.col(pick) * rotation;
        H_hat.col(pick).setZero();
        decoded[static_cast<std::size_t>(pick)] = true;
        out.decode_order.push_back(static_cast<int>(pick) + 1);
        out.residual_norms.push_back(H_true.col(pick).norm());
    }

    for (Eigen::Index k = 0; k < K; ++k)
        if (!decoded[static_cast<std::size_t>(k)])
            out.members.push_back(static_cast<int>(k) + 1);
    return out;
}

std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t n, double z)
{
    if (n <= 0)
        throw std::invalid_argument("Wilson interval needs at least one draw.");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, std::min(center - half, p)), std::min(1.0, std::max(center + half, p))};
}

OutageEstimate outage_from_counts(std::int64_t outages, std::int64_t trials, int K)
{
    if (trials < 1 || K < 1)
        throw std::invalid_argument("Outage probability needs at least one trial.");
    const std::int64_t draws = trials * K;
    OutageEstimate e;
    e.trials = trials;
    e.p_out = static_cast<double>(outages) / static_cast<double>(draws);
    std::tie(e.ci_low, e.ci_high) = wilson_interval(outages, draws);
    return e;
}

OutageEstimate outage_probability(std::span<const OutageSet> sets, int K)
{
    if (sets.empty())
        throw std::invalid_argument("Outage probability needs at least one trial.");
    std::int64_t outages = 0;
    for (const OutageSet &s : sets)
        outages += s.size();
    return outage_from_counts(outages, static_cast<std::int64_t>(sets.size()), K);
}

} // namespace agsim
