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

#ifndef AGSIM_DETECTION_HPP
#define AGSIM_DETECTION_HPP

#include "agsim/estimation.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace agsim
{

enum class Detector
{
    ZF,
    VMS // V-BLAST ordered MMSE-SIC
};

std::string_view to_string(Detector d);

inline constexpr double kMaxConditionNumber = 1e12;

struct ZfDetector
{
    Eigen::MatrixXcd G; // K x M pseudo-inverse of Hhat
};

/// Throws SingularMatrixError when M < K or cond(Hhat) exceeds max_condition.
ZfDetector zf_detector(const Eigen::MatrixXcd &H_hat, double max_condition = kMaxConditionNumber);
inline ZfDetector zf_detector(const EstimatedChannel &H_hat) { return zf_detector(H_hat.entries); }

/// Achievable rate [bit/s/Hz] of every aircraft when the ZF filter is applied
/// to the true channel H_true.
Eigen::VectorXd zf_rates(const ZfDetector &det, const Eigen::MatrixXcd &H_true, const SystemParams &params);

// Aircraft in outage. Indices are 1-based aircraft ids.
struct OutageSet
{
    std::vector<int> members;
    Eigen::VectorXd rates;          // NaN where the rate was never evaluated
    std::vector<int> decode_order;  // VMS only: successfully decoded ids in order
    std::vector<double> residual_norms; // VMS only: |h - hhat e^{j2pi df n}| after each cancellation

    int size() const { return static_cast<int>(members.size()); }
    bool contains(int id) const;
};

/// {k : rate_k < r_G} (strict).
OutageSet zf_outage_set(const Eigen::VectorXd &rates, double rate_threshold);

struct MmseKernel
{
    Eigen::MatrixXcd Q; // (noise_ratio I + Hhat^H Hhat)^-1, Hermitian PD
};

MmseKernel mmse_kernel(const Eigen::MatrixXcd &H_hat, double noise_ratio);

/// Outage set of the V-BLAST MMSE-SIC receiver at time index n. Each pass
/// picks the undecoded aircraft with the smallest diagonal entry of Q (lowest
/// index on ties), evaluates its rate against the true channel, and on
/// success replaces its true column by the cancellation residual and zeroes
/// its estimate. The first failure puts every remaining aircraft in outage.
/// The cancelled contribution is hhat_k exp(j2pi (cfo_k n - estimate_phase_k));
/// estimate_phase [cycles] is the residual CFO phase the receiver knows its
/// estimate to carry (zero when omitted).
OutageSet vms_outage_set(Eigen::MatrixXcd H_hat, Eigen::MatrixXcd H_true, const CfoVector &cfo,
                         std::int64_t n, const SystemParams &params, const Eigen::VectorXd &estimate_phase);
OutageSet vms_outage_set(Eigen::MatrixXcd H_hat, Eigen::MatrixXcd H_true, const CfoVector &cfo,
                         std::int64_t n, const SystemParams &params);

struct OutageEstimate
{
    double p_out = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::int64_t trials = 0;
};

/// 95% Wilson score interval for `successes` out of `n` Bernoulli draws.
std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t n, double z = 1.959963984540054);

/// P_out = sum |S| / (K * trials) with a Wilson interval over K * trials draws.
OutageEstimate outage_from_counts(std::int64_t outages, std::int64_t trials, int K);
OutageEstimate outage_probability(std::span<const OutageSet> sets, int K);

} // namespace agsim

#endif
