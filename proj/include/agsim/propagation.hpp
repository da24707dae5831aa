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

#ifndef AGSIM_PROPAGATION_HPP
#define AGSIM_PROPAGATION_HPP

#include "agsim/geometry.hpp"

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

namespace agsim
{

using cd = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0; // [m/s]

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

// Link parameters shared by every module.
struct SystemParams
{
    double carrier_frequency = 987.0e6;       // [Hz]
    double symbol_duration = 120.0e-6;        // [s], one time index
    double tx_power = dbm_to_watt(41.0);      // [W] per aircraft
    double noise_power = dbm_to_watt(-107.0); // [W] per receive antenna
    int M = 64;                               // GS antenna elements
    double rate_threshold = 2.0;              // [bit/s/Hz], guaranteed rate r_G

    double wavelength() const { return kSpeedOfLight / carrier_frequency; }
    double noise_ratio() const { return noise_power / tx_power; }
    void validate() const;
};

// sqrt(M) x sqrt(M) planar grid in the horizontal plane of the GS, centered
// on the GS reference point.
struct ArrayGeometry
{
    std::vector<Vec3> element_offsets;
    int side = 0;
    double pitch = 0.0; // [m]

    int size() const { return static_cast<int>(element_offsets.size()); }
};

ArrayGeometry array_elements(const SystemParams &params);

/// Free-space field gain lambda / (4 pi d).
double fspl_amplitude(double d, double wavelength);

/// Fresnel reflection coefficient for vertical polarization over ground
/// with relative permittivity eps_r and conductivity sigma [S/m].
cd fresnel_vertical(double grazing, double eps_r, double sigma, double wavelength);

/// Central-difference derivative of a path length [m/s].
double path_rate(const std::function<double(double)> &length_at, double t, double step);

// Electrical ground parameters, defaults for very dry ground.
struct GroundConstants
{
    double eps_r = 3.0;
    double sigma = 1.0e-4; // [S/m]
};

enum class PathKind
{
    LOS,
    GMP,
    LMP
};

// One multipath component between an aircraft and every array element.
struct Mpc
{
    PathKind kind = PathKind::LOS;
    cd coefficient{1.0, 0.0};  // reflection coefficient / relative gain on top of free-space loss
    Eigen::VectorXd lengths;   // per-element path length [m]
    double doppler = 0.0;      // [cycles/sample], shared across elements

    cd amplitude(int m, double wavelength) const
    {
        return coefficient * fspl_amplitude(lengths[m], wavelength);
    }
};

// Lateral point scatterer near the GS.
struct PointReflector
{
    Vec3 position = Vec3::Zero();
    double gain_db_rel_los = -30.0;
    std::optional<double> visibility_radius; // [m] horizontal; empty = always visible

    bool visible_from(const Vec3 &ac) const;
};

// Parameters of the lateral scatterer population. These are model choices,
// not measured statistics.
struct LmpConfig
{
    double mean_count = 5.0;
    double disk_radius = 5.0e3; // [m] around the GS
    Range height{0.0, 50.0};    // [m] above MSL
    Range gain_db{-40.0, -20.0};
    // Horizontal aircraft-to-reflector distance [m] within which a reflector
    // contributes; empty = always visible.
    std::optional<double> visibility_radius = 20.0e3;

    void validate() const;
};

std::vector<PointReflector> sample_lmp_reflectors(const LmpConfig &config, Rng &rng);

struct ChannelMatrix
{
    Eigen::MatrixXcd entries; // M x K
    std::int64_t time_index = 0;
};

// Per-aircraft carrier frequency offset [cycles/sample].
using CfoVector = Eigen::VectorXd;

// How the bulk LOS carrier phase of a snapshot is obtained.
//  CfoReferenced: the LOS phase at the array reference point advances
//    linearly at the Doppler frequency of the reference epoch, so
//    H_n = Hbar(t) * Lambda_n with Hbar(t) holding only the slow geometric
//    change (array manifold, amplitudes, multipath phase differences).
//  Geometric: phases follow the exact path lengths, including the
//    quadratic drift from the changing radial velocity.
enum class CarrierPhase
{
    CfoReferenced,
    Geometric
};

struct CarrierReference
{
    double los_length = 0.0; // [m] at the reference epoch
    double doppler = 0.0;    // [cycles/sample] at the reference epoch
    std::int64_t index = 0;
};

// Everything needed to synthesize H_n. The aircraft states are those at
// `time_index`.
struct World
{
    SystemParams params;
    GroundConstants ground;
    Vec3 gs = ground_station_position();
    ArrayGeometry array;
    std::shared_ptr<const ReflectorMap> map; // null: no reflecting ground
    std::vector<PointReflector> reflectors;
    std::vector<AircraftState> aircraft;
    std::int64_t time_index = 0;
    CarrierPhase carrier_phase = CarrierPhase::CfoReferenced;
    std::vector<CarrierReference> carrier;

    int K() const { return static_cast<int>(aircraft.size()); }
};

/// Builds a world at time index 0 and records the carrier references.
World make_world(const SystemParams &params, std::vector<AircraftState> aircraft,
                 std::shared_ptr<const ReflectorMap> map = nullptr,
                 std::vector<PointReflector> reflectors = {}, GroundConstants ground = {},
                 Vec3 gs = ground_station_position());

/// Moves every aircraft to time index n (carrier references are kept).
World advance_world(const World &world, std::int64_t n);

/// LOS, GMP (when the specular point exists and lies on reflecting ground)
/// and visible LMP components for aircraft k (0-based).
std::vector<Mpc> multipath_components(const World &world, int k);

/// Doppler [cycles/sample] of the LOS path of aircraft k at the reference point.
double los_doppler(const World &world, int k);

/// H_n from the world snapshot; for n != world.time_index the snapshot is
/// extrapolated with each path's own Doppler. Throws std::domain_error when
/// an aircraft is below the GS horizon.
ChannelMatrix channel_matrix(const World &world, std::int64_t n);

/// Per-aircraft CFO, the LOS Doppler at the world's time index.
CfoVector cfo_vector(const World &world);

/// Lambda_n = diag(exp(j 2 pi cfo_k n)).
Eigen::VectorXcd cfo_phasors(const CfoVector &cfo, std::int64_t n);

/// H_n * Lambda_n^H.
Eigen::MatrixXcd slow_gains(const ChannelMatrix &H, const CfoVector &cfo);

/// Debug trace: one "n,m,k,re,im" line per entry (1-based m, k).
void write_channel_trace(std::ostream &os, const ChannelMatrix &H, bool header = true);

} // namespace agsim

#endif
