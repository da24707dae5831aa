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

#ifndef AGSIM_GEOMETRY_HPP
#define AGSIM_GEOMETRY_HPP

#include "agsim/errors.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace agsim
{

// Earth-centered Cartesian coordinates [m]. The z-axis passes through the
// ground station's surface point, so the GS sits at (0, 0, R + h_gs).
using Vec3 = Eigen::Vector3d;

// Every stochastic component draws from this engine; seeded per trial.
using Rng = std::mt19937_64;

inline constexpr double kEarthRadius = 6371.0e3;     // [m]
inline constexpr double kCellRadius = 250.0e3;       // [m] along the surface
inline constexpr double kGroundStationHeight = 15.0; // [m] antenna above the surface

enum class Scenario
{
    TL, // takeoff & landing
    CD, // climb & descent
    EC  // enroute cruise
};

std::string_view to_string(Scenario s);

struct Range
{
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
};

// Flight-phase parameters. Defaults come from scenario_spec().
struct ScenarioSpec
{
    Scenario name = Scenario::EC;
    Range ground_distance; // [m] along the surface from the GS
    double speed = 0.0;    // [m/s]
    Range altitude;        // [m] above MSL
    double min_separation = 0.0; // [m], 3-D distance between any two aircraft

    void validate() const;
};

ScenarioSpec scenario_spec(Scenario s);

struct AircraftState
{
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero(); // horizontal, [m/s]
    int aircraft_id = 0;          // 1-based

    double altitude() const { return position.norm() - kEarthRadius; }
    double speed() const { return velocity.norm(); }
};

struct GroundReflection
{
    bool exists = false;
    Vec3 point = Vec3::Zero();  // on the Earth surface
    double grazing_angle = 0.0; // [rad]
};

/// Ground-station antenna reference point.
Vec3 ground_station_position(double antenna_height = kGroundStationHeight);

/// Places a point `ground_distance` meters along the surface from the GS
/// surface point in direction `bearing` (measured from the x-axis toward
/// the y-axis), at `altitude` meters above MSL.
///
/// Throws std::domain_error when the distance is negative or exceeds
/// `max_distance` (the cell radius unless overridden), or the altitude is
/// negative.
Vec3 to_cartesian(double ground_distance, double bearing, double altitude,
                  double max_distance = kCellRadius);

/// Inverse of to_cartesian for the horizontal part: ground distance [m]
/// and bearing [rad] of the surface projection of p.
std::array<double, 2> surface_polar(const Vec3 &p);

/// Local horizontal orthonormal basis (east-like, north-like) at p.
std::array<Vec3, 2> horizontal_basis(const Vec3 &p);

/// Draws K aircraft by rejection sampling. Ground distance and altitude are
/// uniform over the scenario ranges, bearing and heading uniform over the
/// circle. Throws ConfigurationError when the retry budget is exhausted.
std::vector<AircraftState> sample_scenario(const ScenarioSpec &spec, int K, Rng &rng,
                                           int retry_budget = 10000);

/// Constant-speed, constant-altitude motion along the great circle defined
/// by the current position and velocity. dt must be non-negative.
AircraftState advance(const AircraftState &state, double dt);

/// Same as advance() but accepts negative dt (used for central differences).
AircraftState propagate(const AircraftState &state, double dt);

/// Specular ground reflection point between two elevated points on the
/// sphere. The point lies on the great-circle arc between their surface
/// projections and is found by safeguarded Newton iteration on the
/// equal-elevation condition.
GroundReflection specular_point(const Vec3 &ac, const Vec3 &gs);

/// Elevation angle [rad] of p above the local horizontal at surface point s.
double elevation_angle(const Vec3 &s, const Vec3 &p);

// Random map of reflecting ground patches around the GS. Patches are discs
// in the azimuthal-equidistant plane (ground distance, bearing) with radii
// drawn uniformly, added until the target coverage of the cell is reached.
class ReflectorMap
{
public:
    struct Patch
    {
        double x = 0.0;
        double y = 0.0;
        double radius = 0.0;
    };

    ReflectorMap() = default;

    double coverage_target() const { return coverage_target_; }
    double raster_coverage() const { return raster_coverage_; }
    const std::vector<Patch> &patches() const { return patches_; }

    bool is_reflecting(const Vec3 &surface_point) const;
    bool is_reflecting_xy(double x, double y) const;

    friend ReflectorMap sample_reflector_map(double coverage, Rng &rng);

private:
    static constexpr double kBucketSize = 10.0e3;
    static constexpr int kBuckets = static_cast<int>(2.0 * kCellRadius / kBucketSize);

    void index_patch(std::uint32_t id);

    double coverage_target_ = 0.0;
    double raster_coverage_ = 0.0;
    bool everywhere_ = false;
    std::vector<Patch> patches_;
    std::vector<std::vector<std::uint32_t>> buckets_;
};

ReflectorMap sample_reflector_map(double coverage, Rng &rng);

inline bool is_reflecting(const ReflectorMap &map, const Vec3 &surface_point)
{
    return map.is_reflecting(surface_point);
}

} // namespace agsim

#endif
