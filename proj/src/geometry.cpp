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

#include "agsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace agsim
{

namespace
{
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Elevation of a point at height h above the sphere, seen from a surface
// point at central angle gamma. Written to avoid cancellation for the
// small central angles that dominate inside a 250 km cell.
double elevation_at(double h, double gamma)
{
    const double s = std::sin(0.5 * gamma);
    const double vertical = h * std::cos(gamma) - 2.0 * kEarthRadius * s * s;
    const double horizontal = (kEarthRadius + h) * std::sin(gamma);
    return std::atan2(vertical, horizontal);
}

// d(elevation_at)/d(gamma)
double elevation_slope(double h, double gamma)
{
    const double s = std::sin(0.5 * gamma);
    const double vertical = h * std::cos(gamma) - 2.0 * kEarthRadius * s * s;
    const double horizontal = (kEarthRadius + h) * std::sin(gamma);
    const double norm2 = vertical * vertical + horizontal * horizontal;
    return -1.0 - vertical * kEarthRadius / norm2;
}
} // namespace

std::string_view to_string(Scenario s)
{
    switch (s)
    {
    case Scenario::TL:
        return "TL";
    case Scenario::CD:
        return "CD";
    case Scenario::EC:
        return "EC";
    }
    return "?";
}

void ScenarioSpec::validate() const
{
    auto bad_range = [](const Range &r)
    { return !(r.lo > 0.0) || !(r.hi >= r.lo) || !std::isfinite(r.hi); };
    if (bad_range(ground_distance) || ground_distance.hi > kCellRadius)
        throw ConfigurationError("Scenario ground-distance range must be positive and inside the cell.");
    if (bad_range(altitude))
        throw ConfigurationError("Scenario altitude range must be positive.");
    if (!(speed >= 0.0) || !std::isfinite(speed))
        throw ConfigurationError("Scenario speed must be non-negative.");
    if (!(min_separation > 0.0))
        throw ConfigurationError("Scenario minimum separation must be positive.");
}

ScenarioSpec scenario_spec(Scenario s)
{
    switch (s)
    {
    case Scenario::TL:
        return {Scenario::TL, {500.0, 7.3e3}, 88.0, {530.0, 815.0}, 1.0e3};
    case Scenario::CD:
        return {Scenario::CD, {20.0e3, 80.0e3}, 171.0, {3.0e3, 9.0e3}, 10.0e3};
    case Scenario::EC:
        return {Scenario::EC, {80.0e3, 250.0e3}, 214.0, {8.0e3, 10.4e3}, 10.0e3};
    }
    throw std::invalid_argument("Unknown scenario.");
}

Vec3 ground_station_position(double antenna_height)
{
    if (!(antenna_height >= 0.0))
        throw std::domain_error("Ground-station antenna height must be non-negative.");
    return {0.0, 0.0, kEarthRadius + antenna_height};
}

Vec3 to_cartesian(double ground_distance, double bearing, double altitude, double max_distance)
{
    if (!(ground_distance >= 0.0) || ground_distance > max_distance)
        throw std::domain_error("Ground distance " + std::to_string(ground_distance) +
                                " m is outside the cell.");
    if (!(altitude >= 0.0))
        throw std::domain_error("Altitude must be non-negative.");

    const double theta = ground_distance / kEarthRadius;
    const double r = kEarthRadius + altitude;
    return {r * std::sin(theta) * std::cos(bearing),
            r * std::sin(theta) * std::sin(bearing),
            r * std::cos(theta)};
}

std::array<double, 2> surface_polar(const Vec3 &p)
{
    const double rho = std::hypot(p.x(), p.y());
    const double theta = std::atan2(rho, p.z());
    return {kEarthRadius * theta, std::atan2(p.y(), p.x())};
}

std::array<Vec3, 2> horizontal_basis(const Vec3 &p)
{
    const Vec3 up = p.normalized();
    Vec3 ref = Vec3::UnitX();
    if (std::abs(up.dot(ref)) > 0.9)
        ref = Vec3::UnitY();
    const Vec3 e1 = (ref - ref.dot(up) * up).normalized();
    return {e1, up.cross(e1)};
}

std::vector<AircraftState> sample_scenario(const ScenarioSpec &spec, int K, Rng &rng, int retry_budget)
{
    spec.validate();
    if (K < 1)
        throw ConfigurationError("Number of aircraft must be at least 1.");

    std::uniform_real_distribution<double> distance(spec.ground_distance.lo, spec.ground_distance.hi);
    std::uniform_real_distribution<double> altitude(spec.altitude.lo, spec.altitude.hi);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);

    std::vector<AircraftState> out;
    out.reserve(static_cast<std::size_t>(K));
    int attempts = 0;
    while (static_cast<int>(out.size()) < K)
    {
        if (++attempts > retry_budget)
            throw ConfigurationError("Could not place " + std::to_string(K) + " aircraft in scenario " +
                                     std::string(to_string(spec.name)) + " with the required separation.");

        const double d = distance(rng);
        const double b = angle(rng);
        const double h = altitude(rng);
        const double heading = angle(rng);

        const Vec3 pos = to_cartesian(d, b, h);
        const bool clear = std::all_of(out.begin(), out.end(), [&](const AircraftState &other)
                                       { return (other.position - pos).norm() >= spec.min_separation; });
        if (!clear)
            continue;

        const auto [e1, e2] = horizontal_basis(pos);
        AircraftState s;
        s.position = pos;
        s.velocity = spec.speed * (std::cos(heading) * e1 + std::sin(heading) * e2);
        s.aircraft_id = static_cast<int>(out.size()) + 1;
        out.push_back(s);
    }
    return out;
}

AircraftState propagate(const AircraftState &state, double dt)
{
    const double speed = state.velocity.norm();
    if (speed == 0.0 || dt == 0.0)
        return state;

    const double r = state.position.norm();
    const Vec3 u = state.position / r;
    const Vec3 w = state.velocity / speed;
    const double angle = speed * dt / r;
    const double c = std::cos(angle);
    const double s = std::sin(angle);

    AircraftState next = state;
    next.position = r * (c * u + s * w);
    next.position *= r / next.position.norm();

    Vec3 v = -s * u + c * w;
    const Vec3 up = next.position / r;
    v -= v.dot(up) * up;
    next.velocity = speed * v.normalized();
    return next;
}

AircraftState advance(const AircraftState &state, double dt)
{
    if (!(dt >= 0.0))
        throw std::invalid_argument("advance() requires a non-negative time step.");
    return propagate(state, dt);
}

double elevation_angle(const Vec3 &s, const Vec3 &p)
{
    const Vec3 up = s.normalized();
    const Vec3 d = p - s;
    const double vertical = d.dot(up);
    return std::atan2(vertical, (d - vertical * up).norm());
}

GroundReflection specular_point(const Vec3 &ac, const Vec3 &gs)
{
    const double h_a = ac.norm() - kEarthRadius;
    const double h_g = gs.norm() - kEarthRadius;
    if (!(h_a > 0.0) || !(h_g > 0.0))
        throw std::domain_error("specular_point() needs both endpoints above the surface.");

    const Vec3 g = gs.normalized();
    const Vec3 a = ac.normalized();
    const Vec3 across = a - a.dot(g) * g;
    const double total = std::atan2(a.cross(g).norm(), a.dot(g));

    GroundReflection out;
    if (total < 1e-12 || across.norm() < 1e-15)
    {
        out.exists = true;
        out.point = kEarthRadius * g;
        out.grazing_angle = std::numbers::pi / 2.0;
        return out;
    }
    const Vec3 t = across.normalized();

    // f(phi) = elevation of GS - elevation of AC, both seen from the surface
    // point at central angle phi from the GS. f(0) > 0 > f(total) and f is
    // decreasing, so a bracketed Newton iteration always converges.
    auto f = [&](double phi)
    { return elevation_at(h_g, phi) - elevation_at(h_a, total - phi); };
    auto df = [&](double phi)
    { return elevation_slope(h_g, phi) + elevation_slope(h_a, total - phi); };

    double lo = 0.0;
    double hi = total;
    double phi = total * h_g / (h_g + h_a);
    for (int iter = 0; iter < 64; ++iter)
    {
        const double value = f(phi);
        if (std::abs(value) < 1e-14)
            break;
        if (value > 0.0)
            lo = phi;
        else
            hi = phi;

        double next = phi - value / df(phi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - phi) <= 1e-17 * total)
        {
            phi = next;
            break;
        }
        phi = next;
    }

    out.point = kEarthRadius * (std::cos(phi) * g + std::sin(phi) * t);
    out.grazing_angle = elevation_at(h_g, phi);
    out.exists = out.grazing_angle > 0.0;
    return out;
}

// ------------------------------------------------------------------------
// Reflecting-area map

void ReflectorMap::index_patch(std::uint32_t id)
{
    const Patch &p = patches_[id];
    auto bucket = [](double v)
    {
        const int i = static_cast<int>(std::floor((v + kCellRadius) / kBucketSize));
        return std::clamp(i, 0, kBuckets - 1);
    };
    for (int ix = bucket(p.x - p.radius); ix <= bucket(p.x + p.radius); ++ix)
        for (int iy = bucket(p.y - p.radius); iy <= bucket(p.y + p.radius); ++iy)
            buckets_[static_cast<std::size_t>(ix * kBuckets + iy)].push_back(id);
}

bool ReflectorMap::is_reflecting_xy(double x, double y) const
{
    if (everywhere_)
        return true;
    if (patches_.empty() || std::hypot(x, y) > kCellRadius)
        return false;

    const int ix = std::clamp(static_cast<int>(std::floor((x + kCellRadius) / kBucketSize)), 0, kBuckets - 1);
    const int iy = std::clamp(static_cast<int>(std::floor((y + kCellRadius) / kBucketSize)), 0, kBuckets - 1);
    for (std::uint32_t id : buckets_[static_cast<std::size_t>(ix * kBuckets + iy)])
    {
        const Patch &p = patches_[id];
        const double dx = x - p.x;
        const double dy = y - p.y;
        if (dx * dx + dy * dy <= p.radius * p.radius)
            return true;
    }
    return false;
}

bool ReflectorMap::is_reflecting(const Vec3 &surface_point) const
{
    if (everywhere_)
        return true;
    const auto [d, b] = surface_polar(surface_point);
    return is_reflecting_xy(d * std::cos(b), d * std::sin(b));
}

ReflectorMap sample_reflector_map(double coverage, Rng &rng)
{
    if (!(coverage >= 0.0 && coverage <= 1.0))
        throw std::invalid_argument("Reflector coverage must lie in [0, 1].");

    constexpr double kMinPatchRadius = 1.0e3;
    constexpr double kMaxPatchRadius = 5.0e3;
    constexpr double kRasterStep = 500.0;
    constexpr int kRaster = static_cast<int>(2.0 * kCellRadius / kRasterStep);

    ReflectorMap map;
    map.coverage_target_ = coverage;
    map.buckets_.resize(static_cast<std::size_t>(ReflectorMap::kBuckets * ReflectorMap::kBuckets));
    if (coverage <= 0.0)
        return map;
    if (coverage >= 1.0)
    {
        map.everywhere_ = true;
        map.raster_coverage_ = 1.0;
        return map;
    }

    // Coverage is tracked on a raster of cell centers inside the disk.
    auto center = [](int i) { return -kCellRadius + (i + 0.5) * kRasterStep; };
    std::vector<std::uint8_t> state(static_cast<std::size_t>(kRaster) * kRaster, 0); // 0 out, 1 free, 2 covered
    std::size_t inside = 0;
    for (int i = 0; i < kRaster; ++i)
        for (int j = 0; j < kRaster; ++j)
            if (std::hypot(center(i), center(j)) <= kCellRadius)
            {
                state[static_cast<std::size_t>(i) * kRaster + j] = 1;
                ++inside;
            }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> radius(kMinPatchRadius, kMaxPatchRadius);
    const auto target = static_cast<std::size_t>(std::ceil(coverage * static_cast<double>(inside)));
    std::size_t covered = 0;
    while (covered < target)
    {
        const double rho = kCellRadius * std::sqrt(unit(rng));
        const double phi = kTwoPi * unit(rng);
        ReflectorMap::Patch p{rho * std::cos(phi), rho * std::sin(phi), radius(rng)};

        const int i0 = std::max(0, static_cast<int>(std::floor((p.x - p.radius + kCellRadius) / kRasterStep)));
        const int i1 = std::min(kRaster - 1, static_cast<int>(std::floor((p.x + p.radius + kCellRadius) / kRasterStep)));
        const int j0 = std::max(0, static_cast<int>(std::floor((p.y - p.radius + kCellRadius) / kRasterStep)));
        const int j1 = std::min(kRaster - 1, static_cast<int>(std::floor((p.y + p.radius + kCellRadius) / kRasterStep)));
        const double r2 = p.radius * p.radius;
        for (int i = i0; i <= i1; ++i)
        {
            const double dx = center(i) - p.x;
            for (int j = j0; j <= j1; ++j)
            {
                auto &cell = state[static_cast<std::size_t>(i) * kRaster + j];
                const double dy = center(j) - p.y;
                if (cell == 1 && dx * dx + dy * dy <= r2)
                {
                    cell = 2;
                    ++covered;
                }
            }
        }

        map.patches_.push_back(p);
        map.index_patch(static_cast<std::uint32_t>(map.patches_.size() - 1));
    }
    map.raster_coverage_ = static_cast<double>(covered) / static_cast<double>(inside);
    return map;
}

} // namespace agsim
