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

#include "agsim/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>

namespace agsim
{

namespace
{
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Minimum distance from the Earth center to the segment a-b.
double segment_clearance(const Vec3 &a, const Vec3 &b)
{
    const Vec3 d = b - a;
    const double t = std::clamp(-a.dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (a + t * d).norm();
}

Eigen::VectorXd element_lengths(const World &world, const Vec3 &from)
{
    const int M = world.array.size();
    Eigen::VectorXd out(M);
    for (int m = 0; m < M; ++m)
        out[m] = (from - (world.gs + world.array.element_offsets[static_cast<std::size_t>(m)])).norm();
    return out;
}

double to_cycles_per_sample(double rate, const SystemParams &params)
{
    return -rate / params.wavelength() * params.symbol_duration;
}

double reflected_length(const Vec3 &ac, const Vec3 &gs)
{
    const GroundReflection r = specular_point(ac, gs);
    return (ac - r.point).norm() + (r.point - gs).norm();
}

double rate_step(const SystemParams &params) { return params.symbol_duration / 10.0; }
} // namespace

void SystemParams::validate() const
{
    if (!(carrier_frequency > 0.0) || !(symbol_duration > 0.0) || !(tx_power > 0.0) || !(noise_power >= 0.0) ||
        !(rate_threshold > 0.0))
        throw ConfigurationError("System parameters must be positive.");
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
    if (M < 1 || side * side != M)
        throw ConfigurationError("Antenna count M = " + std::to_string(M) + " is not a perfect square.");
}

ArrayGeometry array_elements(const SystemParams &params)
{
    params.validate();
    ArrayGeometry a;
    a.side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(params.M))));
    a.pitch = 0.5 * params.wavelength();
    const double mid = 0.5 * (a.side - 1);
    for (int i = 0; i < a.side; ++i)
        for (int j = 0; j < a.side; ++j)
            a.element_offsets.emplace_back((i - mid) * a.pitch, (j - mid) * a.pitch, 0.0);
    return a;
}

double fspl_amplitude(double d, double wavelength)
{
    if (!(d > 0.0))
        throw std::invalid_argument("Path length must be positive.");
    return wavelength / (4.0 * std::numbers::pi * d);
}

cd fresnel_vertical(double grazing, double eps_r, double sigma, double wavelength)
{
    if (!(grazing > 0.0) || grazing > std::numbers::pi / 2.0 + 1e-12)
        throw std::invalid_argument("Grazing angle must lie in (0, pi/2].");
    const cd eps(eps_r, -60.0 * sigma * wavelength);
    const double s = std::sin(grazing);
    const double c = std::cos(grazing);
    const cd root = std::sqrt(eps - c * c);
    return (eps * s - root) / (eps * s + root);
}

double path_rate(const std::function<double(double)> &length_at, double t, double step)
{
    return (length_at(t + step) - length_at(t - step)) / (2.0 * step);
}

bool PointReflector::visible_from(const Vec3 &ac) const
{
    if (!visibility_radius)
        return true;
    const auto [d_ac, b_ac] = surface_polar(ac);
    const auto [d_r, b_r] = surface_polar(position);
    const double dx = d_ac * std::cos(b_ac) - d_r * std::cos(b_r);
    const double dy = d_ac * std::sin(b_ac) - d_r * std::sin(b_r);
    return std::hypot(dx, dy) <= *visibility_radius;
}

void LmpConfig::validate() const
{
    if (!(mean_count >= 0.0) || !(disk_radius > 0.0) || height.lo < 0.0 || height.hi < height.lo ||
        gain_db.hi < gain_db.lo || (visibility_radius && !(*visibility_radius > 0.0)))
        throw ConfigurationError("Invalid lateral-reflector configuration.");
}

std::vector<PointReflector> sample_lmp_reflectors(const LmpConfig &config, Rng &rng)
{
    config.validate();
    std::vector<PointReflector> out;
    if (config.mean_count == 0.0)
        return out;

    std::poisson_distribution<int> count(config.mean_count);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> height(config.height.lo, config.height.hi);
    std::uniform_real_distribution<double> gain(config.gain_db.lo, config.gain_db.hi);

    const int n = count(rng);
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
    {
        const double rho = config.disk_radius * std::sqrt(unit(rng));
        const double bearing = kTwoPi * unit(rng);
        PointReflector r;
        r.position = to_cartesian(rho, bearing, height(rng));
        r.gain_db_rel_los = gain(rng);
        r.visibility_radius = config.visibility_radius;
        out.push_back(r);
    }
    return out;
}

World make_world(const SystemParams &params, std::vector<AircraftState> aircraft,
                 std::shared_ptr<const ReflectorMap> map, std::vector<PointReflector> reflectors,
                 GroundConstants ground, Vec3 gs)
{
    World w;
    w.params = params;
    w.gs = gs;
    w.ground = ground;
    w.array = array_elements(params);
    w.map = std::move(map);
    w.reflectors = std::move(reflectors);
    w.aircraft = std::move(aircraft);
    w.time_index = 0;
    for (int k = 0; k < w.K(); ++k)
        w.carrier.push_back({(w.aircraft[static_cast<std::size_t>(k)].position - w.gs).norm(), los_doppler(w, k), 0});
    return w;
}

World advance_world(const World &world, std::int64_t n)
{
    World out = world;
    const double dt = static_cast<double>(n - world.time_index) * world.params.symbol_duration;
    for (auto &ac : out.aircraft)
        ac = propagate(ac, dt);
    out.time_index = n;
    return out;
}

double los_doppler(const World &world, int k)
{
    const AircraftState &ac = world.aircraft.at(static_cast<std::size_t>(k));
    auto length = [&](double t) { return (propagate(ac, t).position - world.gs).norm(); };
    return to_cycles_per_sample(path_rate(length, 0.0, rate_step(world.params)), world.params);
}

std::vector<Mpc> multipath_components(const World &world, int k)
{
    const AircraftState &ac = world.aircraft.at(static_cast<std::size_t>(k));
    const SystemParams &params = world.params;
    const double step = rate_step(params);
    std::vector<Mpc> out;

    Mpc los;
    los.kind = PathKind::LOS;
    los.lengths = element_lengths(world, ac.position);
    los.doppler = los_doppler(world, k);
    out.push_back(std::move(los));

    const GroundReflection refl = specular_point(ac.position, world.gs);
    if (refl.exists && world.map && world.map->is_reflecting(refl.point))
    {
        Mpc gmp;
        gmp.kind = PathKind::GMP;
        gmp.coefficient = fresnel_vertical(refl.grazing_angle, world.ground.eps_r, world.ground.sigma,
                                           params.wavelength());
        gmp.lengths = element_lengths(world, refl.point).array() + (ac.position - refl.point).norm();
        auto length = [&](double t) { return reflected_length(propagate(ac, t).position, world.gs); };
        gmp.doppler = to_cycles_per_sample(path_rate(length, 0.0, step), params);
        out.push_back(std::move(gmp));
    }

    for (const PointReflector &r : world.reflectors)
    {
        if (!r.visible_from(ac.position))
            continue;
        Mpc lmp;
        lmp.kind = PathKind::LMP;
        lmp.coefficient = std::pow(10.0, r.gain_db_rel_los / 20.0);
        lmp.lengths = element_lengths(world, r.position).array() + (ac.position - r.position).norm();
        const double tail = (r.position - world.gs).norm();
        auto length = [&](double t) { return (propagate(ac, t).position - r.position).norm() + tail; };
        lmp.doppler = to_cycles_per_sample(path_rate(length, 0.0, step), params);
        out.push_back(std::move(lmp));
    }
    return out;
}

ChannelMatrix channel_matrix(const World &world, std::int64_t n)
{
    const int M = world.array.size();
    const int K = world.K();
    const double lambda = world.params.wavelength();
    const auto offset = static_cast<double>(n - world.time_index);

    ChannelMatrix H;
    H.time_index = n;
    H.entries = Eigen::MatrixXcd::Zero(M, K);

    for (int k = 0; k < K; ++k)
    {
        const Vec3 &pos = world.aircraft[static_cast<std::size_t>(k)].position;
        if (segment_clearance(world.gs, pos) < kEarthRadius)
            throw std::domain_error("Aircraft " + std::to_string(k + 1) + " is below the ground-station horizon.");

        // Bulk phase correction in cycles; zero for the reference epoch.
        double bulk = 0.0;
        if (world.carrier_phase == CarrierPhase::CfoReferenced && !world.carrier.empty())
        {
            const CarrierReference &ref = world.carrier[static_cast<std::size_t>(k)];
            bulk = ((pos - world.gs).norm() - ref.los_length) / lambda +
                   ref.doppler * static_cast<double>(world.time_index - ref.index);
        }

        for (const Mpc &p : multipath_components(world, k))
        {
            for (int m = 0; m < M; ++m)
            {
                const double cycles = -p.lengths[m] / lambda + p.doppler * offset + bulk;
                H.entries(m, k) += p.amplitude(m, lambda) * std::polar(1.0, kTwoPi * cycles);
            }
        }
    }
    return H;
}

CfoVector cfo_vector(const World &world)
{
    CfoVector out(world.K());
    for (int k = 0; k < world.K(); ++k)
        out[k] = los_doppler(world, k);
    return out;
}

Eigen::VectorXcd cfo_phasors(const CfoVector &cfo, std::int64_t n)
{
    Eigen::VectorXcd out(cfo.size());
    for (Eigen::Index k = 0; k < cfo.size(); ++k)
        out[k] = std::polar(1.0, kTwoPi * cfo[k] * static_cast<double>(n));
    return out;
}

Eigen::MatrixXcd slow_gains(const ChannelMatrix &H, const CfoVector &cfo)
{
    if (cfo.size() != H.entries.cols())
        throw std::invalid_argument("CFO vector length does not match the number of aircraft.");
    return H.entries * cfo_phasors(cfo, H.time_index).conjugate().asDiagonal();
}

void write_channel_trace(std::ostream &os, const ChannelMatrix &H, bool header)
{
    if (header)
        os << "n,m,k,re,im\n";
    char buf[128];
    for (Eigen::Index k = 0; k < H.entries.cols(); ++k)
        for (Eigen::Index m = 0; m < H.entries.rows(); ++m)
        {
            const cd v = H.entries(m, k);
            std::snprintf(buf, sizeof(buf), "%lld,%lld,%lld,%.6g,%.6g\n", static_cast<long long>(H.time_index),
                          static_cast<long long>(m + 1), static_cast<long long>(k + 1), v.real(), v.imag());
            os << buf;
        }
}

} // namespace agsim
