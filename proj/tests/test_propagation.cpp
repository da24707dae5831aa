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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace agsim;

namespace
{
constexpr double kPi = std::numbers::pi;

// Aircraft at ground distance d (bearing 0) flying with horizontal velocity
// making angle `heading` with the direction pointing away from the GS.
AircraftState aircraft_at(double d, double altitude, double speed, double heading)
{
    AircraftState s;
    s.position = to_cartesian(d, 0.0, altitude, 1e7);
    const auto basis = horizontal_basis(s.position);
    // Outward horizontal direction: remove the radial part of +x.
    Vec3 up = s.position.normalized();
    Vec3 out = (Vec3::UnitX() - Vec3::UnitX().dot(up) * up).normalized();
    Vec3 side = up.cross(out);
    if (d == 0.0)
    {
        out = basis[0];
        side = basis[1];
    }
    s.velocity = speed * (std::cos(heading) * out + std::sin(heading) * side);
    s.aircraft_id = 1;
    return s;
}

World los_world(std::vector<AircraftState> ac)
{
    SystemParams p;
    LmpConfig none;
    none.mean_count = 0.0;
    return make_world(p, std::move(ac));
}
} // namespace

TEST_CASE("system parameters")
{
    const SystemParams p;
    CHECK(p.wavelength() == doctest::Approx(299792458.0 / 987e6).epsilon(1e-15));
    CHECK(p.wavelength() == doctest::Approx(0.30375).epsilon(1e-4));
    CHECK(p.tx_power == doctest::Approx(12.589254).epsilon(1e-6));
    CHECK(p.noise_power == doctest::Approx(std::pow(10.0, -13.7)).epsilon(1e-12));
    CHECK_NOTHROW(p.validate());

    SystemParams bad = p;
    bad.M = 10;
    CHECK_THROWS_AS(bad.validate(), ConfigurationError);
    bad = p;
    bad.noise_power = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigurationError);
    bad = p;
    bad.tx_power = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigurationError);
}

TEST_CASE("array_elements")
{
    SystemParams p;
    const double half = p.wavelength() / 2.0;

    p.M = 1;
    auto a = array_elements(p);
    REQUIRE(a.size() == 1);
    CHECK(a.element_offsets[0].norm() == doctest::Approx(0.0));

    p.M = 4;
    a = array_elements(p);
    REQUIRE(a.size() == 4);
    CHECK(a.pitch == doctest::Approx(0.15187).epsilon(1e-4));

    p.M = 64;
    a = array_elements(p);
    REQUIRE(a.size() == 64);
    CHECK(a.side == 8);
    Vec3 centroid = Vec3::Zero();
    double min_x = 1e9, max_x = -1e9;
    for (const Vec3 &e : a.element_offsets)
    {
        centroid += e;
        CHECK(std::abs(e.z()) < 1e-12);
        min_x = std::min(min_x, e.x());
        max_x = std::max(max_x, e.x());
    }
    CHECK(centroid.norm() < 1e-12);
    CHECK(max_x - min_x == doctest::Approx(7.0 * half));
    // Each element has a neighbour exactly half a wavelength away.
    for (const Vec3 &e : a.element_offsets)
    {
        double nearest = 1e9;
        for (const Vec3 &f : a.element_offsets)
            if (&e != &f)
                nearest = std::min(nearest, (e - f).norm());
        CHECK(std::abs(nearest - half) < 1e-9);
    }

    p.M = 12;
    CHECK_THROWS(array_elements(p));
}

TEST_CASE("fspl_amplitude")
{
    const double lambda = SystemParams{}.wavelength();
    CHECK(fspl_amplitude(lambda / (4.0 * kPi), lambda) == doctest::Approx(1.0));
    CHECK(fspl_amplitude(250e3, lambda) == doctest::Approx(9.668e-8).epsilon(1e-3));
    CHECK(20.0 * std::log10(fspl_amplitude(250e3, lambda)) == doctest::Approx(-140.3).epsilon(1e-3));
    CHECK(fspl_amplitude(7.3e3, lambda) == doctest::Approx(3.311e-6).epsilon(1e-3));
    CHECK(20.0 * std::log10(fspl_amplitude(7.3e3, lambda)) == doctest::Approx(-109.6).epsilon(1e-3));
    CHECK_THROWS(fspl_amplitude(0.0, lambda));
    CHECK_THROWS(fspl_amplitude(-5.0, lambda));
}

TEST_CASE("fresnel_vertical")
{
    const double lambda = SystemParams{}.wavelength();
    CHECK(std::abs(fresnel_vertical(1e-9, 3.0, 1e-4, lambda) - cd(-1.0, 0.0)) < 1e-6);
    CHECK(std::abs(fresnel_vertical(1e-9, 15.0, 0.01, lambda) - cd(-1.0, 0.0)) < 1e-6);

    const cd normal = fresnel_vertical(kPi / 2.0, 3.0, 0.0, lambda);
    CHECK(normal.real() == doctest::Approx((3.0 - std::sqrt(3.0)) / (3.0 + std::sqrt(3.0))));
    CHECK(normal.real() == doctest::Approx(0.2679).epsilon(1e-3));
    CHECK(std::abs(normal.imag()) < 1e-12);

    // Brewster angle: sin^2 = 1 / (eps + 1).
    CHECK(std::abs(fresnel_vertical(kPi / 6.0, 3.0, 0.0, lambda)) < 1e-12);

    // Passive ground never amplifies.
    for (double eps : {1.5, 3.0, 10.0, 30.0})
        for (double sigma : {0.0, 1e-4, 1e-2, 1.0})
            for (int i = 1; i <= 200; ++i)
            {
                const double psi = i * (kPi / 2.0) / 200.0;
                CHECK(std::abs(fresnel_vertical(psi, eps, sigma, lambda)) <= 1.0 + 1e-12);
            }
}

TEST_CASE("path_rate")
{
    const double step = 120e-6 / 10.0;
    CHECK(path_rate([](double) { return 1234.5; }, 0.0, step) == doctest::Approx(0.0));

    const Vec3 gs = ground_station_position();
    const AircraftState away = aircraft_at(0.0, 9000.0, 214.0, 0.0);
    // Straight up from the GS: radial recession at the full speed.
    AircraftState climb = away;
    climb.velocity = 214.0 * climb.position.normalized();
    auto radial = [&](double t) { return (climb.position + t * climb.velocity - gs).norm(); };
    CHECK(std::abs(path_rate(radial, 0.0, step) - 214.0) < 1e-3);

    // Tangential motion at the closest point of a straight pass.
    const Vec3 p0 = gs + Vec3(0.0, 0.0, 5000.0);
    auto pass = [&](double t) { return (p0 + t * Vec3(214.0, 0.0, 0.0) - gs).norm(); };
    CHECK(std::abs(path_rate(pass, 0.0, step)) < 1e-3);
}

TEST_CASE("sample_lmp_reflectors")
{
    Rng rng(5);
    LmpConfig c;
    c.mean_count = 0.0;
    CHECK(sample_lmp_reflectors(c, rng).empty());

    c = LmpConfig{};
    double total = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
    {
        const auto list = sample_lmp_reflectors(c, rng);
        total += static_cast<double>(list.size());
        for (const auto &r : list)
        {
            CHECK(r.gain_db_rel_los <= -20.0);
            CHECK(r.gain_db_rel_los >= -40.0);
            const double h = r.position.norm() - kEarthRadius;
            CHECK(h >= -1e-6);
            CHECK(h <= 50.0 + 1e-6);
            CHECK(surface_polar(r.position)[0] <= 5e3 + 1e-6);
        }
    }
    CHECK(total / draws == doctest::Approx(5.0).epsilon(0.03));

    Rng a(9), b(9);
    const auto x = sample_lmp_reflectors(c, a);
    const auto y = sample_lmp_reflectors(c, b);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        CHECK(x[i].position == y[i].position);
        CHECK(x[i].gain_db_rel_los == y[i].gain_db_rel_los);
    }

    c.gain_db = {-10.0, -20.0};
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
}

TEST_CASE("reflector visibility")
{
    PointReflector r;
    r.position = to_cartesian(1000.0, 0.0, 10.0);
    CHECK(r.visible_from(to_cartesian(200e3, 0.0, 10e3)));
    r.visibility_radius = 20e3;
    CHECK(r.visible_from(to_cartesian(15e3, 0.0, 1e3)));
    CHECK_FALSE(r.visible_from(to_cartesian(40e3, 0.0, 1e3)));
}

TEST_CASE("LOS-only channel")
{
    const AircraftState ac = aircraft_at(6000.0, 700.0, 88.0, 2.0);
    const World w = los_world({ac});
    const double lambda = w.params.wavelength();
    const ChannelMatrix H = channel_matrix(w, 0);
    REQUIRE(H.entries.rows() == 64);
    REQUIRE(H.entries.cols() == 1);
    for (int m = 0; m < 64; ++m)
    {
        const double d = (ac.position - (w.gs + w.array.element_offsets[m])).norm();
        CHECK(std::abs(H.entries(m, 0)) == doctest::Approx(lambda / (4.0 * kPi * d)).epsilon(1e-12));
    }

    SUBCASE("static aircraft")
    {
        AircraftState still = ac;
        still.velocity.setZero();
        const World s = los_world({still});
        CHECK(cfo_vector(s)[0] == doctest::Approx(0.0));
        const ChannelMatrix H0 = channel_matrix(s, 0);
        const ChannelMatrix H1 = channel_matrix(advance_world(s, 1000), 1000);
        CHECK((H0.entries - H1.entries).norm() <= 1e-15 * H0.entries.norm());
    }
    SUBCASE("single path factorizes exactly")
    {
        const double nu = cfo_vector(w)[0];
        CHECK(nu != 0.0);
        const Eigen::VectorXcd ref = channel_matrix(w, 0).entries.col(0);
        for (int n = 1; n <= 100; ++n)
        {
            const Eigen::VectorXcd h = channel_matrix(w, n).entries.col(0) * std::polar(1.0, -2.0 * kPi * nu * n);
            CHECK((h - ref).norm() <= 1e-6 * ref.norm());
        }
    }
    SUBCASE("slow gains")
    {
        const CfoVector cfo = cfo_vector(w);
        CHECK((slow_gains(H, cfo) - H.entries).norm() == doctest::Approx(0.0));
        const ChannelMatrix H50 = channel_matrix(w, 50);
        CHECK((slow_gains(H50, cfo) - H.entries).norm() <= 1e-9 * H.entries.norm());
        const CfoVector zero = CfoVector::Zero(1);
        CHECK((slow_gains(H50, zero) - H50.entries).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("channel determinism")
{
    Rng rng(42);
    const auto ac = sample_scenario(scenario_spec(Scenario::TL), 4, rng);
    auto map = std::make_shared<const ReflectorMap>(sample_reflector_map(0.5, rng));
    LmpConfig lmp;
    const auto refl = sample_lmp_reflectors(lmp, rng);
    const World w = make_world(SystemParams{}, ac, map, refl);
    const ChannelMatrix a = channel_matrix(advance_world(w, 777), 777);
    const ChannelMatrix b = channel_matrix(advance_world(w, 777), 777);
    CHECK(a.entries == b.entries);
    CHECK(a.entries.allFinite());
    CHECK(a.time_index == 777);
}

TEST_CASE("GMP presence follows the reflector map")
{
    const AircraftState ac = aircraft_at(20e3, 5000.0, 171.0, 1.0);
    Rng rng(1);
    auto none = std::make_shared<const ReflectorMap>(sample_reflector_map(0.0, rng));
    auto all = std::make_shared<const ReflectorMap>(sample_reflector_map(1.0, rng));

    auto has_gmp = [](const std::vector<Mpc> &paths)
    {
        return std::any_of(paths.begin(), paths.end(), [](const Mpc &p) { return p.kind == PathKind::GMP; });
    };
    const SystemParams p;
    const World w_none = make_world(p, {ac}, none);
    const World w_all = make_world(p, {ac}, all);
    const World w_null = make_world(p, {ac});
    REQUIRE(specular_point(ac.position, w_all.gs).exists);
    CHECK_FALSE(has_gmp(multipath_components(w_none, 0)));
    CHECK_FALSE(has_gmp(multipath_components(w_null, 0)));
    CHECK(has_gmp(multipath_components(w_all, 0)));

    // Half coverage: presence matches the map at the specular point exactly.
    auto half = std::make_shared<const ReflectorMap>(sample_reflector_map(0.5, rng));
    Rng place(3);
    int agree = 0, total = 0;
    for (int i = 0; i < 300; ++i)
    {
        const auto list = sample_scenario(scenario_spec(Scenario::CD), 1, place);
        const World w = make_world(p, list, half);
        const GroundReflection g = specular_point(list[0].position, w.gs);
        const bool expected = g.exists && half->is_reflecting(g.point);
        agree += has_gmp(multipath_components(w, 0)) == expected;
        ++total;
    }
    CHECK(agree == total);

    // GMP amplitude carries the Fresnel coefficient.
    for (const Mpc &m : multipath_components(w_all, 0))
        if (m.kind == PathKind::GMP)
        {
            const GroundReflection g = specular_point(ac.position, w_all.gs);
            const cd rho = fresnel_vertical(g.grazing_angle, 3.0, 1e-4, p.wavelength());
            CHECK(std::abs(m.coefficient - rho) < 1e-9);
        }
}

TEST_CASE("Doppler")
{
    const SystemParams p;
    SUBCASE("head-on en-route aircraft")
    {
        // Lowest, farthest cruise point: the smallest LOS depression angle.
        const World w = los_world({aircraft_at(250e3, 8000.0, 214.0, kPi)});
        const double hz = cfo_vector(w)[0] / p.symbol_duration;
        CHECK(hz == doctest::Approx(704.5).epsilon(1.0 / 704.5));
        CHECK(cfo_vector(w)[0] == doctest::Approx(0.08454).epsilon(1e-3));
    }
    SUBCASE("horizontal heading straight at the GS sees the LOS projection")
    {
        const AircraftState ac = aircraft_at(200e3, 10e3, 214.0, kPi);
        const Vec3 los = (ground_station_position() - ac.position).normalized();
        const World w = los_world({ac});
        CHECK(cfo_vector(w)[0] / p.symbol_duration ==
              doctest::Approx(ac.velocity.dot(los) / p.wavelength()).epsilon(1e-6));
    }
    SUBCASE("receding aircraft has negative Doppler")
    {
        const World w = los_world({aircraft_at(200e3, 10e3, 214.0, 0.0)});
        CHECK(cfo_vector(w)[0] < 0.0);
    }
    SUBCASE("per-path bound over random geometries")
    {
        Rng rng(8);
        auto map = std::make_shared<const ReflectorMap>(sample_reflector_map(1.0, rng));
        LmpConfig lmp;
        lmp.visibility_radius.reset();
        int worst = 0;
        for (int i = 0; i < 10000; ++i)
        {
            const Scenario s = static_cast<Scenario>(i % 3);
            const auto spec = scenario_spec(s);
            const auto ac = sample_scenario(spec, 1, rng);
            const World w = make_world(p, ac, map, i % 10 == 0 ? sample_lmp_reflectors(lmp, rng) : std::vector<PointReflector>{});
            for (const Mpc &m : multipath_components(w, 0))
                worst += std::abs(m.doppler) / p.symbol_duration > spec.speed / p.wavelength() + 1e-3;
        }
        CHECK(worst == 0);
    }
}

TEST_CASE("below the horizon")
{
    const World w = los_world({aircraft_at(600e3, 1000.0, 200.0, 0.0)});
    CHECK_THROWS_AS(channel_matrix(w, 0), std::domain_error);
}

TEST_CASE("slow-gain factorization for en-route geometries")
{
    Rng rng(2718);
    const SystemParams p;
    const std::int64_t n_end = static_cast<std::int64_t>(std::llround(0.5 / p.symbol_duration));
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial)
    {
        auto map = std::make_shared<const ReflectorMap>(sample_reflector_map(0.5, rng));
        const auto ac = sample_scenario(scenario_spec(Scenario::EC), 8, rng);
        const World w = make_world(p, ac, map, sample_lmp_reflectors(LmpConfig{}, rng));
        const CfoVector cfo = cfo_vector(w);
        const Eigen::MatrixXcd H0 = channel_matrix(w, 0).entries;
        for (std::int64_t n : {n_end / 4, n_end / 2, n_end})
        {
            const Eigen::MatrixXcd S = slow_gains(channel_matrix(advance_world(w, n), n), cfo);
            worst = std::max(worst, (S - H0).norm() / H0.norm());
        }
    }
    CHECK(worst <= 0.05);
}

TEST_CASE("channel trace")
{
    ChannelMatrix H;
    H.entries = Eigen::MatrixXcd::Zero(2, 1);
    H.entries(0, 0) = cd(1.0, -0.5);
    H.entries(1, 0) = cd(1.0 / 3.0, 2e-9);
    H.time_index = 12;
    std::ostringstream os;
    write_channel_trace(os, H);
    CHECK(os.str() == "n,m,k,re,im\n12,1,1,1,-0.5\n12,2,1,0.333333,2e-09\n");
}
