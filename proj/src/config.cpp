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

#include "agsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

namespace agsim
{

const char *const kCsvHeader = "scenario,estimator,detector,eta,k,m,elapsed_ms,p_out,ci_low,ci_high,trials";

namespace
{

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string &what)
{
    throw ConfigurationError("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_list(std::string_view value, int line)
{
    std::vector<std::string_view> items;
    std::size_t start = 0;
    while (true)
    {
        const auto comma = value.find(',', start);
        const auto item = trim(value.substr(start, comma == std::string_view::npos ? value.npos : comma - start));
        if (item.empty())
            fail(line, "empty list element");
        items.push_back(item);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return items;
}

template <typename Int> Int parse_int(std::string_view s, int line, const char *key)
{
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        fail(line, std::string("malformed integer for '") + key + "': " + std::string(s));
    return v;
}

double parse_double(std::string_view s, int line, const char *key)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        fail(line, std::string("malformed number for '") + key + "': " + std::string(s));
    return v;
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const Enum (&values)[N], int line, const char *key)
{
    std::string valid;
    for (Enum e : values)
    {
        if (to_string(e) == s)
            return e;
        valid += (valid.empty() ? "" : ", ") + std::string(to_string(e));
    }
    fail(line, std::string("invalid ") + key + " '" + std::string(s) + "' (valid: " + valid + ")");
}

constexpr Scenario kScenarios[] = {Scenario::TL, Scenario::CD, Scenario::EC};
constexpr Estimator kEstimators[] = {Estimator::TD, Estimator::ZC, Estimator::Perfect};
constexpr Detector kDetectors[] = {Detector::ZF, Detector::VMS};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

RunConfig parse_config(std::string_view text)
{
    RunConfig config;
    std::set<std::string, std::less<>> seen;
    bool have_scenario = false;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(line_no, "expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty())
            fail(line_no, "missing key");
        if (value.empty())
            fail(line_no, "missing value for '" + std::string(key) + "'");
        if (!seen.emplace(key).second)
            fail(line_no, "duplicate key '" + std::string(key) + "'");

        TrialConfig &t = config.trial;
        if (key == "scenario")
        {
            t.scenario = scenario_spec(parse_enum(value, kScenarios, line_no, "scenario"));
            have_scenario = true;
        }
        else if (key == "k")
        {
            t.K = parse_int<int>(value, line_no, "k");
            if (t.K < 1)
                fail(line_no, "k must be at least 1");
        }
        else if (key == "m")
        {
            t.params.M = parse_int<int>(value, line_no, "m");
            const int side = static_cast<int>(std::lround(std::sqrt(std::max(t.params.M, 0))));
            if (t.params.M < 1 || side * side != t.params.M)
                fail(line_no, "m must be a positive perfect square");
        }
        else if (key == "trials")
        {
            t.trials = parse_int<std::int64_t>(value, line_no, "trials");
            if (t.trials < 1)
                fail(line_no, "trials must be at least 1");
        }
        else if (key == "seed")
            t.master_seed = parse_int<std::uint64_t>(value, line_no, "seed");
        else if (key == "estimators")
        {
            t.estimators.clear();
            for (auto item : split_list(value, line_no))
                t.estimators.push_back(parse_enum(item, kEstimators, line_no, "estimator"));
        }
        else if (key == "detectors")
        {
            t.detectors.clear();
            for (auto item : split_list(value, line_no))
                t.detectors.push_back(parse_enum(item, kDetectors, line_no, "detector"));
        }
        else if (key == "eta_list")
        {
            t.eta_values.clear();
            for (auto item : split_list(value, line_no))
            {
                const double eta = parse_double(item, line_no, "eta_list");
                if (eta < -1.0 || eta > 1.0)
                    fail(line_no, "eta must lie in [-1, 1]");
                t.eta_values.push_back(eta);
            }
        }
        else if (key == "elapsed_ms_list")
        {
            t.elapsed_grid.clear();
            for (auto item : split_list(value, line_no))
            {
                const double ms = parse_double(item, line_no, "elapsed_ms_list");
                if (ms < 0.0)
                    fail(line_no, "elapsed time must be non-negative");
                t.elapsed_grid.push_back(ms * 1e-3);
            }
            if (!std::is_sorted(t.elapsed_grid.begin(), t.elapsed_grid.end()))
                fail(line_no, "elapsed_ms_list must be sorted ascending");
        }
        else if (key == "out")
            config.out = std::string(value);
        else
            fail(line_no, "unknown key '" + std::string(key) + "'");
    }

    if (!have_scenario)
        throw ConfigurationError("missing required key 'scenario'");
    config.trial.validate();
    return config;
}

RunConfig load_config(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void write_csv(std::ostream &os, const Report &report, std::int64_t trials)
{
    std::vector<const CellResult *> rows;
    for (const CellResult &c : report.cells)
        rows.push_back(&c);
    std::sort(rows.begin(), rows.end(),
              [](const CellResult *a, const CellResult *b)
              {
                  return std::make_tuple(to_string(a->estimator), to_string(a->detector), a->eta, a->elapsed) <
                         std::make_tuple(to_string(b->estimator), to_string(b->detector), b->eta, b->elapsed);
              });

    os << kCsvHeader << '\n';
    for (const CellResult *c : rows)
    {
        os << to_string(report.scenario) << ',' << to_string(c->estimator) << ',' << to_string(c->detector) << ','
           << fmt(c->eta) << ',' << report.K << ',' << report.M << ',' << fmt(c->elapsed * 1e3) << ','
           << fmt(c->estimate.p_out) << ',' << fmt(c->estimate.ci_low) << ',' << fmt(c->estimate.ci_high) << ','
           << trials << '\n';
    }
}

std::string format_csv(const Report &report, std::int64_t trials)
{
    std::ostringstream ss;
    write_csv(ss, report, trials);
    return ss.str();
}

void write_file_atomic(const std::string &path, const std::string &content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
    {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename to '" + path + "': " + ec.message());
    }
}

int run(const RunConfig &config, int workers, std::ostream &log)
{
    try
    {
        const Report report = run_experiment(config.trial, workers);
        write_file_atomic(config.out, format_csv(report, config.trial.trials));
        for (const CellResult &c : report.cells)
        {
            char line[160];
            std::snprintf(line, sizeof line, "%s %s+%s eta=%.6g t=%.6g ms p_out=%.6g [%.6g, %.6g]\n",
                          std::string(to_string(report.scenario)).c_str(),
                          std::string(to_string(c.estimator)).c_str(), std::string(to_string(c.detector)).c_str(),
                          c.eta, c.elapsed * 1e3, c.estimate.p_out, c.estimate.ci_low, c.estimate.ci_high);
            log << line;
        }
        log << "wrote " << config.out << '\n';
        return 0;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace agsim
