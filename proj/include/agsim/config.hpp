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

#ifndef AGSIM_CONFIG_HPP
#define AGSIM_CONFIG_HPP

#include "agsim/harness.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace agsim
{

struct RunConfig
{
    TrialConfig trial;
    std::string out = "outage.csv";
};

// Grammar: one "key = value" per line, '#' starts a comment, lists are
// comma separated. Keys: scenario (required), k, m, trials, seed,
// estimators, detectors, eta_list, elapsed_ms_list, out.
// Throws ConfigurationError with the offending line number.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string &path);

extern const char *const kCsvHeader;

void write_csv(std::ostream &os, const Report &report, std::int64_t trials);
std::string format_csv(const Report &report, std::int64_t trials);

/// Writes `content` to `path` through a sibling temporary file and rename.
void write_file_atomic(const std::string &path, const std::string &content);

/// Runs the experiment, writes the CSV and prints one summary line per cell.
/// Returns the process exit status.
int run(const RunConfig &config, int workers, std::ostream &log);

} // namespace agsim

#endif
