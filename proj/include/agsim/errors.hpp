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

#ifndef AGSIM_ERRORS_HPP
#define AGSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace agsim
{

// Invalid or infeasible simulation configuration.
class ConfigurationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Matrix too ill-conditioned to invert (condition number above the guard).
class SingularMatrixError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace agsim

#endif
