// Copyright 2026 The MapsTP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MAPSTP__CLI__SELFCHECK_HPP_
#define MAPSTP__CLI__SELFCHECK_HPP_

#include <string>
#include <vector>

namespace mapstp::cli
{

struct CheckResult
{
  std::string module;
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity (error, mismatch count, ...)
  double tolerance = 0.0;  // pass iff value <= tolerance (or < for strict checks)
  std::string detail;
};

struct SelfCheckOptions
{
  /// Negative control: replaces the conv2d backward rule with a wrong one.
  bool inject_conv_fault = false;
};

std::vector<CheckResult> run_selfcheck(const SelfCheckOptions & options = {});
std::string format_check(const CheckResult & r);

}  // namespace mapstp::cli

#endif  // MAPSTP__CLI__SELFCHECK_HPP_
