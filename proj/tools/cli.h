// Copyright 2026 The vfm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VFM_TOOLS_CLI_H_
#define VFM_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace vfm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kProtocolFailure = 2;
inline constexpr int kSolverFailure = 3;

// Runs `vfm <args...>` (args excludes the program name) and returns the exit
// code. Tables go to `out`, diagnostics to `err`.
int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err);

}  // namespace vfm::cli

#endif  // VFM_TOOLS_CLI_H_
