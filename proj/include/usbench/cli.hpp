// Copyright 2026 The usbench Authors. All Rights Reserved.
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

#ifndef USBENCH_CLI_HPP_
#define USBENCH_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace usbench::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Runs the usbench command line. `args` excludes the program name.
// Subcommands: evaluate, convert, classify, report.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// --workers, else USBENCH_WORKERS, else hardware concurrency (>= 1).
unsigned resolve_workers(int flag_value);

}  // namespace usbench::cli

#endif  // USBENCH_CLI_HPP_
