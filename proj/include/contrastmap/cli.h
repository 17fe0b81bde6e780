/*
 * Copyright 2026 The contrastmap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CONTRASTMAP_CLI_H_
#define CONTRASTMAP_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace contrastmap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

// Entry point behind the `contrastmap` binary. `args` excludes the program
// name. Diagnostics go to `err` as a single line prefixed with E1 (usage),
// E2 (input) or E3 (numeric).
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace contrastmap::cli

#endif  // CONTRASTMAP_CLI_H_
