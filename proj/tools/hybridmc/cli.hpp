// Copyright 2026 The hybridmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYBRIDMC_TOOLS_CLI_HPP
#define HYBRIDMC_TOOLS_CLI_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hybridmc/config.hpp"
#include "hybridmc/sn_reference.hpp"

namespace hybridmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCertification = 3;

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "HYBRIDMC_OUTPUT_ROOT";

/// $HYBRIDMC_OUTPUT_ROOT, else ./hybridmc-runs.
std::filesystem::path default_output_root();

/// Runs one subcommand. Never throws; failures map to the exit codes above
/// with a one-line message on `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// References for `cells`, loaded from `cache_dir` when present, otherwise
/// computed with one ladder solve and stored there.
std::map<std::size_t, BenchmarkSolution> obtain_references(
    const SlabProblem& problem, const ReferenceSettings& settings,
    const std::vector<std::size_t>& cells, const std::filesystem::path& cache_dir,
    std::ostream& log);

std::string serialize_reference(const BenchmarkSolution& ref);
BenchmarkSolution deserialize_reference(const std::string& text);

}  // namespace hybridmc::cli

#endif  // HYBRIDMC_TOOLS_CLI_HPP
