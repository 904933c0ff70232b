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

#ifndef HYBRIDMC_CONFIG_HPP
#define HYBRIDMC_CONFIG_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hybridmc/experiments.hpp"
#include "hybridmc/lo_solvers.hpp"
#include "hybridmc/problem.hpp"
#include "hybridmc/sn_reference.hpp"

namespace hybridmc {

struct ReferenceSettings {
  std::vector<LadderLevel> ladder = default_ladder();
  double required_digits = 6.0;
  std::vector<std::size_t> cells{4, 8, 16, 32, 64};
};

/// Everything a run needs. Parsed from a JSON document; see README for keys.
struct AppConfig {
  SlabProblem problem = benchmark_problem();
  std::size_t cells = 16;
  RunConfig run;
  Method method = Method::hqd;
  StudyConfig study;
  ReferenceSettings reference;
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
AppConfig parse_config(std::string_view json_text);
AppConfig load_config(const std::filesystem::path& path);

/// Key-sorted JSON of every result-affecting setting. Worker count is left
/// out because results do not depend on it.
std::string canonical_json(const AppConfig& config);
std::string config_hash(const AppConfig& config);

/// Hash of the inputs a reference solution depends on (problem and ladder).
std::string reference_key(const SlabProblem& problem, const ReferenceSettings& settings);

std::vector<std::size_t> parse_size_list(std::string_view text);
std::vector<std::uint64_t> parse_count_list(std::string_view text);

}  // namespace hybridmc

#endif  // HYBRIDMC_CONFIG_HPP
