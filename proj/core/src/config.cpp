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

#include "hybridmc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>

#include "hybridmc/errors.hpp"
#include "hybridmc/output.hpp"

namespace hybridmc {
namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    std::string_view where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
T get_as(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::size_t positive_size(const json& obj, const char* key, std::size_t fallback) {
  const auto v = get_as<long long>(obj, key, static_cast<long long>(fallback));
  if (v < 1) throw ConfigError(std::string("'") + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

std::vector<LadderLevel> parse_ladder(const json& j) {
  if (!j.is_array()) throw ConfigError("reference.ladder must be an array");
  std::vector<LadderLevel> out;
  for (const auto& level : j) {
    if (!level.is_object()) throw ConfigError("ladder levels are {cells, quadrature_order}");
    reject_unknown(level, {"cells", "quadrature_order"}, "reference.ladder");
    out.push_back({positive_size(level, "cells", 0), positive_size(level, "quadrature_order", 0)});
  }
  return out;
}

json problem_json(const SlabProblem& problem) {
  json regions = json::array();
  for (const auto& r : problem.regions())
    regions.push_back({{"q", r.q},
                       {"sigma_s", r.sigma_s},
                       {"sigma_t", r.sigma_t},
                       {"x_left", r.x_left},
                       {"x_right", r.x_right}});
  return {{"length", problem.length()}, {"regions", regions}};
}

json ladder_json(const std::vector<LadderLevel>& ladder) {
  json out = json::array();
  for (const auto& l : ladder)
    out.push_back({{"cells", l.cells}, {"quadrature_order", l.quadrature_order}});
  return out;
}

}  // namespace

AppConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(root,
                 {"length", "regions", "cells", "histories", "seed", "capture_mode",
                  "replicates", "weight_cutoff", "roulette_survival", "face_mu_floor",
                  "max_events", "method", "workers", "study", "reference"},
                 "config");

  AppConfig cfg;
  if (root.contains("regions")) {
    const auto& regions = root.at("regions");
    if (!regions.is_array() || regions.empty())
      throw ConfigError("'regions' must be a nonempty array");
    std::vector<MaterialRegion> list;
    for (const auto& r : regions) {
      if (!r.is_object()) throw ConfigError("each region must be an object");
      reject_unknown(r, {"x_left", "x_right", "sigma_t", "sigma_s", "q"}, "regions");
      for (const char* key : {"x_left", "x_right", "sigma_t", "sigma_s", "q"})
        if (!r.contains(key)) throw ConfigError(std::string("region is missing '") + key + "'");
      list.push_back({get_as<double>(r, "x_left", 0), get_as<double>(r, "x_right", 0),
                      get_as<double>(r, "sigma_t", 0), get_as<double>(r, "sigma_s", 0),
                      get_as<double>(r, "q", 0)});
    }
    cfg.problem = SlabProblem(std::move(list));
  }
  if (root.contains("length")) {
    const double length = get_as<double>(root, "length", 0.0);
    if (std::abs(length - cfg.problem.length()) > 1e-12 * std::max(1.0, length))
      throw ConfigError("'length' does not match the right edge of the last region");
  }

  cfg.cells = positive_size(root, "cells", cfg.cells);
  auto& run = cfg.run;
  run.histories = positive_size(root, "histories", run.histories);
  run.rng_seed = get_as<std::uint64_t>(root, "seed", run.rng_seed);
  if (root.contains("capture_mode"))
    run.capture_mode = capture_mode_from_string(get_as<std::string>(root, "capture_mode", ""));
  run.replicate_count = positive_size(root, "replicates", run.replicate_count);
  run.weight_cutoff = get_as<double>(root, "weight_cutoff", run.weight_cutoff);
  run.roulette_survival = get_as<double>(root, "roulette_survival", run.roulette_survival);
  run.face_mu_floor = get_as<double>(root, "face_mu_floor", run.face_mu_floor);
  run.max_events = positive_size(root, "max_events", run.max_events);
  run.workers = get_as<std::size_t>(root, "workers", run.workers);
  if (root.contains("method")) cfg.method = method_from_string(get_as<std::string>(root, "method", ""));
  run.validate();

  cfg.study.replicates = run.replicate_count;
  if (root.contains("study")) {
    const auto& s = root.at("study");
    if (!s.is_object()) throw ConfigError("'study' must be an object");
    reject_unknown(s,
                   {"cells", "histories", "replicates", "replicates_by_histories",
                    "capture_modes", "master_seed"},
                   "study");
    auto& st = cfg.study;
    st.cells = get_as<std::vector<std::size_t>>(s, "cells", st.cells);
    st.histories = get_as<std::vector<std::uint64_t>>(s, "histories", st.histories);
    st.replicates = positive_size(s, "replicates", st.replicates);
    if (s.contains("replicates_by_histories")) {
      const auto& m = s.at("replicates_by_histories");
      if (!m.is_object()) throw ConfigError("'replicates_by_histories' must map N to a count");
      for (const auto& [key, value] : m.items()) {
        std::uint64_t n = 0;
        const auto res = std::from_chars(key.data(), key.data() + key.size(), n);
        if (res.ec != std::errc{} || res.ptr != key.data() + key.size())
          throw ConfigError("replicates_by_histories key '" + key + "' is not a count");
        if (!value.is_number_integer() || value.get<long long>() < 1)
          throw ConfigError("replicates_by_histories values must be >= 1");
        st.replicates_by_histories[n] = value.get<std::size_t>();
      }
    }
    if (s.contains("capture_modes")) {
      st.capture_modes.clear();
      for (const auto& m : get_as<std::vector<std::string>>(s, "capture_modes", {}))
        st.capture_modes.push_back(capture_mode_from_string(m));
    }
    st.master_seed = get_as<std::uint64_t>(s, "master_seed", st.master_seed);
    if (st.cells.empty() || st.histories.empty() || st.capture_modes.empty())
      throw ConfigError("study lists must be nonempty");
    for (const auto n : st.histories)
      if (n < 1) throw ConfigError("study histories must be >= 1");
    for (const auto i : st.cells)
      if (i < 1) throw ConfigError("study cells must be >= 1");
  }

  if (root.contains("reference")) {
    const auto& r = root.at("reference");
    if (!r.is_object()) throw ConfigError("'reference' must be an object");
    reject_unknown(r, {"ladder", "required_digits", "cells"}, "reference");
    if (r.contains("ladder")) cfg.reference.ladder = parse_ladder(r.at("ladder"));
    cfg.reference.required_digits =
        get_as<double>(r, "required_digits", cfg.reference.required_digits);
    cfg.reference.cells = get_as<std::vector<std::size_t>>(r, "cells", cfg.reference.cells);
    if (cfg.reference.ladder.size() < 3) throw ConfigError("reference ladder needs >= 3 levels");
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  return parse_config(text);
}

std::string canonical_json(const AppConfig& c) {
  json j = problem_json(c.problem);
  j["cells"] = c.cells;
  j["histories"] = c.run.histories;
  j["seed"] = c.run.rng_seed;
  j["capture_mode"] = std::string(to_string(c.run.capture_mode));
  j["replicates"] = c.run.replicate_count;
  j["weight_cutoff"] = c.run.weight_cutoff;
  j["roulette_survival"] = c.run.roulette_survival;
  j["face_mu_floor"] = c.run.face_mu_floor;
  j["max_events"] = c.run.max_events;
  j["method"] = std::string(to_string(c.method));
  json modes = json::array();
  for (const auto m : c.study.capture_modes) modes.push_back(std::string(to_string(m)));
  json by_n = json::object();
  for (const auto& [n, r] : c.study.replicates_by_histories) by_n[std::to_string(n)] = r;
  j["study"] = {{"cells", c.study.cells},
                {"histories", c.study.histories},
                {"replicates", c.study.replicates},
                {"replicates_by_histories", by_n},
                {"capture_modes", modes},
                {"master_seed", c.study.master_seed}};
  j["reference"] = {{"ladder", ladder_json(c.reference.ladder)},
                    {"required_digits", c.reference.required_digits},
                    {"cells", c.reference.cells}};
  return j.dump();  // nlohmann::json keeps object keys sorted
}

std::string config_hash(const AppConfig& config) { return hex64(fnv1a64(canonical_json(config))); }

std::string reference_key(const SlabProblem& problem, const ReferenceSettings& settings) {
  json j = problem_json(problem);
  j["ladder"] = ladder_json(settings.ladder);
  j["required_digits"] = settings.required_digits;
  return hex64(fnv1a64(j.dump()));
}

namespace {
template <typename T>
std::vector<T> parse_list(std::string_view text) {
  std::vector<T> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    T value{};
    const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size() ||
        value < 1)
      throw ConfigError("bad list entry '" + std::string(item) + "'");
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) throw ConfigError("trailing comma in list");
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}
}  // namespace

std::vector<std::size_t> parse_size_list(std::string_view text) {
  return parse_list<std::size_t>(text);
}
std::vector<std::uint64_t> parse_count_list(std::string_view text) {
  return parse_list<std::uint64_t>(text);
}

}  // namespace hybridmc
