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

#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "hybridmc/closures.hpp"
#include "hybridmc/errors.hpp"
#include "hybridmc/experiments.hpp"
#include "hybridmc/lo_solvers.hpp"
#include "hybridmc/mc_engine.hpp"
#include "hybridmc/output.hpp"

namespace hybridmc::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Flag values as typed; empty means "not given".
struct Flags {
  std::string config;
  std::string output_root;
  std::string cache_dir;
  std::string cells;
  std::string histories;
  std::string capture_mode;
  std::string method;
  std::string ladder;
  std::uint64_t seed = 0;
  std::uint64_t master_seed = 0;
  std::size_t replicates = 0;
  std::size_t workers = 0;
  bool seed_set = false;
  bool master_seed_set = false;
  bool replicates_set = false;
  bool workers_set = false;
};

std::size_t single_cells(const std::string& text) {
  const auto list = parse_size_list(text);
  if (list.size() != 1) throw ConfigError("--cells takes one value for this command");
  return list.front();
}

// Precedence: built-in defaults < config file < flags.
AppConfig resolve(const std::string& command, const Flags& f) {
  AppConfig c = f.config.empty() ? AppConfig{} : load_config(f.config);
  const bool lists = command == "study" || command == "reference";
  if (!f.cells.empty()) {
    if (command == "study")
      c.study.cells = parse_size_list(f.cells);
    else if (command == "reference")
      c.reference.cells = parse_size_list(f.cells);
    else
      c.cells = single_cells(f.cells);
  }
  if (!f.histories.empty()) {
    if (lists) {
      c.study.histories = parse_count_list(f.histories);
    } else {
      const auto n = parse_count_list(f.histories);
      if (n.size() != 1) throw ConfigError("--histories takes one value for this command");
      c.run.histories = n.front();
    }
  }
  if (f.seed_set) c.run.rng_seed = f.seed;
  if (f.master_seed_set) c.study.master_seed = f.master_seed;
  if (f.replicates_set) {
    if (f.replicates < 1) throw ConfigError("--replicates must be >= 1");
    c.study.replicates = f.replicates;
    c.study.replicates_by_histories.clear();
  }
  if (!f.capture_mode.empty()) {
    c.run.capture_mode = capture_mode_from_string(f.capture_mode);
    c.study.capture_modes = {c.run.capture_mode};
  }
  if (!f.method.empty() && f.method != "both") c.method = method_from_string(f.method);
  if (!f.ladder.empty()) {
    if (f.ladder == "default")
      c.reference.ladder = default_ladder();
    else if (f.ladder == "alternate")
      c.reference.ladder = alternate_ladder();
    else
      throw ConfigError("--ladder must be 'default' or 'alternate'");
  }
  if (f.workers_set) c.run.workers = f.workers;
  c.run.validate();
  return c;
}

fs::path output_root(const Flags& f) {
  return f.output_root.empty() ? default_output_root() : fs::path(f.output_root);
}

fs::path cache_dir(const Flags& f) {
  return f.cache_dir.empty() ? output_root(f) / "reference-cache" : fs::path(f.cache_dir);
}

// Manifest: everything needed to rerun, nothing that varies between reruns.
void write_manifest(const fs::path& dir, const std::string& command, const AppConfig& c,
                    std::uint64_t master_seed, const std::vector<std::string>& artifacts) {
  json m;
  m["command"] = command;
  m["version"] = HYBRIDMC_VERSION;
  m["config_hash"] = config_hash(c);
  m["master_seed"] = master_seed;
  m["reference_key"] = reference_key(c.problem, c.reference);
  m["config"] = json::parse(canonical_json(c));
  m["notes"] = {{"linf", std::string(linf_norm_note())},
                {"aggregation", std::string(aggregation_note())}};
  m["artifacts"] = artifacts;
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

fs::path run_directory(const Flags& f, const std::string& command, const AppConfig& c,
                       std::uint64_t seed) {
  return output_root(f) / (command + "-" + config_hash(c) + "-seed" + std::to_string(seed));
}

template <class Writer>
std::string to_text(Writer&& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

struct McProducts {
  Mesh1D mesh;
  TallySet tallies;
  ClosureSet closures;
};

McProducts run_mc(const AppConfig& c) {
  auto mesh = build_uniform_mesh(c.problem, c.cells);
  auto tallies = run_histories(c.problem, mesh, c.run);
  auto closures = compute_closures(tallies, mesh, c.run.rng_seed);
  return {std::move(mesh), std::move(tallies), std::move(closures)};
}

int cmd_mc(const Flags& f, std::ostream& out) {
  const auto c = resolve("mc", f);
  const auto r = run_mc(c);
  const auto dir = run_directory(f, "mc", c, c.run.rng_seed);
  write_text_file(dir / "tallies.csv", to_text([&](std::ostream& s) { write_tally_csv(s, r.tallies); }));
  write_text_file(dir / "flux.csv", to_text([&](std::ostream& s) {
                    CsvWriter csv(s);
                    csv.row("cell", "x_center", "phi_mc", "rel_stderr", "seed", "histories");
                    for (std::size_t i = 0; i < r.mesh.cells(); ++i)
                      csv.row(i, r.mesh.center(i), r.closures.phi_mc[i],
                              r.closures.phi_rel_stderr[i], c.run.rng_seed, c.run.histories);
                  }));
  write_manifest(dir, "mc", c, c.run.rng_seed, {"tallies.csv", "flux.csv"});
  out << "mc: " << c.run.histories << " histories on " << c.cells << " cells -> " << dir.string()
      << "\n";
  return kExitOk;
}

int cmd_dump_closures(const Flags& f, std::ostream& out) {
  const auto c = resolve("dump-closures", f);
  const auto r = run_mc(c);
  const auto dir = run_directory(f, "dump-closures", c, c.run.rng_seed);
  write_text_file(dir / "closures.csv",
                  to_text([&](std::ostream& s) { write_closure_csv(s, r.closures); }));
  write_text_file(dir / "tallies.csv", to_text([&](std::ostream& s) { write_tally_csv(s, r.tallies); }));
  write_manifest(dir, "dump-closures", c, c.run.rng_seed, {"closures.csv", "tallies.csv"});
  out << "closures: " << r.closures.fallback_cells.size() << " fallback cells -> "
      << dir.string() << "\n";
  return kExitOk;
}

int cmd_hybrid(const Flags& f, std::ostream& out, std::ostream& log) {
  const auto c = resolve("hybrid", f);
  std::vector<Method> methods{c.method};
  if (f.method == "both") methods = {Method::hqd, Method::hsm};
  const auto refs = obtain_references(c.problem, c.reference, {c.cells}, cache_dir(f), log);
  const auto& ref = refs.at(c.cells);
  const auto r = run_mc(c);
  const auto dir = run_directory(f, "hybrid", c, c.run.rng_seed);
  std::vector<std::string> artifacts{"closures.csv"};
  write_text_file(dir / "closures.csv",
                  to_text([&](std::ostream& s) { write_closure_csv(s, r.closures); }));
  std::ostringstream errors;
  CsvWriter csv(errors);
  csv.row("estimator", "cells", "histories", "seed", "l2", "linf");
  csv.row("MC", c.cells, c.run.histories, c.run.rng_seed,
          relative_l2_error(r.closures.phi_mc, ref.phi, r.mesh), linf_error(r.closures.phi_mc, ref.phi));
  for (const auto m : methods) {
    const auto sol = solve_hybrid(c.problem, r.mesh, r.closures, m);
    const auto balance = particle_balance(c.problem, r.mesh, r.closures, m, sol.phi);
    if (balance.relative_residual() > 1e-10)
      throw InvariantError("low-order solution violates particle balance");
    const std::string name = "solution_" + std::string(to_string(m)) + ".csv";
    write_text_file(dir / name, to_text([&](std::ostream& s) { write_solution_csv(s, r.mesh, sol); }));
    artifacts.push_back(name);
    const double l2 = relative_l2_error(sol.phi, ref.phi, r.mesh);
    csv.row(to_string(m), c.cells, c.run.histories, c.run.rng_seed, l2, linf_error(sol.phi, ref.phi));
    out << to_string(m) << ": relative L2 error " << format_double(l2) << "\n";
  }
  write_text_file(dir / "errors.csv", errors.str());
  artifacts.push_back("errors.csv");
  write_manifest(dir, "hybrid", c, c.run.rng_seed, artifacts);
  out << "hybrid -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_reference(const Flags& f, std::ostream& out, std::ostream& log) {
  const auto c = resolve("reference", f);
  const auto refs = obtain_references(c.problem, c.reference, c.reference.cells, cache_dir(f), log);
  std::vector<BenchmarkSolution> list;
  for (const auto cells : c.reference.cells) list.push_back(refs.at(cells));
  const auto dir = output_root(f) / ("reference-" + reference_key(c.problem, c.reference));
  write_text_file(dir / "benchmark.csv", to_text([&](std::ostream& s) { write_benchmark_csv(s, list); }));
  write_text_file(dir / "benchmark_meta.json", benchmark_metadata_json(list));
  write_manifest(dir, "reference", c, 0, {"benchmark.csv", "benchmark_meta.json"});
  for (const auto& ref : list)
    out << "I=" << ref.mesh.cells() << ": certified digits " << format_double(ref.min_certified_digits)
        << "\n";
  out << "reference -> " << dir.string() << "\n";
  return kExitOk;
}

int cmd_study(const Flags& f, std::ostream& out, std::ostream& log) {
  const auto c = resolve("study", f);
  const auto refs = obtain_references(c.problem, c.reference, c.study.cells, cache_dir(f), log);
  RunConfig base = c.run;
  const auto report = grid_refinement_study(c.problem, c.study, refs, base, c.run.workers);
  const auto dir = run_directory(f, "study", c, c.study.master_seed);
  write_study_outputs(dir, report);
  write_manifest(dir, "study", c, c.study.master_seed,
                 {"win_ratio.csv", "errors.csv", "error_means.csv", "error_ratios.csv",
                  "sorted_errors.csv", "timing.csv"});
  out << "study: " << report.results.size() << " replicates -> " << dir.string() << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("-c,--config", f.config, "JSON configuration file");
  sub->add_option("-o,--output-root", f.output_root,
                  std::string("root of run directories (default $") + kOutputRootEnv +
                      " or ./hybridmc-runs)");
  sub->add_option("--cache-dir", f.cache_dir, "reference cache (default <output-root>/reference-cache)");
  sub->add_option("--workers", f.workers, "worker threads (0 = hardware)")
      ->each([&f](const std::string&) { f.workers_set = true; });
  sub->add_option("--cells", f.cells, "cell count, or comma list for reference/study");
}

void add_mc_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--histories", f.histories, "history count");
  sub->add_option("--seed", f.seed, "RNG seed")->each([&f](const std::string&) { f.seed_set = true; });
  sub->add_option("--capture-mode", f.capture_mode, "analog or implicit");
}

}  // namespace

fs::path default_output_root() {
  if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0')
    return fs::path(env);
  return fs::path("hybridmc-runs");
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid Monte Carlo / low-order transport for 1D slabs", "hybridmc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(HYBRIDMC_VERSION));
  Flags f;

  auto* reference = app.add_subcommand("reference", "build and certify the S_N reference");
  add_common(reference, f);
  reference->add_option("--ladder", f.ladder, "default or alternate refinement ladder");

  auto* mc = app.add_subcommand("mc", "plain Monte Carlo run");
  add_common(mc, f);
  add_mc_flags(mc, f);

  auto* hybrid = app.add_subcommand("hybrid", "Monte Carlo closures and one low-order solve");
  add_common(hybrid, f);
  add_mc_flags(hybrid, f);
  hybrid->add_option("--method", f.method, "hqd, hsm or both");

  auto* dump = app.add_subcommand("dump-closures", "write Monte Carlo closures as CSV");
  add_common(dump, f);
  add_mc_flags(dump, f);

  auto* study = app.add_subcommand("study", "replicated grid-refinement study");
  add_common(study, f);
  study->add_option("--histories", f.histories, "comma list of history counts");
  study->add_option("--replicates", f.replicates, "replicates per configuration")
      ->each([&f](const std::string&) { f.replicates_set = true; });
  study->add_option("--master-seed", f.master_seed, "seed of replicate 0")
      ->each([&f](const std::string&) { f.master_seed_set = true; });
  study->add_option("--capture-mode", f.capture_mode, "analog or implicit");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str() << er.str();
    return code;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    app.exit(e, o, er);
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*reference) return cmd_reference(f, out, err);
    if (*mc) return cmd_mc(f, out);
    if (*hybrid) return cmd_hybrid(f, out, err);
    if (*dump) return cmd_dump_closures(f, out);
    if (*study) return cmd_study(f, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CertificationError& e) {
    err << "certification failure: " << e.what() << "\n";
    return kExitCertification;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

std::string serialize_reference(const BenchmarkSolution& ref) {
  json j;
  j["edges"] = std::vector<double>(ref.mesh.edges().begin(), ref.mesh.edges().end());
  j["phi"] = ref.phi;
  j["second_moment"] = ref.second_moment;
  j["face_phi"] = {ref.face_phi[0], ref.face_phi[1]};
  j["face_current"] = {ref.face_current[0], ref.face_current[1]};
  j["face_second_moment"] = {ref.face_second_moment[0], ref.face_second_moment[1]};
  j["certified_digits"] = json::array();
  for (const double d : ref.certified_digits) j["certified_digits"].push_back(format_double(d));
  j["min_certified_digits"] = format_double(ref.min_certified_digits);
  j["ladder"] = json::array();
  for (const auto& l : ref.ladder) j["ladder"].push_back({l.cells, l.quadrature_order});
  j["level_phi"] = ref.level_phi;
  j["level_iterations"] = ref.level_iterations;
  j["level_spectral_radius"] = ref.level_spectral_radius;
  j["level_negative_edges"] = ref.level_negative_edges;
  return j.dump() + "\n";
}

BenchmarkSolution deserialize_reference(const std::string& text) {
  const auto j = json::parse(text);
  auto digits = [](const json& v) { return std::stod(v.get<std::string>()); };
  BenchmarkSolution ref;
  ref.mesh = Mesh1D(j.at("edges").get<std::vector<double>>());
  ref.phi = j.at("phi").get<std::vector<double>>();
  ref.second_moment = j.at("second_moment").get<std::vector<double>>();
  for (int s = 0; s < 2; ++s) {
    ref.face_phi[s] = j.at("face_phi")[s].get<double>();
    ref.face_current[s] = j.at("face_current")[s].get<double>();
    ref.face_second_moment[s] = j.at("face_second_moment")[s].get<double>();
  }
  for (const auto& d : j.at("certified_digits")) ref.certified_digits.push_back(digits(d));
  ref.min_certified_digits = digits(j.at("min_certified_digits"));
  for (const auto& l : j.at("ladder"))
    ref.ladder.push_back({l[0].get<std::size_t>(), l[1].get<std::size_t>()});
  ref.level_phi = j.at("level_phi").get<std::vector<std::vector<double>>>();
  ref.level_iterations = j.at("level_iterations").get<std::vector<std::size_t>>();
  ref.level_spectral_radius = j.at("level_spectral_radius").get<std::vector<double>>();
  ref.level_negative_edges = j.at("level_negative_edges").get<std::vector<std::size_t>>();
  if (ref.phi.size() != ref.mesh.cells()) throw InvariantError("corrupt reference cache entry");
  return ref;
}

std::map<std::size_t, BenchmarkSolution> obtain_references(
    const SlabProblem& problem, const ReferenceSettings& settings,
    const std::vector<std::size_t>& cells, const fs::path& dir, std::ostream& log) {
  const std::string key = reference_key(problem, settings);
  auto path_for = [&](std::size_t n) { return dir / (key + "-I" + std::to_string(n) + ".json"); };
  std::map<std::size_t, BenchmarkSolution> refs;
  std::vector<std::size_t> missing;
  for (const auto n : cells) {
    if (refs.contains(n)) continue;
    const auto path = path_for(n);
    if (fs::exists(path)) {
      try {
        auto ref = deserialize_reference(read_text_file(path));
        if (ref.min_certified_digits >= settings.required_digits && ref.mesh.cells() == n) {
          refs.emplace(n, std::move(ref));
          continue;
        }
      } catch (const std::exception& e) {
        log << "ignoring unreadable reference cache " << path.string() << ": " << e.what() << "\n";
      }
    }
    missing.push_back(n);
  }
  if (missing.empty()) return refs;
  log << "solving reference ladder (" << settings.ladder.size() << " levels, finest "
      << settings.ladder.back().cells << " cells)\n";
  const auto levels = solve_ladder(problem, settings.ladder);
  for (const auto n : missing) {
    auto ref = extrapolate_to(build_uniform_mesh(problem, n), levels, settings.required_digits);
    write_text_file(path_for(n), serialize_reference(ref));
    refs.emplace(n, std::move(ref));
  }
  return refs;
}

}  // namespace hybridmc::cli
