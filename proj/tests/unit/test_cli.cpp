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

#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hybridmc/output.hpp"

using namespace hybridmc;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hybridmc-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small ladder so reference-dependent commands stay fast in unit tests.
fs::path small_config(const fs::path& dir, double digits) {
  const auto path = dir / "small.json";
  write_text_file(path, R"({"reference": {"ladder": [
      {"cells": 128, "quadrature_order": 128}, {"cells": 256, "quadrature_order": 256},
      {"cells": 512, "quadrature_order": 512}], "required_digits": )" +
                            std::to_string(digits) + "}}");
  return path;
}

std::vector<fs::path> run_dirs(const fs::path& root, const std::string& prefix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root))
    if (e.path().filename().string().rfind(prefix, 0) == 0) out.push_back(e.path());
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors map to the config exit code") {
    CHECK(invoke({}).code == cli::kExitConfig);
    CHECK(invoke({"bogus"}).code == cli::kExitConfig);
    CHECK(invoke({"mc", "--histories", "ten"}).code == cli::kExitConfig);
    CHECK(invoke({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("config errors exit with 2") {
    const auto dir = fresh("badcfg");
    write_text_file(dir / "bad.json", R"({"cells": 4, "colour": "red"})");
    const auto r = invoke({"mc", "--config", (dir / "bad.json").string(), "--output-root",
                           dir.string()});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("colour") != std::string::npos);
    CHECK(invoke({"mc", "--config", (dir / "missing.json").string()}).code == cli::kExitConfig);
    CHECK(invoke({"mc", "--cells", "4,8", "--output-root", dir.string()}).code ==
          cli::kExitConfig);
  }

  TEST_CASE("mc and dump-closures write content-addressed run directories") {
    const auto dir = fresh("mc");
    const auto a = invoke({"mc", "--cells", "8", "--histories", "500", "--seed", "3",
                           "--output-root", dir.string()});
    REQUIRE(a.code == cli::kExitOk);
    const auto b = invoke({"mc", "--cells", "8", "--histories", "500", "--seed", "4",
                           "--output-root", dir.string()});
    REQUIRE(b.code == cli::kExitOk);
    const auto dirs = run_dirs(dir, "mc-");
    CHECK(dirs.size() == 2);
    for (const auto& d : dirs) {
      CHECK(fs::exists(d / "tallies.csv"));
      CHECK(fs::exists(d / "flux.csv"));
      const auto manifest = read_text_file(d / "manifest.json");
      CHECK(manifest.find("\"config_hash\"") != std::string::npos);
      CHECK(manifest.find("\"master_seed\"") != std::string::npos);
      CHECK(manifest.find("\"version\"") != std::string::npos);
    }
    const auto c = invoke({"dump-closures", "--cells", "4", "--histories", "200",
                           "--capture-mode", "implicit", "--output-root", dir.string()});
    REQUIRE(c.code == cli::kExitOk);
    const auto dumps = run_dirs(dir, "dump-closures-");
    REQUIRE(dumps.size() == 1);
    CHECK(read_text_file(dumps[0] / "closures.csv").find("boundary,left") != std::string::npos);
  }

  TEST_CASE("flags override the config file") {
    const auto dir = fresh("override");
    write_text_file(dir / "cfg.json", R"({"cells": 4, "histories": 100, "seed": 1})");
    const auto r = invoke({"mc", "--config", (dir / "cfg.json").string(), "--histories", "300",
                           "--output-root", dir.string()});
    REQUIRE(r.code == cli::kExitOk);
    const auto dirs = run_dirs(dir, "mc-");
    REQUIRE(dirs.size() == 1);
    const auto flux = read_text_file(dirs[0] / "flux.csv");
    CHECK(flux.find(",1,300\n") != std::string::npos);  // seed from file, N from flag
  }

  TEST_CASE("hybrid uses a cached reference") {
    const auto dir = fresh("hybrid");
    const auto cfg = small_config(dir, 4.0).string();
    const auto r = invoke({"hybrid", "--config", cfg, "--method", "both", "--cells", "4",
                           "--histories", "2000", "--seed", "7", "--output-root", dir.string()});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("HQD: relative L2 error") != std::string::npos);
    CHECK(r.out.find("HSM: relative L2 error") != std::string::npos);
    const auto dirs = run_dirs(dir, "hybrid-");
    REQUIRE(dirs.size() == 1);
    for (const char* name : {"closures.csv", "solution_HQD.csv", "solution_HSM.csv", "errors.csv"})
      CHECK(fs::exists(dirs[0] / name));
    CHECK(r.err.find("solving reference ladder") != std::string::npos);
    const auto again = invoke({"hybrid", "--config", cfg, "--method", "hqd", "--cells", "4",
                               "--histories", "2000", "--output-root", dir.string()});
    CHECK(again.code == cli::kExitOk);
    CHECK(again.err.find("solving reference ladder") == std::string::npos);
  }

  TEST_CASE("reference certification failure exits with 3") {
    const auto dir = fresh("cert");
    const auto r = invoke({"reference", "--config", small_config(dir, 12.0).string(), "--cells",
                           "4", "--output-root", dir.string()});
    CHECK(r.code == cli::kExitCertification);
    CHECK(r.err.find("certification failure") != std::string::npos);
  }

  TEST_CASE("reference cache round trip") {
    const auto p = benchmark_problem();
    const std::vector<LadderLevel> ladder{{128, 128}, {256, 256}, {512, 512}};
    const auto levels = solve_ladder(p, ladder);
    const auto ref = extrapolate_to(build_uniform_mesh(p, 4), levels, 4.0);
    const auto back = cli::deserialize_reference(cli::serialize_reference(ref));
    CHECK(back.phi == ref.phi);
    CHECK(back.second_moment == ref.second_moment);
    CHECK(back.face_current[1] == ref.face_current[1]);
    CHECK(back.certified_digits == ref.certified_digits);
    CHECK(back.mesh.cells() == 4);
  }

  TEST_CASE("study output does not depend on the worker count") {
    const auto root1 = fresh("study1");
    const auto root8 = fresh("study8");
    const auto cache = fresh("study-cache");
    const auto cfg = small_config(cache, 4.0).string();
    auto args = [&](const fs::path& root, const char* workers) {
      return std::vector<std::string>{"study", "--config", cfg, "--cells", "4,8", "--histories",
                                      "100,300", "--replicates", "3", "--workers", workers,
                                      "--output-root", root.string(), "--cache-dir",
                                      cache.string()};
    };
    REQUIRE(invoke(args(root1, "1")).code == cli::kExitOk);
    REQUIRE(invoke(args(root8, "8")).code == cli::kExitOk);
    const auto d1 = run_dirs(root1, "study-");
    const auto d8 = run_dirs(root8, "study-");
    REQUIRE(d1.size() == 1);
    REQUIRE(d8.size() == 1);
    CHECK(d1[0].filename() == d8[0].filename());
    for (const char* name : {"win_ratio.csv", "errors.csv", "error_means.csv", "error_ratios.csv",
                             "sorted_errors.csv", "manifest.json"})
      CHECK(read_text_file(d1[0] / name) == read_text_file(d8[0] / name));
  }
}
