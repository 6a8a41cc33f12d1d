// SPDX-License-Identifier: Apache-2.0
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

#include "cli.hpp"

#include "nlswipt/io.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nlswipt;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace
{

const std::string kReference = R"(seed: 3
channel:
  mode: freq_coeffs
  N: 9
  sigma_w2: 0.1
  coeffs: [[-1.2, 0.1], [-0.4, -1.3], [-0.1, -1.6], [0.6, -1.5], [-1.35, -0.1],
           [-1.1, 0.2], [-0.9, -0.01], [0.7, 0.1], [0.65, 0.01]]
power:
  P_a: 1.0
optimizer:
  multistart_wpt: 50
  multistart_zm: 5
oracle:
  n_blocks: 20000
)";

struct Sandbox
{
    fs::path dir;
    explicit Sandbox(const std::string &name) : dir(fs::temp_directory_path() / ("nlswipt_cli_" + name))
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    fs::path write(const std::string &file, const std::string &text) const
    {
        std::ofstream(dir / file) << text;
        return dir / file;
    }
    std::string read(const std::string &file) const
    {
        std::ifstream f(dir / file);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    }
};

struct Outcome
{
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("waterfill writes an allocation that meets the budget")
{
    Sandbox box("waterfill");
    const auto cfg = box.write("run.yaml", kReference);
    const Outcome r = run({"-c", cfg.string(), "-o", (box.dir / "out").string(), "waterfill"});
    REQUIRE(r.code == 0);
    std::istringstream csv(box.read("out/waterfill.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "subcarrier,p_r,p_i,power");
    double total = 0.0;
    int rows = 0;
    while (std::getline(csv, line))
    {
        total += std::stod(line.substr(line.rfind(',') + 1));
        ++rows;
    }
    CHECK(rows == 9);
    CHECK_THAT(total, WithinAbs(1.0, 1e-10));
}

TEST_CASE("oracle check on the noise-only input")
{
    Sandbox box("oracle");
    const auto cfg = box.write("run.yaml", kReference);
    const Outcome r = run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "diode.k2=1", "--set", "diode.k4=1",
                           "--set", "oracle_check.input=zero", "oracle-check"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(box.read("oracle.json"));
    CHECK_THAT(j["closed_form"].get<double>(), WithinAbs(1.17, 1e-12));
    CHECK(j["pass"] == true);
    for (const char *key : {"estimate", "stderr", "z_score"})
        CHECK(j.contains(key));
}

TEST_CASE("validation failures exit 1 with a field pointer")
{
    Sandbox box("validation");
    const auto no_channel = box.write("a.yaml", "seed: 1\npower: {P_a: 1}\n");
    Outcome r = run({"-c", no_channel.string(), "-o", box.dir.string(), "waterfill"});
    CHECK(r.code == 1);
    Json err = Json::parse(r.err);
    CHECK(err["error"] == "MissingField");
    CHECK(err["field"] == "channel");

    const auto cfg = box.write("run.yaml", kReference);
    r = run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "channel.N=8", "waterfill"});
    CHECK(r.code == 1);
    CHECK(Json::parse(r.err)["error"] == "EvenN");

    r = run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "optimizer.lamda2=1", "wpt"});
    CHECK(r.code == 1);
    CHECK(Json::parse(r.err)["field"] == "optimizer.lamda2");

    r = run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "nonsense", "wpt"});
    CHECK(r.code == 1);

    const auto no_seed = box.write("b.yaml", kReference.substr(kReference.find('\n') + 1));
    r = run({"-c", no_seed.string(), "-o", box.dir.string(), "waterfill"});
    CHECK(r.code == 1);
    CHECK(Json::parse(r.err)["field"] == "seed");
    CHECK(run({"-c", no_seed.string(), "-o", box.dir.string(), "--seed", "4", "waterfill"}).code == 0);

    CHECK(run({"-c", cfg.string(), "launch"}).code == 1);
    CHECK(run({"-c", (box.dir / "missing.yaml").string(), "wpt"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("configuration overrides")
{
    const cli::RunConfig cfg = cli::parse_config(kReference, {"sweep.families=[ZG, ZGL]", "optimizer.lambda2=2.5",
                                                              "sweep.n_list=[3, 5]", "channel.sigma_w2=0.2"});
    CHECK(cfg.families == std::vector<Family>{Family::ZG, Family::ZGL});
    CHECK(cfg.optimizer.lambda2 == 2.5);
    CHECK(cfg.n_list == std::vector<int>{3, 5});
    CHECK(cfg.channel->sigma_w2 == 0.2);
    CHECK(cfg.seed == 3u);

    const cli::RunConfig ref = cli::parse_config("channel: {mode: reference}\n");
    CHECK(ref.channel->coeffs == reference_channel_spec(0.1).coeffs);
    CHECK_THROWS_AS(cli::parse_config("channel: {mode: psychic}\n"), Error);
    CHECK_THROWS_AS(cli::parse_config("extras: {a: 1}\n"), Error);
    CHECK_THROWS_AS(cli::parse_config("sweep: {families: [XG]}\n"), Error);
}

TEST_CASE("identical runs give byte-identical artifacts")
{
    Sandbox box("determinism");
    const auto cfg = box.write("run.yaml", kReference);
    const std::vector<std::string> sweep_args = {"--set", "sweep.lambda2_points=6", "--set", "sweep.zgl_points=6",
                                                 "--set", "sweep.max_refinements=3", "--set", "sweep.families=[ANG,ZGL]"};
    for (const char *dir : {"a", "b"})
    {
        const std::string out = (box.dir / dir).string();
        REQUIRE(run({"-c", cfg.string(), "-o", out, "--threads", dir[0] == 'a' ? "1" : "3", "wpt"}).code == 0);
        std::vector<std::string> args = {"-c", cfg.string(), "-o", out};
        args.insert(args.end(), sweep_args.begin(), sweep_args.end());
        args.push_back("sweep");
        REQUIRE(run(args).code == 0);
        REQUIRE(run({"-c", cfg.string(), "-o", out, "--set", "oracle_check.input=waterfill", "oracle-check"}).code == 0);
    }
    for (const char *f : {"wpt.csv", "wpt.json", "rp_curves.csv", "rp_curves.json", "oracle.json"})
    {
        INFO(f);
        CHECK(box.read(std::string("a/") + f) == box.read(std::string("b/") + f));
        CHECK_FALSE(box.read(std::string("a/") + f).empty());
    }
}

TEST_CASE("sweep points round-trip through the optimality check")
{
    Sandbox box("roundtrip");
    const auto cfg = box.write("run.yaml", kReference);
    REQUIRE(run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "sweep.families=[ZG]", "--set",
                 "sweep.lambda2_points=4", "--set", "sweep.max_refinements=0", "sweep"})
                .code == 0);
    const Json curves = Json::parse(box.read("rp_curves.json"));
    int checked = 0;
    for (const auto &p : curves["curves"][0]["raw"])
    {
        const auto sol = box.write("solution.json", dump(p));
        const Outcome r = run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "kkt.solution=" + sol.string(),
                               "kkt-check"});
        CHECK(r.code == 0);
        const Json k = Json::parse(box.read("kkt.json"));
        CHECK(k["rate"].get<double>() == p["rate"].get<double>());
        CHECK(k["p_dc"].get<double>() == p["p_dc"].get<double>());
        CHECK(k["pass"] == true);
        ++checked;
    }
    CHECK(checked == 5);
}

TEST_CASE("solver and check failures have their own exit codes")
{
    Sandbox box("codes");
    const auto cfg = box.write("run.yaml", kReference);
    CHECK(run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "optimizer.max_iters=2", "wpt"}).code == 2);
    CHECK(run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "gradcheck.rel_tol=1e-16", "gradcheck"}).code == 3);
    CHECK(run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "gradcheck.cases=3", "gradcheck"}).code == 0);

    GaussianInput off = waterfill(build_freq_channel(reference_channel_spec(0.1)), 1.0);
    off.p_r[0] += 0.01;
    off.p_i[1] -= 0.01;
    const auto sol = box.write("off.json", dump(to_json(off)));
    CHECK(run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "kkt.solution=" + sol.string(), "kkt-check"}).code ==
          3);
    const auto broken = box.write("broken.json", "{\"mu_r\": [0]}");
    CHECK(run({"-c", cfg.string(), "-o", box.dir.string(), "--set", "kkt.solution=" + broken.string(), "kkt-check"})
              .code == 1);
}
