#include "cli.hpp"
#include "fsi/csv.hpp"
#include "helpers.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = fsi::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  return json::parse(in);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const fs::path kData = fs::path(FSI_DATA_DIR) / "synthetic_mortality";

}  // namespace

TEST_CASE("help and unknown commands") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).code == 0);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({}).code == 1);
}

TEST_CASE("simulate writes one row per replicate and bandwidth") {
  const auto dir = testing::fresh_dir("cli_sim");
  const Outcome o = run({"simulate", "--n", "50", "--p", "2", "--sigma2", "0.4", "--replicates", "3", "--seed", "7",
                         "--bandwidths", "0.2", "0.4", "--emit-data", "--out", dir.string()});
  REQUIRE(o.code == 0);
  CHECK(fsi::read_csv(dir / "sim_replicates.csv").rows.size() == 6);
  CHECK(fsi::read_csv(dir / "sim_summary.csv").rows.size() == 1);
  CHECK(fs::exists(dir / "data_n50_p2_s0.4.csv"));
  const json manifest = read_json(dir / "manifest.json");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 7);
}

TEST_CASE("simulate rejects p = 1 with an explanation") {
  const auto dir = testing::fresh_dir("cli_sim_p1");
  const Outcome o = run({"simulate", "--n", "50", "--p", "1", "--replicates", "1", "--out", dir.string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("p must be at least 2") != std::string::npos);
}

TEST_CASE("fit on simulated sphere data is reproducible across thread counts") {
  const auto sim = testing::fresh_dir("cli_fit_src");
  REQUIRE(run({"simulate", "--n", "40", "--p", "2", "--replicates", "1", "--bandwidths", "0.3", "--emit-data",
               "--no-mlf", "--out", sim.string()})
              .code == 0);
  const fs::path data = sim / "data_n40_p2_s0.4.csv";
  const auto a = testing::fresh_dir("cli_fit_a");
  const auto b = testing::fresh_dir("cli_fit_b");
  for (const auto& [dir, threads] : {std::pair{a, "1"}, std::pair{b, "3"}}) {
    const Outcome o = run({"fit", "--data", data.string(), "--geometry", "sphere", "--bandwidths", "0.2", "0.4",
                           "--start-count", "4", "--threads", threads, "--out", dir.string()});
    REQUIRE(o.code == 0);
  }
  for (const char* name : {"fitted.csv", "criterion_trace.csv", "theta_hat.json"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const json theta = read_json(a / "theta_hat.json");
  CHECK(theta["theta_hat"].size() == 2);
  CHECK(theta["theta_hat"][0].get<double>() > 0.0);
  const json manifest = read_json(a / "manifest.json");
  CHECK(manifest["inputs"].size() == 1);
  CHECK(manifest["inputs"].begin()->get<std::string>().size() == 64);
}

TEST_CASE("fit reports input errors with exit code 1") {
  const auto dir = testing::fresh_dir("cli_fit_bad");
  std::ofstream(dir / "bad.csv") << "x1,x2,y\n0.1,0.2,1\n0.3,0.4,abc\n";
  CHECK(run({"fit", "--data", (dir / "bad.csv").string(), "--geometry", "euclidean", "--out", (dir / "o").string()})
            .code == 1);
  std::ofstream(dir / "noy.csv") << "x1,x2\n0.1,0.2\n";
  CHECK(run({"fit", "--data", (dir / "noy.csv").string(), "--geometry", "euclidean", "--out", (dir / "o").string()})
            .code == 1);
  CHECK(run({"fit", "--data", (dir / "noy.csv").string(), "--geometry", "hyperbolic", "--out",
             (dir / "o").string()})
            .code == 1);
}

TEST_CASE("mortality command on the bundled data") {
  const auto dir = testing::fresh_dir("cli_mortality");
  const Outcome o = run({"mortality", "--lifetables", (kData / "lifetables").string(), "--covariates",
                         (kData / "covariates.csv").string(), "--splits", "2", "--out", dir.string()});
  REQUIRE(o.code == 0);
  CHECK(fsi::read_csv(dir / "comparison.csv").rows.size() == 7);
  const json manifest = read_json(dir / "manifest.json");
  CHECK(manifest["inputs"].size() == 41);
  CHECK(manifest["status"] == "ok");
}

TEST_CASE("mortality command rejects a bad lifetable") {
  const auto dir = testing::fresh_dir("cli_mortality_bad");
  fs::copy(kData, dir / "in", fs::copy_options::recursive);
  std::ofstream(dir / "in" / "lifetables" / "U01.csv") << "age,lx\n0,100\n1,120\n";
  const Outcome o = run({"mortality", "--lifetables", (dir / "in" / "lifetables").string(), "--covariates",
                         (dir / "in" / "covariates.csv").string(), "--splits", "0", "--out", (dir / "o").string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("U01") != std::string::npos);
  CHECK(read_json(dir / "o" / "manifest.json")["exit_code"] == 1);
}

TEST_CASE("make-synthetic writes a usable data set") {
  const auto dir = testing::fresh_dir("cli_synth");
  REQUIRE(run({"make-synthetic", "--out", dir.string(), "--units", "15", "--seed", "3"}).code == 0);
  CHECK(fsi::read_csv(dir / "covariates.csv").rows.size() == 15);
  CHECK(fs::exists(dir / "truth.json"));
}
