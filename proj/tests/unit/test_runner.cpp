#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ringcap/runner.hpp"

using namespace ringcap::runner;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ringcap_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const OutputFile* find(const RunResult& r, const std::string& name) {
  for (const auto& f : r.files)
    if (f.name == name) return &f;
  return nullptr;
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

const Json sweep_config = Json::parse(R"({
  "space": {"generator": "euclidean_grid", "n": 3, "half_extent": 1.0, "h": 0.1, "alpha": 0},
  "params": {"R": 0.8, "r_list": [0.2, 0.4], "p0_list": [2, 3, 4], "Qx0": 3, "Q": 3}})");

std::string exact_text(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

int shell(const std::string& cmd) {
  const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST_CASE("config errors write nothing") {
  const auto dir = scratch("bad");
  Json bad = sweep_config;
  bad["params"]["p0_list"] = Json::array({1.0, 2.0});
  RunOptions opt;
  opt.out_dir = dir;
  opt.quiet = true;
  CHECK(run("regime-sweep", bad, opt) == ExitCode::config_error);
  CHECK(fs::is_empty(dir));

  Json unknown = sweep_config;
  unknown["params"]["colour"] = "red";
  CHECK_THROWS_AS(execute("regime-sweep", unknown, {}), ConfigError);
  Json top = sweep_config;
  top["extra"] = 1;
  CHECK_THROWS_AS(execute("regime-sweep", top, {}), ConfigError);
  CHECK_THROWS_AS(execute("no-such-task", sweep_config, {}), ConfigError);
  Json mismatch = sweep_config;
  mismatch["task"] = "solve";
  CHECK_THROWS_AS(execute("regime-sweep", mismatch, {}), ConfigError);
  Json r_big = sweep_config;
  r_big["params"]["r_list"] = Json::array({0.2, 0.9});
  CHECK_THROWS_AS(execute("regime-sweep", r_big, {}), ConfigError);
}

TEST_CASE("regime sweep rows") {
  const auto res = execute("regime-sweep", sweep_config, {});
  CHECK(res.status == ExitCode::ok);
  const auto* csv = find(res, "regime_sweep.csv");
  REQUIRE(csv != nullptr);
  const auto t = rows(csv->content);
  REQUIRE(t.size() == 1 + 3 * 2);
  CHECK(t[0][3] == "regime");
  CHECK(t[1][3] == "below");
  CHECK(t[3][3] == "critical");
  CHECK(t[3][4] == "log");
  CHECK(t[5][3] == "above");
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k][11] == "1");  // solver <= profile
}

TEST_CASE("snap-critical treats nearby Qx0 as critical") {
  Json cfg = sweep_config;
  cfg["params"]["Qx0"] = 3.04;
  cfg["params"]["p0_list"] = Json::array({3});
  RunOptions opt;
  CHECK(rows(find(execute("regime-sweep", cfg, opt), "regime_sweep.csv")->content)[1][3] == "below");
  opt.snap_critical = true;
  CHECK(rows(find(execute("regime-sweep", cfg, opt), "regime_sweep.csv")->content)[1][3] == "critical");
  opt.snap_tolerance = 0.01;
  CHECK(rows(find(execute("regime-sweep", cfg, opt), "regime_sweep.csv")->content)[1][3] == "below");
}

TEST_CASE("runs are deterministic and the manifest checks out") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  RunOptions oa, ob;
  oa.out_dir = a;
  ob.out_dir = b;
  oa.quiet = ob.quiet = true;
  REQUIRE(run("regime-sweep", sweep_config, oa) == ExitCode::ok);
  REQUIRE(run("regime-sweep", sweep_config, ob) == ExitCode::ok);
  const auto manifest = Json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["task"] == "regime-sweep");
  CHECK(manifest["status"] == 0);
  CHECK(manifest["config"] == sweep_config);
  REQUIRE(manifest["files"].size() >= 1);
  for (const auto& f : manifest["files"]) {
    const auto name = f["name"].get<std::string>();
    const auto body = slurp(a / name);
    CHECK(body == slurp(b / name));
    CHECK(f["bytes"] == body.size());
    CHECK(f["sha256"] == sha256_hex(body));
  }
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("fit") {
  const auto dir = scratch("fit");
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return (dir / name).string();
  };
  std::string exact = "r,cap\n";
  for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) exact += std::to_string(x) + "," + std::to_string(3.0 * x * x) + "\n";
  Json cfg = Json::parse(R"({"params": {"x": "r", "y": "cap"}})");
  cfg["params"]["csv"] = write("exact.csv", exact);
  auto fit = Json::parse(find(execute("fit", cfg, {}), "fit.json")->content);
  CHECK(fit["slope"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(fit["intercept"].get<double>()) == doctest::Approx(3.0).epsilon(1e-12));

  cfg["params"]["csv"] = write("flat.csv", "r,cap\n1,5\n2,5\n3,5\n4,5\n");
  fit = Json::parse(find(execute("fit", cfg, {}), "fit.json")->content);
  CHECK(std::abs(fit["slope"].get<double>()) <= 1e-12);

  cfg["params"]["csv"] = write("short.csv", "r,cap\n1,5\n2,6\n3,7\n");
  CHECK_THROWS_AS(execute("fit", cfg, {}), ConfigError);

  // log_ratio: x -> log(scale / x)
  std::string lr = "r,cap\n";
  for (double r : {0.5, 0.25, 0.125, 0.0625}) lr += exact_text(r) + "," + exact_text(1.0 / std::log(1.0 / r)) + "\n";
  cfg["params"]["csv"] = write("lr.csv", lr);
  cfg["params"]["x_transform"] = "log_ratio";
  cfg["params"]["scale"] = 1.0;
  fit = Json::parse(find(execute("fit", cfg, {}), "fit.json")->content);
  CHECK(fit["slope"].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
  cfg["space"] = Json::object();
  CHECK_THROWS_AS(execute("fit", cfg, {}), ConfigError);
}

TEST_CASE("command line exit codes") {
  const std::string cli = RINGCAP_CLI;
  const auto dir = scratch("cli");
  std::ofstream(dir / "good.json") << sweep_config.dump();
  Json bad = sweep_config;
  bad["params"]["p0_list"] = Json::array({1.0});
  std::ofstream(dir / "bad.json") << bad.dump();
  std::ofstream(dir / "broken.json") << "{ not json";
  const std::string out = " --quiet --out " + (dir / "out").string();
  CHECK(shell(cli + " regime-sweep --config " + (dir / "good.json").string() + out) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(shell(cli + " regime-sweep --config " + (dir / "bad.json").string() + " --quiet --out " +
              (dir / "out_bad").string()) == 2);
  CHECK_FALSE(fs::exists(dir / "out_bad" / "manifest.json"));
  CHECK(shell(cli + " regime-sweep --config " + (dir / "broken.json").string() + out) == 2);
  CHECK(shell(cli + " nonsense --config " + (dir / "good.json").string() + out) == 2);
  CHECK(shell(cli + " regime-sweep") == 2);
}
