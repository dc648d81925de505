#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() /
      ("hrmt_cli_test_" + std::to_string(::getpid()) + "_" +
       std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string binary() {
  const char* bin = std::getenv("HRMT_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

RunResult run_cli(const std::string& args) {
  const fs::path dir = temp_dir();
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = "\"" + binary() + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult result;
  REQUIRE(status != -1);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out);
  result.err = slurp(err);
  fs::remove_all(dir);
  return result;
}

}  // namespace

TEST_CASE("--version reports a semantic version") {
  const RunResult r = run_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find('.') != std::string::npos);
}

TEST_CASE("a subcommand is required") {
  const RunResult r = run_cli("");
  CHECK(r.exit_code != 0);
}

TEST_CASE("validate prints the fully-resolved config") {
  const fs::path dir = temp_dir();
  spit(dir / "cfg.json",
       R"({"experiment": "sample", "ensemble": {"n": 3}})");
  const RunResult r =
      run_cli("validate --config \"" + (dir / "cfg.json").string() + "\"");
  CHECK(r.exit_code == 0);
  const json echo = json::parse(r.out);
  CHECK(echo.at("experiment") == "sample");
  CHECK(echo.at("ensemble").at("n") == 3);
  CHECK(echo.at("ensemble").at("normalized") == true);
  CHECK(echo.at("master_seed") == 1);
  CHECK(echo.at("workers").get<unsigned>() >= 1);
  fs::remove_all(dir);
}

TEST_CASE("validate reports every error and exits 2") {
  const fs::path dir = temp_dir();
  spit(dir / "bad.json",
       R"({"experiment": "sample",
           "ensemble": {"model": "truncated", "n": 3, "m": 7},
           "count_halfwidth": -1})");
  const RunResult r =
      run_cli("validate --config \"" + (dir / "bad.json").string() + "\"");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("m") != std::string::npos);
  CHECK(r.err.find("count_halfwidth") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("missing config file exits 4") {
  const RunResult r =
      run_cli("validate --config /nonexistent/hrmt_missing.json");
  CHECK(r.exit_code == 4);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("experiment subcommand must match the config") {
  const fs::path dir = temp_dir();
  spit(dir / "cfg.json",
       R"({"experiment": "sample", "ensemble": {"n": 2}})");
  const RunResult r =
      run_cli("spectrum --config \"" + (dir / "cfg.json").string() + "\"");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("sample") != std::string::npos);
  CHECK(r.err.find("spectrum") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("a small run writes outputs and prints the manifest path") {
  const fs::path dir = temp_dir();
  const fs::path out_dir = dir / "results";
  spit(dir / "cfg.json",
       R"({"experiment": "sample", "ensemble": {"n": 2},
           "realizations": 2, "master_seed": 7})");
  const RunResult r = run_cli("sample --config \"" +
                              (dir / "cfg.json").string() + "\" --out \"" +
                              out_dir.string() + "\" --seed 123 --workers 1");
  CAPTURE(r.err);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out_dir / "manifest.json"));
  CHECK(fs::exists(out_dir / "sample_0000.hmat"));
  CHECK(fs::exists(out_dir / "sample_0001.hmat"));
  CHECK(fs::exists(out_dir / "samples.csv"));
  CHECK(fs::exists(out_dir / "summary.json"));
  // The printed path points at the manifest; the seed override is recorded.
  CHECK(r.out.find("manifest.json") != std::string::npos);
  const json manifest = json::parse(slurp(out_dir / "manifest.json"));
  CHECK(manifest.at("master_seed") == 123);
  CHECK(manifest.at("workers") == 1);
  fs::remove_all(dir);
}

TEST_CASE("unwritable output directory exits 4") {
  const fs::path dir = temp_dir();
  spit(dir / "cfg.json",
       R"({"experiment": "sample", "ensemble": {"n": 2}})");
  spit(dir / "blocker", "this is a file, not a directory");
  const RunResult r = run_cli(
      "sample --config \"" + (dir / "cfg.json").string() + "\" --out \"" +
      (dir / "blocker" / "sub").string() + "\"");
  CHECK(r.exit_code == 4);
  CHECK(r.err.find("error:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("oracle eig2 prints the closed-form eigenvalues") {
  const RunResult r = run_cli("oracle eig2 1 2 1");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("oracle: eig2") != std::string::npos);
  CHECK(r.out.find("-1, 3") != std::string::npos);
}

TEST_CASE("oracle distance uses 1-based leaves") {
  const RunResult r = run_cli("oracle distance 3 1 8");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("values: 3") != std::string::npos);
}

TEST_CASE("unknown oracle name exits 2") {
  const RunResult r = run_cli("oracle no-such-oracle 1");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("unknown name") != std::string::npos);
}
