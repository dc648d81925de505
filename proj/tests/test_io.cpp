#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "hrmt/ensemble.hpp"
#include "hrmt/errors.hpp"
#include "hrmt/io.hpp"
#include "hrmt/rng.hpp"

using namespace hrmt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() /
      ("hrmt_io_test_" + std::to_string(::getpid()) + "_" +
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

}  // namespace

TEST_CASE("format_float round-trips doubles exactly") {
  RngStream rng(1, 0);
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.gaussian(std::pow(10.0, rng.uniform(-12.0, 12.0)));
    CHECK(std::stod(format_float(x)) == x);
  }
  CHECK(std::stod(format_float(0.1)) == 0.1);
  CHECK(format_float(1.0) == "1");
  CHECK(format_float(0.0) == "0");
  CHECK(format_float(-2.5) == "-2.5");
}

TEST_CASE("fnv1a64 known vectors") {
  // Offset basis for the empty string, then standard published values.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("fnv1a64_file matches the in-memory checksum") {
  const fs::path dir = temp_dir();
  const fs::path p = dir / "blob.bin";
  const std::string payload("binary\0payload\n with bytes", 26);
  write_file_atomic(p, payload);
  CHECK(slurp(p) == payload);
  CHECK(fnv1a64_file(p) == fnv1a64(payload));
  CHECK_THROWS_AS((void)fnv1a64_file(dir / "missing.bin"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("atomic writes leave no temporary siblings") {
  const fs::path dir = temp_dir();
  write_file_atomic(dir / "out.txt", "first");
  write_file_atomic(dir / "out.txt", "second");  // overwrite in place
  CHECK(slurp(dir / "out.txt") == "second");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    (void)entry;
    ++files;
  }
  CHECK(files == 1);
  CHECK_THROWS_AS(
      write_file_atomic(dir / "no_such_subdir" / "out.txt", "x"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("hmat round trip is bit exact for every model") {
  const fs::path dir = temp_dir();
  std::vector<EnsembleConfig> configs;
  {
    EnsembleConfig u;
    u.n = 3;
    u.c = 0.5;
    configs.push_back(u);
    EnsembleConfig tr;
    tr.model = Model::Truncated;
    tr.n = 4;
    tr.m = 2;
    tr.c = -1.5;
    tr.normalized = false;
    configs.push_back(tr);
    EnsembleConfig rp;
    rp.model = Model::RosenzweigPorter;
    rp.n = 3;
    rp.normalized = false;
    rp.t = 0.125;
    rp.potential = {PotentialSpec::Kind::Gaussian, 2.0};
    configs.push_back(rp);
  }
  int idx = 0;
  for (const auto& cfg : configs) {
    RngStream rng(77, idx);
    const Hamiltonian h = assemble(cfg, rng);
    const fs::path p = dir / ("m" + std::to_string(idx) + ".hmat");
    write_hmat(p, h);
    const Hamiltonian back = read_hmat(p);
    CHECK(back.size == h.size);
    CHECK(back.entries == h.entries);  // bitwise
    CHECK(back.config.model == cfg.model);
    CHECK(back.config.n == cfg.n);
    CHECK(back.master_seed == h.master_seed);
    CHECK(back.stream_index == h.stream_index);
    // The file starts with the magic line.
    CHECK(slurp(p).substr(0, 6) == "HMAT1\n");
    ++idx;
  }
  SUBCASE("corrupted magic is rejected") {
    const fs::path p = dir / "bad.hmat";
    write_file_atomic(p, "NOPE1\n{}\n");
    CHECK_THROWS_AS((void)read_hmat(p), IoError);
  }
  SUBCASE("truncated payload is rejected") {
    const fs::path good = dir / "m0.hmat";
    const std::string bytes = slurp(good);
    const fs::path p = dir / "short.hmat";
    write_file_atomic(p, std::string_view(bytes).substr(0, bytes.size() - 9));
    CHECK_THROWS_AS((void)read_hmat(p), IoError);
  }
  fs::remove_all(dir);
}

TEST_CASE("csv writer enforces width and renders floats canonically") {
  CsvWriter csv({"a", "b"});
  csv.row({1.0, 0.1});
  csv.row_text({"note", "text"});
  CHECK(csv.text() ==
        "a,b\n1," + format_float(0.1) + "\nnote,text\n");
  CHECK_THROWS_AS(csv.row({1.0, 2.0, 3.0}), DomainError);
  CHECK_THROWS_AS(csv.row_text({"only-one"}), DomainError);
  CHECK_THROWS_AS(CsvWriter({}), DomainError);
  const fs::path dir = temp_dir();
  csv.write(dir / "t.csv");
  CHECK(slurp(dir / "t.csv") == csv.text());
  fs::remove_all(dir);
}

TEST_CASE("run manifest records outputs with valid checksums") {
  const fs::path dir = temp_dir();
  write_file_atomic(dir / "data.csv", "a,b\n1,2\n");
  RunManifest manifest("sample", "{\"experiment\":\"sample\"}", 9, 4, 0, 2);
  manifest.add_output(dir / "data.csv");
  manifest.set_wall_ms(123);
  const fs::path mpath = manifest.write(dir);
  CHECK(mpath.filename() == "manifest.json");
  const std::string text = slurp(mpath);
  CHECK(text.find("\"experiment\": \"sample\"") != std::string::npos);
  CHECK(text.find("\"master_seed\": 9") != std::string::npos);
  CHECK(text.find("\"workers\": 2") != std::string::npos);
  CHECK(text.find("\"wall_ms\": 123") != std::string::npos);
  CHECK(text.find("data.csv") != std::string::npos);
  // The recorded checksum matches an independent pass over the file.
  const std::uint64_t sum = fnv1a64_file(dir / "data.csv");
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(sum));
  CHECK(text.find(hex) != std::string::npos);
  CHECK_THROWS_AS(manifest.add_output(dir / "absent.csv"), IoError);
  fs::remove_all(dir);
}
