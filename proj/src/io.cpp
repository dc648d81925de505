#include "hrmt/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "hrmt/errors.hpp"
#include "hrmt/version.hpp"

namespace hrmt {

namespace {

using nlohmann::json;

std::uint64_t to_little_endian_bits(double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  return bits;
}

double from_little_endian_bits(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  return std::bit_cast<double>(bits);
}

json header_json(const Hamiltonian& h) {
  json j;
  j["size"] = h.size;
  j["model"] = model_name(h.config.model);
  j["seed"] = h.master_seed;
  j["c"] = h.config.c;
  j["n"] = h.config.n;
  j["stream"] = h.stream_index;
  j["normalized"] = h.config.normalized;
  if (h.config.model == Model::Truncated) j["m"] = h.config.m;
  if (h.config.model == Model::RosenzweigPorter) {
    j["t"] = h.config.t;
    j["potential"] = h.config.potential.name();
    j["potential_param"] = h.config.potential.param;
  }
  return j;
}

void parse_header(const json& j, Hamiltonian& h) {
  h.size = j.at("size").get<std::uint64_t>();
  const std::string model = j.at("model").get<std::string>();
  if (model == "ultrametric") {
    h.config.model = Model::Ultrametric;
  } else if (model == "truncated") {
    h.config.model = Model::Truncated;
  } else if (model == "rosenzweig_porter") {
    h.config.model = Model::RosenzweigPorter;
  } else {
    throw IoError("HMAT1 header: unknown model '" + model + "'");
  }
  h.master_seed = j.at("seed").get<std::uint64_t>();
  h.config.c = j.at("c").get<double>();
  h.config.n = j.at("n").get<unsigned>();
  h.stream_index = j.value("stream", std::uint64_t{0});
  h.config.normalized =
      j.value("normalized", h.config.model == Model::Ultrametric);
  h.config.m = j.value("m", 0u);
  h.config.t = j.value("t", 0.0);
  if (j.contains("potential")) {
    h.config.potential.kind = j["potential"] == "gaussian"
                                  ? PotentialSpec::Kind::Gaussian
                                  : PotentialSpec::Kind::Uniform;
    h.config.potential.param = j.value("potential_param", 1.0);
  }
}

}  // namespace

std::string format_float(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char ch : bytes) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for checksum: " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ull;
    }
  }
  return hash;
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot rename " + tmp.string() + " -> " + path.string() +
                  ": " + ec.message());
  }
}

void write_hmat(const std::filesystem::path& path, const Hamiltonian& h) {
  if (h.entries.size() != h.size * h.size) {
    throw IoError("HMAT1: entry buffer does not match the stated size");
  }
  std::string bytes;
  bytes.reserve(64 + h.entries.size() * 8);
  bytes += "HMAT1\n";
  bytes += header_json(h).dump();
  bytes += '\n';
  for (const double v : h.entries) {
    const std::uint64_t bits = to_little_endian_bits(v);
    char raw[8];
    for (int b = 0; b < 8; ++b) {
      raw[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    bytes.append(raw, 8);
  }
  write_file_atomic(path, bytes);
}

Hamiltonian read_hmat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string magic, header;
  if (!std::getline(in, magic) || magic != "HMAT1") {
    throw IoError("HMAT1: bad magic in " + path.string());
  }
  if (!std::getline(in, header)) {
    throw IoError("HMAT1: missing header line in " + path.string());
  }
  Hamiltonian h;
  try {
    parse_header(json::parse(header), h);
  } catch (const json::exception& e) {
    throw IoError("HMAT1: bad header in " + path.string() + ": " + e.what());
  }
  h.entries.resize(h.size * h.size);
  std::string raw(h.entries.size() * 8, '\0');
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw IoError("HMAT1: truncated payload in " + path.string());
  }
  for (std::size_t i = 0; i < h.entries.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(raw[i * 8 + b]))
              << (8 * b);
    }
    h.entries[i] = from_little_endian_bits(bits);
  }
  return h;
}

CsvWriter::CsvWriter(const std::vector<std::string>& columns)
    : columns_(columns.size()) {
  if (columns.empty()) throw DomainError("csv: header must not be empty");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    cells[i] = format_float(values[i]);
  }
  row_text(cells);
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw DomainError("csv: row width " + std::to_string(cells.size()) +
                      " does not match header width " +
                      std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvWriter::write(const std::filesystem::path& path) const {
  write_file_atomic(path, buffer_);
}

RunManifest::RunManifest(std::string experiment, std::string config_echo_json,
                         std::uint64_t master_seed,
                         std::uint64_t realizations,
                         std::uint64_t stream_base, unsigned workers)
    : experiment_(std::move(experiment)),
      config_echo_(std::move(config_echo_json)),
      master_seed_(master_seed),
      realizations_(realizations),
      stream_base_(stream_base),
      workers_(workers) {}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.emplace_back(path.filename().string(), fnv1a64_file(path));
}

std::string RunManifest::to_json() const {
  json j;
  j["experiment"] = experiment_;
  j["version"] = kVersion;
  j["config"] = json::parse(config_echo_);
  j["master_seed"] = master_seed_;
  j["realizations"] = realizations_;
  j["streams"] = {{"base", stream_base_},
                  {"count", realizations_},
                  {"derivation", "RngStream(master_seed, base + k)"}};
  j["workers"] = workers_;
  j["wall_ms"] = wall_ms_;
  json files = json::array();
  for (const auto& [name, sum] : outputs_) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(sum));
    files.push_back({{"file", name}, {"fnv1a64", hex}});
  }
  j["outputs"] = files;
  return j.dump(2) + "\n";
}

std::filesystem::path RunManifest::write(
    const std::filesystem::path& dir) const {
  const std::filesystem::path path = dir / "manifest.json";
  write_file_atomic(path, to_json());
  return path;
}

}  // namespace hrmt
