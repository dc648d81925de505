#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hrmt/ensemble.hpp"

namespace hrmt {

/// Formats a double with 17 significant digits ('.' decimal separator),
/// enough to round-trip the value exactly.
std::string format_float(double value);

/// FNV-1a 64-bit checksum.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

/// Writes bytes to a temporary sibling then renames into place, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view bytes);

/// Binary matrix container: ASCII magic "HMAT1\n", one JSON header line
/// carrying size/model/seed/c/n (plus model-specific extras), then
/// size*size little-endian 64-bit floats row-major.
void write_hmat(const std::filesystem::path& path, const Hamiltonian& h);
Hamiltonian read_hmat(const std::filesystem::path& path);

/// Comma-separated table with a mandatory header row; floats rendered via
/// format_float.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& columns);

  /// All-numeric row.
  void row(const std::vector<double>& values);
  /// Pre-rendered cells (for mixed text/numeric rows).
  void row_text(const std::vector<std::string>& cells);

  const std::string& text() const { return buffer_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::string buffer_;
  std::size_t columns_;
};

/// Record of one experiment run: config echo, tool version, wall-clock,
/// per-realization stream identities, and the output files with checksums.
/// Serialized to JSON and written atomically.
class RunManifest {
 public:
  RunManifest(std::string experiment, std::string config_echo_json,
              std::uint64_t master_seed, std::uint64_t realizations,
              std::uint64_t stream_base, unsigned workers);

  /// Registers an output file (already written) and checksums it.
  void add_output(const std::filesystem::path& path);

  void set_wall_ms(std::uint64_t ms) { wall_ms_ = ms; }

  std::string to_json() const;
  /// Writes <dir>/manifest.json atomically.
  std::filesystem::path write(const std::filesystem::path& dir) const;

 private:
  std::string experiment_;
  std::string config_echo_;
  std::uint64_t master_seed_;
  std::uint64_t realizations_;
  std::uint64_t stream_base_;
  unsigned workers_;
  std::uint64_t wall_ms_ = 0;
  std::vector<std::pair<std::string, std::uint64_t>> outputs_;
};

}  // namespace hrmt
