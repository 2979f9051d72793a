#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wreath/embedding.hpp"
#include "wreath/random_walk.hpp"

namespace wreath {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitStatus : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitAssertion = 2,
  kExitResource = 3,
};

/// Entry point behind the `wreath` binary; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct OutputRecord {
  std::filesystem::path path;
  std::uintmax_t bytes = 0;
  std::string checksum;  // FNV-1a 64, hex
};

/// 64-bit FNV-1a of `data`, as 16 hex digits.
std::string fnv1a64_hex(std::string_view data);

/// Writes `content` to a sibling temporary file and renames it into place.
OutputRecord write_atomically(const std::filesystem::path& path, const std::string& content);

// CSV bodies for external plotting. Headers:
//   walk:        group,t,trial,displacement
//   compression: alpha,distance,norm,errorBound
//   tail:        t,c,beta,deltaHat,stderr
std::string walk_csv(const WalkSample& sample);
std::string compression_csv(const CompressionReport& report);
std::string tail_csv(const TailEstimate& tail);

OutputRecord emit_plot_data(const WalkSample& sample, const std::filesystem::path& path);
OutputRecord emit_plot_data(const CompressionReport& report, const std::filesystem::path& path);
OutputRecord emit_plot_data(const TailEstimate& tail, const std::filesystem::path& path);

/// Shortest round-trip decimal form used in every CSV cell.
std::string format_real(double x);

}  // namespace wreath
