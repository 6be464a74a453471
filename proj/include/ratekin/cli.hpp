#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ratekin::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 2,
  kIoFailure = 3,
};

/// Flat key/value configuration. Keys use underscores (kappa_c, scale_source).
using Config = std::map<std::string, std::string>;

/// Reads `key = value` lines ('#' starts a comment; dashes in keys become
/// underscores). A `.json` path is read as a run manifest and its "config"
/// object is returned, which makes any manifest a valid rerun config.
Config read_config_file(const std::filesystem::path& path);

/// Shortest "%.12g" rendering used for every CSV cell.
std::string format_real(double value);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ratekin::cli
