#pragma once

// henonlab command-line driver. Exit codes: 0 success, 1 configuration
// error, 2 domain precondition failed, 3 every work item failed.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace henon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitAllFailed = 3;

inline constexpr const char* kToolVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value configuration. Blank lines and lines starting with '#' are
/// skipped; a repeated key is an error.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in);
  static RunConfig parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  /// Raises ConfigError naming the first key outside `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_list(const std::string& key) const;  // comma separated

  /// FNV-1a over the sorted key=value lines, as 16 hex digits.
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Parses argv, runs one command and writes outputs under --out.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace henon::cli
