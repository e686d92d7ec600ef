#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gfsim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class KeyType : std::uint8_t { Integer, Real, Text, Flag };

struct KeySpec {
  std::string_view key;
  KeyType type;
  std::string_view default_value;
  std::string_view help;
};

/// Every recognized key with its default.
const std::vector<KeySpec>& config_keys();

/// Parses "4096", "64K", "2M", "1G" (binary multiples) or plain decimal.
std::uint64_t parse_size(std::string_view text);

/// Flat key=value configuration. Every key has a default; unknown keys and
/// values that do not parse as the key's type are ConfigErrors.
class Config {
 public:
  Config();

  void set(std::string_view key, std::string_view value);
  /// Applies "key=value".
  void set_assignment(std::string_view assignment);

  /// Reads one "key = value" pair per line; '#' starts a comment.
  void load(std::istream& in);
  void load_file(const std::string& path);

  std::uint64_t u64(std::string_view key) const;
  double real(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  bool flag(std::string_view key) const;

  static bool known(std::string_view key);
  static KeyType type_of(std::string_view key);

  /// All keys in sorted order, as "key=value" lines.
  std::string dump() const;

 private:
  const std::string& raw(std::string_view key) const;
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace gfsim
