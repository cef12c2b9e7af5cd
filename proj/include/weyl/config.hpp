#pragma once

#include <map>
#include <string>
#include <vector>

namespace weyl {

// Flat `key = value` settings. Every key has a built-in default; files may override known keys only.
// Lines are `key = value`, blank, or start with '#'.
class Config {
 public:
  enum class Type { Real, Integer };
  struct Key {
    std::string name;
    Type type;
    std::string fallback;
    std::string doc;
  };

  static const std::vector<Key>& keys();
  static Config defaults();
  // Throws ParseError naming the path and line for unreadable files, unknown keys and malformed values.
  static Config load(const std::string& path);

  // Throws PreconditionError for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace weyl
