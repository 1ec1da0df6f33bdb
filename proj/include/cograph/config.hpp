#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace cograph {

// Flat key=value configuration. '#' starts a comment line, blank lines are
// skipped, later assignments to the same key win (flag overrides reuse this).
class KvConfig {
 public:
  static KvConfig parse_string(const std::string& text);
  static KvConfig parse_file(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key, const std::string& dflt) const;
  std::int64_t get_int(const std::string& key, std::int64_t dflt) const;
  double get_double(const std::string& key, double dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;

  std::string require_string(const std::string& key) const;
  std::int64_t require_int(const std::string& key) const;

  // Canonical text form: keys sorted, one per line. Used for run snapshots.
  std::string render() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace cograph
