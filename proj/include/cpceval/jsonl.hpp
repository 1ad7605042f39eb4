#pragma once

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

namespace cpceval {

// Append-only JSONL artifact store keyed by an opaque content key.
// Resume = reopen the same file and skip keys already present.
class JsonlStore {
 public:
  explicit JsonlStore(const std::string& path);

  bool has(const std::string& key) const { return keys_.count(key) > 0; }
  // No-op (returns false) when the key is already stored.
  bool append(const std::string& key, nlohmann::json record);
  nlohmann::json get(const std::string& key) const;

  std::size_t size() const { return keys_.size(); }
  const std::string& path() const { return path_; }

  // All records in file order.
  std::vector<nlohmann::json> records() const;

 private:
  std::string path_;
  std::set<std::string> keys_;
  std::ofstream out_;
};

// Plain JSONL writer (run logs, reports); no keying or resume.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path, bool append = true);
  void write(const nlohmann::json& record);
  std::size_t count() const { return count_; }

 private:
  std::ofstream out_;
  std::size_t count_ = 0;
};

}  // namespace cpceval
