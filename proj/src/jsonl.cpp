#include "cpceval/jsonl.hpp"

#include <stdexcept>

namespace cpceval {

JsonlStore::JsonlStore(const std::string& path) : path_(path) {
  std::ifstream in(path);
  if (in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      keys_.insert(j.at("key").get<std::string>());
    }
  }
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open artifact store: " + path);
}

bool JsonlStore::append(const std::string& key, nlohmann::json record) {
  if (!keys_.insert(key).second) return false;
  record["key"] = key;
  out_ << record.dump() << '\n';
  out_.flush();
  return true;
}

nlohmann::json JsonlStore::get(const std::string& key) const {
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    if (j.at("key").get<std::string>() == key) return j;
  }
  throw std::out_of_range("key not found in store: " + key);
}

std::vector<nlohmann::json> JsonlStore::records() const {
  std::vector<nlohmann::json> out;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

JsonlWriter::JsonlWriter(const std::string& path, bool append) {
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open jsonl file: " + path);
}

void JsonlWriter::write(const nlohmann::json& record) {
  out_ << record.dump() << '\n';
  out_.flush();
  ++count_;
}

}  // namespace cpceval
