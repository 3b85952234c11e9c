#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "locavqg/util/fs.hpp"

namespace locavqg::metrics {

// Per-metric value plus the configuration that produced it. Unavailable
// metrics carry a marker entry instead of a value.
class MetricReport {
 public:
  struct Entry {
    bool available = false;
    double value = 0.0;
    nlohmann::json config;  // policy ids, checkpoint ids, parameters
    std::string note;       // reason when unavailable
  };

  void set(const std::string& name, double value, nlohmann::json config = {}) {
    if (!std::isfinite(value))
      throw std::invalid_argument("metric value not finite: " + name);
    entries_[name] = Entry{true, value, std::move(config), ""};
  }

  void set_unavailable(const std::string& name, const std::string& note,
                       nlohmann::json config = {}) {
    entries_[name] = Entry{false, 0.0, std::move(config), note};
  }

  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  const Entry& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("no metric: " + name);
    return it->second;
  }

  const std::map<std::string, Entry>& entries() const { return entries_; }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, e] : entries_) {
      nlohmann::json entry;
      if (e.available) {
        entry["value"] = e.value;
      } else {
        entry["unavailable"] = e.note.empty() ? "unavailable" : e.note;
      }
      if (!e.config.is_null() && !e.config.empty()) entry["config"] = e.config;
      j[name] = entry;
    }
    return j;
  }

  void write(const std::string& path) const { write_file(path, to_json().dump(2) + "\n"); }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace locavqg::metrics
