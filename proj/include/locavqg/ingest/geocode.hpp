#pragma once

#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/core/types.hpp"
#include "locavqg/util/fs.hpp"
#include "locavqg/util/retry.hpp"
#include "locavqg/util/rng.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::ingest {

// Coordinate -> address cache. Keys are rounded to 6 decimal places (about
// 0.1 m) so re-runs of the same manifest never re-bill the geocoding API.
// Persisted as a sorted key<TAB>address text file.
class GeocodeCache {
 public:
  static std::string key_for(const GeoCoordinate& c) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", c.latitude, c.longitude);
    return buf;
  }

  std::optional<std::string> lookup(const GeoCoordinate& c) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key_for(c));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void insert(const GeoCoordinate& c, const std::string& address) {
    std::lock_guard<std::mutex> lock(mu_);
    entries_[key_for(c)] = address;
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

  void save(const std::string& path) const {
    std::lock_guard<std::mutex> lock(mu_);
    std::string out;
    for (const auto& [key, address] : entries_)
      out += key + "\t" + address + "\n";
    write_file(path, out);
  }

  void load(const std::string& path) {
    std::string content = read_file(path);
    std::lock_guard<std::mutex> lock(mu_);
    entries_.clear();
    size_t line_no = 0;
    for (const auto& line : split(content, '\n')) {
      ++line_no;
      if (line.empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos || tab == 0)
        throw std::runtime_error("geocode cache line " + std::to_string(line_no) +
                                 ": expected key<TAB>address");
      entries_[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }

 private:
  std::map<std::string, std::string> entries_;  // sorted for stable persistence
  mutable std::mutex mu_;
};

class GeocodeClient {
 public:
  virtual ~GeocodeClient() = default;
  virtual std::string id() const = 0;
  // Throws on failure; the caller applies the retry policy.
  virtual std::string reverse(const GeoCoordinate& c) = 0;
};

// Deterministic offline geocoder: street number and name derive from the
// rounded coordinate, city rotates through the configured list.
class StubGeocoder : public GeocodeClient {
 public:
  explicit StubGeocoder(std::vector<std::string> cities = default_city_list())
      : cities_(std::move(cities)) {
    if (cities_.empty()) throw std::invalid_argument("stub geocoder: empty city list");
  }

  std::string id() const override { return "stub"; }

  std::string reverse(const GeoCoordinate& c) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++calls_;
    }
    static const std::vector<std::string> streets = {
        "Penn Ave", "Liberty Ave", "Forbes Ave", "Main St", "Market St",
        "Grant St", "Orange Ave", "Church St", "Fifth Ave", "Broadway"};
    uint64_t h = fnv1a(GeocodeCache::key_for(c));
    uint64_t number = 100 + h % 4900;
    const std::string& street = streets[(h >> 16) % streets.size()];
    const std::string& city = cities_[(h >> 32) % cities_.size()];
    return std::to_string(number) + " " + street + ", " + city + ", USA";
  }

  int calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
  }

 private:
  std::vector<std::string> cities_;
  mutable std::mutex mu_;
  int calls_ = 0;
};

// Returns one fixed address; counts calls and can fail a set number of times
// first. For cache/retry tests.
class FixedGeocoder : public GeocodeClient {
 public:
  explicit FixedGeocoder(std::string address, int fail_times = 0)
      : address_(std::move(address)), fail_remaining_(fail_times) {}

  std::string id() const override { return "fixed-stub"; }

  std::string reverse(const GeoCoordinate&) override {
    std::lock_guard<std::mutex> lock(mu_);
    ++calls_;
    if (fail_remaining_ != 0) {
      if (fail_remaining_ > 0) --fail_remaining_;
      throw std::runtime_error("simulated geocoder failure");
    }
    return address_;
  }

  int calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
  }

 private:
  std::string address_;
  int fail_remaining_;
  mutable std::mutex mu_;
  int calls_ = 0;
};

struct ReverseGeocodeResult {
  bool ok = false;
  std::string address;
  bool from_cache = false;
  std::string error;
};

// Cache-through reverse geocode; a miss calls the client (under the retry
// policy) exactly once on success and stores the result.
inline ReverseGeocodeResult reverse_geocode(const GeoCoordinate& coord,
                                            GeocodeCache& cache, GeocodeClient& client,
                                            const RetryPolicy& retry = {}) {
  if (!coord.in_range()) {
    ReverseGeocodeResult out;
    out.error = "coordinate out of range";
    return out;
  }
  if (auto hit = cache.lookup(coord)) {
    ReverseGeocodeResult out;
    out.ok = true;
    out.address = *hit;
    out.from_cache = true;
    return out;
  }
  ReverseGeocodeResult out;
  auto result = with_retries(retry, [&](std::string& error) {
    try {
      out.address = client.reverse(coord);
      return true;
    } catch (const std::exception& e) {
      error = e.what();
      return false;
    }
  });
  out.ok = result.ok;
  if (!result.ok) {
    out.error = result.error;
    return out;
  }
  cache.insert(coord, out.address);
  return out;
}

}  // namespace locavqg::ingest
