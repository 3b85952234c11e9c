#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "locavqg/ingest/geocode.hpp"

namespace locavqg::ingest {

// Reverse-geocoding HTTP adapter (Google-style API). Key comes from the
// environment only.
class HttpGeocoder : public GeocodeClient {
 public:
  static constexpr const char* kApiKeyEnv = "LOCAVQG_GEOCODE_API_KEY";

  explicit HttpGeocoder(std::string host = "https://maps.googleapis.com")
      : host_(std::move(host)) {
    const char* key = std::getenv(kApiKeyEnv);
    if (!key || !*key)
      throw std::runtime_error(std::string("remote geocoder requires ") + kApiKeyEnv);
    api_key_ = key;
  }

  std::string id() const override { return "remote-geocoder"; }

  std::string reverse(const GeoCoordinate& c) override {
    httplib::Client client(host_);
    client.set_connection_timeout(30);
    std::string path = "/maps/api/geocode/json?latlng=" +
                       GeocodeCache::key_for(c) + "&key=" + api_key_;
    auto res = client.Get(path);
    if (!res) throw std::runtime_error("geocoder: transport error");
    if (res->status != 200)
      throw std::runtime_error("geocoder: HTTP " + std::to_string(res->status));
    auto body = nlohmann::json::parse(res->body);
    if (body.at("status").get<std::string>() != "OK" || body.at("results").empty())
      throw std::runtime_error("geocoder: status " + body.at("status").get<std::string>());
    return body["results"][0].at("formatted_address").get<std::string>();
  }

 private:
  std::string host_, api_key_;
};

}  // namespace locavqg::ingest
