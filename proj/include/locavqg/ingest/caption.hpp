#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/core/types.hpp"
#include "locavqg/util/fs.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::ingest {

class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string id() const = 0;
  // Throws on failure (unreadable image, backend error).
  virtual std::string caption(const std::string& image_ref) = 0;
};

// Deterministic offline captioner: hashes the image bytes and picks a
// templated street-scene caption, so the same file always captions the same.
class StubCaptioner : public Captioner {
 public:
  std::string id() const override { return "stub"; }

  std::string caption(const std::string& image_ref) override {
    if (!file_exists(image_ref))
      throw std::runtime_error("unreadable image " + image_ref);
    uint64_t h = fnv1a(read_file(image_ref));

    static const std::vector<std::string> subjects = {
        "a city street with parked cars",      "a row of brick storefronts",
        "a tree-lined sidewalk",               "a tall glass office building",
        "a small park with benches",           "an old stone church",
        "a busy intersection with traffic lights", "a mural painted on a warehouse wall",
        "a bridge crossing a river",           "a row of townhouses with steep roofs"};
    static const std::vector<std::string> details = {
        "under a cloudy sky",      "on a sunny afternoon", "with people walking by",
        "next to a bus stop",      "behind a chain fence", "near a construction site",
        "with flags hanging overhead", "beside a parking lot"};
    return subjects[h % subjects.size()] + " " +
           details[(h >> 24) % details.size()];
  }
};

// Fixed id -> caption map; unknown ids fail. For error-path tests.
class MappedCaptioner : public Captioner {
 public:
  explicit MappedCaptioner(std::vector<std::pair<std::string, std::string>> entries) {
    for (auto& [ref, text] : entries) map_.emplace_back(std::move(ref), std::move(text));
  }

  std::string id() const override { return "mapped-stub"; }

  std::string caption(const std::string& image_ref) override {
    for (const auto& [ref, text] : map_)
      if (ref == image_ref) return text;
    throw std::runtime_error("unreadable image " + image_ref);
  }

 private:
  std::vector<std::pair<std::string, std::string>> map_;
};

struct CaptionImagesResult {
  bool ok = false;
  std::array<std::string, 4> captions;
  std::string error;  // names the failing direction
};

// All four directions or nothing; a single failure flags the whole task.
inline CaptionImagesResult caption_images(const LocaVQGTask& task, Captioner& captioner) {
  CaptionImagesResult out;
  for (Direction d : kDirections) {
    try {
      std::string text = captioner.caption(task.images.at(d));
      if (text.empty()) throw std::runtime_error("empty caption");
      out.captions[static_cast<size_t>(d)] = std::move(text);
    } catch (const std::exception& e) {
      out.error = std::string(direction_name(d)) + ": " + e.what();
      return out;
    }
  }
  out.ok = true;
  return out;
}

}  // namespace locavqg::ingest
