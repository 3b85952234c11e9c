#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "locavqg/ingest/caption.hpp"
#include "locavqg/ingest/geocode.hpp"
#include "locavqg/ingest/rate_limit.hpp"
#include "locavqg/util/retry.hpp"

namespace locavqg::ingest {

struct IngestOptions {
  int workers = 4;
  double geocode_rps = 0.0;  // 0 = unlimited
  RetryPolicy retry;
  std::vector<std::string> city_list = default_city_list();
};

struct TaskFailure {
  std::string task_id;
  std::string stage;  // "ungeocoded" | "uncaptioned"
  std::string reason;
};

struct IngestResult {
  std::vector<CaptionedTask> captioned;  // manifest order
  std::vector<TaskFailure> failures;     // manifest order

  size_t total() const { return captioned.size() + failures.size(); }
};

// Captions run parallel over tasks; geocoding is serialized behind the cache
// mutex (single writer) so each distinct rounded coordinate costs at most
// one client call, and rate-limited by the token bucket.
inline IngestResult ingest_tasks(const std::vector<LocaVQGTask>& tasks,
                                 GeocodeCache& cache, GeocodeClient& geocoder,
                                 Captioner& captioner, const IngestOptions& options = {}) {
  if (options.workers < 1)
    throw std::invalid_argument("ingest: workers must be >= 1");

  struct Slot {
    std::optional<CaptionedTask> captioned;
    std::optional<TaskFailure> failure;
  };
  std::vector<Slot> slots(tasks.size());
  TokenBucket bucket(options.geocode_rps);
  std::mutex geocode_mu;

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const LocaVQGTask& task = tasks[i];

      ReverseGeocodeResult geo;
      {
        // Lookup, client call, and insert happen under one lock so
        // concurrent misses on the same coordinate cannot double-call.
        std::lock_guard<std::mutex> lock(geocode_mu);
        if (auto hit = cache.lookup(task.coordinate)) {
          geo.ok = true;
          geo.address = *hit;
          geo.from_cache = true;
        } else {
          bucket.acquire();
          geo = reverse_geocode(task.coordinate, cache, geocoder, options.retry);
        }
      }
      if (!geo.ok) {
        slots[i].failure = TaskFailure{task.task_id, "ungeocoded", geo.error};
        continue;
      }

      auto cap = caption_images(task, captioner);
      if (!cap.ok) {
        slots[i].failure = TaskFailure{task.task_id, "uncaptioned", cap.error};
        continue;
      }

      CaptionedTask ct;
      ct.task = task;
      ct.captions = cap.captions;
      ct.address = geo.address;
      if (!ct.task.city) ct.task.city = infer_city(ct.address, options.city_list);
      slots[i].captioned = std::move(ct);
    }
  };

  size_t n_workers = std::min<size_t>(options.workers, std::max<size_t>(tasks.size(), 1));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  IngestResult out;
  for (auto& slot : slots) {
    if (slot.captioned) out.captioned.push_back(std::move(*slot.captioned));
    else if (slot.failure) out.failures.push_back(std::move(*slot.failure));
  }
  return out;
}

}  // namespace locavqg::ingest
