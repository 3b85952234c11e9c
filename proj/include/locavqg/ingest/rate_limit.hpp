#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>

namespace locavqg::ingest {

// Token bucket: `rate` tokens per second, up to `burst` banked. A rate of 0
// (or less) disables limiting entirely.
class TokenBucket {
 public:
  explicit TokenBucket(double rate_per_second, double burst = 1.0)
      : rate_(rate_per_second),
        burst_(burst < 1.0 ? 1.0 : burst),
        tokens_(burst_),
        last_(Clock::now()) {}

  void acquire() {
    if (rate_ <= 0.0) return;
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      double wait_s = (1.0 - tokens_) / rate_;
      cv_.wait_for(lock, std::chrono::duration<double>(wait_s));
    }
  }

 private:
  using Clock = std::chrono::steady_clock;

  void refill() {
    auto now = Clock::now();
    double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  }

  double rate_, burst_, tokens_;
  Clock::time_point last_;
  std::mutex mu_;
  std::condition_variable cv_;
};

}  // namespace locavqg::ingest
