#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <thread>

namespace locavqg {

// 3 attempts with exponential backoff starting at 1 s unless configured
// otherwise; tests set the backoff to zero.
struct RetryPolicy {
  int attempts = 3;
  double initial_backoff_seconds = 1.0;
};

struct RetryOutcome {
  bool ok = false;
  int calls = 0;
  std::string error;
};

// Runs `fn` until it reports success or attempts are exhausted. `fn` returns
// true on success and may set `error` to describe the failure.
inline RetryOutcome with_retries(const RetryPolicy& policy,
                                 const std::function<bool(std::string& error)>& fn) {
  RetryOutcome out;
  double backoff = policy.initial_backoff_seconds;
  for (int attempt = 0; attempt < std::max(1, policy.attempts); ++attempt) {
    if (attempt > 0 && backoff > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    ++out.calls;
    std::string error;
    if (fn(error)) {
      out.ok = true;
      return out;
    }
    out.error = error.empty() ? "unknown error" : error;
  }
  return out;
}

}  // namespace locavqg
