#pragma once

// Fixed-partition worker helpers. Work is split into contiguous index ranges,
// so results never depend on scheduling.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "anisoboot/error.hpp"

namespace anisoboot {

/// ANISOBOOT_THREADS if set, else 1.
inline unsigned default_threads() {
  if (const char* env = std::getenv("ANISOBOOT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    detail::require(end != env && *end == '\0' && v >= 1 && v <= 1024,
                    std::string("ANISOBOOT_THREADS must be an integer in [1,1024], got '") + env + "'");
    return static_cast<unsigned>(v);
  }
  return 1;
}

/// Calls f(begin, end) on up to `threads` contiguous blocks of [0, n) and
/// returns the block results in order.
template <class R, class F>
std::vector<R> parallel_blocks(std::size_t n, unsigned threads, F&& f) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  std::vector<R> out(workers);
  if (workers == 1) {
    out[0] = f(std::size_t{0}, n);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = n * w / workers;
    const std::size_t e = n * (w + 1) / workers;
    pool.emplace_back([&, w, b, e] {
      try {
        out[w] = f(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// out[i] = f(i) for i in [0, n).
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned threads, F&& f) {
  static_assert(!std::is_same_v<T, bool>, "vector<bool> elements are not independently writable");
  std::vector<T> out(n);
  parallel_blocks<int>(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = f(i);
    return 0;
  });
  return out;
}

}  // namespace anisoboot
