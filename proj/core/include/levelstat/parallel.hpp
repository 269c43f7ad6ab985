#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace levelstat {

/// 0 means "all hardware threads".
[[nodiscard]] inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates `eval(i)` for i in [0, n) on `threads` workers and feeds the
/// results to `fold(i, result)` strictly in index order. The fold sees the
/// same sequence for any worker count, which is what makes floating-point
/// reductions reproducible. If evaluations throw, the exception from the
/// lowest failing index is rethrown.
template <class Result, class Eval, class Fold>
void ordered_map_fold(std::uint64_t n, unsigned threads, Eval&& eval, Fold&& fold,
                      std::uint64_t block = 8192) {
  threads = resolve_threads(threads);
  std::vector<Result> buffer;
  for (std::uint64_t start = 0; start < n; start += block) {
    const std::uint64_t len = std::min(block, n - start);
    buffer.assign(len, Result{});
    if (threads == 1 || len == 1) {
      for (std::uint64_t k = 0; k < len; ++k) buffer[k] = eval(start + k);
    } else {
      const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, len));
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::uint64_t> error_index(workers, len);
      {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) {
          pool.emplace_back([&, t] {
            for (std::uint64_t k = t; k < len; k += workers) {
              try {
                buffer[k] = eval(start + k);
              } catch (...) {
                errors[t] = std::current_exception();
                error_index[t] = k;
                return;
              }
            }
          });
        }
      }
      const auto first = std::min_element(error_index.begin(), error_index.end());
      if (*first != len) std::rethrow_exception(errors[static_cast<std::size_t>(first - error_index.begin())]);
    }
    for (std::uint64_t k = 0; k < len; ++k) fold(start + k, buffer[k]);
  }
}

}  // namespace levelstat
