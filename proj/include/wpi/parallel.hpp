#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace wpi {

/// Runs fn(b) for b = 0..blocks-1 on `width` threads.  Callers write per-block results into
/// preallocated slots and reduce them in block order, so output does not depend on width.
template <class Fn>
void for_each_block(std::uint64_t blocks, unsigned width, Fn&& fn) {
  width = std::max(1u, width);
  if (width == 1 || blocks <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::uint64_t>(width, blocks); ++t)
    pool.emplace_back([&] {
      for (std::uint64_t b; (b = next.fetch_add(1)) < blocks;) fn(b);
    });
  for (auto& th : pool) th.join();
}

}  // namespace wpi
