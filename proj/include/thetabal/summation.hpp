#pragma once

#include <span>

namespace thetabal {

/// Sum in a fixed binary-tree order: reproducible and with O(log n) error growth.
template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.size() <= 8) {
    T s{};
    for (const T& x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

}  // namespace thetabal
