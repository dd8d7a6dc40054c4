#pragma once

#include <cstddef>

namespace msld::testing {

/// Process-wide heap accounting, fed by the malloc interposer in alloc_tracker.cpp.
struct AllocSnapshot {
  std::size_t peak_growth = 0;  // peak live bytes above the level at arm()
  std::size_t largest = 0;      // largest single allocation while armed
  std::size_t count = 0;        // allocations while armed
  std::size_t large_count = 0;  // allocations of at least the armed threshold
};

void alloc_arm(std::size_t large_threshold);
AllocSnapshot alloc_disarm();

}  // namespace msld::testing
