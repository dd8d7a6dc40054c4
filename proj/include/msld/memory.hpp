#pragma once

#include <cstddef>
#include <new>
#include <vector>

namespace msld {

/// Byte accounting for the auxiliary state of an engine.
class MemoryLedger {
 public:
  void on_allocate(std::size_t bytes) {
    current_ += bytes;
    ++allocations_;
    if (current_ > peak_) peak_ = current_;
    if (bytes > largest_) largest_ = bytes;
  }
  void on_deallocate(std::size_t bytes) { current_ -= bytes; }

  std::size_t current_bytes() const { return current_; }
  std::size_t peak_bytes() const { return peak_; }
  std::size_t largest_allocation_bytes() const { return largest_; }
  std::size_t allocation_count() const { return allocations_; }

 private:
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
  std::size_t largest_ = 0;
  std::size_t allocations_ = 0;
};

/// std::allocator that reports every allocation to a MemoryLedger (if any).
template <typename T>
class CountingAllocator {
 public:
  using value_type = T;

  CountingAllocator() = default;
  explicit CountingAllocator(MemoryLedger* ledger) : ledger_(ledger) {}
  template <typename U>
  CountingAllocator(const CountingAllocator<U>& other) : ledger_(other.ledger()) {}

  T* allocate(std::size_t n) {
    if (ledger_) ledger_->on_allocate(n * sizeof(T));
    return std::allocator<T>{}.allocate(n);
  }
  void deallocate(T* p, std::size_t n) {
    if (ledger_) ledger_->on_deallocate(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  MemoryLedger* ledger() const { return ledger_; }

  template <typename U>
  bool operator==(const CountingAllocator<U>& other) const {
    return ledger_ == other.ledger();
  }

 private:
  MemoryLedger* ledger_ = nullptr;
};

template <typename T>
using TrackedVector = std::vector<T, CountingAllocator<T>>;

}  // namespace msld
