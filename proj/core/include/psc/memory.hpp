#pragma once

#include <cstddef>
#include <optional>

namespace psc {

// Process-wide counters maintained by the replacement global operator
// new/delete in memory.cpp. Linking anything from this header pulls the
// replacement in.
struct AllocationStats {
  std::size_t live_bytes = 0;
  std::size_t high_water_bytes = 0;
  std::size_t largest_allocation = 0;
  std::size_t allocation_count = 0;
};

AllocationStats allocation_stats() noexcept;

// Resets the high-water mark to the current live bytes and clears the
// largest-allocation and count trackers.
void reset_allocation_peaks() noexcept;

// Peak resident set size (VmHWM) in bytes, if the platform exposes it.
std::optional<std::size_t> peak_rss_bytes();
// Resets VmHWM to the current RSS; false when unsupported.
bool reset_peak_rss();

enum class ProbeMode { kAllocatorHighWater, kProcessPeakRss };

// High-water memory of one measured phase.
class MemoryProbe {
 public:
  MemoryProbe() { reset(); }

  void reset();
  // Freezes the readings taken since reset().
  void stop();

  // Bytes above the live baseline at reset().
  std::size_t allocator_high_water() const noexcept { return high_water_; }
  std::size_t largest_allocation() const noexcept { return largest_; }
  std::optional<std::size_t> peak_rss() const noexcept { return peak_rss_; }

 private:
  std::size_t baseline_ = 0;
  std::size_t high_water_ = 0;
  std::size_t largest_ = 0;
  std::optional<std::size_t> peak_rss_;
  bool rss_reset_ok_ = false;
};

// Flags any single allocation at or above `threshold_bytes` made while the
// guard is alive.
class AllocationGuard {
 public:
  explicit AllocationGuard(std::size_t threshold_bytes);
  ~AllocationGuard();
  AllocationGuard(const AllocationGuard&) = delete;
  AllocationGuard& operator=(const AllocationGuard&) = delete;

  bool tripped() const noexcept;
  std::size_t largest_seen() const noexcept;

 private:
  std::size_t previous_threshold_;
};

}  // namespace psc
