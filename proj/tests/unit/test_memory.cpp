#include <gtest/gtest.h>

#include <memory>
#include <vector>

#include "psc/memory.hpp"

namespace {

constexpr std::size_t kMiB = std::size_t{1} << 20;

// Keeps the optimizer from eliding an allocation.
void touch(volatile char* p, std::size_t n) {
  for (std::size_t i = 0; i < n; i += 4096) p[i] = 1;
}

}  // namespace

TEST(Memory, ProbeSeesLargeAllocation) {
  psc::MemoryProbe probe;
  {
    auto block = std::make_unique<char[]>(100 * kMiB);
    touch(block.get(), 100 * kMiB);
  }
  probe.stop();
  EXPECT_GE(probe.allocator_high_water(), 100 * kMiB);
  EXPECT_LT(probe.allocator_high_water(), 110 * kMiB);
  EXPECT_GE(probe.largest_allocation(), 100 * kMiB);
  if (probe.peak_rss()) {
    EXPECT_GE(*probe.peak_rss(), 100 * kMiB);
  }
}

TEST(Memory, EmptyPhaseIsSmall) {
  psc::MemoryProbe probe;
  probe.stop();
  EXPECT_LT(probe.allocator_high_water(), 64 * 1024u);
}

TEST(Memory, ProbeIgnoresEarlierAllocations) {
  auto held = std::make_unique<char[]>(50 * kMiB);
  touch(held.get(), 50 * kMiB);
  psc::MemoryProbe probe;
  std::vector<double> small(1000, 1.0);
  probe.stop();
  EXPECT_LT(probe.allocator_high_water(), kMiB);
  EXPECT_EQ(small.size(), 1000u);
}

TEST(Memory, StatsTrackLiveBytes) {
  const auto before = psc::allocation_stats();
  auto block = std::make_unique<char[]>(8 * kMiB);
  touch(block.get(), 8 * kMiB);
  const auto during = psc::allocation_stats();
  EXPECT_GE(during.live_bytes, before.live_bytes + 8 * kMiB);
  EXPECT_GT(during.allocation_count, before.allocation_count);
  block.reset();
  EXPECT_LT(psc::allocation_stats().live_bytes, during.live_bytes);
}

TEST(Memory, GuardTripsAtThreshold) {
  {
    psc::AllocationGuard guard(4 * kMiB);
    std::vector<char> small(kMiB);
    touch(small.data(), small.size());
    EXPECT_FALSE(guard.tripped());
    std::vector<char> big(4 * kMiB);
    touch(big.data(), big.size());
    EXPECT_TRUE(guard.tripped());
    EXPECT_GE(guard.largest_seen(), 4 * kMiB);
  }
  psc::AllocationGuard later(4 * kMiB);
  EXPECT_FALSE(later.tripped());
}
