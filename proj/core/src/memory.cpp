#include "psc/memory.hpp"

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <new>
#include <string>

namespace psc {
namespace {

std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_high{0};
std::atomic<std::size_t> g_largest{0};
std::atomic<std::size_t> g_count{0};
std::atomic<std::size_t> g_threshold{std::numeric_limits<std::size_t>::max()};
std::atomic<std::size_t> g_guard_largest{0};
std::atomic<bool> g_tripped{false};

void raise_to(std::atomic<std::size_t>& target, std::size_t value) noexcept {
  std::size_t seen = target.load(std::memory_order_relaxed);
  while (value > seen && !target.compare_exchange_weak(seen, value, std::memory_order_relaxed)) {
  }
}

void record_allocation(std::size_t size) noexcept {
  const std::size_t live = g_live.fetch_add(size, std::memory_order_relaxed) + size;
  raise_to(g_high, live);
  raise_to(g_largest, size);
  g_count.fetch_add(1, std::memory_order_relaxed);
  if (size >= g_threshold.load(std::memory_order_relaxed)) {
    g_tripped.store(true, std::memory_order_relaxed);
    raise_to(g_guard_largest, size);
  }
}

// Every block carries a 16-byte header just below the user pointer: the
// requested size and the distance back to the start of the raw block.
constexpr std::size_t kHeader = 16;

void* counted_alloc(std::size_t size, std::size_t align) noexcept {
  const std::size_t offset = align > kHeader ? align : kHeader;
  void* raw = nullptr;
  if (align > alignof(std::max_align_t)) {
    const std::size_t total = (size + offset + align - 1) / align * align;
    raw = std::aligned_alloc(align, total);
  } else {
    raw = std::malloc(size + offset);
  }
  if (raw == nullptr) return nullptr;
  auto* user = static_cast<unsigned char*>(raw) + offset;
  auto* header = reinterpret_cast<std::size_t*>(user - kHeader);
  header[0] = size;
  header[1] = offset;
  record_allocation(size);
  return user;
}

void counted_free(void* ptr) noexcept {
  if (ptr == nullptr) return;
  auto* user = static_cast<unsigned char*>(ptr);
  const auto* header = reinterpret_cast<const std::size_t*>(user - kHeader);
  g_live.fetch_sub(header[0], std::memory_order_relaxed);
  std::free(user - header[1]);
}

void* alloc_or_throw(std::size_t size, std::size_t align) {
  if (size == 0) size = 1;
  for (;;) {
    if (void* p = counted_alloc(size, align)) return p;
    std::new_handler handler = std::get_new_handler();
    if (handler == nullptr) throw std::bad_alloc();
    handler();
  }
}

std::optional<std::size_t> read_status_kib(const char* key) {
  std::ifstream in("/proc/self/status");
  if (!in) return std::nullopt;
  const std::string prefix = std::string(key) + ":";
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) == 0) {
      try {
        return static_cast<std::size_t>(std::stoull(line.substr(prefix.size()))) * 1024;
      } catch (...) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

AllocationStats allocation_stats() noexcept {
  return {g_live.load(), g_high.load(), g_largest.load(), g_count.load()};
}

void reset_allocation_peaks() noexcept {
  g_high.store(g_live.load());
  g_largest.store(0);
  g_count.store(0);
}

std::optional<std::size_t> peak_rss_bytes() { return read_status_kib("VmHWM"); }

bool reset_peak_rss() {
  std::ofstream out("/proc/self/clear_refs");
  if (!out) return false;
  out << "5";
  out.flush();
  return static_cast<bool>(out);
}

void MemoryProbe::reset() {
  rss_reset_ok_ = reset_peak_rss();
  baseline_ = g_live.load();
  reset_allocation_peaks();
  high_water_ = 0;
  largest_ = 0;
  peak_rss_.reset();
}

void MemoryProbe::stop() {
  const auto stats = allocation_stats();
  high_water_ = stats.high_water_bytes > baseline_ ? stats.high_water_bytes - baseline_ : 0;
  largest_ = stats.largest_allocation;
  peak_rss_ = rss_reset_ok_ ? peak_rss_bytes() : std::nullopt;
}

AllocationGuard::AllocationGuard(std::size_t threshold_bytes)
    : previous_threshold_(g_threshold.exchange(threshold_bytes)) {
  g_tripped.store(false);
  g_guard_largest.store(0);
}

AllocationGuard::~AllocationGuard() { g_threshold.store(previous_threshold_); }

bool AllocationGuard::tripped() const noexcept { return g_tripped.load(); }

std::size_t AllocationGuard::largest_seen() const noexcept { return g_guard_largest.load(); }

}  // namespace psc

// Replacement global allocation functions feeding the counters above.
void* operator new(std::size_t size) { return psc::alloc_or_throw(size, 0); }
void* operator new[](std::size_t size) { return psc::alloc_or_throw(size, 0); }
void* operator new(std::size_t size, std::align_val_t al) {
  return psc::alloc_or_throw(size, static_cast<std::size_t>(al));
}
void* operator new[](std::size_t size, std::align_val_t al) {
  return psc::alloc_or_throw(size, static_cast<std::size_t>(al));
}
void* operator new(std::size_t size, const std::nothrow_t&) noexcept {
  return psc::counted_alloc(size ? size : 1, 0);
}
void* operator new[](std::size_t size, const std::nothrow_t&) noexcept {
  return psc::counted_alloc(size ? size : 1, 0);
}
void* operator new(std::size_t size, std::align_val_t al, const std::nothrow_t&) noexcept {
  return psc::counted_alloc(size ? size : 1, static_cast<std::size_t>(al));
}
void* operator new[](std::size_t size, std::align_val_t al, const std::nothrow_t&) noexcept {
  return psc::counted_alloc(size ? size : 1, static_cast<std::size_t>(al));
}
void operator delete(void* p) noexcept { psc::counted_free(p); }
void operator delete[](void* p) noexcept { psc::counted_free(p); }
void operator delete(void* p, std::size_t) noexcept { psc::counted_free(p); }
void operator delete[](void* p, std::size_t) noexcept { psc::counted_free(p); }
void operator delete(void* p, std::align_val_t) noexcept { psc::counted_free(p); }
void operator delete[](void* p, std::align_val_t) noexcept { psc::counted_free(p); }
void operator delete(void* p, std::size_t, std::align_val_t) noexcept { psc::counted_free(p); }
void operator delete[](void* p, std::size_t, std::align_val_t) noexcept { psc::counted_free(p); }
void operator delete(void* p, const std::nothrow_t&) noexcept { psc::counted_free(p); }
void operator delete[](void* p, const std::nothrow_t&) noexcept { psc::counted_free(p); }
void operator delete(void* p, std::align_val_t, const std::nothrow_t&) noexcept {
  psc::counted_free(p);
}
void operator delete[](void* p, std::align_val_t, const std::nothrow_t&) noexcept {
  psc::counted_free(p);
}
