#include "psc/runtime.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

#include <cblas.h>

namespace psc {

unsigned numeric_threads() {
  if (const char* single = std::getenv("PSC_SINGLE_THREAD"); single && std::string(single) != "0") {
    return 1;
  }
  if (const char* count = std::getenv("PSC_NUM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(count, &end, 10);
    if (end != count && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

unsigned apply_thread_policy() {
  const unsigned n = numeric_threads();
  openblas_set_num_threads(static_cast<int>(n));
  return n;
}

}  // namespace psc
