#pragma once

namespace psc {

// Worker count for numeric kernels: 1 when PSC_SINGLE_THREAD is set to
// anything but "0", otherwise PSC_NUM_THREADS if it parses as a positive
// integer, otherwise the hardware concurrency.
unsigned numeric_threads();

// Applies numeric_threads() to the BLAS backend. Returns the count used.
unsigned apply_thread_policy();

}  // namespace psc
