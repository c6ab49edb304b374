#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "psc/matrix.hpp"
#include "psc/memory.hpp"
#include "psc/metrics.hpp"

namespace psc {

struct PhaseMeasurement {
  double seconds = 0.0;
  std::size_t allocator_high_water = 0;
  std::size_t largest_allocation = 0;
  std::optional<std::size_t> peak_rss;
};

// Runs `phase` once under a fresh MemoryProbe and a monotonic clock.
template <class Phase>
PhaseMeasurement measure_phase(Phase&& phase) {
  MemoryProbe probe;
  const auto start = std::chrono::steady_clock::now();
  std::forward<Phase>(phase)();
  const auto stop = std::chrono::steady_clock::now();
  probe.stop();
  return {std::chrono::duration<double>(stop - start).count(), probe.allocator_high_water(),
          probe.largest_allocation(), probe.peak_rss()};
}

struct PhaseSummary {
  MeanStd seconds;
  MeanStd allocator_high_water;
  std::optional<MeanStd> peak_rss;
  std::vector<PhaseMeasurement> trials;
};

PhaseSummary summarize(const std::vector<PhaseMeasurement>& trials);

// One method's rows of a benchmark: SC reports a single "total" phase, PSC
// reports "training" and "inference".
struct MethodReport {
  std::string method;
  std::vector<std::pair<std::string, PhaseSummary>> phases;
  std::vector<QualityScores> quality_trials;
  std::optional<QualitySummary> quality;
  // Labels from the first trial; lets a re-run be checked for identity.
  std::vector<std::int64_t> first_trial_labels;
};

struct DatasetFingerprint {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string sha256;  // over the little-endian bytes of the row-major values
};

DatasetFingerprint fingerprint(const Matrix& data);

struct BenchReport {
  std::string dataset;
  DatasetFingerprint fingerprint;
  std::size_t trials = 0;
  nlohmann::json config;
  std::vector<MethodReport> methods;
};

nlohmann::json to_json(const QualityScores& q);
nlohmann::json to_json(const QualitySummary& q);
nlohmann::json to_json(const BenchReport& report);

// Lowercase hex SHA-256.
std::string sha256_hex(const void* data, std::size_t size);

}  // namespace psc
