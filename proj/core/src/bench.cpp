#include "psc/bench.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <memory>

#include <openssl/evp.h>

#include "psc/error.hpp"

namespace psc {
namespace {

MeanStd mean_std_of(const std::vector<double>& values) { return mean_std(values); }

nlohmann::json to_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

nlohmann::json to_json(const PhaseSummary& s) {
  nlohmann::json j;
  j["seconds"] = to_json(s.seconds);
  j["allocator_high_water_bytes"] = to_json(s.allocator_high_water);
  j["peak_rss_bytes"] = s.peak_rss ? to_json(*s.peak_rss) : nlohmann::json(nullptr);
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : s.trials) {
    trials.push_back({{"seconds", t.seconds},
                      {"allocator_high_water_bytes", t.allocator_high_water},
                      {"largest_allocation_bytes", t.largest_allocation},
                      {"peak_rss_bytes", t.peak_rss ? nlohmann::json(*t.peak_rss)
                                                    : nlohmann::json(nullptr)}});
  }
  j["trials"] = std::move(trials);
  return j;
}

}  // namespace

PhaseSummary summarize(const std::vector<PhaseMeasurement>& trials) {
  if (trials.empty()) throw ConfigError("no phase measurements to summarize");
  std::vector<double> secs, hw, rss;
  bool have_rss = true;
  for (const auto& t : trials) {
    secs.push_back(t.seconds);
    hw.push_back(static_cast<double>(t.allocator_high_water));
    if (t.peak_rss) {
      rss.push_back(static_cast<double>(*t.peak_rss));
    } else {
      have_rss = false;
    }
  }
  PhaseSummary s;
  s.seconds = mean_std_of(secs);
  s.allocator_high_water = mean_std_of(hw);
  if (have_rss) s.peak_rss = mean_std_of(rss);
  s.trials = trials;
  return s;
}

DatasetFingerprint fingerprint(const Matrix& data) {
  std::vector<unsigned char> bytes(data.values().size() * sizeof(double));
  for (std::size_t i = 0; i < data.values().size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(data.values()[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return {data.rows(), data.cols(), sha256_hex(bytes.data(), bytes.size())};
}

std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

nlohmann::json to_json(const QualityScores& q) {
  return {{"cluster_acc", q.cluster_acc}, {"ari", q.ari}, {"ami", q.ami}};
}

nlohmann::json to_json(const QualitySummary& q) {
  return {{"cluster_acc", to_json(q.cluster_acc)},
          {"ari", to_json(q.ari)},
          {"ami", to_json(q.ami)},
          {"trials", q.trials}};
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json j;
  j["dataset"] = report.dataset;
  j["fingerprint"] = {{"rows", report.fingerprint.rows},
                      {"cols", report.fingerprint.cols},
                      {"sha256", report.fingerprint.sha256}};
  j["trials"] = report.trials;
  j["config"] = report.config;
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : report.methods) {
    nlohmann::json mj;
    mj["method"] = m.method;
    nlohmann::json phases = nlohmann::json::object();
    for (const auto& [name, summary] : m.phases) phases[name] = to_json(summary);
    mj["phases"] = std::move(phases);
    nlohmann::json qt = nlohmann::json::array();
    for (const auto& q : m.quality_trials) qt.push_back(to_json(q));
    mj["quality_trials"] = std::move(qt);
    mj["quality"] = m.quality ? to_json(*m.quality) : nlohmann::json(nullptr);
    methods.push_back(std::move(mj));
  }
  j["methods"] = std::move(methods);
  return j;
}

}  // namespace psc
