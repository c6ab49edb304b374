#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "psc/bench.hpp"
#include "psc/error.hpp"

TEST(Bench, Sha256KnownVectors) {
  EXPECT_EQ(psc::sha256_hex("abc", 3),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(psc::sha256_hex("", 0),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Bench, FingerprintUsesLittleEndianBytes) {
  psc::Matrix m(2, 1);
  m(0, 0) = 1.0;
  m(1, 0) = -2.5;
  unsigned char bytes[16] = {};
  const double v[2] = {1.0, -2.5};
  for (int i = 0; i < 2; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &v[i], 8);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  const auto fp = psc::fingerprint(m);
  EXPECT_EQ(fp.rows, 2u);
  EXPECT_EQ(fp.cols, 1u);
  EXPECT_EQ(fp.sha256, psc::sha256_hex(bytes, 16));
  psc::Matrix other = m;
  other(1, 0) = std::nextafter(-2.5, 0.0);
  EXPECT_NE(psc::fingerprint(other).sha256, fp.sha256);
}

TEST(Bench, SummarizeMoments) {
  std::vector<psc::PhaseMeasurement> trials{{1.0, 100, 50, 1000}, {3.0, 300, 70, 3000}};
  auto s = psc::summarize(trials);
  EXPECT_DOUBLE_EQ(s.seconds.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.seconds.std, 1.0);
  EXPECT_DOUBLE_EQ(s.allocator_high_water.mean, 200.0);
  ASSERT_TRUE(s.peak_rss.has_value());
  EXPECT_DOUBLE_EQ(s.peak_rss->mean, 2000.0);
  trials[1].peak_rss.reset();
  EXPECT_FALSE(psc::summarize(trials).peak_rss.has_value());
  EXPECT_THROW(psc::summarize({}), psc::ConfigError);
}

TEST(Bench, MeasurePhaseTimesAndProbes) {
  const auto m = psc::measure_phase([] {
    std::vector<double> v(1 << 20, 1.0);
    volatile double sink = v[12345];
    (void)sink;
  });
  EXPECT_GE(m.seconds, 0.0);
  EXPECT_GE(m.allocator_high_water, (std::size_t{1} << 20) * sizeof(double));
}

TEST(Bench, ReportJsonShape) {
  psc::BenchReport r;
  r.dataset = "circles";
  r.fingerprint = psc::fingerprint(psc::Matrix(3, 2));
  r.trials = 2;
  r.config = {{"k", 2}};
  psc::MethodReport sc;
  sc.method = "sc";
  sc.phases.emplace_back("total", psc::summarize({{0.5, 10, 10, std::nullopt}, {0.7, 12, 12, std::nullopt}}));
  sc.quality_trials = {{1.0, 1.0, 1.0}, {0.5, 0.0, 0.1}};
  sc.quality = psc::trial_summary(sc.quality_trials);
  r.methods.push_back(sc);
  const auto j = psc::to_json(r);
  EXPECT_EQ(j["dataset"], "circles");
  EXPECT_EQ(j["fingerprint"]["rows"], 3);
  EXPECT_EQ(j["fingerprint"]["sha256"].get<std::string>().size(), 64u);
  EXPECT_EQ(j["config"]["k"], 2);
  const auto& m = j["methods"][0];
  EXPECT_EQ(m["method"], "sc");
  EXPECT_NEAR(m["phases"]["total"]["seconds"]["mean"].get<double>(), 0.6, 1e-12);
  EXPECT_TRUE(m["phases"]["total"]["peak_rss_bytes"].is_null());
  EXPECT_EQ(m["phases"]["total"]["trials"].size(), 2u);
  EXPECT_EQ(m["quality_trials"].size(), 2u);
  EXPECT_NEAR(m["quality"]["cluster_acc"]["mean"].get<double>(), 0.75, 1e-12);
  EXPECT_EQ(m["quality"]["trials"], 2);
}
