#include <algorithm>
#include <map>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "motionkit/error.hpp"
#include "motionkit/filter.hpp"
#include "oracles.hpp"

using namespace motionkit;

namespace {

FilterState from_lengths(const std::vector<double>& means) {
  std::vector<Clip> clips;
  for (std::size_t i = 0; i < means.size(); ++i) clips.push_back({"c" + std::to_string(i), {means[i]}});
  return FilterState::from_clips(std::move(clips));
}

std::map<std::string, std::vector<double>> as_map(const FilterState& s) {
  std::map<std::string, std::vector<double>> m;
  for (const Clip& c : s.clips) m[c.id] = c.episode_lengths;
  return m;
}

void expect_matches_oracle(const FilterState& initial) {
  const FilterState out = filter_until_converged(initial);
  const oracle::FilterOutcome o = oracle::repeated_mean_filter(as_map(initial));
  std::vector<std::string> retained = out.retained_ids();
  std::sort(retained.begin(), retained.end());
  EXPECT_EQ(retained, o.survivors);
  ASSERT_EQ(out.sigma_trace.size(), o.sigmas.size());
  for (std::size_t k = 0; k < o.sigmas.size(); ++k) EXPECT_NEAR(out.sigma_trace[k], o.sigmas[k], 1e-9 * o.sigmas[k]);
  for (std::size_t k = 1; k < out.sigma_trace.size(); ++k) EXPECT_GE(out.sigma_trace[k], out.sigma_trace[k - 1]);
  EXPECT_LE(static_cast<std::size_t>(out.iteration), initial.clips.size());
  EXPECT_TRUE(out.converged);
}

}  // namespace

TEST(FilterStep, TwoShortClipsRemoved) {
  const FilterState s = filter_step(from_lengths({10, 10, 100}));
  EXPECT_EQ(s.retained_ids(), std::vector<std::string>{"c2"});
  EXPECT_EQ(s.sigma, 100.0);
  EXPECT_EQ(s.iteration, 1);
  EXPECT_EQ(s.removal_order, (std::vector<std::string>{"c0", "c1"}));
}

TEST(FilterUntilConverged, SigmaTrace) {
  const FilterState s = filter_until_converged(from_lengths({10, 10, 100}));
  EXPECT_EQ(s.sigma_trace, (std::vector<double>{40, 100}));
  EXPECT_EQ(s.retained_ids(), std::vector<std::string>{"c2"});
}

TEST(FilterStep, EqualLengthsAreAFixedPoint) {
  const FilterState s = filter_step(from_lengths({7, 7, 7, 7}));
  EXPECT_EQ(s.retained_count(), 4u);
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.sigma_trace, std::vector<double>{7});
}

TEST(FilterUntilConverged, ConvergedInputIsReturnedUnchanged) {
  const FilterState once = filter_until_converged(from_lengths({3, 9, 27, 81}));
  const FilterState twice = filter_until_converged(once);
  EXPECT_EQ(twice.iteration, once.iteration);
  EXPECT_EQ(twice.retained_ids(), once.retained_ids());
  EXPECT_EQ(twice.sigma_trace, once.sigma_trace);
}

TEST(FilterUntilConverged, OneToHundred) {
  std::vector<double> lengths;
  for (int i = 1; i <= 100; ++i) lengths.push_back(i);
  expect_matches_oracle(from_lengths(lengths));
}

TEST(FilterUntilConverged, RandomCorporaMatchOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(1.0, 300.0);
  std::uniform_int_distribution<int> count(1, 50), episodes(1, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Clip> clips;
    const int n = trial < 50 ? 50 : count(rng);
    for (int i = 0; i < n; ++i) {
      Clip c{"clip" + std::to_string(i), {}};
      for (int e = episodes(rng); e > 0; --e) c.episode_lengths.push_back(std::round(u(rng)));
      clips.push_back(std::move(c));
    }
    expect_matches_oracle(FilterState::from_clips(std::move(clips)));
  }
}

TEST(FilterState, RejectsBadInput) {
  EXPECT_THROW(FilterState::from_clips({}), ValidationError);
  EXPECT_THROW(FilterState::from_clips({{"a", {}}}), ValidationError);
  EXPECT_THROW(FilterState::from_clips({{"a", {1}}, {"a", {2}}}), ValidationError);
}

TEST(ClipStats, ParseAndReport) {
  const auto clips = parse_clip_stats(R"({"walk": [10, 12], "carry": [100]})");
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(clips[0].id, "walk");
  EXPECT_EQ(clips[0].mean_length(), 11.0);
  const std::string report = filter_report_json(filter_until_converged(FilterState::from_clips(clips)));
  EXPECT_NE(report.find("\"retained\""), std::string::npos);
  EXPECT_NE(report.find("\"sigma_trace\""), std::string::npos);
  EXPECT_THROW(parse_clip_stats("[1,2]"), ParseError);
  EXPECT_THROW(parse_clip_stats(R"({"a": [-1]})"), ParseError);
  EXPECT_THROW(parse_clip_stats("{"), ParseError);
}
