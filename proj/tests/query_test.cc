// Copyright 2026 The KWS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kws/query.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_util.h"

namespace kws {
namespace {

using ::kws::testing::ExactSample;
using ::kws::testing::RandomLattice;
using ::testing::ElementsAre;
using ::testing::IsEmpty;

SpotIndex SampleIndex() {
  const WordGraph g = ExactSample();
  IndexOptions o;
  o.prune_epsilon = 0.0;
  return BuildIndexFromGraphs({&g, 1}, o);
}

SpotIndex RandomIndex(std::uint64_t seed, RelevanceMethod method) {
  std::mt19937_64 rng(seed);
  std::vector<WordGraph> graphs;
  for (int i = 0; i < 60; ++i) graphs.push_back(RandomLattice(rng, 8, 300, 6));
  IndexOptions o;
  o.method = method;
  o.prune_epsilon = 0.0;
  return BuildIndexFromGraphs(graphs, o);
}

TEST(SearchTest, SampleAtHalf) {
  const SpotIndex index = SampleIndex();
  const QueryResult r = Search(index, "cloud", 0.5);
  EXPECT_FALSE(r.out_of_lexicon);
  EXPECT_EQ(r.detected_count, 1u);
  ASSERT_EQ(r.hits.size(), 1u);
  EXPECT_EQ(r.hits[0].rank, 1u);
  EXPECT_EQ(r.hits[0].region_id, "r1");
  EXPECT_NEAR(r.hits[0].score, 0.6, 1e-12);
  EXPECT_EQ(r.hits[0].span, (FrameSpan{8, 22}));
}

TEST(SearchTest, KnownWordBelowThreshold) {
  const QueryResult r = Search(SampleIndex(), "clouds", 0.5);
  EXPECT_FALSE(r.out_of_lexicon);
  EXPECT_EQ(r.detected_count, 0u);
  EXPECT_THAT(r.hits, IsEmpty());
}

TEST(SearchTest, OutOfLexicon) {
  const QueryResult r = Search(SampleIndex(), "rain", 0.0);
  EXPECT_TRUE(r.out_of_lexicon);
  EXPECT_THAT(r.hits, IsEmpty());
  EXPECT_TRUE(Search(SampleIndex(), "", 0.0).out_of_lexicon);
}

TEST(SearchTest, ScoreEqualToTauIsNotDetected) {
  PostingMap entries{{"w", {{0, 0.5, 0, 1}, {1, 0.25, 0, 1}}}};
  const SpotIndex index(RelevanceMethod::kFrameMax, 0, 1, 0.05, {"a", "b"},
                        entries);
  EXPECT_EQ(Search(index, "w", 0.5).detected_count, 0u);
  EXPECT_EQ(Search(index, "w", 0.25).detected_count, 1u);
  EXPECT_EQ(Search(index, "w", 0.0).detected_count, 2u);
}

TEST(SearchTest, TauZeroReturnsEveryStoredSpot) {
  const SpotIndex index = RandomIndex(5, RelevanceMethod::kExact);
  for (const auto& [word, list] : index.entries()) {
    EXPECT_EQ(Search(index, word, 0.0).hits.size(), list.size());
  }
}

// Oracle: scan every posting, keep score > tau, order by (-score, region id).
std::vector<std::pair<double, std::string>> LinearScan(const SpotIndex& index,
                                                       const std::string& word,
                                                       double tau) {
  std::vector<std::pair<double, std::string>> out;
  for (const Posting& p : index.Find(word)) {
    if (p.score > tau) out.emplace_back(-p.score, index.RegionId(p.region));
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(SearchPropertyTest, MatchesLinearScanAndIsMonotone) {
  for (auto method : {RelevanceMethod::kFrameMax, RelevanceMethod::kBlockSum,
                      RelevanceMethod::kExact}) {
    const SpotIndex index = RandomIndex(7, method);
    for (const auto& [word, list] : index.entries()) {
      std::set<std::string> previous;
      bool first = true;
      for (double tau : {1.5, 1.0, 0.9, 0.6, 0.5, 0.3, 0.1, 0.01, 0.0}) {
        const QueryResult r = Search(index, word, tau);
        const auto want = LinearScan(index, word, tau);
        ASSERT_EQ(r.hits.size(), want.size());
        std::set<std::string> now;
        for (std::size_t k = 0; k < want.size(); ++k) {
          ASSERT_EQ(r.hits[k].rank, k + 1);
          ASSERT_EQ(r.hits[k].score, -want[k].first);
          ASSERT_EQ(r.hits[k].region_id, want[k].second);
          now.insert(r.hits[k].region_id);
        }
        // Lowering tau only adds detections.
        if (!first) {
          ASSERT_TRUE(std::includes(now.begin(), now.end(), previous.begin(),
                                    previous.end()));
        }
        previous = std::move(now);
        first = false;
      }
    }
  }
}

TEST(SearchPropertyTest, LimitTruncatesWithoutReordering) {
  const SpotIndex index = RandomIndex(9, RelevanceMethod::kNaiveBayes);
  for (const auto& [word, list] : index.entries()) {
    const QueryResult full = Search(index, word, 0.1);
    for (std::size_t limit : {0, 1, 2, 5}) {
      const QueryResult cut = Search(index, word, 0.1, limit);
      EXPECT_EQ(cut.detected_count, full.detected_count);
      ASSERT_EQ(cut.hits.size(), std::min(limit, full.hits.size()));
      for (std::size_t k = 0; k < cut.hits.size(); ++k) {
        EXPECT_EQ(cut.hits[k].region_id, full.hits[k].region_id);
      }
    }
  }
}

TEST(SuggestTest, Prefixes) {
  const SpotIndex index = SampleIndex();
  EXPECT_THAT(Suggest(index, "clo", 10), ElementsAre("cloud", "clouds"));
  EXPECT_THAT(Suggest(index, "clo", 1), ElementsAre("cloud"));
  EXPECT_THAT(Suggest(index, "cloud", 10), ElementsAre("cloud", "clouds"));
  EXPECT_THAT(Suggest(index, "zz", 10), IsEmpty());
  EXPECT_THAT(Suggest(index, "", 3), ElementsAre("cloud", "clouds", "is"));
  EXPECT_THAT(Suggest(index, "", 0), IsEmpty());
}

}  // namespace
}  // namespace kws
