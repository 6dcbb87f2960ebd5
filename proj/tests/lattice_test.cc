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

#include "kws/lattice.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "kws/errors.h"
#include "test_util.h"

namespace kws {
namespace {

using ::kws::testing::ExactSample;
using ::kws::testing::RandomLattice;
using ::kws::testing::TestData;
using ::testing::ElementsAre;
using ::testing::HasSubstr;

std::map<std::string, double> PosteriorByWord(const WordGraph& g) {
  std::map<std::string, double> out;
  for (const Edge& e : g.edges()) out[e.word] += e.posterior;
  return out;
}

std::string Joined(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
  return s;
}

TEST(ParseLatticeTest, ParsesSample) {
  const WordGraph g = ReadLatticeFile(TestData("sample.lat"));
  EXPECT_EQ(g.region_id(), "r1");
  EXPECT_EQ(g.num_frames(), 30);
  EXPECT_EQ(g.nodes().size(), 4u);
  EXPECT_EQ(g.edges().size(), 4u);
  EXPECT_THAT(std::vector<std::string>(g.vocabulary().begin(),
                                       g.vocabulary().end()),
              ElementsAre("cloud", "clouds", "is", "the"));
  EXPECT_FALSE(g.normalized());
  EXPECT_EQ(g.span(1), (FrameSpan{8, 22}));
}

TEST(ParseLatticeTest, RejectsBackwardEdgeNamingIt) {
  try {
    ReadLatticeFile(TestData("backward_edge.lat"));
    FAIL() << "expected StructureError";
  } catch (const StructureError& e) {
    EXPECT_THAT(e.what(), HasSubstr("edge 3 (2->1)"));
  }
}

TEST(ParseLatticeTest, EmptyFileIsMissingHeader) {
  try {
    ReadLatticeFile(TestData("empty.lat"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_THAT(e.what(), HasSubstr("missing header"));
  }
}

TEST(ParseLatticeTest, CommentsAndBlankLinesIgnored) {
  const WordGraph g = ParseLattice(
      "# leading comment\n\nLATTICE x 4\n# mid\nN 2\nE 1\n\nnode 0 0\n"
      "node 1 4\nedge 0 0 1 w -1\n");
  EXPECT_EQ(g.edges().size(), 1u);
}

TEST(ParseLatticeTest, SyntaxErrorsCarryLineNumbers) {
  struct Case {
    const char* text;
    int line;
    const char* reason;
  };
  const Case cases[] = {
      {"LATTICE x\n", 1, "missing header"},
      {"LATTICE x 4\nE 1\n", 2, "expected 'N"},
      {"LATTICE x 4\nN 2\nE 1\nnode 0 0\nnode 1 4\nedge 0 0 1 w abc\n", 6,
       "bad log score"},
      {"LATTICE x 4\nN 2\nE 1\nnode 0 0\nnode 1 4\nedge 0 0 1 w nan\n", 6,
       "bad log score"},
      {"LATTICE x 4\nN 2\nE 1\nnode 0 0\nnode 1 4\narc 0 0 1 w 0\n", 6,
       "unknown record"},
      {"LATTICE x 4\nN 2\nE 1\nnode 0 0\nnode 1 4\nnode 2 3\n", 6,
       "more node lines"},
      {"LATTICE x 4\nN 2\nE 2\nnode 0 0\nnode 1 4\nedge 0 0 1 w 0\n", 6,
       "declared 2 edges"},
      {"LATTICE x 4\nN 2\n", 2, "truncated header"},
  };
  for (const Case& c : cases) {
    try {
      ParseLattice(c.text);
      ADD_FAILURE() << "accepted: " << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text;
      EXPECT_THAT(e.what(), HasSubstr(c.reason)) << c.text;
    }
  }
}

TEST(ParseLatticeTest, StructuralErrors) {
  const std::string head = "LATTICE x 10\n";
  struct Case {
    std::string body;
    const char* reason;
  };
  const Case cases[] = {
      {"N 3\nE 1\nnode 0 0\nnode 1 5\nnode 2 10\nedge 0 0 2 w 0\n",
       "node 1: second source"},
      {"N 3\nE 2\nnode 0 0\nnode 1 5\nnode 2 10\nedge 0 0 1 w 0\n"
       "edge 1 0 2 w 0\n",
       "node 1: second sink"},
      {"N 2\nE 1\nnode 0 0\nnode 1 8\nedge 0 0 1 w 0\n", "instead of [0, 10)"},
      {"N 2\nE 1\nnode 0 2\nnode 1 10\nedge 0 0 1 w 0\n", "instead of [0, 10)"},
      {"N 2\nE 1\nnode 0 0\nnode 0 10\nedge 0 0 1 w 0\n", "duplicate node id 0"},
      {"N 2\nE 1\nnode 0 0\nnode 1 10\nedge 0 0 7 w 0\n", "unknown node"},
      {"N 2\nE 2\nnode 0 0\nnode 1 10\nedge 0 0 1 w 0\nedge 0 0 1 v 0\n",
       "duplicate edge id 0"},
      {"N 2\nE 1\nnode 0 0\nnode 1 11\nedge 0 0 1 w 0\n", "outside [0, 10]"},
      {"N 2\nE 1\nnode 0 0\nnode 1 10\nedge 0 1 0 w 0\n",
       "is not after start frame"},
  };
  for (const Case& c : cases) {
    try {
      ParseLattice(head + c.body);
      ADD_FAILURE() << "accepted: " << c.body;
    } catch (const StructureError& e) {
      EXPECT_THAT(e.what(), HasSubstr(c.reason)) << c.body;
    }
  }
}

TEST(NormalizeTest, SamplePosteriorsFromPathEnumeration) {
  // Two paths with weights 0.6 and 0.4; 'the' and 'is' lie on both.
  const auto post = PosteriorByWord(Normalize(ExactSample()));
  EXPECT_NEAR(post.at("the"), 1.0, 1e-12);
  EXPECT_NEAR(post.at("cloud"), 0.6, 1e-12);
  EXPECT_NEAR(post.at("clouds"), 0.4, 1e-12);
  EXPECT_NEAR(post.at("is"), 1.0, 1e-12);
}

TEST(NormalizeTest, SampleFileMatchesToItsPrintedPrecision) {
  const auto post = PosteriorByWord(Normalize(ReadLatticeFile(TestData("sample.lat"))));
  EXPECT_NEAR(post.at("cloud"), 0.6, 1e-7);
  EXPECT_NEAR(post.at("clouds"), 0.4, 1e-7);
}

TEST(NormalizeTest, SinglePathEdgesHavePosteriorOne) {
  const WordGraph g = Normalize(ReadLatticeFile(TestData("single_path.lat")));
  for (const Edge& e : g.edges()) EXPECT_NEAR(e.posterior, 1.0, 1e-12);
}

TEST(NormalizeTest, SmallGammaFlattensParallelEdges) {
  const WordGraph g = Normalize(ExactSample(), {1e-9});
  const auto post = PosteriorByWord(g);
  EXPECT_NEAR(post.at("cloud"), 0.5, 1e-9);
  EXPECT_NEAR(post.at("clouds"), 0.5, 1e-9);
  EXPECT_DOUBLE_EQ(g.gamma(), 1e-9);
}

TEST(NormalizeTest, GammaSharpens) {
  // Scores 0.6 : 0.4 raised to the power 2 -> 0.36 : 0.16.
  const auto post = PosteriorByWord(Normalize(ExactSample(), {2.0}));
  EXPECT_NEAR(post.at("cloud"), 0.36 / 0.52, 1e-12);
}

TEST(NormalizeTest, RejectsBadGamma) {
  EXPECT_THROW(Normalize(ExactSample(), {0.0}), std::invalid_argument);
  EXPECT_THROW(Normalize(ExactSample(), {-1.0}), std::invalid_argument);
  EXPECT_THROW(Normalize(ExactSample(), {std::nan("")}), std::invalid_argument);
}

TEST(NormalizeTest, NoFinitePath) {
  const WordGraph g = ParseLattice(
      "LATTICE z 4\nN 2\nE 1\nnode 0 0\nnode 1 4\nedge 0 0 1 w -inf\n");
  try {
    Normalize(g);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_THAT(e.what(), HasSubstr("no finite path"));
  }
}

TEST(NormalizeTest, HugeScoresStayFinite) {
  const WordGraph g = ParseLattice(
      "LATTICE big 4\nN 2\nE 2\nnode 0 0\nnode 1 4\n"
      "edge 0 0 1 a -5000\nedge 1 0 1 b -5001\n");
  const auto post = PosteriorByWord(Normalize(g));
  EXPECT_NEAR(post.at("a"), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

// Frame partition and path-sum invariants over random DAGs.
TEST(NormalizePropertyTest, RandomLatticeInvariants) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const WordGraph g = Normalize(RandomLattice(rng));
    std::vector<double> frame_sum(g.num_frames(), 0.0);
    for (int k = 0; k < static_cast<int>(g.edges().size()); ++k) {
      const double p = g.edges()[k].posterior;
      ASSERT_GE(p, 0.0);
      ASSERT_LE(p, 1.0);
      for (int i = g.span(k).begin; i < g.span(k).end; ++i) frame_sum[i] += p;
    }
    for (double s : frame_sum) ASSERT_NEAR(s, 1.0, 1e-9);

    double path_sum = 0.0;
    for (const auto& p : EnumeratePaths(g, 2000)) path_sum += p.probability;
    ASSERT_NEAR(path_sum, 1.0, 1e-9);
  }
}

// A score offset that adds the same amount to every path cancels. For a
// general DAG that is an offset proportional to the edge's frame length
// (paths tile the region); when all paths have the same edge count, as in
// sausages, a flat per-edge offset works too.
TEST(NormalizePropertyTest, PathConstantShiftCancels) {
  std::mt19937_64 rng(13);
  auto shifted = [](const WordGraph& raw, double flat, double per_frame) {
    std::vector<Node> nodes(raw.nodes().begin(), raw.nodes().end());
    std::vector<Edge> edges(raw.edges().begin(), raw.edges().end());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const FrameSpan s = raw.span(static_cast<int>(k));
      edges[k].log_score += flat + per_frame * (s.end - s.begin);
    }
    return WordGraph(raw.region_id(), raw.num_frames(), nodes, edges);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const WordGraph raw = RandomLattice(rng);
    const WordGraph g = Normalize(raw);
    const WordGraph h = Normalize(shifted(raw, 0.0, -0.37));
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
      ASSERT_NEAR(h.edges()[k].posterior, g.edges()[k].posterior, 1e-9);
    }
  }
  const WordGraph diamond = ReadLatticeFile(TestData("diamond.lat"));
  const WordGraph g = Normalize(diamond);
  const WordGraph h = Normalize(shifted(diamond, 3.75, 0.0));
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    EXPECT_NEAR(h.edges()[k].posterior, g.edges()[k].posterior, 1e-9);
  }
}

TEST(OneBestPathTest, SamplePrefersCloud) {
  const WordGraph g = ReadLatticeFile(TestData("sample.lat"));
  std::vector<std::string> words;
  for (int e : OneBestPath(g)) words.push_back(g.edges()[e].word);
  EXPECT_THAT(words, ElementsAre("the", "cloud", "is"));
}

TEST(OneBestPathTest, SinglePath) {
  const WordGraph g = ReadLatticeFile(TestData("single_path.lat"));
  EXPECT_THAT(OneBestPath(g), ElementsAre(0, 1));
}

TEST(OneBestPathTest, ExactTieTakesSmallerEdgeId) {
  const WordGraph g = ParseLattice(
      "LATTICE t 4\nN 2\nE 2\nnode 0 0\nnode 1 4\n"
      "edge 9 0 1 late -0.5\nedge 4 0 1 early -0.5\n");
  const auto path = OneBestPath(g);
  ASSERT_EQ(path.size(), 1u);
  EXPECT_EQ(g.edges()[path[0]].id, 4);
}

TEST(OneBestPathTest, TieBreakIsLexicographicOverWholePath) {
  // Path [0] skips node 1 and ties with path [1, 2] at -1.
  const WordGraph g = ParseLattice(
      "LATTICE t 8\nN 3\nE 3\nnode 0 0\nnode 1 4\nnode 2 8\n"
      "edge 1 0 1 a -0.5\nedge 2 1 2 b -0.5\nedge 0 0 2 c -1\n");
  std::vector<int> ids;
  for (int e : OneBestPath(g)) ids.push_back(g.edges()[e].id);
  EXPECT_THAT(ids, ElementsAre(0));
}

TEST(EnumeratePathsTest, Sample) {
  const auto paths = EnumeratePaths(Normalize(ExactSample()), 10);
  ASSERT_EQ(paths.size(), 2u);
  std::map<std::string, double> by_text;
  for (const auto& p : paths) by_text[Joined(p.words)] = p.probability;
  EXPECT_NEAR(by_text.at("the cloud is"), 0.6, 1e-12);
  EXPECT_NEAR(by_text.at("the clouds is"), 0.4, 1e-12);
}

TEST(EnumeratePathsTest, SinglePath) {
  const auto paths = EnumeratePaths(ReadLatticeFile(TestData("single_path.lat")), 1);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_NEAR(paths[0].probability, 1.0, 1e-15);
  EXPECT_THAT(paths[0].words, ElementsAre("hello", "world"));
}

TEST(EnumeratePathsTest, DiamondProbabilitiesMultiply) {
  // Stage one 0.7/0.3, stage two 0.2/0.8.
  std::map<std::string, double> by_text;
  for (const auto& p : EnumeratePaths(ReadLatticeFile(TestData("diamond.lat")), 4)) {
    by_text[Joined(p.words)] = p.probability;
  }
  ASSERT_EQ(by_text.size(), 4u);
  EXPECT_NEAR(by_text.at("a c"), 0.14, 1e-12);
  EXPECT_NEAR(by_text.at("a d"), 0.56, 1e-12);
  EXPECT_NEAR(by_text.at("b c"), 0.06, 1e-12);
  EXPECT_NEAR(by_text.at("b d"), 0.24, 1e-12);
}

TEST(EnumeratePathsTest, CapExceededReportsPathCount) {
  try {
    EnumeratePaths(ReadLatticeFile(TestData("diamond.lat")), 3);
    FAIL();
  } catch (const CapExceededError& e) {
    EXPECT_EQ(e.path_count_lower_bound(), 4u);
  }
}

TEST(EnumeratePathsTest, OneBestIsArgmaxOfEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const WordGraph g = Normalize(RandomLattice(rng));
    const auto paths = EnumeratePaths(g, 2000);
    const double best =
        std::max_element(paths.begin(), paths.end(),
                         [](const auto& a, const auto& b) {
                           return a.probability < b.probability;
                         })->probability;
    double one_best_log = 0.0;
    for (int e : OneBestPath(g)) one_best_log += g.edges()[e].log_score;
    const double total = ForwardLogMass(g, 1.0)[g.sink()];
    ASSERT_NEAR(std::exp(one_best_log - total), best, 1e-12);
  }
}

TEST(FormatLatticeTest, ParsesBackIdentically) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const WordGraph g = RandomLattice(rng);
    const WordGraph back = ParseLattice(FormatLattice(g));
    ASSERT_EQ(back.edges().size(), g.edges().size());
    for (std::size_t k = 0; k < g.edges().size(); ++k) {
      EXPECT_EQ(back.edges()[k].word, g.edges()[k].word);
      EXPECT_EQ(back.edges()[k].log_score, g.edges()[k].log_score);
      EXPECT_EQ(back.span(k), g.span(k));
    }
  }
}

TEST(CountPathsTest, Fixtures) {
  EXPECT_EQ(CountPaths(ReadLatticeFile(TestData("sample.lat"))), 2u);
  EXPECT_EQ(CountPaths(ReadLatticeFile(TestData("diamond.lat"))), 4u);
  EXPECT_EQ(CountPaths(ReadLatticeFile(TestData("dag.lat"))), 5u);
}

}  // namespace
}  // namespace kws
