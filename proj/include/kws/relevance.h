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

// Estimators of the region relevance probability P(R | x, v): the
// probability that line region x contains at least one instance of word v.

#ifndef KWS_RELEVANCE_H_
#define KWS_RELEVANCE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "kws/lattice.h"
#include "kws/posteriorgram.h"

namespace kws {

enum class RelevanceMethod : std::uint32_t {
  kOneBest = 0,
  kBlockSum = 1,
  kFrameMax = 2,
  kNaiveBayes = 3,
  kExact = 4,
};

// CLI spelling: onebest, sum, max, nb, exact.
std::string_view MethodName(RelevanceMethod method);
std::optional<RelevanceMethod> ParseMethod(std::string_view name);

struct RelevanceScore {
  std::string word;
  std::string region_id;
  // In [0, 1] for every method but kBlockSum, which may exceed 1.
  double score = 0.0;
  RelevanceMethod method = RelevanceMethod::kFrameMax;
  std::optional<FrameSpan> best_span;
};

// 1 if `word` is on OneBestPath(graph), else 0. best_span is the span of
// the first such edge.
RelevanceScore RelevanceOneBest(const WordGraph& graph, std::string_view word);

// max_i P(v | x, i). best_span is the leftmost maximal run of frames
// attaining the maximum. Absent words score 0 with no span.
RelevanceScore RelevanceFrameMax(const Posteriorgram& pg,
                                 std::string_view word);

// Sum of block peaks. Not clamped; can exceed 1 for repeated words.
RelevanceScore RelevanceBlockSum(const BlockSet& blocks);

// q(n) of q(1) = P1, q(k) = Pk + q(k-1) (1 - Pk) over block peaks.
RelevanceScore RelevanceNaiveBayes(const BlockSet& blocks);

// Probability mass of the paths that contain at least one v-labelled edge,
// computed as 1 - forward(graph without v edges) / forward(graph).
RelevanceScore RelevanceExact(const WordGraph& graph, std::string_view word);

// Same event by brute-force path enumeration. Throws CapExceededError.
RelevanceScore RelevanceOracle(const WordGraph& graph, std::string_view word,
                               std::uint64_t cap);

// Bayes decision thresholds from a 2x2 loss matrix. loss_ab is the loss of
// answering b when the truth is a (n = no, y = yes).
struct DecisionThresholds {
  double loss_nn = 0.0;
  double loss_ny = 1.0;
  double loss_yn = 1.0;
  double loss_yy = 0.0;

  // (loss_yn - loss_nn) / (loss_ny - loss_yy + loss_yn - loss_nn).
  // Throws std::invalid_argument if the result is not finite.
  double Tau() const;
};

// Answer "yes" iff score > tau (strict).
bool Decide(const RelevanceScore& score, const DecisionThresholds& thresholds);

}  // namespace kws

#endif  // KWS_RELEVANCE_H_
