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

#include "kws/relevance.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kws/errors.h"

namespace kws {

std::string_view MethodName(RelevanceMethod method) {
  switch (method) {
    case RelevanceMethod::kOneBest:
      return "onebest";
    case RelevanceMethod::kBlockSum:
      return "sum";
    case RelevanceMethod::kFrameMax:
      return "max";
    case RelevanceMethod::kNaiveBayes:
      return "nb";
    case RelevanceMethod::kExact:
      return "exact";
  }
  return "unknown";
}

std::optional<RelevanceMethod> ParseMethod(std::string_view name) {
  for (auto m : {RelevanceMethod::kOneBest, RelevanceMethod::kBlockSum,
                 RelevanceMethod::kFrameMax, RelevanceMethod::kNaiveBayes,
                 RelevanceMethod::kExact}) {
    if (MethodName(m) == name) return m;
  }
  return std::nullopt;
}

RelevanceScore RelevanceOneBest(const WordGraph& graph,
                                std::string_view word) {
  RelevanceScore r{std::string(word), graph.region_id(), 0.0,
                   RelevanceMethod::kOneBest, std::nullopt};
  if (!graph.HasWord(word)) return r;
  for (int e : OneBestPath(graph)) {
    if (graph.edges()[e].word == word) {
      r.score = 1.0;
      r.best_span = graph.span(e);
      break;
    }
  }
  return r;
}

RelevanceScore RelevanceFrameMax(const Posteriorgram& pg,
                                 std::string_view word) {
  RelevanceScore r{std::string(word), pg.region_id(), 0.0,
                   RelevanceMethod::kFrameMax, std::nullopt};
  const auto row = pg.Row(word);
  if (row.empty()) return r;
  const auto it = std::max_element(row.begin(), row.end());
  if (*it <= 0.0) return r;
  r.score = *it;
  const int begin = static_cast<int>(it - row.begin());
  int end = begin;
  while (end < static_cast<int>(row.size()) && row[end] == r.score) ++end;
  r.best_span = FrameSpan{begin, end};
  return r;
}

RelevanceScore RelevanceBlockSum(const BlockSet& blocks) {
  RelevanceScore r{blocks.word, {}, 0.0, RelevanceMethod::kBlockSum,
                   std::nullopt};
  for (const Block& b : blocks.blocks) r.score += b.peak_value;
  return r;
}

RelevanceScore RelevanceNaiveBayes(const BlockSet& blocks) {
  RelevanceScore r{blocks.word, {}, 0.0, RelevanceMethod::kNaiveBayes,
                   std::nullopt};
  double q = 0.0;
  for (const Block& b : blocks.blocks) {
    q = b.peak_value + q * (1.0 - b.peak_value);
  }
  r.score = q;
  return r;
}

RelevanceScore RelevanceExact(const WordGraph& graph, std::string_view word) {
  RelevanceScore r{std::string(word), graph.region_id(), 0.0,
                   RelevanceMethod::kExact, std::nullopt};
  if (!graph.HasWord(word)) return r;
  const auto edges = graph.edges();
  std::vector<bool> skip(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) skip[k] = edges[k].word == word;

  const double gamma = graph.gamma();
  const double total = ForwardLogMass(graph, gamma)[graph.sink()];
  const double without = ForwardLogMass(graph, gamma, &skip)[graph.sink()];
  if (!std::isfinite(total)) {
    throw NumericError("region " + graph.region_id() + ": no finite path");
  }
  // 1 - exp(without - total); expm1 keeps precision when the word is rare.
  r.score = std::isfinite(without)
                ? std::clamp(-std::expm1(without - total), 0.0, 1.0)
                : 1.0;
  return r;
}

RelevanceScore RelevanceOracle(const WordGraph& graph, std::string_view word,
                               std::uint64_t cap) {
  RelevanceScore r{std::string(word), graph.region_id(), 0.0,
                   RelevanceMethod::kExact, std::nullopt};
  for (const PathHypothesis& path : EnumeratePaths(graph, cap)) {
    if (std::find(path.words.begin(), path.words.end(), word) !=
        path.words.end()) {
      r.score += path.probability;
    }
  }
  return r;
}

double DecisionThresholds::Tau() const {
  const double denom = loss_ny - loss_yy + loss_yn - loss_nn;
  const double tau = (loss_yn - loss_nn) / denom;
  if (!std::isfinite(tau)) {
    throw std::invalid_argument("loss matrix gives no finite threshold");
  }
  return tau;
}

bool Decide(const RelevanceScore& score, const DecisionThresholds& thresholds) {
  return score.score > thresholds.Tau();
}

}  // namespace kws
