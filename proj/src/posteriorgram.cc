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

#include "kws/posteriorgram.h"

#include <algorithm>
#include <stdexcept>

namespace kws {

Posteriorgram::Posteriorgram(std::string region_id, int num_frames,
                             std::vector<std::string> words,
                             std::vector<std::vector<double>> rows)
    : region_id_(std::move(region_id)),
      num_frames_(num_frames),
      words_(std::move(words)),
      rows_(std::move(rows)) {
  if (words_.size() != rows_.size()) {
    throw std::invalid_argument("posteriorgram: word/row count mismatch");
  }
  if (!std::is_sorted(words_.begin(), words_.end())) {
    throw std::invalid_argument("posteriorgram: words must be sorted");
  }
  for (const auto& row : rows_) {
    if (static_cast<int>(row.size()) != num_frames_) {
      throw std::invalid_argument("posteriorgram: row length mismatch");
    }
  }
}

std::span<const double> Posteriorgram::Row(std::string_view word) const {
  auto it = std::lower_bound(words_.begin(), words_.end(), word);
  if (it == words_.end() || *it != word) return {};
  return rows_[it - words_.begin()];
}

double Posteriorgram::At(std::string_view word, int frame) const {
  auto row = Row(word);
  return row.empty() ? 0.0 : row[frame];
}

Posteriorgram BuildPosteriorgram(const WordGraph& graph) {
  if (!graph.normalized()) {
    throw std::invalid_argument("posteriorgram needs a normalized lattice");
  }
  const auto vocab = graph.vocabulary();
  std::vector<std::string> words(vocab.begin(), vocab.end());
  std::vector<std::vector<double>> rows(
      words.size(), std::vector<double>(graph.num_frames(), 0.0));
  const auto edges = graph.edges();
  for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
    const auto row_it =
        std::lower_bound(words.begin(), words.end(), edges[k].word);
    auto& row = rows[row_it - words.begin()];
    const FrameSpan s = graph.span(k);
    const double p = edges[k].posterior;
    for (int i = s.begin; i < s.end; ++i) row[i] += p;
  }
  // Summation rounding may overshoot 1 by an ulp.
  for (auto& row : rows) {
    for (double& v : row) v = std::min(v, 1.0);
  }
  return Posteriorgram(graph.region_id(), graph.num_frames(), std::move(words),
                       std::move(rows));
}

BlockSet SegmentBlocks(std::span<const double> row, std::string_view word,
                       double peak_threshold) {
  if (!(peak_threshold > 0.0 && peak_threshold < 1.0)) {
    throw std::invalid_argument("peak threshold must lie in (0, 1)");
  }
  BlockSet result{std::string(word), {}};
  if (row.empty()) return result;

  std::vector<Block> candidates;
  Block open{0, 0, 0, row[0]};
  for (int i = 1; i < static_cast<int>(row.size()); ++i) {
    const double v = row[i];
    if (v < open.peak_value - peak_threshold) {
      open.end = i;
      candidates.push_back(open);
      open = Block{i, 0, i, v};
    } else if (v > open.peak_value) {
      open.peak_value = v;
      open.peak_frame = i;
    }
  }
  open.end = static_cast<int>(row.size());
  candidates.push_back(open);

  if (candidates.size() == 1) {
    // No significant drop anywhere: the row is one block if it is non-zero.
    if (open.peak_value > 0.0) result.blocks.push_back(open);
    return result;
  }
  for (const Block& b : candidates) {
    if (b.peak_value >= peak_threshold) result.blocks.push_back(b);
  }
  return result;
}

BlockSet SegmentBlocks(const Posteriorgram& pg, std::string_view word,
                       double peak_threshold) {
  return SegmentBlocks(pg.Row(word), word, peak_threshold);
}

void WritePosteriorgramCsv(const Posteriorgram& pg, std::ostream& out) {
  out << "frame,word,probability\n";
  const auto words = pg.words();
  for (int i = 0; i < pg.num_frames(); ++i) {
    for (const auto& w : words) {
      const double p = pg.Row(w)[i];
      if (p > 0.0) out << i << ',' << w << ',' << p << '\n';
    }
  }
}

}  // namespace kws
