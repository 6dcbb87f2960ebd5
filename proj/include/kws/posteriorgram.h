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

#ifndef KWS_POSTERIORGRAM_H_
#define KWS_POSTERIORGRAM_H_

#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kws/lattice.h"

namespace kws {

// Frame-level word posteriors P(v | x, i) of one line region. Rows exist for
// the words of the source lattice; any other word reads as all zeros.
class Posteriorgram {
 public:
  Posteriorgram(std::string region_id, int num_frames,
                std::vector<std::string> words,
                std::vector<std::vector<double>> rows);

  const std::string& region_id() const { return region_id_; }
  int num_frames() const { return num_frames_; }
  std::span<const std::string> words() const { return words_; }

  // Row of `word`, or an empty span if the word has no row.
  std::span<const double> Row(std::string_view word) const;
  double At(std::string_view word, int frame) const;

 private:
  std::string region_id_;
  int num_frames_;
  std::vector<std::string> words_;  // sorted
  std::vector<std::vector<double>> rows_;
};

// rows[v][i] = sum of posteriors of v-labelled edges whose span contains i.
// Throws std::invalid_argument if `graph` is not normalized.
Posteriorgram BuildPosteriorgram(const WordGraph& graph);

struct Block {
  int begin = 0;  // inclusive
  int end = 0;    // exclusive
  int peak_frame = 0;
  double peak_value = 0.0;
};

struct BlockSet {
  std::string word;
  std::vector<Block> blocks;
};

inline constexpr double kDefaultPeakThreshold = 0.05;

// Splits the row of `word` into blocks around significant local maxima.
//
// The row is scanned left to right tracking the running maximum since the
// last cut. When a value falls below (running max - peak_threshold) the
// current block is closed just before that frame, with its peak at the
// leftmost frame attaining the running max, and a new block opens at that
// frame. At the end of the row the open block is closed. Blocks whose peak
// is below peak_threshold are dropped, except that a non-zero row whose
// maximum is itself below the threshold yields one block covering the row,
// so the global maximum always lies in some block.
//
// Throws std::invalid_argument unless 0 < peak_threshold < 1.
BlockSet SegmentBlocks(std::span<const double> row, std::string_view word,
                       double peak_threshold);
BlockSet SegmentBlocks(const Posteriorgram& pg, std::string_view word,
                       double peak_threshold = kDefaultPeakThreshold);

// CSV dump with header `frame,word,probability`; zero cells are skipped.
void WritePosteriorgramCsv(const Posteriorgram& pg, std::ostream& out);

}  // namespace kws

#endif  // KWS_POSTERIORGRAM_H_
