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

// Inverted spot index: word -> regions where the word may be written, each
// with its relevance score and the frame span locating the spot.

#ifndef KWS_INDEX_H_
#define KWS_INDEX_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kws/lattice.h"
#include "kws/relevance.h"

namespace kws {

inline constexpr double kDefaultPruneEpsilon = 1e-4;

struct IndexOptions {
  RelevanceMethod method = RelevanceMethod::kFrameMax;
  NormalizationConfig normalization;
  double peak_threshold = kDefaultPeakThreshold;
  // Spots scoring below this are not stored; zero scores never are.
  double prune_epsilon = kDefaultPruneEpsilon;
  // Worker threads for BuildIndex; 0 picks hardware_concurrency().
  int threads = 0;
};

struct Posting {
  std::uint32_t region = 0;  // ordinal into SpotIndex::region_ids()
  double score = 0.0;
  std::uint32_t span_begin = 0;
  std::uint32_t span_end = 0;
  bool operator==(const Posting&) const = default;
};

using PostingMap = std::map<std::string, std::vector<Posting>, std::less<>>;

class SpotIndex {
 public:
  SpotIndex() = default;
  // `region_ids` must be sorted and unique; every posting list must be sorted
  // by score descending, then region ascending.
  SpotIndex(RelevanceMethod method, double prune_epsilon, double gamma,
            double peak_threshold, std::vector<std::string> region_ids,
            PostingMap entries);

  RelevanceMethod method() const { return method_; }
  double prune_epsilon() const { return prune_epsilon_; }
  double gamma() const { return gamma_; }
  double peak_threshold() const { return peak_threshold_; }
  std::span<const std::string> region_ids() const { return region_ids_; }
  std::size_t region_count() const { return region_ids_.size(); }
  const PostingMap& entries() const { return entries_; }

  // Posting list of `word`; empty for words outside the indexed lexicon.
  std::span<const Posting> Find(std::string_view word) const;
  bool Contains(std::string_view word) const;
  const std::string& RegionId(std::uint32_t ordinal) const {
    return region_ids_[ordinal];
  }

  bool operator==(const SpotIndex&) const = default;

 private:
  RelevanceMethod method_ = RelevanceMethod::kFrameMax;
  double prune_epsilon_ = kDefaultPruneEpsilon;
  double gamma_ = 1.0;
  double peak_threshold_ = kDefaultPeakThreshold;
  std::vector<std::string> region_ids_;
  PostingMap entries_;
};

// Scores every vocabulary word of one raw lattice with the configured
// estimator. Zero scores are included; pruning happens in the index.
std::vector<RelevanceScore> ScoreRegion(const WordGraph& raw_graph,
                                        const IndexOptions& options);

struct BuildResult {
  SpotIndex index;
  // One message per lattice file that failed to parse or normalize.
  std::vector<std::string> errors;
  std::size_t lattices_indexed = 0;
};

// Indexes every `*.lat` file directly under `lattice_dir`. Output does not
// depend on directory traversal order or thread count. Throws Error if no
// lattice could be indexed.
BuildResult BuildIndex(const std::filesystem::path& lattice_dir,
                       const IndexOptions& options);
BuildResult BuildIndexFromFiles(std::vector<std::filesystem::path> files,
                                const IndexOptions& options);
// In-memory variant; throws on duplicate region ids.
SpotIndex BuildIndexFromGraphs(std::span<const WordGraph> graphs,
                               const IndexOptions& options);

// Binary container, little-endian throughout:
//
//   header (64 bytes)
//     char[8] magic "KWSIDX01"
//     u32 format version          u32 method
//     f64 prune_epsilon           f64 gamma           f64 peak_threshold
//     u32 region count            u32 word count      u64 posting count
//     u32 CRC-32 of the payload   u32 reserved (0)
//   payload
//     region ids, then words: u32 byte length + UTF-8 bytes each
//     per word, in word order: u32 n, then n records of
//       u32 region ordinal, f64 score, u32 span begin, u32 span end
//
// Throws IndexFormatError: kVersion for a newer format, kCorrupt for a bad
// magic, size or checksum, kIo when the file cannot be opened or written.
inline constexpr std::uint32_t kIndexFormatVersion = 1;

std::string SerializeIndex(const SpotIndex& index);
SpotIndex DeserializeIndex(std::string_view bytes);
void SaveIndex(const SpotIndex& index, const std::filesystem::path& path);
SpotIndex LoadIndex(const std::filesystem::path& path);

struct IndexStats {
  std::size_t regions = 0;
  std::size_t vocabulary_size = 0;
  std::size_t total_spots = 0;
  double spots_per_line = 0.0;
};

IndexStats Stats(const SpotIndex& index);
std::string StatsJson(const IndexStats& stats);

}  // namespace kws

#endif  // KWS_INDEX_H_
