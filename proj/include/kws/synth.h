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

// Synthetic lattice collections with known transcripts, for tests and
// benchmarks.
//
// Each line gets a true word sequence drawn from a Zipf-distributed
// vocabulary. The line lattice is a sausage: one slot per true word holding
// the true edge and, with probability confusion_rate, 1-3 competing edges.
// Competitors are edit-distance-1 neighbours of the true word when the
// vocabulary has any, random words otherwise. Log scores are
//
//   true edge:       N(0, score_noise^2)
//   competing edge:  -confusion_margin + N(0, score_noise^2)
//
// so with score_noise = 0 and confusion_margin = 0 all edges of a slot tie.

#ifndef KWS_SYNTH_H_
#define KWS_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kws/eval.h"

namespace kws {

struct SynthConfig {
  int num_lines = 100;
  int vocab_size = 500;
  int min_words = 5;
  int max_words = 15;
  double confusion_rate = 0.5;
  double score_noise = 0.5;
  double confusion_margin = 1.0;
  double zipf_exponent = 1.0;
  std::uint64_t seed = 42;
};

struct SynthLine {
  std::string region_id;
  std::vector<std::string> transcript;
  std::string lattice_text;
};

struct SynthCorpus {
  std::vector<std::string> vocabulary;  // sorted
  std::vector<SynthLine> lines;
  Qrels qrels;
  // The whole vocabulary, sorted.
  std::vector<std::string> queries;
};

// Deterministic in `config`. Throws std::invalid_argument for out-of-range
// parameters.
SynthCorpus GenerateCorpus(const SynthConfig& config);

// Writes `lattices/<region_id>.lat`, `qrels.tsv` and `queries.txt` under
// `out_dir`, creating directories as needed.
void WriteCorpus(const SynthCorpus& corpus, const std::filesystem::path& out_dir);

}  // namespace kws

#endif  // KWS_SYNTH_H_
