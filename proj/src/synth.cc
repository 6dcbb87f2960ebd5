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

#include "kws/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "kws/errors.h"

namespace kws {
namespace {

constexpr std::string_view kAlphabet = "abcdeghilmnorstu";

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

char RandomLetter(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, kAlphabet.size() - 1);
  return kAlphabet[pick(rng)];
}

std::string Mutate(const std::string& w, std::mt19937_64& rng) {
  std::string out = w;
  std::uniform_int_distribution<int> op(0, 2);
  switch (op(rng)) {
    case 0: {  // substitute
      std::uniform_int_distribution<std::size_t> at(0, out.size() - 1);
      out[at(rng)] = RandomLetter(rng);
      break;
    }
    case 1: {  // insert
      std::uniform_int_distribution<std::size_t> at(0, out.size());
      out.insert(out.begin() + at(rng), RandomLetter(rng));
      break;
    }
    default:  // delete
      if (out.size() > 2) {
        std::uniform_int_distribution<std::size_t> at(0, out.size() - 1);
        out.erase(out.begin() + at(rng));
      }
  }
  return out;
}

// Distinct pseudo-words; about half are edit-distance-1 variants of earlier
// words so that realistic near-miss confusions exist.
std::vector<std::string> MakeVocabulary(int size, std::mt19937_64& rng) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  std::uniform_int_distribution<int> length(3, 7);
  std::bernoulli_distribution mutate(0.5);
  while (static_cast<int>(words.size()) < size) {
    std::string w;
    if (!words.empty() && mutate(rng)) {
      std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
      w = Mutate(words[pick(rng)], rng);
    } else {
      const int n = length(rng);
      for (int i = 0; i < n; ++i) w.push_back(RandomLetter(rng));
    }
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  std::shuffle(words.begin(), words.end(), rng);
  return words;
}

std::vector<std::vector<int>> EditNeighbours(
    const std::vector<std::string>& words) {
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(words.size()); ++i) index[words[i]] = i;
  std::vector<std::vector<int>> neighbours(words.size());
  for (int i = 0; i < static_cast<int>(words.size()); ++i) {
    const std::string& w = words[i];
    std::unordered_set<int> found;
    auto probe = [&](const std::string& v) {
      auto it = index.find(v);
      if (it != index.end() && it->second != i) found.insert(it->second);
    };
    for (std::size_t p = 0; p <= w.size(); ++p) {
      for (char c : kAlphabet) {
        std::string ins = w;
        ins.insert(ins.begin() + p, c);
        probe(ins);
        if (p < w.size() && c != w[p]) {
          std::string sub = w;
          sub[p] = c;
          probe(sub);
        }
      }
      if (p < w.size()) {
        std::string del = w;
        del.erase(del.begin() + p);
        probe(del);
      }
    }
    neighbours[i].assign(found.begin(), found.end());
    std::sort(neighbours[i].begin(), neighbours[i].end());
  }
  return neighbours;
}

void Validate(const SynthConfig& c) {
  if (c.num_lines < 1 || c.vocab_size < 1 || c.min_words < 1 ||
      c.max_words < c.min_words) {
    throw std::invalid_argument("synth: counts must be positive and ordered");
  }
  if (!(c.confusion_rate >= 0.0 && c.confusion_rate <= 1.0)) {
    throw std::invalid_argument("synth: confusion_rate must lie in [0, 1]");
  }
  if (!(c.score_noise >= 0.0) || !(c.confusion_margin >= 0.0) ||
      !(c.zipf_exponent >= 0.0)) {
    throw std::invalid_argument("synth: noise, margin and exponent must be >= 0");
  }
}

}  // namespace

SynthCorpus GenerateCorpus(const SynthConfig& config) {
  Validate(config);
  std::mt19937_64 vocab_rng(SplitMix64(config.seed));
  const std::vector<std::string> vocab =
      MakeVocabulary(config.vocab_size, vocab_rng);
  const auto neighbours = EditNeighbours(vocab);
  std::vector<double> weights(vocab.size());
  for (std::size_t k = 0; k < vocab.size(); ++k) {
    weights[k] = 1.0 / std::pow(static_cast<double>(k + 1), config.zipf_exponent);
  }
  const std::discrete_distribution<int> zipf_proto(weights.begin(),
                                                   weights.end());

  const int width = std::max<int>(
      6, static_cast<int>(std::to_string(config.num_lines).size()));
  SynthCorpus corpus;
  corpus.lines.resize(config.num_lines);
  for (int line = 0; line < config.num_lines; ++line) {
    std::mt19937_64 rng(
        SplitMix64(config.seed ^ SplitMix64(static_cast<std::uint64_t>(line) + 1)));
    auto zipf = zipf_proto;
    std::uniform_int_distribution<int> word_count(config.min_words,
                                                  config.max_words);
    std::bernoulli_distribution confused(config.confusion_rate);
    std::uniform_int_distribution<int> extra(1, 3);
    std::uniform_int_distribution<int> jitter(1, 4);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<int> any_word(0, config.vocab_size - 1);

    SynthLine& out = corpus.lines[line];
    const std::string ordinal = std::to_string(line + 1);
    out.region_id = "line_" +
                    std::string(std::max<int>(0, width - static_cast<int>(
                                                             ordinal.size())),
                                '0') +
                    ordinal;

    struct Candidate {
      int word;
      double log_score;
    };
    std::vector<std::vector<Candidate>> slots;
    std::vector<int> frames{0};
    const int n = word_count(rng);
    for (int s = 0; s < n; ++s) {
      const int truth = zipf(rng);
      out.transcript.push_back(vocab[truth]);
      std::vector<Candidate> slot{{truth, config.score_noise * noise(rng)}};
      if (config.vocab_size > 1 && confused(rng)) {
        const int k = extra(rng);
        std::vector<int> pool = neighbours[truth];
        std::shuffle(pool.begin(), pool.end(), rng);
        for (int c = 0; c < k; ++c) {
          int w = -1;
          if (!pool.empty()) {
            w = pool.back();
            pool.pop_back();
          } else {
            for (int tries = 0; tries < 64; ++tries) {
              const int cand = any_word(rng);
              const bool used = std::any_of(
                  slot.begin(), slot.end(),
                  [cand](const Candidate& x) { return x.word == cand; });
              if (!used) {
                w = cand;
                break;
              }
            }
          }
          if (w < 0) break;
          slot.push_back(
              {w, -config.confusion_margin + config.score_noise * noise(rng)});
        }
      }
      // Edge ids follow slot order; shuffle so the true word has no id bias
      // in 1-best tie-breaking.
      std::shuffle(slot.begin(), slot.end(), rng);
      slots.push_back(std::move(slot));
      frames.push_back(frames.back() +
                       2 * static_cast<int>(vocab[truth].size()) + jitter(rng));
    }

    std::string text;
    std::size_t edge_count = 0;
    for (const auto& slot : slots) edge_count += slot.size();
    text += "LATTICE " + out.region_id + " " + std::to_string(frames.back()) +
            "\nN " + std::to_string(frames.size()) + "\nE " +
            std::to_string(edge_count) + "\n";
    for (std::size_t k = 0; k < frames.size(); ++k) {
      text += "node " + std::to_string(k) + " " + std::to_string(frames[k]) + "\n";
    }
    int edge_id = 0;
    char score[40];
    for (std::size_t s = 0; s < slots.size(); ++s) {
      for (const Candidate& c : slots[s]) {
        std::snprintf(score, sizeof(score), "%.9g", c.log_score);
        text += "edge " + std::to_string(edge_id++) + " " + std::to_string(s) +
                " " + std::to_string(s + 1) + " " + vocab[c.word] + " " +
                score + "\n";
      }
    }
    out.lattice_text = std::move(text);
    for (const auto& w : out.transcript) corpus.qrels[w].insert(out.region_id);
  }

  corpus.vocabulary = vocab;
  std::sort(corpus.vocabulary.begin(), corpus.vocabulary.end());
  corpus.queries = corpus.vocabulary;
  return corpus;
}

void WriteCorpus(const SynthCorpus& corpus,
                 const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const fs::path lattice_dir = out_dir / "lattices";
  std::error_code ec;
  fs::create_directories(lattice_dir, ec);
  if (ec) throw Error("cannot create " + lattice_dir.string() + ": " + ec.message());

  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + p.string());
    return f;
  };
  for (const SynthLine& line : corpus.lines) {
    auto f = open(lattice_dir / (line.region_id + ".lat"));
    f << line.lattice_text;
  }
  {
    auto f = open(out_dir / "qrels.tsv");
    for (const auto& [word, regions] : corpus.qrels) {
      for (const auto& r : regions) f << word << '\t' << r << '\n';
    }
  }
  {
    auto f = open(out_dir / "queries.txt");
    for (const auto& q : corpus.queries) f << q << '\n';
  }
}

}  // namespace kws
