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

#include "kws/index.h"

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>

#include "json.hpp"
#include "kws/errors.h"
#include "kws/posteriorgram.h"

namespace kws {
namespace {

bool PostingOrder(const Posting& a, const Posting& b) {
  return a.score != b.score ? a.score > b.score : a.region < b.region;
}

void CheckOptions(const IndexOptions& options) {
  if (!(options.prune_epsilon >= 0.0 && options.prune_epsilon < 1.0)) {
    throw std::invalid_argument("prune epsilon must lie in [0, 1)");
  }
  if (!(options.peak_threshold > 0.0 && options.peak_threshold < 1.0)) {
    throw std::invalid_argument("peak threshold must lie in (0, 1)");
  }
}

}  // namespace

SpotIndex::SpotIndex(RelevanceMethod method, double prune_epsilon,
                     double gamma, double peak_threshold,
                     std::vector<std::string> region_ids, PostingMap entries)
    : method_(method),
      prune_epsilon_(prune_epsilon),
      gamma_(gamma),
      peak_threshold_(peak_threshold),
      region_ids_(std::move(region_ids)),
      entries_(std::move(entries)) {
  if (std::adjacent_find(region_ids_.begin(), region_ids_.end(),
                         std::greater_equal<>()) != region_ids_.end()) {
    throw std::invalid_argument("region ids must be sorted and unique");
  }
  for (const auto& [word, list] : entries_) {
    if (!std::is_sorted(list.begin(), list.end(), PostingOrder)) {
      throw std::invalid_argument("posting list of '" + word + "' unsorted");
    }
    for (const Posting& p : list) {
      if (p.region >= region_ids_.size()) {
        throw std::invalid_argument("posting references unknown region");
      }
    }
  }
}

std::span<const Posting> SpotIndex::Find(std::string_view word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return {};
  return it->second;
}

bool SpotIndex::Contains(std::string_view word) const {
  return entries_.find(word) != entries_.end();
}

std::vector<RelevanceScore> ScoreRegion(const WordGraph& raw_graph,
                                        const IndexOptions& options) {
  std::vector<RelevanceScore> scores;
  const auto vocab = raw_graph.vocabulary();
  scores.reserve(vocab.size());
  if (options.method == RelevanceMethod::kOneBest) {
    for (const auto& w : vocab) scores.push_back(RelevanceOneBest(raw_graph, w));
    return scores;
  }

  const WordGraph graph = Normalize(raw_graph, options.normalization);
  const Posteriorgram pg = BuildPosteriorgram(graph);
  for (const auto& w : vocab) {
    // The frame-max argmax run locates the spot for every estimator.
    RelevanceScore located = RelevanceFrameMax(pg, w);
    switch (options.method) {
      case RelevanceMethod::kFrameMax:
        scores.push_back(std::move(located));
        continue;
      case RelevanceMethod::kBlockSum:
        scores.push_back(
            RelevanceBlockSum(SegmentBlocks(pg, w, options.peak_threshold)));
        break;
      case RelevanceMethod::kNaiveBayes:
        scores.push_back(
            RelevanceNaiveBayes(SegmentBlocks(pg, w, options.peak_threshold)));
        break;
      case RelevanceMethod::kExact:
        scores.push_back(RelevanceExact(graph, w));
        break;
      case RelevanceMethod::kOneBest:
        break;
    }
    scores.back().region_id = graph.region_id();
    scores.back().best_span = located.best_span;
  }
  return scores;
}

namespace {

struct RegionScores {
  std::string region_id;
  std::vector<RelevanceScore> scores;
};

SpotIndex Assemble(std::vector<RegionScores> regions,
                   const IndexOptions& options) {
  std::sort(regions.begin(), regions.end(),
            [](const RegionScores& a, const RegionScores& b) {
              return a.region_id < b.region_id;
            });
  std::vector<std::string> region_ids;
  region_ids.reserve(regions.size());
  PostingMap entries;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    region_ids.push_back(regions[r].region_id);
    for (const RelevanceScore& s : regions[r].scores) {
      if (!(s.score > 0.0) || s.score < options.prune_epsilon) continue;
      const FrameSpan span = s.best_span.value_or(FrameSpan{});
      entries[s.word].push_back({static_cast<std::uint32_t>(r), s.score,
                                 static_cast<std::uint32_t>(span.begin),
                                 static_cast<std::uint32_t>(span.end)});
    }
  }
  for (auto& [word, list] : entries) {
    std::sort(list.begin(), list.end(), PostingOrder);
  }
  return SpotIndex(options.method, options.prune_epsilon,
                   options.normalization.gamma, options.peak_threshold,
                   std::move(region_ids), std::move(entries));
}

}  // namespace

SpotIndex BuildIndexFromGraphs(std::span<const WordGraph> graphs,
                               const IndexOptions& options) {
  CheckOptions(options);
  std::vector<RegionScores> regions;
  regions.reserve(graphs.size());
  for (const WordGraph& g : graphs) {
    regions.push_back({g.region_id(), ScoreRegion(g, options)});
  }
  std::vector<std::string> ids;
  for (const auto& r : regions) ids.push_back(r.region_id);
  std::sort(ids.begin(), ids.end());
  auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) throw Error("duplicate region id " + *dup);
  return Assemble(std::move(regions), options);
}

BuildResult BuildIndexFromFiles(std::vector<std::filesystem::path> files,
                                const IndexOptions& options) {
  CheckOptions(options);
  std::sort(files.begin(), files.end());

  struct Slot {
    std::optional<RegionScores> region;
    std::string error;
  };
  std::vector<Slot> slots(files.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        WordGraph g = ReadLatticeFile(files[i].string());
        auto scores = ScoreRegion(g, options);
        slots[i].region = RegionScores{g.region_id(), std::move(scores)};
      } catch (const std::exception& e) {
        slots[i].error = files[i].string() + ": " + e.what();
      }
    }
  };
  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp<int>(threads, 1,
                            std::max<int>(1, static_cast<int>(files.size())));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }

  BuildResult result;
  std::vector<RegionScores> regions;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].region) {
      result.errors.push_back(std::move(slots[i].error));
      continue;
    }
    const std::string& id = slots[i].region->region_id;
    auto [it, fresh] = seen.emplace(id, i);
    if (!fresh) {
      result.errors.push_back(files[i].string() + ": duplicate region id " +
                              id + " (first in " + files[it->second].string() +
                              ")");
      continue;
    }
    regions.push_back(std::move(*slots[i].region));
  }
  if (regions.empty()) {
    throw Error("no lattice could be indexed (" +
                std::to_string(result.errors.size()) + " failures)");
  }
  result.lattices_indexed = regions.size();
  result.index = Assemble(std::move(regions), options);
  return result;
}

BuildResult BuildIndex(const std::filesystem::path& lattice_dir,
                       const IndexOptions& options) {
  std::error_code ec;
  std::filesystem::directory_iterator it(lattice_dir, ec);
  if (ec) throw Error("cannot read " + lattice_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : it) {
    if (entry.is_regular_file() && entry.path().extension() == ".lat") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw Error("no .lat files in " + lattice_dir.string());
  }
  return BuildIndexFromFiles(std::move(files), options);
}

namespace {

constexpr char kMagic[8] = {'K', 'W', 'S', 'I', 'D', 'X', '0', '1'};
constexpr std::size_t kHeaderSize = 64;
constexpr std::size_t kRecordSize = 20;

class Writer {
 public:
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Str(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void Raw(std::string_view s) { out_.append(s); }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : in_(bytes) {}
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t U64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Str() {
    const std::uint32_t n = U32();
    Need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view Raw(std::size_t n) {
    Need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw IndexFormatError(IndexFormatError::Kind::kCorrupt,
                             "index file truncated");
    }
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t Crc32(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off),
                static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string SerializeIndex(const SpotIndex& index) {
  Writer payload;
  std::uint64_t posting_count = 0;
  for (const auto& id : index.region_ids()) payload.Str(id);
  for (const auto& [word, list] : index.entries()) payload.Str(word);
  for (const auto& [word, list] : index.entries()) {
    payload.U32(static_cast<std::uint32_t>(list.size()));
    for (const Posting& p : list) {
      payload.U32(p.region);
      payload.F64(p.score);
      payload.U32(p.span_begin);
      payload.U32(p.span_end);
    }
    posting_count += list.size();
  }

  Writer out;
  out.Raw(std::string_view(kMagic, sizeof(kMagic)));
  out.U32(kIndexFormatVersion);
  out.U32(static_cast<std::uint32_t>(index.method()));
  out.F64(index.prune_epsilon());
  out.F64(index.gamma());
  out.F64(index.peak_threshold());
  out.U32(static_cast<std::uint32_t>(index.region_count()));
  out.U32(static_cast<std::uint32_t>(index.entries().size()));
  out.U64(posting_count);
  out.U32(Crc32(payload.bytes()));
  out.U32(0);
  out.Raw(payload.bytes());
  return std::move(out.bytes());
}

SpotIndex DeserializeIndex(std::string_view bytes) {
  using Kind = IndexFormatError::Kind;
  Reader in(bytes);
  if (bytes.size() < kHeaderSize) {
    throw IndexFormatError(Kind::kCorrupt, "index file truncated");
  }
  if (in.Raw(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw IndexFormatError(Kind::kCorrupt, "not a spot index (bad magic)");
  }
  const std::uint32_t version = in.U32();
  if (version != kIndexFormatVersion) {
    throw IndexFormatError(Kind::kVersion,
                           "unsupported index format version " +
                               std::to_string(version) + " (expected " +
                               std::to_string(kIndexFormatVersion) + ")");
  }
  const std::uint32_t method_raw = in.U32();
  if (method_raw > static_cast<std::uint32_t>(RelevanceMethod::kExact)) {
    throw IndexFormatError(Kind::kCorrupt, "unknown method code");
  }
  const double epsilon = in.F64();
  const double gamma = in.F64();
  const double peak_threshold = in.F64();
  const std::uint32_t region_count = in.U32();
  const std::uint32_t word_count = in.U32();
  const std::uint64_t posting_count = in.U64();
  const std::uint32_t crc = in.U32();
  in.U32();  // reserved

  const std::string_view payload = bytes.substr(kHeaderSize);
  if (Crc32(payload) != crc) {
    throw IndexFormatError(Kind::kCorrupt, "index checksum mismatch");
  }

  std::vector<std::string> regions;
  regions.reserve(region_count);
  for (std::uint32_t i = 0; i < region_count; ++i) regions.push_back(in.Str());
  std::vector<std::string> words;
  words.reserve(word_count);
  for (std::uint32_t i = 0; i < word_count; ++i) words.push_back(in.Str());

  PostingMap entries;
  std::uint64_t seen = 0;
  for (std::uint32_t w = 0; w < word_count; ++w) {
    const std::uint32_t n = in.U32();
    if (in.remaining() / kRecordSize < n) {
      throw IndexFormatError(Kind::kCorrupt, "index file truncated");
    }
    std::vector<Posting> list(n);
    for (Posting& p : list) {
      p.region = in.U32();
      p.score = in.F64();
      p.span_begin = in.U32();
      p.span_end = in.U32();
    }
    seen += n;
    if (!entries.emplace(std::move(words[w]), std::move(list)).second) {
      throw IndexFormatError(Kind::kCorrupt, "duplicate word in index");
    }
  }
  if (seen != posting_count || in.remaining() != 0) {
    throw IndexFormatError(Kind::kCorrupt, "index size does not match header");
  }
  try {
    return SpotIndex(static_cast<RelevanceMethod>(method_raw), epsilon, gamma,
                     peak_threshold, std::move(regions), std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw IndexFormatError(Kind::kCorrupt, e.what());
  }
}

void SaveIndex(const SpotIndex& index, const std::filesystem::path& path) {
  const std::string bytes = SerializeIndex(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IndexFormatError(IndexFormatError::Kind::kIo,
                           "cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IndexFormatError(IndexFormatError::Kind::kIo,
                           "write failed: " + path.string());
  }
}

SpotIndex LoadIndex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IndexFormatError(IndexFormatError::Kind::kIo,
                           "cannot open " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return DeserializeIndex(bytes);
}

IndexStats Stats(const SpotIndex& index) {
  IndexStats s;
  s.regions = index.region_count();
  s.vocabulary_size = index.entries().size();
  for (const auto& [word, list] : index.entries()) s.total_spots += list.size();
  s.spots_per_line =
      s.regions == 0 ? 0.0
                     : static_cast<double>(s.total_spots) /
                           static_cast<double>(s.regions);
  return s;
}

std::string StatsJson(const IndexStats& stats) {
  nlohmann::ordered_json j;
  j["regions"] = stats.regions;
  j["vocabulary_size"] = stats.vocabulary_size;
  j["total_spots"] = stats.total_spots;
  j["spots_per_line"] = stats.spots_per_line;
  return j.dump();
}

}  // namespace kws
