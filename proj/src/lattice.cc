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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "kws/errors.h"

namespace kws {
namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

std::string EdgeName(const Edge& e) {
  return "edge " + std::to_string(e.id) + " (" + std::to_string(e.from) +
         "->" + std::to_string(e.to) + ")";
}

}  // namespace

double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

WordGraph::WordGraph(std::string region_id, int num_frames,
                     std::vector<Node> nodes, std::vector<Edge> edges)
    : region_id_(std::move(region_id)),
      num_frames_(num_frames),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)) {
  if (region_id_.empty()) throw StructureError("empty region id");
  if (num_frames_ <= 0) {
    throw StructureError("region " + region_id_ +
                         ": frame count must be positive");
  }
  if (nodes_.size() < 2) {
    throw StructureError("region " + region_id_ + ": needs at least 2 nodes");
  }
  if (edges_.empty()) {
    throw StructureError("region " + region_id_ + ": has no edges");
  }

  std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::unordered_map<int, int> pos_of;
  pos_of.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.frame < 0 || n.frame > num_frames_) {
      throw StructureError("node " + std::to_string(n.id) + ": frame " +
                           std::to_string(n.frame) + " outside [0, " +
                           std::to_string(num_frames_) + "]");
    }
    if (!pos_of.emplace(n.id, static_cast<int>(i)).second) {
      throw StructureError("duplicate node id " + std::to_string(n.id));
    }
  }

  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.id < b.id; });
  out_.resize(nodes_.size());
  in_.resize(nodes_.size());
  edge_from_pos_.reserve(edges_.size());
  edge_to_pos_.reserve(edges_.size());
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    if (k > 0 && edges_[k - 1].id == e.id) {
      throw StructureError("duplicate edge id " + std::to_string(e.id));
    }
    auto from = pos_of.find(e.from);
    auto to = pos_of.find(e.to);
    if (from == pos_of.end() || to == pos_of.end()) {
      throw StructureError(EdgeName(e) + ": unknown node");
    }
    if (e.word.empty()) throw StructureError(EdgeName(e) + ": empty word");
    if (std::isnan(e.log_score) || e.log_score == -kLogZero) {
      throw StructureError(EdgeName(e) + ": invalid log score");
    }
    const int from_frame = nodes_[from->second].frame;
    const int to_frame = nodes_[to->second].frame;
    if (to_frame <= from_frame) {
      throw StructureError(EdgeName(e) + ": end frame " +
                           std::to_string(to_frame) +
                           " is not after start frame " +
                           std::to_string(from_frame));
    }
    edge_from_pos_.push_back(from->second);
    edge_to_pos_.push_back(to->second);
    out_[from->second].push_back(static_cast<int>(k));
    in_[to->second].push_back(static_cast<int>(k));
  }

  // Frames strictly increase along edges, so a cycle always surfaces as the
  // span error above. The graph is therefore acyclic and the
  // frame-sorted node order is topological. A unique source and sink then
  // place every node on some source-to-sink path.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i != 0 && in_[i].empty()) {
      throw StructureError("node " + std::to_string(nodes_[i].id) +
                           ": second source (no incoming edges)");
    }
    if (i + 1 != nodes_.size() && out_[i].empty()) {
      throw StructureError("node " + std::to_string(nodes_[i].id) +
                           ": second sink (no outgoing edges)");
    }
  }
  if (nodes_.front().frame != 0 || nodes_.back().frame != num_frames_) {
    throw StructureError(
        "region " + region_id_ + ": paths span frames [" +
        std::to_string(nodes_.front().frame) + ", " +
        std::to_string(nodes_.back().frame) + ") instead of [0, " +
        std::to_string(num_frames_) + ")");
  }

  vocabulary_.reserve(edges_.size());
  for (const Edge& e : edges_) vocabulary_.push_back(e.word);
  std::sort(vocabulary_.begin(), vocabulary_.end());
  vocabulary_.erase(std::unique(vocabulary_.begin(), vocabulary_.end()),
                    vocabulary_.end());
}

bool WordGraph::HasWord(std::string_view word) const {
  return std::binary_search(vocabulary_.begin(), vocabulary_.end(), word);
}

namespace {

std::vector<std::string_view> Tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

int ToInt(std::string_view token, int line, const char* what) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" +
                               std::string(token) + "'");
  }
  return value;
}

double ToDouble(std::string_view token, int line) {
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() ||
      std::isnan(value) || value == -kLogZero) {
    throw ParseError(line, "bad log score '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

WordGraph ParseLattice(std::istream& in) {
  std::string region_id;
  int num_frames = -1;
  int node_count = -1;
  int edge_count = -1;
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::string raw;
  int line_no = 0;
  int stage = 0;  // 0 header, 1 N, 2 E, 3 body
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto tokens = Tokenize(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    const std::string_view key = tokens[0];
    switch (stage) {
      case 0:
        if (key != "LATTICE" || tokens.size() != 3) {
          throw ParseError(line_no,
                           "missing header 'LATTICE <region_id> <frames>'");
        }
        region_id = std::string(tokens[1]);
        num_frames = ToInt(tokens[2], line_no, "frame count");
        if (num_frames <= 0) throw ParseError(line_no, "frame count must be > 0");
        stage = 1;
        break;
      case 1:
        if (key != "N" || tokens.size() != 2) {
          throw ParseError(line_no, "expected 'N <node_count>'");
        }
        node_count = ToInt(tokens[1], line_no, "node count");
        if (node_count < 0) throw ParseError(line_no, "negative node count");
        nodes.reserve(node_count);
        stage = 2;
        break;
      case 2:
        if (key != "E" || tokens.size() != 2) {
          throw ParseError(line_no, "expected 'E <edge_count>'");
        }
        edge_count = ToInt(tokens[1], line_no, "edge count");
        if (edge_count < 0) throw ParseError(line_no, "negative edge count");
        edges.reserve(edge_count);
        stage = 3;
        break;
      default:
        if (key == "node") {
          if (tokens.size() != 3) {
            throw ParseError(line_no, "expected 'node <id> <frame>'");
          }
          if (static_cast<int>(nodes.size()) == node_count) {
            throw ParseError(line_no, "more node lines than declared");
          }
          nodes.push_back({ToInt(tokens[1], line_no, "node id"),
                           ToInt(tokens[2], line_no, "frame")});
        } else if (key == "edge") {
          if (tokens.size() != 6) {
            throw ParseError(
                line_no, "expected 'edge <id> <from> <to> <word> <log_score>'");
          }
          if (static_cast<int>(edges.size()) == edge_count) {
            throw ParseError(line_no, "more edge lines than declared");
          }
          Edge e;
          e.id = ToInt(tokens[1], line_no, "edge id");
          e.from = ToInt(tokens[2], line_no, "node id");
          e.to = ToInt(tokens[3], line_no, "node id");
          e.word = std::string(tokens[4]);
          e.log_score = ToDouble(tokens[5], line_no);
          edges.push_back(std::move(e));
        } else {
          throw ParseError(line_no,
                           "unknown record '" + std::string(key) + "'");
        }
    }
  }
  if (stage == 0) throw ParseError(0, "missing header");
  if (stage < 3) throw ParseError(line_no, "truncated header");
  if (static_cast<int>(nodes.size()) != node_count) {
    throw ParseError(line_no, "declared " + std::to_string(node_count) +
                                  " nodes, found " +
                                  std::to_string(nodes.size()));
  }
  if (static_cast<int>(edges.size()) != edge_count) {
    throw ParseError(line_no, "declared " + std::to_string(edge_count) +
                                  " edges, found " +
                                  std::to_string(edges.size()));
  }
  return WordGraph(std::move(region_id), num_frames, std::move(nodes),
                   std::move(edges));
}

WordGraph ParseLattice(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseLattice(in);
}

WordGraph ReadLatticeFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return ParseLattice(in);
}

std::string FormatLattice(const WordGraph& graph) {
  std::ostringstream out;
  out.precision(17);
  out << "LATTICE " << graph.region_id() << ' ' << graph.num_frames() << '\n'
      << "N " << graph.nodes().size() << '\n'
      << "E " << graph.edges().size() << '\n';
  for (const Node& n : graph.nodes()) {
    out << "node " << n.id << ' ' << n.frame << '\n';
  }
  for (const Edge& e : graph.edges()) {
    out << "edge " << e.id << ' ' << e.from << ' ' << e.to << ' ' << e.word
        << ' ' << e.log_score << '\n';
  }
  return out.str();
}

std::vector<double> ForwardLogMass(const WordGraph& graph, double gamma,
                                   const std::vector<bool>* skip_edge) {
  const auto nodes = graph.nodes();
  const auto edges = graph.edges();
  std::vector<double> alpha(nodes.size(), kLogZero);
  alpha[graph.source()] = 0.0;
  for (int n = 1; n < static_cast<int>(nodes.size()); ++n) {
    double acc = kLogZero;
    for (int e : graph.in_edges(n)) {
      if (skip_edge != nullptr && (*skip_edge)[e]) continue;
      acc = LogAdd(acc, alpha[graph.from_pos(e)] + gamma * edges[e].log_score);
    }
    alpha[n] = acc;
  }
  return alpha;
}

WordGraph Normalize(const WordGraph& graph, const NormalizationConfig& config) {
  const double gamma = config.gamma;
  if (!std::isfinite(gamma) || gamma <= 0.0) {
    throw std::invalid_argument("gamma must be finite and positive");
  }
  const auto edges = graph.edges();
  const int num_nodes = static_cast<int>(graph.nodes().size());

  const std::vector<double> alpha = ForwardLogMass(graph, gamma);
  std::vector<double> beta(num_nodes, kLogZero);
  beta[graph.sink()] = 0.0;
  for (int n = num_nodes - 2; n >= 0; --n) {
    double acc = kLogZero;
    for (int e : graph.out_edges(n)) {
      acc = LogAdd(acc, gamma * edges[e].log_score + beta[graph.to_pos(e)]);
    }
    beta[n] = acc;
  }
  const double total = alpha[graph.sink()];
  if (!std::isfinite(total)) {
    throw NumericError("region " + graph.region_id() + ": no finite path");
  }

  WordGraph result = graph;
  for (std::size_t k = 0; k < result.edges_.size(); ++k) {
    Edge& e = result.edges_[k];
    const double log_post = alpha[graph.from_pos(static_cast<int>(k))] +
                            gamma * e.log_score +
                            beta[graph.to_pos(static_cast<int>(k))] - total;
    e.posterior = std::clamp(std::exp(log_post), 0.0, 1.0);
  }
  result.normalized_ = true;
  result.gamma_ = gamma;
  return result;
}

std::vector<int> OneBestPath(const WordGraph& graph) {
  const auto edges = graph.edges();
  const int num_nodes = static_cast<int>(graph.nodes().size());
  // Backward Viterbi: best[n] is the best score from n to the sink and
  // choice[n] the outgoing edge starting the lexicographically smallest
  // optimal suffix (edge ids are unique, so the first differing element
  // decides and it is always the first edge).
  std::vector<double> best(num_nodes, kLogZero);
  std::vector<int> choice(num_nodes, -1);
  best[graph.sink()] = 0.0;
  for (int n = num_nodes - 2; n >= 0; --n) {
    for (int e : graph.out_edges(n)) {
      const double s = edges[e].log_score + best[graph.to_pos(e)];
      if (choice[n] < 0 || s > best[n] ||
          (s == best[n] && edges[e].id < edges[choice[n]].id)) {
        best[n] = s;
        choice[n] = e;
      }
    }
  }
  std::vector<int> path;
  for (int n = graph.source(); n != graph.sink(); n = graph.to_pos(choice[n])) {
    path.push_back(choice[n]);
  }
  return path;
}

std::uint64_t CountPaths(const WordGraph& graph) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const int num_nodes = static_cast<int>(graph.nodes().size());
  std::vector<std::uint64_t> count(num_nodes, 0);
  count[graph.source()] = 1;
  for (int n = 1; n < num_nodes; ++n) {
    std::uint64_t acc = 0;
    for (int e : graph.in_edges(n)) {
      const std::uint64_t c = count[graph.from_pos(e)];
      acc = (kMax - acc < c) ? kMax : acc + c;
    }
    count[n] = acc;
  }
  return count[graph.sink()];
}

std::vector<PathHypothesis> EnumeratePaths(const WordGraph& graph,
                                           std::uint64_t cap) {
  const std::uint64_t num_paths = CountPaths(graph);
  if (num_paths > cap) throw CapExceededError(num_paths, cap);

  const auto edges = graph.edges();
  const double gamma = graph.gamma();
  std::vector<PathHypothesis> paths;
  std::vector<double> log_scores;
  paths.reserve(num_paths);
  log_scores.reserve(num_paths);

  std::vector<std::string> words;
  std::function<void(int, double)> visit = [&](int node, double score) {
    if (node == graph.sink()) {
      paths.push_back({words, 0.0});
      log_scores.push_back(score);
      return;
    }
    for (int e : graph.out_edges(node)) {
      words.push_back(edges[e].word);
      visit(graph.to_pos(e), score + gamma * edges[e].log_score);
      words.pop_back();
    }
  };
  visit(graph.source(), 0.0);

  double total = kLogZero;
  for (double s : log_scores) total = LogAdd(total, s);
  if (!std::isfinite(total)) {
    throw NumericError("region " + graph.region_id() + ": no finite path");
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    paths[i].probability = std::exp(log_scores[i] - total);
  }
  return paths;
}

}  // namespace kws
