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

// Word graphs (lattices) of single line regions.
//
// A WordGraph is a DAG whose nodes sit on horizontal frame positions and
// whose edges carry one word hypothesis each, spanning the half-open frame
// interval [frame(from), frame(to)). Every source-to-sink path tiles the
// whole region [0, num_frames), so for any frame the edges covering it form
// a partition of the path set. Normalize() turns the combined log scores
// into edge posteriors by forward-backward in log space.

#ifndef KWS_LATTICE_H_
#define KWS_LATTICE_H_

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kws {

struct Node {
  int id = 0;
  int frame = 0;
};

struct Edge {
  int id = 0;
  int from = 0;  // node id
  int to = 0;    // node id
  std::string word;
  double log_score = 0.0;  // natural log, optical and LM pre-combined
  double posterior = 0.0;  // filled by Normalize()
};

// Half-open frame interval [begin, end).
struct FrameSpan {
  int begin = 0;
  int end = 0;
  bool operator==(const FrameSpan&) const = default;
};

struct NormalizationConfig {
  // Scale applied to every log score before forward-backward; changes the
  // effective log base and so calibrates the posteriors.
  double gamma = 1.0;
};

class WordGraph {
 public:
  // Validates and takes ownership. Throws StructureError naming the offending
  // node or edge when an invariant does not hold.
  WordGraph(std::string region_id, int num_frames, std::vector<Node> nodes,
            std::vector<Edge> edges);

  const std::string& region_id() const { return region_id_; }
  int num_frames() const { return num_frames_; }

  // Nodes in topological order (ascending frame, then id).
  std::span<const Node> nodes() const { return nodes_; }
  // Edges in ascending id order.
  std::span<const Edge> edges() const { return edges_; }
  // Sorted distinct edge words.
  std::span<const std::string> vocabulary() const { return vocabulary_; }
  bool HasWord(std::string_view word) const;

  // Positions into nodes().
  int source() const { return 0; }
  int sink() const { return static_cast<int>(nodes_.size()) - 1; }
  int from_pos(int edge_pos) const { return edge_from_pos_[edge_pos]; }
  int to_pos(int edge_pos) const { return edge_to_pos_[edge_pos]; }
  // Edge positions leaving / entering node position `node_pos`.
  std::span<const int> out_edges(int node_pos) const { return out_[node_pos]; }
  std::span<const int> in_edges(int node_pos) const { return in_[node_pos]; }
  FrameSpan span(int edge_pos) const {
    return {nodes_[edge_from_pos_[edge_pos]].frame,
            nodes_[edge_to_pos_[edge_pos]].frame};
  }

  bool normalized() const { return normalized_; }
  // Gamma used by Normalize(); 1.0 for a raw graph.
  double gamma() const { return gamma_; }

 private:
  friend WordGraph Normalize(const WordGraph& graph,
                             const NormalizationConfig& config);

  std::string region_id_;
  int num_frames_ = 0;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::string> vocabulary_;
  std::vector<int> edge_from_pos_;
  std::vector<int> edge_to_pos_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  bool normalized_ = false;
  double gamma_ = 1.0;
};

// Reads one lattice in the text format:
//
//   LATTICE <region_id> <num_frames>
//   N <node_count>
//   E <edge_count>
//   node <id> <frame>                       (node_count lines)
//   edge <id> <from> <to> <word> <log_score> (edge_count lines)
//
// Lines starting with '#' and blank lines are ignored. Throws ParseError on
// syntax problems and StructureError on graph problems.
WordGraph ParseLattice(std::istream& in);
WordGraph ParseLattice(std::string_view text);
WordGraph ReadLatticeFile(const std::string& path);

// Serializes back to the text format (posteriors are not written).
std::string FormatLattice(const WordGraph& graph);

// Edge posteriors by log-space forward-backward over gamma-scaled scores.
// Throws NumericError("no finite path") if the total mass is zero and
// std::invalid_argument for a non-finite or non-positive gamma.
WordGraph Normalize(const WordGraph& graph,
                    const NormalizationConfig& config = {});

// Forward log mass alpha(node) for every node position, skipping edges for
// which `skip_edge(edge_pos)` is true. alpha(sink) is the total log mass.
std::vector<double> ForwardLogMass(const WordGraph& graph, double gamma,
                                   const std::vector<bool>* skip_edge = nullptr);

// Highest-scoring source-to-sink path as edge positions; among exact ties the
// lexicographically smallest edge-id sequence wins.
std::vector<int> OneBestPath(const WordGraph& graph);

struct PathHypothesis {
  std::vector<std::string> words;
  double probability = 0.0;
};

// Number of source-to-sink paths, saturating at UINT64_MAX.
std::uint64_t CountPaths(const WordGraph& graph);

// Every source-to-sink path with its normalized probability, by explicit
// depth-first enumeration. Throws CapExceededError when the graph has more
// than `cap` paths. Probabilities use the graph's gamma().
std::vector<PathHypothesis> EnumeratePaths(const WordGraph& graph,
                                           std::uint64_t cap);

// log(exp(a) + exp(b)) without overflow.
double LogAdd(double a, double b);

}  // namespace kws

#endif  // KWS_LATTICE_H_
