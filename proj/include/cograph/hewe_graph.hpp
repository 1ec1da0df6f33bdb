#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cograph/corpus.hpp"

namespace cograph {

enum class NodeRole : std::uint8_t { Ehr = 0, Word = 1, Entity = 2 };

// Per-document heterogeneous graph: node 0 is the virtual EHR node, then
// word nodes in ascending word-id order, then entity nodes in ascending
// entity-id order. Edges are undirected, weight 1, stored once as (i, j)
// with i < j in sorted order.
struct HeweGraph {
  std::size_t n = 0;
  std::vector<NodeRole> roles;
  std::vector<std::uint32_t> feature_ids;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::size_t central = 0;

  bool operator==(const HeweGraph&) const = default;

  std::size_t n_words() const;
  std::size_t n_entities() const;
  bool has_edge(std::uint32_t a, std::uint32_t b) const;
  // Word nodes adjacent to the EHR node; its degree deg_EHR is their count.
  std::vector<std::uint32_t> central_word_neighbors() const;
  void validate() const;  // throws DataError when an invariant is broken
};

HeweGraph build_hewe_graph(const Document& doc, const Vocabulary& vocab,
                           std::size_t window_size, const Gazetteer& gazetteer,
                           std::size_t max_words_per_doc);

// Row-major n*n entries of D^{-1/2}(A+I)D^{-1/2} where D is the degree of
// A+I. The masked variant zeroes rows/columns of masked nodes in A first;
// those nodes keep their self-connection.
std::vector<double> normalized_adjacency(const HeweGraph& g);
std::vector<double> normalized_adjacency(const HeweGraph& g,
                                         const std::vector<bool>& masked);

std::string serialize_graph(const HeweGraph& g);
HeweGraph deserialize_graph(const std::string& data);
void save_graph_file(const HeweGraph& g, const std::string& path);
HeweGraph load_graph_file(const std::string& path);

}  // namespace cograph
