#include "cograph/hewe_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cograph/bytes.hpp"
#include "cograph/errors.hpp"

namespace cograph {

namespace {
constexpr char kMagic[8] = {'C', 'G', 'H', 'E', 'W', 'E', '0', '1'};
}

std::size_t HeweGraph::n_words() const {
  return static_cast<std::size_t>(
      std::count(roles.begin(), roles.end(), NodeRole::Word));
}

std::size_t HeweGraph::n_entities() const {
  return static_cast<std::size_t>(
      std::count(roles.begin(), roles.end(), NodeRole::Entity));
}

bool HeweGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
}

std::vector<std::uint32_t> HeweGraph::central_word_neighbors() const {
  std::vector<std::uint32_t> out;
  const auto c = static_cast<std::uint32_t>(central);
  for (const auto& [a, b] : edges) {
    if (a == c && roles[b] == NodeRole::Word) out.push_back(b);
    if (b == c && roles[a] == NodeRole::Word) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void HeweGraph::validate() const {
  if (n == 0 || roles.size() != n || feature_ids.size() != n) {
    throw DataError("graph: inconsistent node arrays");
  }
  if (central >= n || roles[central] != NodeRole::Ehr) {
    throw DataError("graph: central must be the EHR node");
  }
  if (std::count(roles.begin(), roles.end(), NodeRole::Ehr) != 1) {
    throw DataError("graph: exactly one EHR node required");
  }
  std::set<std::uint32_t> entity_with_word_edge;
  std::set<std::uint32_t> word_with_ehr_edge;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    if (a >= n || b >= n) throw DataError("graph: edge endpoint out of range");
    if (a >= b) throw DataError("graph: edges must be stored as (i, j), i < j");
    if (e > 0 && !(edges[e - 1] < edges[e])) {
      throw DataError("graph: edges must be strictly sorted");
    }
    const bool aw = roles[a] == NodeRole::Word, bw = roles[b] == NodeRole::Word;
    if (roles[a] == NodeRole::Entity && bw) entity_with_word_edge.insert(a);
    if (roles[b] == NodeRole::Entity && aw) entity_with_word_edge.insert(b);
    if (a == central && bw) word_with_ehr_edge.insert(b);
    if (roles[a] == NodeRole::Entity && roles[b] == NodeRole::Entity) {
      throw DataError("graph: entity-entity edges are not allowed");
    }
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    if (roles[i] == NodeRole::Entity && !entity_with_word_edge.count(i)) {
      throw DataError("graph: entity node " + std::to_string(i) +
                      " has no word edge");
    }
    if (roles[i] == NodeRole::Word && !word_with_ehr_edge.count(i)) {
      throw DataError("graph: word node " + std::to_string(i) +
                      " has no EHR edge");
    }
  }
}

HeweGraph build_hewe_graph(const Document& doc, const Vocabulary& vocab,
                           std::size_t window_size, const Gazetteer& gazetteer,
                           std::size_t max_words_per_doc) {
  if (window_size == 0) throw DomainError("build_hewe_graph: window_size must be >= 1");
  const std::vector<std::uint32_t> words =
      retained_words(doc, vocab, max_words_per_doc);
  if (words.empty()) {
    throw DegenerateDocumentError("document '" + doc.doc_id +
                                  "' has no retained words");
  }

  std::map<std::uint32_t, std::uint32_t> word_node;  // word id -> node index
  for (std::size_t r = 0; r < words.size(); ++r) {
    word_node[words[r]] = static_cast<std::uint32_t>(1 + r);
  }

  std::vector<const std::string*> id_to_word(vocab.n_words(), nullptr);
  for (const auto& [w, id] : vocab.word_to_id) id_to_word[id] = &w;

  // Entity nodes: distinct entities of retained words, by ascending entity id.
  std::map<std::uint32_t, std::vector<std::uint32_t>> entity_words;
  for (const auto& [wid, wnode] : word_node) {
    const std::string* entity = gazetteer.lookup(*id_to_word[wid]);
    if (!entity) continue;
    auto it = vocab.entity_to_id.find(*entity);
    if (it == vocab.entity_to_id.end()) {
      throw DataError("entity '" + *entity + "' is not indexed; call index_entities first");
    }
    entity_words[it->second].push_back(wnode);
  }

  HeweGraph g;
  g.n = 1 + words.size() + entity_words.size();
  g.roles.assign(g.n, NodeRole::Word);
  g.roles[0] = NodeRole::Ehr;
  g.feature_ids.assign(g.n, 0);
  g.central = 0;
  for (std::size_t r = 0; r < words.size(); ++r) {
    g.feature_ids[1 + r] = vocab.word_feature(words[r]);
  }
  std::set<std::pair<std::uint32_t, std::uint32_t>> edge_set;
  auto add_edge = [&edge_set](std::uint32_t a, std::uint32_t b) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    edge_set.emplace(a, b);
  };

  for (const auto& [wid, wnode] : word_node) add_edge(0, wnode);

  // Two words co-occur iff they fall in one length-window_size sliding
  // window, i.e. their positions differ by less than window_size.
  const auto& toks = doc.tokens;
  for (std::size_t p = 0; p < toks.size(); ++p) {
    auto pit = vocab.word_to_id.find(toks[p]);
    if (pit == vocab.word_to_id.end()) continue;
    auto pnode = word_node.find(pit->second);
    if (pnode == word_node.end()) continue;
    const std::size_t hi = std::min(toks.size(), p + window_size);
    for (std::size_t q = p + 1; q < hi; ++q) {
      auto qit = vocab.word_to_id.find(toks[q]);
      if (qit == vocab.word_to_id.end()) continue;
      auto qnode = word_node.find(qit->second);
      if (qnode == word_node.end()) continue;
      add_edge(pnode->second, qnode->second);
    }
  }

  std::uint32_t next_node = static_cast<std::uint32_t>(1 + words.size());
  for (const auto& [eid, wnodes] : entity_words) {
    g.roles[next_node] = NodeRole::Entity;
    g.feature_ids[next_node] = vocab.entity_feature(eid);
    for (std::uint32_t wnode : wnodes) add_edge(wnode, next_node);
    ++next_node;
  }

  g.edges.assign(edge_set.begin(), edge_set.end());
  g.validate();
  return g;
}

std::vector<double> normalized_adjacency(const HeweGraph& g) {
  return normalized_adjacency(g, std::vector<bool>(g.n, false));
}

std::vector<double> normalized_adjacency(const HeweGraph& g,
                                         const std::vector<bool>& masked) {
  if (g.n == 0) throw DomainError("normalized_adjacency: empty graph");
  if (masked.size() != g.n) {
    throw ShapeError("normalized_adjacency: mask size " +
                     std::to_string(masked.size()) + " for " +
                     std::to_string(g.n) + " nodes");
  }
  const std::size_t n = g.n;
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  for (const auto& [i, j] : g.edges) {
    if (masked[i] || masked[j]) continue;
    a[i * n + j] = 1.0;
    a[j * n + i] = 1.0;
  }
  std::vector<double> dinv(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += a[i * n + j];
    dinv[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i * n + j] *= dinv[i] * dinv[j];
    }
  }
  return a;
}

std::string serialize_graph(const HeweGraph& g) {
  g.validate();
  std::string out(kMagic, sizeof kMagic);
  bytes::put_u32(out, static_cast<std::uint32_t>(g.n));
  bytes::put_u32(out, static_cast<std::uint32_t>(g.central));
  bytes::put_u32(out, static_cast<std::uint32_t>(g.edges.size()));
  for (NodeRole role : g.roles)
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(role)));
  for (std::uint32_t id : g.feature_ids) bytes::put_u32(out, id);
  for (const auto& [a, b] : g.edges) {
    bytes::put_u32(out, a);
    bytes::put_u32(out, b);
  }
  return out;
}

HeweGraph deserialize_graph(const std::string& data) {
  bytes::Reader r{data};
  std::string magic = r.str(sizeof kMagic, "magic");
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("bad graph magic", 0);
  }
  HeweGraph g;
  g.n = r.u32("node count");
  g.central = r.u32("central index");
  const std::uint32_t n_edges = r.u32("edge count");
  g.roles.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const std::uint8_t raw = r.u8("node role");
    if (raw > 2) throw ParseError("invalid node role", r.pos - 1);
    g.roles[i] = static_cast<NodeRole>(raw);
  }
  g.feature_ids.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) g.feature_ids[i] = r.u32("feature id");
  g.edges.resize(n_edges);
  for (std::uint32_t e = 0; e < n_edges; ++e) {
    g.edges[e].first = r.u32("edge endpoint");
    g.edges[e].second = r.u32("edge endpoint");
  }
  r.expect_end();
  try {
    g.validate();
  } catch (const DataError& e) {
    throw ParseError(e.what(), r.pos);
  }
  return g;
}

void save_graph_file(const HeweGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const std::string data = serialize_graph(g);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("failed writing graph to '" + path + "'");
}

HeweGraph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return deserialize_graph(data);
}

}  // namespace cograph
