#include "cograph/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cograph/errors.hpp"

namespace cograph {

namespace {

using nlohmann::ordered_json;

Document parse_document(const std::string& line, std::size_t lineno) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw DataError("corpus line " + std::to_string(lineno) + ": " + e.what());
  }
  auto fail = [lineno](const std::string& msg) -> DataError {
    return DataError("corpus line " + std::to_string(lineno) + ": " + msg);
  };
  if (!j.is_object()) throw fail("expected a JSON object");
  for (const char* key : {"doc_id", "patient_id", "seq_index", "tokens", "labels"}) {
    if (!j.contains(key)) throw fail(std::string("missing field '") + key + "'");
  }
  Document doc;
  try {
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.patient_id = j.at("patient_id").get<std::string>();
    const auto& seq = j.at("seq_index");
    if (!seq.is_number_integer() || seq.get<std::int64_t>() < 0 ||
        seq.get<std::int64_t>() > 0xffffffffLL) {
      throw fail("seq_index must be a non-negative integer");
    }
    doc.seq_index = static_cast<std::uint32_t>(seq.get<std::int64_t>());
    doc.tokens = j.at("tokens").get<std::vector<std::string>>();
    doc.labels = j.at("labels").get<std::vector<std::string>>();
  } catch (const ordered_json::exception& e) {
    throw fail(e.what());
  }
  if (doc.tokens.empty()) throw fail("tokens must be non-empty");
  return doc;
}

}  // namespace

Corpus parse_corpus_jsonl(const std::string& text) {
  Corpus corpus;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    corpus.push_back(parse_document(line, lineno));
  }
  return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& doc : corpus) {
    ordered_json j;
    j["doc_id"] = doc.doc_id;
    j["patient_id"] = doc.patient_id;
    j["seq_index"] = doc.seq_index;
    j["tokens"] = doc.tokens;
    j["labels"] = doc.labels;
    out += j.dump();
    out += "\n";
  }
  return out;
}

Corpus load_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus_jsonl(buf.str());
}

void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << corpus_to_jsonl(corpus);
  if (!out) throw DataError("failed writing corpus to '" + path + "'");
}

void Gazetteer::add(const std::string& word, const std::string& entity) {
  if (word.empty() || entity.empty()) {
    throw DataError("gazetteer entries need a word and an entity");
  }
  if (index_.count(word)) {
    throw DataError("gazetteer maps word '" + word + "' twice");
  }
  index_[word] = items_.size();
  items_.emplace_back(word, entity);
}

const std::string* Gazetteer::lookup(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? nullptr : &items_[it->second].second;
}

Gazetteer Gazetteer::parse_tsv(const std::string& text) {
  Gazetteer gaz;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("gazetteer line " + std::to_string(lineno) +
                      ": expected word<TAB>entity");
    }
    gaz.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return gaz;
}

Gazetteer Gazetteer::load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open gazetteer file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_tsv(buf.str());
}

std::string Gazetteer::to_tsv() const {
  std::string out;
  for (const auto& [word, entity] : items_) {
    out += word;
    out += '\t';
    out += entity;
    out += '\n';
  }
  return out;
}

void Gazetteer::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << to_tsv();
  if (!out) throw DataError("failed writing gazetteer to '" + path + "'");
}

Vocabulary build_vocabulary(const Corpus& corpus, std::uint64_t min_count,
                            std::size_t max_words_per_doc) {
  if (corpus.empty()) throw DataError("build_vocabulary: empty corpus");
  Vocabulary vocab;
  vocab.max_words_per_doc = max_words_per_doc;
  for (const auto& doc : corpus) {
    for (const auto& tok : doc.tokens) ++vocab.counts[tok];
  }
  for (const auto& doc : corpus) {
    for (const auto& tok : doc.tokens) {
      if (vocab.counts[tok] >= min_count && !vocab.word_to_id.count(tok)) {
        vocab.word_to_id[tok] =
            static_cast<std::uint32_t>(vocab.word_to_id.size());
      }
    }
  }
  return vocab;
}

void index_entities(Vocabulary& vocab, const Gazetteer& gazetteer) {
  vocab.entity_to_id.clear();
  for (const auto& [word, entity] : gazetteer.items()) {
    if (!vocab.entity_to_id.count(entity)) {
      vocab.entity_to_id[entity] =
          static_cast<std::uint32_t>(vocab.entity_to_id.size());
    }
  }
}

std::vector<std::uint32_t> retained_words(const Document& doc,
                                          const Vocabulary& vocab,
                                          std::size_t max_words_per_doc) {
  struct Candidate {
    std::uint32_t id;
    std::uint64_t count;
    std::size_t first_pos;
  };
  std::vector<Candidate> candidates;
  std::map<std::uint32_t, bool> seen;
  for (std::size_t pos = 0; pos < doc.tokens.size(); ++pos) {
    auto it = vocab.word_to_id.find(doc.tokens[pos]);
    if (it == vocab.word_to_id.end()) continue;
    if (seen[it->second]) continue;
    seen[it->second] = true;
    candidates.push_back({it->second, vocab.counts.at(doc.tokens[pos]), pos});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.first_pos < b.first_pos;
            });
  if (candidates.size() > max_words_per_doc) {
    candidates.resize(max_words_per_doc);
  }
  std::vector<std::uint32_t> ids;
  ids.reserve(candidates.size());
  for (const auto& c : candidates) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace cograph
