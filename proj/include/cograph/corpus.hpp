#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cograph {

struct Document {
  std::string doc_id;
  std::string patient_id;
  std::uint32_t seq_index = 0;
  std::vector<std::string> tokens;
  std::vector<std::string> labels;

  bool operator==(const Document&) const = default;
};

using Corpus = std::vector<Document>;

// One JSON object per line: {doc_id, patient_id, seq_index, tokens, labels}.
Corpus parse_corpus_jsonl(const std::string& text);
std::string corpus_to_jsonl(const Corpus& corpus);
Corpus load_corpus_jsonl(const std::string& path);
void save_corpus_jsonl(const Corpus& corpus, const std::string& path);

// word -> entity lookup table; at most one entity per word. Line order of
// the TSV source fixes entity id assignment downstream.
class Gazetteer {
 public:
  void add(const std::string& word, const std::string& entity);
  const std::string* lookup(const std::string& word) const;
  std::size_t size() const { return items_.size(); }
  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }

  static Gazetteer parse_tsv(const std::string& text);
  static Gazetteer load_tsv(const std::string& path);
  std::string to_tsv() const;
  void save_tsv(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
  std::map<std::string, std::size_t> index_;
};

struct Vocabulary {
  std::map<std::string, std::uint32_t> word_to_id;
  std::map<std::string, std::uint32_t> entity_to_id;
  std::map<std::string, std::uint64_t> counts;  // corpus token frequencies
  std::size_t max_words_per_doc = 128;

  std::size_t n_words() const { return word_to_id.size(); }
  std::size_t n_entities() const { return entity_to_id.size(); }

  // Embedding-table layout: slot 0 is the shared EHR feature, then one slot
  // per word id, then one per entity id.
  std::size_t table_size() const { return 1 + n_words() + n_entities(); }
  std::uint32_t word_feature(std::uint32_t word_id) const {
    return 1 + word_id;
  }
  std::uint32_t entity_feature(std::uint32_t entity_id) const {
    return static_cast<std::uint32_t>(1 + n_words() + entity_id);
  }
};

// Words with corpus frequency >= min_count get dense ids in first-occurrence
// order over the corpus.
Vocabulary build_vocabulary(const Corpus& corpus, std::uint64_t min_count,
                            std::size_t max_words_per_doc);

// Assigns dense entity ids in gazetteer order (first appearance of each
// entity name).
void index_entities(Vocabulary& vocab, const Gazetteer& gazetteer);

// Distinct in-vocabulary words of the document, ranked by corpus frequency
// (ties by first occurrence in the document), truncated to max_words_per_doc,
// then returned in ascending word-id order.
std::vector<std::uint32_t> retained_words(const Document& doc,
                                          const Vocabulary& vocab,
                                          std::size_t max_words_per_doc);

}  // namespace cograph
