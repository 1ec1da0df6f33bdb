#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cograph/config.hpp"
#include "cograph/corpus.hpp"

namespace cograph {

// Knobs for the synthetic corpus: per-class planted signal tokens, a shared
// noise pool, and patient sequences whose consecutive documents overlap by
// `coherence` so that history carries class information.
struct SynthConfig {
  std::size_t n_train_classes = 10;
  std::size_t n_test_classes = 8;
  std::size_t docs_per_train_class = 24;  // must exceed 20
  std::size_t docs_per_test_class = 10;   // must lie in [2, 10]
  std::size_t vocab_size = 400;           // signal + noise tokens combined
  std::size_t signal_tokens_per_class = 8;
  double noise_rate = 0.5;       // probability a fresh token is noise
  std::size_t n_patients = 60;   // exact total, split across classes
  std::size_t seq_len_min = 4;   // documents per patient
  std::size_t seq_len_max = 8;
  std::size_t tokens_per_doc_min = 30;
  std::size_t tokens_per_doc_max = 50;
  double coherence = 0.6;           // fraction of tokens copied from the previous doc
  double gazetteer_fraction = 0.5;  // fraction of signal tokens mapped to entities
  std::uint64_t seed = 7;

  static SynthConfig from_kv(const KvConfig& kv);
  void validate() const;

  std::size_t n_classes() const { return n_train_classes + n_test_classes; }
  std::size_t total_docs() const;
  std::string class_name(std::size_t idx) const;  // T.. for train, R.. for test
};

struct SynthOutput {
  Corpus corpus;        // patient-major, seq_index-ordered
  Gazetteer gazetteer;  // signal-token -> entity rows
  std::vector<std::string> train_classes;
  std::vector<std::string> test_classes;
  std::vector<std::size_t> patients_per_class;
};

SynthOutput generate_corpus(const SynthConfig& cfg);

}  // namespace cograph
