#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cograph/config.hpp"
#include "cograph/corpus.hpp"
#include "cograph/errors.hpp"
#include "cograph/synth.hpp"
#include "doctest.h"

using namespace cograph;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.n_train_classes = 3;
  cfg.n_test_classes = 2;
  cfg.docs_per_train_class = 22;
  cfg.docs_per_test_class = 6;
  cfg.vocab_size = 60;
  cfg.signal_tokens_per_class = 4;
  cfg.noise_rate = 0.5;
  cfg.n_patients = 14;
  cfg.seq_len_min = 3;
  cfg.seq_len_max = 7;
  cfg.tokens_per_doc_min = 10;
  cfg.tokens_per_doc_max = 16;
  cfg.coherence = 0.6;
  cfg.gazetteer_fraction = 0.5;
  cfg.seed = 11;
  return cfg;
}

std::map<std::string, std::size_t> label_histogram(const Corpus& corpus) {
  std::map<std::string, std::size_t> h;
  for (const Document& d : corpus) {
    for (const std::string& l : d.labels) ++h[l];
  }
  return h;
}

std::set<std::string> signal_tokens_of(const SynthOutput& out, const std::string& cls) {
  // Signal tokens are the lowercase class name + "x" + slot.
  std::set<std::string> s;
  std::string stem = cls;
  for (char& ch : stem) ch = static_cast<char>(std::tolower(ch));
  for (const Document& d : out.corpus) {
    for (const std::string& t : d.tokens) {
      if (t.rfind(stem + "x", 0) == 0) s.insert(t);
    }
  }
  return s;
}

std::size_t multiset_overlap(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::map<std::string, std::size_t> count;
  for (const std::string& t : a) ++count[t];
  std::size_t shared = 0;
  for (const std::string& t : b) {
    auto it = count.find(t);
    if (it != count.end() && it->second > 0) {
      --it->second;
      ++shared;
    }
  }
  return shared;
}

}  // namespace

TEST_CASE("synth: histogram of labels matches the configured counts exactly") {
  const SynthConfig cfg = small_config();
  const SynthOutput out = generate_corpus(cfg);
  const auto h = label_histogram(out.corpus);
  REQUIRE(h.size() == cfg.n_classes());
  for (const std::string& c : out.train_classes) {
    CHECK(h.at(c) == cfg.docs_per_train_class);
  }
  for (const std::string& c : out.test_classes) {
    CHECK(h.at(c) == cfg.docs_per_test_class);
  }
  CHECK(out.corpus.size() == cfg.total_docs());
}

TEST_CASE("synth: patients are class-pure, counted exactly, sequences well-formed") {
  const SynthConfig cfg = small_config();
  const SynthOutput out = generate_corpus(cfg);

  std::map<std::string, std::vector<const Document*>> by_patient;
  for (const Document& d : out.corpus) by_patient[d.patient_id].push_back(&d);
  CHECK(by_patient.size() == cfg.n_patients);

  std::size_t allocated = 0;
  for (std::size_t p : out.patients_per_class) allocated += p;
  CHECK(allocated == cfg.n_patients);

  for (const auto& [pid, docs] : by_patient) {
    CHECK(docs.size() >= cfg.seq_len_min);
    CHECK(docs.size() <= cfg.seq_len_max);
    std::set<std::string> labels;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      CHECK(docs[i]->seq_index == i);  // emitted in order, contiguous from 0
      CHECK(docs[i]->doc_id.rfind(pid + "_", 0) == 0);
      CHECK(docs[i]->tokens.size() >= cfg.tokens_per_doc_min);
      CHECK(docs[i]->tokens.size() <= cfg.tokens_per_doc_max);
      REQUIRE(docs[i]->labels.size() == 1);
      labels.insert(docs[i]->labels[0]);
    }
    CHECK(labels.size() == 1);
  }
}

TEST_CASE("synth: class signal token sets are pairwise disjoint and planted") {
  const SynthConfig cfg = small_config();
  const SynthOutput out = generate_corpus(cfg);

  std::vector<std::string> all_classes = out.train_classes;
  all_classes.insert(all_classes.end(), out.test_classes.begin(), out.test_classes.end());

  std::map<std::string, std::set<std::string>> pools;
  for (const std::string& c : all_classes) pools[c] = signal_tokens_of(out, c);
  for (const std::string& a : all_classes) {
    for (const std::string& b : all_classes) {
      if (a == b) continue;
      std::vector<std::string> inter;
      std::set_intersection(pools[a].begin(), pools[a].end(), pools[b].begin(),
                            pools[b].end(), std::back_inserter(inter));
      CHECK(inter.empty());
    }
  }

  // every document carries at least one signal token of its own class
  for (const Document& d : out.corpus) {
    std::string stem = d.labels[0];
    for (char& ch : stem) ch = static_cast<char>(std::tolower(ch));
    bool found = false;
    for (const std::string& t : d.tokens) {
      if (t.rfind(stem + "x", 0) == 0) found = true;
    }
    CHECK_MESSAGE(found, ("no own-class signal token in " + d.doc_id));
  }
}

TEST_CASE("synth: consecutive documents of a patient share the coherence fraction") {
  const SynthConfig cfg = small_config();
  const SynthOutput out = generate_corpus(cfg);

  std::map<std::string, std::vector<const Document*>> by_patient;
  for (const Document& d : out.corpus) by_patient[d.patient_id].push_back(&d);
  for (const auto& [pid, docs] : by_patient) {
    for (std::size_t i = 1; i < docs.size(); ++i) {
      const std::size_t want = static_cast<std::size_t>(
          std::ceil(cfg.coherence * static_cast<double>(docs[i]->tokens.size())));
      const std::size_t shared = multiset_overlap(docs[i - 1]->tokens, docs[i]->tokens);
      CHECK_MESSAGE(shared >= std::min(want, docs[i - 1]->tokens.size()),
                    (pid + " docs " + std::to_string(i - 1) + "," + std::to_string(i)));
    }
  }
}

TEST_CASE("synth: noise rate 0 makes every token a class signal token") {
  SynthConfig cfg = small_config();
  cfg.noise_rate = 0.0;
  const SynthOutput out = generate_corpus(cfg);
  for (const Document& d : out.corpus) {
    std::string stem = d.labels[0];
    for (char& ch : stem) ch = static_cast<char>(std::tolower(ch));
    for (const std::string& t : d.tokens) {
      CHECK_MESSAGE(t.rfind(stem + "x", 0) == 0, (d.doc_id + " token " + t));
    }
  }
}

TEST_CASE("synth: coherence 1.0 repeats the patient's token multiset") {
  SynthConfig cfg = small_config();
  cfg.coherence = 1.0;
  const SynthOutput out = generate_corpus(cfg);
  std::map<std::string, std::vector<const Document*>> by_patient;
  for (const Document& d : out.corpus) by_patient[d.patient_id].push_back(&d);
  for (const auto& [pid, docs] : by_patient) {
    for (std::size_t i = 1; i < docs.size(); ++i) {
      std::vector<std::string> a = docs[i - 1]->tokens, b = docs[i]->tokens;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK_MESSAGE(a == b, (pid + " doc " + std::to_string(i)));
    }
  }
}

TEST_CASE("synth: same seed gives byte-identical files, different seed differs") {
  const SynthConfig cfg = small_config();
  const SynthOutput a = generate_corpus(cfg);
  const SynthOutput b = generate_corpus(cfg);
  CHECK(corpus_to_jsonl(a.corpus) == corpus_to_jsonl(b.corpus));
  CHECK(a.gazetteer.to_tsv() == b.gazetteer.to_tsv());

  SynthConfig other = cfg;
  other.seed = 12;
  const SynthOutput c = generate_corpus(other);
  CHECK(corpus_to_jsonl(a.corpus) != corpus_to_jsonl(c.corpus));
}

TEST_CASE("synth: gazetteer covers the configured fraction of signal tokens") {
  const SynthConfig cfg = small_config();  // fraction 0.5 of 4 tokens -> 2 per class
  const SynthOutput out = generate_corpus(cfg);
  CHECK(out.gazetteer.size() == cfg.n_classes() * 2);
  for (const auto& [word, entity] : out.gazetteer.items()) {
    CHECK(entity == "ENT_" + word);
  }
  CHECK(out.gazetteer.lookup("t00x0") != nullptr);
  CHECK(out.gazetteer.lookup("t00x3") == nullptr);  // beyond the fraction
}

TEST_CASE("synth: config validation rejects inconsistent settings") {
  SynthConfig cfg = small_config();
  cfg.docs_per_train_class = 20;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_config();
  cfg.docs_per_test_class = 21;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_config();
  cfg.vocab_size = cfg.n_classes() * cfg.signal_tokens_per_class;  // no noise room
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_config();
  cfg.noise_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = small_config();
  cfg.n_patients = 1;  // infeasible for the document counts
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);

  cfg = small_config();
  cfg.n_patients = 1000;  // more patients than sequences can absorb
  CHECK_THROWS_AS(generate_corpus(cfg), ConfigError);
}

TEST_CASE("synth: from_kv reads overrides and keeps defaults") {
  const KvConfig kv = KvConfig::parse_string(
      "n_train_classes = 4\n"
      "docs_per_train_class = 30\n"
      "noise_rate = 0.25\n"
      "seed = 99\n");
  const SynthConfig cfg = SynthConfig::from_kv(kv);
  CHECK(cfg.n_train_classes == 4);
  CHECK(cfg.docs_per_train_class == 30);
  CHECK(cfg.noise_rate == 0.25);
  CHECK(cfg.seed == 99);
  CHECK(cfg.n_test_classes == 8);      // default
  CHECK(cfg.tokens_per_doc_min == 30); // default
}

TEST_CASE("synth: default config is generable and splits match the regime thresholds") {
  const SynthConfig cfg;  // paper-regime defaults
  const SynthOutput out = generate_corpus(cfg);
  const auto h = label_histogram(out.corpus);
  for (const std::string& c : out.train_classes) CHECK(h.at(c) > 20);
  for (const std::string& c : out.test_classes) {
    CHECK(h.at(c) >= 2);
    CHECK(h.at(c) <= 10);
  }
  CHECK(out.corpus.size() == 10 * 24 + 8 * 10);
}
