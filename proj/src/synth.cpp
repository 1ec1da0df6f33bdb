#include "cograph/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

#include "cograph/errors.hpp"
#include "cograph/rng.hpp"

namespace cograph {

namespace {

std::string fmt(const char* pattern, std::size_t value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

// Exact patient allocation: per-class counts proportional to document mass,
// repaired so each class can be partitioned into sequences of allowed length
// and the total matches cfg.n_patients.
std::vector<std::size_t> allocate_patients(const SynthConfig& cfg,
                                           const std::vector<std::size_t>& docs) {
  const std::size_t n = docs.size();
  std::vector<std::size_t> lo(n), hi(n), p(n);
  std::size_t sum_lo = 0, sum_hi = 0, total_docs = 0;
  for (std::size_t c = 0; c < n; ++c) total_docs += docs[c];
  for (std::size_t c = 0; c < n; ++c) {
    lo[c] = (docs[c] + cfg.seq_len_max - 1) / cfg.seq_len_max;
    hi[c] = docs[c] / cfg.seq_len_min;
    if (lo[c] > hi[c]) {
      throw ConfigError("synth: class " + cfg.class_name(c) + " with " +
                        std::to_string(docs[c]) +
                        " documents cannot be split into sequences of length " +
                        std::to_string(cfg.seq_len_min) + ".." +
                        std::to_string(cfg.seq_len_max));
    }
    sum_lo += lo[c];
    sum_hi += hi[c];
  }
  if (cfg.n_patients < sum_lo || cfg.n_patients > sum_hi) {
    throw ConfigError("synth: n_patients = " + std::to_string(cfg.n_patients) +
                      " outside the feasible range [" + std::to_string(sum_lo) +
                      ", " + std::to_string(sum_hi) +
                      "] implied by document counts and sequence lengths");
  }

  std::size_t assigned = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const double share = static_cast<double>(cfg.n_patients) *
                         static_cast<double>(docs[c]) /
                         static_cast<double>(total_docs);
    p[c] = std::min(hi[c], std::max(lo[c], static_cast<std::size_t>(std::llround(share))));
    assigned += p[c];
  }
  // Rebalance toward the exact total, moving one patient at a time to/from the
  // class with the most/least documents per patient (ties: lowest class index).
  while (assigned != cfg.n_patients) {
    const bool grow = assigned < cfg.n_patients;
    std::size_t best = n;
    double best_load = grow ? -1.0 : 1e300;
    for (std::size_t c = 0; c < n; ++c) {
      if (grow && p[c] >= hi[c]) continue;
      if (!grow && p[c] <= lo[c]) continue;
      const double load = static_cast<double>(docs[c]) / static_cast<double>(p[c]);
      if (grow ? load > best_load : load < best_load) {
        best_load = load;
        best = c;
      }
    }
    if (best == n) throw ConfigError("synth: patient rebalancing stuck");  // unreachable
    p[best] += grow ? 1 : static_cast<std::size_t>(-1);
    assigned += grow ? 1 : static_cast<std::size_t>(-1);
  }
  return p;
}

// Split docs_c into n_seq lengths, each in [seq_len_min, seq_len_max].
std::vector<std::size_t> draw_sequence_lengths(const SynthConfig& cfg,
                                               std::size_t docs_c,
                                               std::size_t n_seq, Rng& rng) {
  std::vector<std::size_t> len(n_seq);
  long long diff = static_cast<long long>(docs_c);
  for (std::size_t i = 0; i < n_seq; ++i) {
    len[i] = cfg.seq_len_min + rng.below(cfg.seq_len_max - cfg.seq_len_min + 1);
    diff -= static_cast<long long>(len[i]);
  }
  while (diff != 0) {  // feasibility was checked in allocate_patients
    for (std::size_t i = 0; i < n_seq && diff != 0; ++i) {
      if (diff > 0 && len[i] < cfg.seq_len_max) {
        ++len[i];
        --diff;
      } else if (diff < 0 && len[i] > cfg.seq_len_min) {
        --len[i];
        ++diff;
      }
    }
  }
  return len;
}

}  // namespace

std::size_t SynthConfig::total_docs() const {
  return n_train_classes * docs_per_train_class + n_test_classes * docs_per_test_class;
}

std::string SynthConfig::class_name(std::size_t idx) const {
  return idx < n_train_classes ? "T" + fmt("%02zu", idx)
                               : "R" + fmt("%02zu", idx - n_train_classes);
}

void SynthConfig::validate() const {
  if (n_train_classes == 0) throw ConfigError("synth: n_train_classes must be >= 1");
  if (n_test_classes == 0) throw ConfigError("synth: n_test_classes must be >= 1");
  if (docs_per_train_class <= 20) {
    throw ConfigError("synth: docs_per_train_class must exceed 20 (frequent-class regime)");
  }
  if (docs_per_test_class < 2 || docs_per_test_class > 20) {
    throw ConfigError("synth: docs_per_test_class must lie in [2, 20] (rare-class regime)");
  }
  if (signal_tokens_per_class == 0) {
    throw ConfigError("synth: signal_tokens_per_class must be >= 1");
  }
  if (vocab_size <= n_classes() * signal_tokens_per_class) {
    throw ConfigError("synth: vocab_size must exceed the " +
                      std::to_string(n_classes() * signal_tokens_per_class) +
                      " signal tokens to leave room for noise tokens");
  }
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
    throw ConfigError("synth: noise_rate must lie in [0, 1]");
  }
  if (!(coherence >= 0.0 && coherence <= 1.0)) {
    throw ConfigError("synth: coherence must lie in [0, 1]");
  }
  if (!(gazetteer_fraction >= 0.0 && gazetteer_fraction <= 1.0)) {
    throw ConfigError("synth: gazetteer_fraction must lie in [0, 1]");
  }
  if (seq_len_min < 1 || seq_len_min > seq_len_max) {
    throw ConfigError("synth: need 1 <= seq_len_min <= seq_len_max");
  }
  if (tokens_per_doc_min < 1 || tokens_per_doc_min > tokens_per_doc_max) {
    throw ConfigError("synth: need 1 <= tokens_per_doc_min <= tokens_per_doc_max");
  }
  if (n_patients == 0) throw ConfigError("synth: n_patients must be >= 1");
}

SynthConfig SynthConfig::from_kv(const KvConfig& kv) {
  SynthConfig c;
  auto sz = [&](const char* key, std::size_t dflt) {
    const long long v = kv.get_int(key, static_cast<long long>(dflt));
    if (v < 0) throw ConfigError(std::string("synth: ") + key + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  c.n_train_classes = sz("n_train_classes", c.n_train_classes);
  c.n_test_classes = sz("n_test_classes", c.n_test_classes);
  c.docs_per_train_class = sz("docs_per_train_class", c.docs_per_train_class);
  c.docs_per_test_class = sz("docs_per_test_class", c.docs_per_test_class);
  c.vocab_size = sz("vocab_size", c.vocab_size);
  c.signal_tokens_per_class = sz("signal_tokens_per_class", c.signal_tokens_per_class);
  c.noise_rate = kv.get_double("noise_rate", c.noise_rate);
  c.n_patients = sz("n_patients", c.n_patients);
  c.seq_len_min = sz("seq_len_min", c.seq_len_min);
  c.seq_len_max = sz("seq_len_max", c.seq_len_max);
  c.tokens_per_doc_min = sz("tokens_per_doc_min", c.tokens_per_doc_min);
  c.tokens_per_doc_max = sz("tokens_per_doc_max", c.tokens_per_doc_max);
  c.coherence = kv.get_double("coherence", c.coherence);
  c.gazetteer_fraction = kv.get_double("gazetteer_fraction", c.gazetteer_fraction);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(c.seed)));
  c.validate();
  return c;
}

SynthOutput generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  SynthOutput out;

  // Token pools. Signal tokens are class-pure by construction; the noise pool
  // fills the vocabulary up to vocab_size and is shared by every class.
  std::vector<std::vector<std::string>> signal(cfg.n_classes());
  for (std::size_t c = 0; c < cfg.n_classes(); ++c) {
    std::string stem = cfg.class_name(c);
    for (char& ch : stem) ch = static_cast<char>(std::tolower(ch));
    for (std::size_t i = 0; i < cfg.signal_tokens_per_class; ++i) {
      signal[c].push_back(stem + "x" + std::to_string(i));
    }
  }
  const std::size_t n_noise = cfg.vocab_size - cfg.n_classes() * cfg.signal_tokens_per_class;
  std::vector<std::string> noise;
  for (std::size_t i = 0; i < n_noise; ++i) noise.push_back("n" + fmt("%03zu", i));

  for (std::size_t c = 0; c < cfg.n_classes(); ++c) {
    (c < cfg.n_train_classes ? out.train_classes : out.test_classes)
        .push_back(cfg.class_name(c));
  }

  // Gazetteer: the first round(fraction * per-class) signal tokens of each class.
  const std::size_t per_class_ents = static_cast<std::size_t>(
      std::llround(cfg.gazetteer_fraction * static_cast<double>(cfg.signal_tokens_per_class)));
  for (std::size_t c = 0; c < cfg.n_classes(); ++c) {
    for (std::size_t i = 0; i < per_class_ents; ++i) {
      out.gazetteer.add(signal[c][i], "ENT_" + signal[c][i]);
    }
  }

  std::vector<std::size_t> docs_per_class(cfg.n_classes());
  for (std::size_t c = 0; c < cfg.n_classes(); ++c) {
    docs_per_class[c] =
        c < cfg.n_train_classes ? cfg.docs_per_train_class : cfg.docs_per_test_class;
  }
  out.patients_per_class = allocate_patients(cfg, docs_per_class);

  const auto draw_fresh = [&](std::size_t cls, Rng& rng) -> const std::string& {
    if (n_noise > 0 && rng.unit() < cfg.noise_rate) return noise[rng.below(n_noise)];
    return signal[cls][rng.below(signal[cls].size())];
  };
  const auto has_signal = [&](std::size_t cls, const std::vector<std::string>& tokens) {
    const std::set<std::string> pool(signal[cls].begin(), signal[cls].end());
    for (const std::string& t : tokens) {
      if (pool.count(t) != 0) return true;
    }
    return false;
  };

  std::size_t patient_idx = 0;
  for (std::size_t c = 0; c < cfg.n_classes(); ++c) {
    Rng len_rng(derive_seed(cfg.seed, "seqlen", c));
    const std::vector<std::size_t> seq_lens =
        draw_sequence_lengths(cfg, docs_per_class[c], out.patients_per_class[c], len_rng);

    for (std::size_t s = 0; s < seq_lens.size(); ++s, ++patient_idx) {
      Rng rng(derive_seed(cfg.seed, "patient", patient_idx));
      const std::string patient_id = "p" + fmt("%03zu", patient_idx);
      std::vector<std::string> prev;

      for (std::size_t d = 0; d < seq_lens[s]; ++d) {
        const std::size_t span = cfg.tokens_per_doc_max - cfg.tokens_per_doc_min + 1;
        std::size_t len = cfg.coherence == 1.0 && d > 0
                              ? prev.size()
                              : cfg.tokens_per_doc_min + rng.below(span);

        // Carry a coherence-sized slice of the previous document, then top up
        // with fresh draws; `fresh` marks positions eligible for the signal
        // fix-up so carried context is never disturbed when avoidable.
        std::vector<std::pair<std::string, bool>> slots;
        if (d > 0) {
          const std::size_t want = static_cast<std::size_t>(
              std::ceil(cfg.coherence * static_cast<double>(len)));
          for (std::size_t i : rng.sample_indices(prev.size(), std::min(want, prev.size()))) {
            slots.emplace_back(prev[i], false);
          }
        }
        while (slots.size() < len) slots.emplace_back(draw_fresh(c, rng), true);
        rng.shuffle(slots);

        std::vector<std::string> tokens;
        tokens.reserve(len);
        for (const auto& [tok, fresh] : slots) {
          (void)fresh;
          tokens.push_back(tok);
        }
        if (!has_signal(c, tokens)) {
          std::vector<std::size_t> fresh_pos;
          for (std::size_t i = 0; i < slots.size(); ++i) {
            if (slots[i].second) fresh_pos.push_back(i);
          }
          const std::size_t at = fresh_pos.empty()
                                     ? rng.below(tokens.size())
                                     : fresh_pos[rng.below(fresh_pos.size())];
          tokens[at] = signal[c][rng.below(signal[c].size())];
        }

        Document doc;
        doc.patient_id = patient_id;
        doc.seq_index = static_cast<std::uint32_t>(d);
        doc.doc_id = patient_id + "_" + fmt("%02zu", d);
        doc.tokens = tokens;
        doc.labels = {cfg.class_name(c)};
        out.corpus.push_back(std::move(doc));
        prev = tokens;
      }
    }
  }
  return out;
}

}  // namespace cograph
