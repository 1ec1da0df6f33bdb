#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cograph/config.hpp"
#include "cograph/corpus.hpp"
#include "cograph/fewshot.hpp"
#include "cograph/gecl.hpp"
#include "cograph/hewe_graph.hpp"
#include "cograph/pretrain.hpp"

namespace cograph {

// File layout of one run directory. Every stage reads and writes here, so a
// finished run carries its config, data, checkpoints, logs and metrics.
struct RunPaths {
  std::string root;

  std::string config_snapshot() const { return root + "/config.snapshot.cfg"; }
  std::string manifest() const { return root + "/manifest.json"; }
  std::string corpus() const { return root + "/corpus.jsonl"; }
  std::string gazetteer() const { return root + "/gazetteer.tsv"; }
  std::string vocab() const { return root + "/vocab.json"; }
  std::string graphs_dir() const { return root + "/graphs"; }
  std::string graph_file(const std::string& doc_id) const {
    return graphs_dir() + "/" + doc_id + ".hewe";
  }
  std::string pretrain_checkpoint() const { return root + "/pretrain.ckpt"; }
  std::string pretrain_log() const { return root + "/pretrain_log.jsonl"; }
  std::string fewshot_checkpoint() const { return root + "/fewshot.ckpt"; }
  std::string train_log() const { return root + "/train_log.jsonl"; }
  std::string metrics_json() const { return root + "/metrics.json"; }
  std::string metrics_json_for(std::size_t C, std::size_t K) const {
    return root + "/metrics_C" + std::to_string(C) + "_K" + std::to_string(K) +
           ".json";
  }
  std::string episodes_csv_for(std::size_t C, std::size_t K) const {
    return root + "/episodes_C" + std::to_string(C) + "_K" + std::to_string(K) +
           ".csv";
  }
  std::string ksweep_csv() const { return root + "/ksweep.csv"; }
  std::string report_txt() const { return root + "/report.txt"; }
  std::string embeddings_tsv() const { return root + "/embeddings.tsv"; }
};

// Content hashing for the data manifest.
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

std::string read_file(const std::string& path);  // DataError when unreadable
void write_file(const std::string& path, const std::string& bytes);

// Vocabulary persistence (word/entity id order, counts, build settings).
std::string vocab_to_json(const Vocabulary& vocab, std::uint64_t min_count,
                          std::size_t window_size);
struct VocabFile {
  Vocabulary vocab;
  std::uint64_t min_count = 1;
  std::size_t window_size = 5;
};
VocabFile vocab_from_json(const std::string& text);

// Label-frequency regime: labels occurring on more than 20 documents become
// training classes, labels on 2..20 documents test classes; singletons drop.
struct ClassSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<std::string> dropped;
};
ClassSplit split_classes(const Corpus& corpus);

// Everything the model stages need from a prepared run directory.
struct RunData {
  Corpus corpus;
  Vocabulary vocab;
  std::uint64_t min_count = 1;
  std::size_t window_size = 5;
  std::vector<HeweGraph> graphs;  // aligned with corpus order
  std::map<std::string, std::size_t> graph_of_doc;
};
RunData load_run_data(const RunPaths& run);

// Patient sequences ordered by seq_index (patients in sorted id order).
std::vector<GraphSequence> build_sequences(const RunData& data);

// Episodic view over the docs whose labels fall in `classes`.
LabeledGraphSet build_labeled_set(const RunData& data,
                                  const std::vector<std::string>& classes,
                                  SplitTag split);

// Model geometry shared by the stages.
struct ModelConfig {
  EncoderDims dims;            // embed_dim, hidden0, hidden1
  std::size_t gru_hidden = 300;
  double init_radius = 0.1;

  static ModelConfig from_kv(const KvConfig& kv);
};

// ---- pipeline stages (each maps to one CLI subcommand) ----

void stage_synth(const KvConfig& cfg, const RunPaths& run);
void stage_build_graphs(const KvConfig& cfg, const RunPaths& run);

struct PretrainSummary {
  bool trained = false;  // false for ablation mode none
  std::vector<EpochLoss> losses;
  std::string warning;
};
PretrainSummary stage_pretrain(const KvConfig& cfg, const RunPaths& run);

struct TrainSummary {
  double best_val_acc = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs = 0;
};
TrainSummary stage_train(const KvConfig& cfg, const RunPaths& run);

struct EvalSummary {
  MacroMetrics mean;
  MacroMetrics stderr_;
  std::size_t n_episodes = 0;
  std::size_t C = 0, K = 0;
};
EvalSummary stage_eval(const KvConfig& cfg, const RunPaths& run);

void stage_report(const RunPaths& run, std::ostream& out);
void stage_export_embeddings(const KvConfig& cfg, const RunPaths& run);

}  // namespace cograph
