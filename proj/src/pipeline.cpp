#include "cograph/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cograph/errors.hpp"
#include "cograph/synth.hpp"

namespace cograph {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Full-precision, locale-independent double rendering for CSV/TSV artifacts.
std::string dtos(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_run_dir(const RunPaths& run) {
  std::error_code ec;
  fs::create_directories(run.root, ec);
  if (ec) throw DataError("cannot create run directory " + run.root);
}

void require_file(const std::string& path, const std::string& hint) {
  if (!fs::exists(path))
    throw DataError("missing " + path + "; " + hint);
}

// doc_id doubles as a file name under graphs/, so keep it path-safe.
void check_doc_id(const std::string& doc_id) {
  if (doc_id.empty()) throw DataError("empty doc_id");
  for (char c : doc_id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok)
      throw DataError("doc_id '" + doc_id +
                      "' contains characters unsafe for file names");
  }
  if (doc_id[0] == '.')
    throw DataError("doc_id '" + doc_id + "' may not start with '.'");
}

// Rehashes every artifact in the run directory (top level plus graphs/)
// so a finished run documents its own contents.
void update_manifest(const RunPaths& run) {
  std::vector<std::string> rel;
  for (const auto& entry : fs::directory_iterator(run.root)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    rel.push_back(name);
  }
  if (fs::is_directory(run.graphs_dir())) {
    for (const auto& entry : fs::directory_iterator(run.graphs_dir())) {
      if (!entry.is_regular_file()) continue;
      rel.push_back("graphs/" + entry.path().filename().string());
    }
  }
  std::sort(rel.begin(), rel.end());

  json files = json::object();
  for (const std::string& r : rel) {
    std::string bytes = read_file(run.root + "/" + r);
    files[r] = {{"bytes", bytes.size()}, {"fnv1a64", fnv1a64_hex(bytes)}};
  }
  json manifest = {{"files", files}, {"n_files", rel.size()}};
  write_file(run.manifest(), manifest.dump(2) + "\n");
}

void write_config_snapshot(const KvConfig& cfg, const RunPaths& run) {
  write_file(run.config_snapshot(), cfg.render());
}

json config_echo(const KvConfig& cfg) {
  json echo = json::object();
  for (const auto& [k, v] : cfg.entries()) echo[k] = v;
  return echo;
}

AblationMode mode_of(const KvConfig& cfg) {
  return parse_mode(cfg.get_string("mode", "full"));
}

json metrics_json_body(const KvConfig& cfg, const FewshotConfig& fc,
                       const EvalReport& report, std::size_t n_episodes) {
  return json{{"acc", report.mean.acc},
              {"precision", report.mean.precision},
              {"recall", report.mean.recall},
              {"f1", report.mean.f1},
              {"acc_stderr", report.stderr_.acc},
              {"precision_stderr", report.stderr_.precision},
              {"recall_stderr", report.stderr_.recall},
              {"f1_stderr", report.stderr_.f1},
              {"n_episodes", n_episodes},
              {"C", fc.C},
              {"K", fc.K},
              {"L", fc.L},
              {"strategy", strategy_name(fc.strategy)},
              {"seed", fc.seed},
              {"config", config_echo(cfg)}};
}

struct MetricsRow {
  std::size_t C = 0, K = 0, n_episodes = 0;
  double acc = 0.0, acc_stderr = 0.0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

std::vector<MetricsRow> collect_metrics_rows(const RunPaths& run) {
  std::vector<MetricsRow> rows;
  if (!fs::is_directory(run.root)) return rows;
  for (const auto& entry : fs::directory_iterator(run.root)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.rfind("metrics_C", 0) != 0 || name.find("_K") == std::string::npos ||
        name.size() < 6 || name.substr(name.size() - 5) != ".json")
      continue;
    json j;
    try {
      j = json::parse(read_file(entry.path().string()));
    } catch (const json::exception&) {
      throw DataError("malformed metrics file " + entry.path().string());
    }
    MetricsRow row;
    row.C = j.at("C").get<std::size_t>();
    row.K = j.at("K").get<std::size_t>();
    row.n_episodes = j.at("n_episodes").get<std::size_t>();
    row.acc = j.at("acc").get<double>();
    row.acc_stderr = j.at("acc_stderr").get<double>();
    row.precision = j.at("precision").get<double>();
    row.recall = j.at("recall").get<double>();
    row.f1 = j.at("f1").get<double>();
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return a.C != b.C ? a.C < b.C : a.K < b.K;
  });
  return rows;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path);
}

std::string vocab_to_json(const Vocabulary& vocab, std::uint64_t min_count,
                          std::size_t window_size) {
  std::vector<std::string> words(vocab.n_words());
  for (const auto& [w, id] : vocab.word_to_id) words.at(id) = w;
  std::vector<std::string> entities(vocab.n_entities());
  for (const auto& [e, id] : vocab.entity_to_id) entities.at(id) = e;

  ordered_json counts = ordered_json::object();
  for (const auto& [w, n] : vocab.counts) counts[w] = n;

  ordered_json j;
  j["words"] = words;  // index == word id
  j["entities"] = entities;
  j["counts"] = counts;
  j["max_words_per_doc"] = vocab.max_words_per_doc;
  j["min_count"] = min_count;
  j["window_size"] = window_size;
  return j.dump(2) + "\n";
}

VocabFile vocab_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception&) {
    throw DataError("malformed vocabulary JSON");
  }
  VocabFile out;
  try {
    const auto& words = j.at("words");
    for (std::size_t i = 0; i < words.size(); ++i)
      out.vocab.word_to_id[words.at(i).get<std::string>()] =
          static_cast<std::uint32_t>(i);
    const auto& entities = j.at("entities");
    for (std::size_t i = 0; i < entities.size(); ++i)
      out.vocab.entity_to_id[entities.at(i).get<std::string>()] =
          static_cast<std::uint32_t>(i);
    for (const auto& [w, n] : j.at("counts").items())
      out.vocab.counts[w] = n.get<std::uint64_t>();
    out.vocab.max_words_per_doc = j.at("max_words_per_doc").get<std::size_t>();
    out.min_count = j.at("min_count").get<std::uint64_t>();
    out.window_size = j.at("window_size").get<std::size_t>();
  } catch (const ordered_json::exception&) {
    throw DataError("vocabulary JSON missing required fields");
  }
  if (out.vocab.word_to_id.size() != j.at("words").size())
    throw DataError("vocabulary JSON repeats a word");
  if (out.vocab.entity_to_id.size() != j.at("entities").size())
    throw DataError("vocabulary JSON repeats an entity");
  return out;
}

ClassSplit split_classes(const Corpus& corpus) {
  std::map<std::string, std::size_t> doc_count;
  for (const Document& doc : corpus) {
    std::set<std::string> seen(doc.labels.begin(), doc.labels.end());
    for (const std::string& label : seen) ++doc_count[label];
  }
  ClassSplit split;
  for (const auto& [label, n] : doc_count) {
    if (n > 20)
      split.train.push_back(label);
    else if (n >= 2)
      split.test.push_back(label);
    else
      split.dropped.push_back(label);
  }
  return split;
}

RunData load_run_data(const RunPaths& run) {
  require_file(run.corpus(), "run `cograph synth` or provide a corpus first");
  require_file(run.vocab(), "run `cograph build-graphs` first");

  RunData data;
  data.corpus = load_corpus_jsonl(run.corpus());
  VocabFile vf = vocab_from_json(read_file(run.vocab()));
  data.vocab = std::move(vf.vocab);
  data.min_count = vf.min_count;
  data.window_size = vf.window_size;

  data.graphs.reserve(data.corpus.size());
  for (const Document& doc : data.corpus) {
    std::string path = run.graph_file(doc.doc_id);
    require_file(path, "run `cograph build-graphs` first");
    data.graph_of_doc[doc.doc_id] = data.graphs.size();
    data.graphs.push_back(load_graph_file(path));
  }
  return data;
}

std::vector<GraphSequence> build_sequences(const RunData& data) {
  std::map<std::string, std::vector<std::pair<std::uint32_t, const HeweGraph*>>>
      by_patient;
  for (std::size_t i = 0; i < data.corpus.size(); ++i) {
    const Document& doc = data.corpus[i];
    by_patient[doc.patient_id].emplace_back(doc.seq_index, &data.graphs[i]);
  }
  std::vector<GraphSequence> sequences;
  sequences.reserve(by_patient.size());
  for (auto& [patient, entries] : by_patient) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries.size(); ++i)
      if (entries[i].first == entries[i - 1].first)
        throw DataError("patient " + patient + " repeats seq_index " +
                        std::to_string(entries[i].first));
    GraphSequence seq;
    seq.patient_id = patient;
    for (const auto& [idx, graph] : entries) seq.graphs.push_back(graph);
    sequences.push_back(std::move(seq));
  }
  return sequences;
}

LabeledGraphSet build_labeled_set(const RunData& data,
                                  const std::vector<std::string>& classes,
                                  SplitTag split) {
  std::set<std::string> wanted(classes.begin(), classes.end());
  LabeledGraphSet set;
  set.split = split;
  for (std::size_t i = 0; i < data.corpus.size(); ++i) {
    const Document& doc = data.corpus[i];
    for (const std::string& label : doc.labels)
      if (wanted.count(label)) set.add(&data.graphs[i], doc.doc_id, label);
  }
  return set;
}

ModelConfig ModelConfig::from_kv(const KvConfig& kv) {
  ModelConfig mc;
  mc.dims.embed = static_cast<std::size_t>(kv.get_int("embed_dim", 300));
  mc.dims.hidden0 = static_cast<std::size_t>(kv.get_int("hidden0", 100));
  mc.dims.hidden1 = static_cast<std::size_t>(kv.get_int("hidden1", 300));
  mc.gru_hidden = static_cast<std::size_t>(kv.get_int("gru_hidden", 300));
  mc.init_radius = kv.get_double("init_radius", 0.1);
  if (mc.dims.embed == 0 || mc.dims.hidden0 == 0 || mc.dims.hidden1 == 0 ||
      mc.gru_hidden == 0)
    throw ConfigError("model dimensions must be positive");
  if (!(mc.init_radius > 0.0))
    throw ConfigError("init_radius must be positive");
  return mc;
}

void stage_synth(const KvConfig& cfg, const RunPaths& run) {
  SynthConfig sc = SynthConfig::from_kv(cfg);
  sc.validate();
  SynthOutput out = generate_corpus(sc);

  ensure_run_dir(run);
  save_corpus_jsonl(out.corpus, run.corpus());
  out.gazetteer.save_tsv(run.gazetteer());
  write_config_snapshot(cfg, run);
  update_manifest(run);
}

void stage_build_graphs(const KvConfig& cfg, const RunPaths& run) {
  require_file(run.corpus(), "run `cograph synth` or provide a corpus first");
  require_file(run.gazetteer(),
               "run `cograph synth` or provide a gazetteer first");

  Corpus corpus = load_corpus_jsonl(run.corpus());
  Gazetteer gazetteer = Gazetteer::load_tsv(run.gazetteer());

  auto min_count = static_cast<std::uint64_t>(cfg.get_int("min_count", 1));
  auto max_words =
      static_cast<std::size_t>(cfg.get_int("max_words_per_doc", 128));
  auto window = static_cast<std::size_t>(cfg.get_int("window_size", 5));

  Vocabulary vocab = build_vocabulary(corpus, min_count, max_words);
  index_entities(vocab, gazetteer);

  std::set<std::string> seen_ids;
  for (const Document& doc : corpus) {
    check_doc_id(doc.doc_id);
    if (!seen_ids.insert(doc.doc_id).second)
      throw DataError("duplicate doc_id " + doc.doc_id);
  }

  ensure_run_dir(run);
  std::error_code ec;
  fs::create_directories(run.graphs_dir(), ec);
  if (ec) throw DataError("cannot create " + run.graphs_dir());

  write_file(run.vocab(), vocab_to_json(vocab, min_count, window));
  for (const Document& doc : corpus) {
    HeweGraph graph = build_hewe_graph(doc, vocab, window, gazetteer, max_words);
    save_graph_file(graph, run.graph_file(doc.doc_id));
  }
  write_config_snapshot(cfg, run);
  update_manifest(run);
}

PretrainSummary stage_pretrain(const KvConfig& cfg, const RunPaths& run) {
  RunData data = load_run_data(run);
  ModelConfig mc = ModelConfig::from_kv(cfg);
  PretrainConfig pc = PretrainConfig::from_kv(cfg);

  std::vector<const HeweGraph*> graphs;
  graphs.reserve(data.graphs.size());
  for (const HeweGraph& g : data.graphs) graphs.push_back(&g);
  std::vector<GraphSequence> sequences = build_sequences(data);

  PretrainInit init = make_pretrain_init(data.vocab.table_size(), mc.dims,
                                         mc.gru_hidden, mc.init_radius, pc.seed);
  std::optional<PretrainResult> result =
      run_pretrain(graphs, sequences, std::move(init), pc);

  PretrainSummary summary;
  if (result) {
    summary.trained = true;
    summary.losses = result->losses;
    summary.warning = result->warning;
    result->checkpoint.save(run.pretrain_checkpoint());

    std::string log;
    if (!result->warning.empty())
      log += ordered_json{{"warning", result->warning}}.dump() + "\n";
    for (const EpochLoss& e : result->losses)
      log += ordered_json{{"epoch", e.epoch},
                          {"l_gscl", e.l_gscl},
                          {"l_gecl", e.l_gecl},
                          {"l_total", e.l_total}}
                 .dump() +
             "\n";
    write_file(run.pretrain_log(), log);
  }
  write_config_snapshot(cfg, run);
  update_manifest(run);
  return summary;
}

TrainSummary stage_train(const KvConfig& cfg, const RunPaths& run) {
  RunData data = load_run_data(run);
  ModelConfig mc = ModelConfig::from_kv(cfg);
  FewshotConfig fc = FewshotConfig::from_kv(cfg);
  AblationMode mode = mode_of(cfg);

  ClassSplit split = split_classes(data.corpus);
  if (split.train.empty())
    throw DataError(
        "no training classes: every label occurs on 20 or fewer documents");
  LabeledGraphSet train_set =
      build_labeled_set(data, split.train, SplitTag::Train);

  EncoderParams encoder = [&] {
    if (mode == AblationMode::None) {
      // Ablation baseline: skip pre-training, start from a fresh random model.
      return make_pretrain_init(data.vocab.table_size(), mc.dims, mc.gru_hidden,
                                mc.init_radius, fc.seed)
          .encoder;
    }
    require_file(run.pretrain_checkpoint(), "run `cograph pretrain` first");
    EncoderParams enc =
        EncoderParams::from_checkpoint(Checkpoint::load(run.pretrain_checkpoint()));
    if (enc.vocab_size() != data.vocab.table_size())
      throw DataError("checkpoint " + run.pretrain_checkpoint() +
                      " was trained on a different vocabulary (" +
                      std::to_string(enc.vocab_size()) + " rows, expected " +
                      std::to_string(data.vocab.table_size()) + ")");
    return enc;
  }();

  Rng predictor_rng(derive_seed(fc.seed, "predictor-init"));
  PredictorParams predictor =
      PredictorParams::init(encoder.out_dim(), mc.init_radius, predictor_rng);

  TrainResult result = train_fewshot(train_set, fc, encoder, predictor);
  result.best.save(run.fewshot_checkpoint());

  std::string log;
  for (const TrainLogEntry& e : result.log)
    log += ordered_json{{"epoch", e.epoch},
                        {"loss", e.loss},
                        {"val_acc", e.val_acc},
                        {"is_best", e.is_best}}
               .dump() +
           "\n";
  write_file(run.train_log(), log);
  write_config_snapshot(cfg, run);
  update_manifest(run);

  return TrainSummary{result.best_val_acc, result.best_epoch, fc.epochs};
}

EvalSummary stage_eval(const KvConfig& cfg, const RunPaths& run) {
  require_file(run.fewshot_checkpoint(), "run `cograph train` first");
  RunData data = load_run_data(run);
  FewshotConfig fc = FewshotConfig::from_kv(cfg);
  auto n_episodes =
      static_cast<std::size_t>(cfg.get_int("eval_episodes", 500));
  if (n_episodes == 0) throw ConfigError("eval_episodes must be positive");

  ClassSplit split = split_classes(data.corpus);
  if (split.test.empty())
    throw DataError("no test classes: no label occurs on 2..20 documents");
  LabeledGraphSet test_set = build_labeled_set(data, split.test, SplitTag::Test);

  Checkpoint ckpt = Checkpoint::load(run.fewshot_checkpoint());
  EncoderParams encoder = EncoderParams::from_checkpoint(ckpt);
  PredictorParams predictor = PredictorParams::from_checkpoint(ckpt);

  EvalReport report = evaluate(test_set, fc, n_episodes, encoder, predictor);

  json body = metrics_json_body(cfg, fc, report, n_episodes);
  write_file(run.metrics_json(), body.dump(2) + "\n");
  write_file(run.metrics_json_for(fc.C, fc.K), body.dump(2) + "\n");

  std::string csv = "episode,acc,precision,recall,f1,n_queries\n";
  for (std::size_t i = 0; i < report.episodes.size(); ++i) {
    const EpisodeRecord& e = report.episodes[i];
    csv += std::to_string(i + 1) + "," + dtos(e.metrics.acc) + "," +
           dtos(e.metrics.precision) + "," + dtos(e.metrics.recall) + "," +
           dtos(e.metrics.f1) + "," + std::to_string(e.n_queries) + "\n";
  }
  write_file(run.episodes_csv_for(fc.C, fc.K), csv);
  update_manifest(run);

  return EvalSummary{report.mean, report.stderr_, n_episodes, fc.C, fc.K};
}

void stage_report(const RunPaths& run, std::ostream& out) {
  std::vector<MetricsRow> rows = collect_metrics_rows(run);
  if (rows.empty())
    throw DataError("no metrics in " + run.root + "; run `cograph eval` first");

  std::ostringstream table;
  table << "  C   K  episodes      acc   stderr  macro_f1\n";
  for (const MetricsRow& r : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%3zu %3zu  %8zu  %7.4f  %7.4f  %8.4f\n",
                  r.C, r.K, r.n_episodes, r.acc, r.acc_stderr, r.f1);
    table << line;
  }
  out << table.str();
  write_file(run.report_txt(), table.str());

  std::string csv = "C,K,n_episodes,acc,acc_stderr,precision,recall,f1\n";
  for (const MetricsRow& r : rows)
    csv += std::to_string(r.C) + "," + std::to_string(r.K) + "," +
           std::to_string(r.n_episodes) + "," + dtos(r.acc) + "," +
           dtos(r.acc_stderr) + "," + dtos(r.precision) + "," +
           dtos(r.recall) + "," + dtos(r.f1) + "\n";
  write_file(run.ksweep_csv(), csv);
  update_manifest(run);
}

void stage_export_embeddings(const KvConfig& cfg, const RunPaths& run) {
  (void)cfg;
  RunData data = load_run_data(run);

  std::string source;
  if (fs::exists(run.fewshot_checkpoint()))
    source = run.fewshot_checkpoint();
  else if (fs::exists(run.pretrain_checkpoint()))
    source = run.pretrain_checkpoint();
  else
    throw DataError("no checkpoint: neither " + run.fewshot_checkpoint() +
                    " nor " + run.pretrain_checkpoint() +
                    " exists; run `cograph pretrain` or `cograph train` first");
  EncoderParams encoder =
      EncoderParams::from_checkpoint(Checkpoint::load(source));
  if (encoder.vocab_size() != data.vocab.table_size())
    throw DataError("checkpoint " + source +
                    " was trained on a different vocabulary");

  ClassSplit split = split_classes(data.corpus);
  if (split.test.empty())
    throw DataError("no test classes: no label occurs on 2..20 documents");
  LabeledGraphSet test_set = build_labeled_set(data, split.test, SplitTag::Test);

  std::string tsv;
  for (const LabeledGraphSet::Item& item : test_set.items) {
    GraphEmbedding emb = encode(*item.graph, encoder);
    tsv += item.doc_id + "\t" + item.label;
    const std::vector<double>& g = emb.g.values();
    for (double v : g) tsv += "\t" + dtos(v);
    tsv += "\n";
  }
  write_file(run.embeddings_tsv(), tsv);
  update_manifest(run);
}

}  // namespace cograph
