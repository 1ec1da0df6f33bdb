#include "cograph/pipeline.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cograph/errors.hpp"

using namespace cograph;
namespace fs = std::filesystem;

namespace {

// Run directory under the test working dir, removed on scope exit.
struct TempRun {
  RunPaths run;

  explicit TempRun(const std::string& name) {
    run.root = "pipeline_test_" + name;
    fs::remove_all(run.root);
  }
  ~TempRun() { fs::remove_all(run.root); }
};

KvConfig desk_config() {
  return KvConfig::parse_string(
      "n_train_classes = 4\n"
      "n_test_classes = 3\n"
      "docs_per_train_class = 22\n"
      "docs_per_test_class = 6\n"
      "vocab_size = 60\n"
      "signal_tokens_per_class = 4\n"
      "noise_rate = 0.4\n"
      "n_patients = 32\n"
      "seq_len_min = 2\n"
      "seq_len_max = 4\n"
      "tokens_per_doc_min = 12\n"
      "tokens_per_doc_max = 20\n"
      "coherence = 0.5\n"
      "gazetteer_fraction = 0.5\n"
      "seed = 11\n"
      "embed_dim = 16\n"
      "hidden0 = 8\n"
      "hidden1 = 16\n"
      "gru_hidden = 8\n"
      "init_radius = 0.2\n"
      "pretrain_epochs = 2\n"
      "pretrain_batch_size = 8\n"
      "pretrain_lr = 0.002\n"
      "C = 3\n"
      "K = 2\n"
      "L = 4\n"
      "episode_batch = 4\n"
      "fewshot_epochs = 3\n"
      "fewshot_lr = 0.005\n"
      "val_episodes = 20\n"
      "eval_episodes = 30\n");
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

Document make_doc(const std::string& id, const std::string& patient,
                  std::uint32_t seq, std::vector<std::string> tokens,
                  std::vector<std::string> labels) {
  Document d;
  d.doc_id = id;
  d.patient_id = patient;
  d.seq_index = seq;
  d.tokens = std::move(tokens);
  d.labels = std::move(labels);
  return d;
}

}  // namespace

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("read/write round-trips bytes and reports bad paths") {
  const std::string path = "pipeline_test_io.bin";
  std::string payload = "line1\nline2\0binary", full(payload);
  write_file(path, full);
  CHECK(read_file(path) == full);
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_file("pipeline_test_does_not_exist"), DataError);
  CHECK_THROWS_AS(write_file("no_such_dir_xyz/file", "x"), DataError);
}

TEST_CASE("vocabulary JSON round-trips ids, counts and build settings") {
  Corpus corpus = {
      make_doc("d0", "p0", 0, {"cough", "fever", "cough"}, {"A"}),
      make_doc("d1", "p0", 1, {"fever", "rash", "zeta"}, {"A"}),
  };
  Vocabulary vocab = build_vocabulary(corpus, 1, 32);
  Gazetteer gaz;
  gaz.add("cough", "ENT_cough");
  gaz.add("rash", "ENT_rash");
  index_entities(vocab, gaz);

  std::string text = vocab_to_json(vocab, 1, 5);
  VocabFile loaded = vocab_from_json(text);
  CHECK(loaded.vocab.word_to_id == vocab.word_to_id);
  CHECK(loaded.vocab.entity_to_id == vocab.entity_to_id);
  CHECK(loaded.vocab.counts == vocab.counts);
  CHECK(loaded.vocab.max_words_per_doc == vocab.max_words_per_doc);
  CHECK(loaded.min_count == 1);
  CHECK(loaded.window_size == 5);
  CHECK(loaded.vocab.table_size() == vocab.table_size());

  CHECK_THROWS_AS(vocab_from_json("not json"), DataError);
  CHECK_THROWS_AS(vocab_from_json("{}"), DataError);
  CHECK_THROWS_AS(
      vocab_from_json("{\"words\":[\"a\",\"a\"],\"entities\":[],\"counts\":{},"
                      "\"max_words_per_doc\":8,\"min_count\":1,"
                      "\"window_size\":5}"),
      DataError);
}

TEST_CASE("split_classes buckets labels by document frequency") {
  Corpus corpus;
  // 25 docs of "big", 21 of "edge", 20 of "mid", 2 of "rare", 1 of "single".
  for (int i = 0; i < 25; ++i)
    corpus.push_back(make_doc("b" + std::to_string(i), "p", 0, {"t"}, {"big"}));
  for (int i = 0; i < 21; ++i)
    corpus.push_back(make_doc("e" + std::to_string(i), "p", 0, {"t"}, {"edge"}));
  for (int i = 0; i < 20; ++i)
    corpus.push_back(make_doc("m" + std::to_string(i), "p", 0, {"t"}, {"mid"}));
  corpus.push_back(make_doc("r0", "p", 0, {"t"}, {"rare"}));
  corpus.push_back(make_doc("r1", "p", 0, {"t"}, {"rare"}));
  corpus.push_back(make_doc("s0", "p", 0, {"t"}, {"single"}));
  // Duplicate labels on one document count that document once.
  corpus.push_back(make_doc("dup", "p", 0, {"t"}, {"rare", "rare"}));

  ClassSplit split = split_classes(corpus);
  CHECK(split.train == std::vector<std::string>{"big", "edge"});
  CHECK(split.test == std::vector<std::string>{"mid", "rare"});
  CHECK(split.dropped == std::vector<std::string>{"single"});
}

TEST_CASE("build_sequences orders by seq_index and rejects duplicates") {
  RunData data;
  data.corpus = {
      make_doc("a2", "pB", 2, {"t"}, {"x"}),
      make_doc("a0", "pB", 0, {"t"}, {"x"}),
      make_doc("b0", "pA", 5, {"t"}, {"x"}),
      make_doc("a1", "pB", 1, {"t"}, {"x"}),
  };
  data.graphs.resize(4);  // placeholder graphs; only identity matters here

  std::vector<GraphSequence> seqs = build_sequences(data);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].patient_id == "pA");
  CHECK(seqs[0].length() == 1);
  CHECK(seqs[1].patient_id == "pB");
  REQUIRE(seqs[1].length() == 3);
  CHECK(seqs[1].graphs[0] == &data.graphs[1]);  // a0
  CHECK(seqs[1].graphs[1] == &data.graphs[3]);  // a1
  CHECK(seqs[1].graphs[2] == &data.graphs[0]);  // a2

  data.corpus.push_back(make_doc("a9", "pB", 1, {"t"}, {"x"}));
  data.graphs.resize(5);
  CHECK_THROWS_WITH_AS(build_sequences(data),
                       "patient pB repeats seq_index 1", DataError);
}

TEST_CASE("build_labeled_set keeps corpus order and label filter") {
  RunData data;
  data.corpus = {
      make_doc("d0", "p", 0, {"t"}, {"A", "B"}),
      make_doc("d1", "p", 1, {"t"}, {"C"}),
      make_doc("d2", "p", 2, {"t"}, {"B"}),
  };
  data.graphs.resize(3);

  LabeledGraphSet set = build_labeled_set(data, {"A", "B"}, SplitTag::Test);
  CHECK(set.split == SplitTag::Test);
  REQUIRE(set.items.size() == 3);
  CHECK(set.items[0].doc_id == "d0");
  CHECK(set.items[0].label == "A");
  CHECK(set.items[1].doc_id == "d0");
  CHECK(set.items[1].label == "B");
  CHECK(set.items[2].doc_id == "d2");
  CHECK(set.items[0].graph == &data.graphs[0]);
  CHECK(set.class_index.at("B") == std::vector<std::size_t>{1, 2});
}

TEST_CASE("stages require their inputs and name the missing file") {
  TempRun t("missing");
  KvConfig cfg = desk_config();

  CHECK_THROWS_WITH_AS(stage_build_graphs(cfg, t.run),
                       doctest::Contains("corpus.jsonl"), DataError);
  CHECK_THROWS_WITH_AS(stage_eval(cfg, t.run),
                       doctest::Contains("fewshot.ckpt"), DataError);
  CHECK_THROWS_WITH_AS(stage_pretrain(cfg, t.run),
                       doctest::Contains("corpus.jsonl"), DataError);
  std::ostringstream sink;
  CHECK_THROWS_WITH_AS(stage_report(t.run, sink),
                       doctest::Contains("no metrics"), DataError);
}

TEST_CASE("pipeline stages chain end to end on a desk-scale run") {
  TempRun t("e2e");
  KvConfig cfg = desk_config();

  stage_synth(cfg, t.run);
  CHECK(fs::exists(t.run.corpus()));
  CHECK(fs::exists(t.run.gazetteer()));
  CHECK(fs::exists(t.run.config_snapshot()));
  CHECK(fs::exists(t.run.manifest()));

  stage_build_graphs(cfg, t.run);
  Corpus corpus = load_corpus_jsonl(t.run.corpus());
  CHECK(corpus.size() == 4 * 22 + 3 * 6);
  for (const Document& doc : corpus)
    CHECK(fs::exists(t.run.graph_file(doc.doc_id)));
  VocabFile vf = vocab_from_json(read_file(t.run.vocab()));
  CHECK(vf.vocab.n_words() > 0);
  CHECK(vf.vocab.n_entities() > 0);

  RunData data = load_run_data(t.run);
  CHECK(data.corpus == corpus);
  CHECK(data.graphs.size() == corpus.size());
  CHECK(data.graph_of_doc.size() == corpus.size());

  PretrainSummary ps = stage_pretrain(cfg, t.run);
  CHECK(ps.trained);
  CHECK(ps.losses.size() == 2);
  CHECK(ps.warning.empty());
  CHECK(fs::exists(t.run.pretrain_checkpoint()));
  CHECK(count_lines(read_file(t.run.pretrain_log())) == 2);

  TrainSummary ts = stage_train(cfg, t.run);
  CHECK(ts.epochs == 3);
  CHECK(ts.best_epoch >= 1);
  CHECK(ts.best_epoch <= 3);
  CHECK(fs::exists(t.run.fewshot_checkpoint()));
  CHECK(count_lines(read_file(t.run.train_log())) == 3);

  EvalSummary es = stage_eval(cfg, t.run);
  CHECK(es.n_episodes == 30);
  CHECK(es.C == 3);
  CHECK(es.K == 2);
  CHECK(es.mean.acc >= 0.0);
  CHECK(es.mean.acc <= 1.0);
  CHECK(fs::exists(t.run.metrics_json()));
  CHECK(fs::exists(t.run.metrics_json_for(3, 2)));
  std::string csv = read_file(t.run.episodes_csv_for(3, 2));
  CHECK(count_lines(csv) == 31);  // header + one row per episode
  CHECK(csv.rfind("episode,acc,precision,recall,f1,n_queries\n", 0) == 0);

  nlohmann::json metrics = nlohmann::json::parse(read_file(t.run.metrics_json()));
  CHECK(metrics.at("n_episodes") == 30);
  CHECK(metrics.at("C") == 3);
  CHECK(metrics.at("strategy") == "random");
  CHECK(metrics.at("acc").get<double>() == doctest::Approx(es.mean.acc));
  CHECK(metrics.at("config").at("vocab_size") == "60");

  std::ostringstream report;
  stage_report(t.run, report);
  CHECK(report.str().find("  C   K  episodes") != std::string::npos);
  CHECK(fs::exists(t.run.report_txt()));
  CHECK(read_file(t.run.report_txt()) == report.str());
  std::string sweep = read_file(t.run.ksweep_csv());
  CHECK(sweep.rfind("C,K,n_episodes,acc,", 0) == 0);
  CHECK(count_lines(sweep) == 2);

  stage_export_embeddings(cfg, t.run);
  std::string tsv = read_file(t.run.embeddings_tsv());
  LabeledGraphSet test_set =
      build_labeled_set(data, split_classes(corpus).test, SplitTag::Test);
  CHECK(count_lines(tsv) == test_set.items.size());
  std::istringstream rows(tsv);
  std::string row;
  REQUIRE(std::getline(rows, row));
  CHECK(std::count(row.begin(), row.end(), '\t') == 1 + 16);  // label + dims

  nlohmann::json manifest = nlohmann::json::parse(read_file(t.run.manifest()));
  const auto& files = manifest.at("files");
  for (const char* name :
       {"corpus.jsonl", "gazetteer.tsv", "vocab.json", "pretrain.ckpt",
        "fewshot.ckpt", "metrics.json", "report.txt", "ksweep.csv",
        "embeddings.tsv", "config.snapshot.cfg"})
    CHECK(files.contains(name));
  CHECK(files.contains("graphs/" + corpus.front().doc_id + ".hewe"));
  CHECK(manifest.at("n_files").get<std::size_t>() == files.size());
}

TEST_CASE("ablation mode none trains without a pretrain checkpoint") {
  TempRun t("none");
  KvConfig cfg = desk_config();
  cfg.set("mode", "none");
  cfg.set("fewshot_epochs", "1");

  stage_synth(cfg, t.run);
  stage_build_graphs(cfg, t.run);

  PretrainSummary ps = stage_pretrain(cfg, t.run);
  CHECK_FALSE(ps.trained);
  CHECK_FALSE(fs::exists(t.run.pretrain_checkpoint()));
  CHECK_FALSE(fs::exists(t.run.pretrain_log()));

  stage_train(cfg, t.run);
  CHECK(fs::exists(t.run.fewshot_checkpoint()));

  // Any other mode insists on the pre-training artifact.
  cfg.set("mode", "full");
  CHECK_THROWS_WITH_AS(stage_train(cfg, t.run),
                       doctest::Contains("pretrain.ckpt"), DataError);
}

TEST_CASE("data stages are byte-deterministic across runs") {
  TempRun a("det_a"), b("det_b");
  KvConfig cfg = desk_config();

  stage_synth(cfg, a.run);
  stage_synth(cfg, b.run);
  stage_build_graphs(cfg, a.run);
  stage_build_graphs(cfg, b.run);

  CHECK(read_file(a.run.corpus()) == read_file(b.run.corpus()));
  CHECK(read_file(a.run.gazetteer()) == read_file(b.run.gazetteer()));
  CHECK(read_file(a.run.vocab()) == read_file(b.run.vocab()));
  CHECK(read_file(a.run.manifest()) == read_file(b.run.manifest()));

  Corpus corpus = load_corpus_jsonl(a.run.corpus());
  CHECK(read_file(a.run.graph_file(corpus.front().doc_id)) ==
        read_file(b.run.graph_file(corpus.front().doc_id)));

  // Seed changes move the data.
  KvConfig other = desk_config();
  other.set("seed", "12");
  TempRun c("det_c");
  stage_synth(other, c.run);
  CHECK(read_file(a.run.corpus()) != read_file(c.run.corpus()));
}

TEST_CASE("model config parses dimensions and rejects zeros") {
  ModelConfig dflt = ModelConfig::from_kv(KvConfig::parse_string(""));
  CHECK(dflt.dims.embed == 300);
  CHECK(dflt.dims.hidden0 == 100);
  CHECK(dflt.dims.hidden1 == 300);
  CHECK(dflt.gru_hidden == 300);
  CHECK(dflt.init_radius == doctest::Approx(0.1));

  ModelConfig mc = ModelConfig::from_kv(desk_config());
  CHECK(mc.dims.embed == 16);
  CHECK(mc.gru_hidden == 8);

  KvConfig bad = desk_config();
  bad.set("hidden1", "0");
  CHECK_THROWS_AS(ModelConfig::from_kv(bad), ConfigError);
  bad = desk_config();
  bad.set("init_radius", "0");
  CHECK_THROWS_AS(ModelConfig::from_kv(bad), ConfigError);
}
