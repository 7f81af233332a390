// Command-line front end: synth, split, build-graph, train, evaluate, predict.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lesicin/corpus.hpp"
#include "lesicin/evaluation.hpp"
#include "lesicin/graph.hpp"
#include "lesicin/pipeline.hpp"
#include "lesicin/split.hpp"
#include "lesicin/synth.hpp"
#include "lesicin/training.hpp"

namespace fs = std::filesystem;
using namespace lesicin;

namespace {

struct Paths {
  std::string facts, train, val, hierarchy, graph, checkpoint, pretrained, text;
};

void add_common(CLI::App* sub, RunConfig& rc) {
  // Read by with_config_file before parsing; registered so --help lists it.
  sub->add_option("--config", "flat key = value file; flags given on the command line win");
  sub->add_option("--seed", rc.seed, "root seed for every random draw");
  sub->add_option("--out-dir", rc.out_dir, "directory for outputs");
  sub->add_option("--ablation", rc.ablation, "full | E | S | V")
      ->check(CLI::IsMember({"full", "E", "S", "V"}));
  sub->add_option("--tau", rc.tau, "decision threshold; disables tuning")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--eta", rc.eta, "weight cap for TWS");
  sub->add_flag("--desk-scale", rc.desk_scale, "small dimensions for CPU runs");
}

void add_model_options(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--epochs", rc.epochs);
  sub->add_option("--lr", rc.lr, "learning rate in [1e-6, 1e-2]");
  sub->add_option("--batch-size", rc.batch_size);
  sub->add_option("--theta-a", rc.theta_a);
  sub->add_option("--theta-s", rc.theta_s);
  sub->add_option("--theta-l", rc.theta_l);
  sub->add_option("--lambda-a", rc.lambda_a);
  sub->add_option("--lambda-l", rc.lambda_l);
  sub->add_option("--scheme", rc.scheme, "tws | vws")->check(CLI::IsMember({"tws", "vws"}));
  sub->add_option("--tune-tau", rc.tune_tau, "tune tau on validation data (true/false)");
  sub->add_option("--instances", rc.instances, "metapath instances per schema");
  sub->add_flag("--exclude-self-edges", rc.exclude_self_edges);
  sub->add_flag("--static-context", rc.static_context, "learned context vectors instead of generated ones");
  sub->add_option("--structural", rc.structural, "metapath | lookup")
      ->check(CLI::IsMember({"metapath", "lookup"}));
  sub->add_option("--hidden", rc.hidden);
  sub->add_option("--emb-dim", rc.emb_dim);
  sub->add_option("--max-sents", rc.max_sents);
  sub->add_option("--max-words", rc.max_words);
  sub->add_option("--dropout", rc.dropout);
  sub->add_option("--min-freq", rc.min_freq);
}

// Echoes the effective configuration and writes it next to the outputs.
RunConfig::Resolved start(const std::string& command, const RunConfig& rc) {
  fs::create_directories(rc.out_dir);
  RunConfig::Resolved r = rc.resolve();
  std::string text = describe(rc, r);
  std::cout << "# " << command << " effective configuration\n" << text << std::flush;
  std::ofstream out(fs::path(rc.out_dir) / (command + ".config"));
  out << text;
  if (!out) throw std::runtime_error("cannot write configuration to " + rc.out_dir);
  return r;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw std::runtime_error(std::string("missing --") + what);
  if (!fs::exists(path)) throw std::runtime_error(std::string(what) + " file not found: " + path);
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

FactLoadResult load_and_report(const std::string& path, const StatuteHierarchy& h) {
  FactLoadResult r = load_facts(path, h);
  if (r.dropped_labels || r.excluded_documents) {
    std::cout << path << ": dropped " << r.dropped_labels << " labels outside the hierarchy, excluded "
              << r.excluded_documents << " documents left without labels\n";
  }
  return r;
}

int cmd_synth(const RunConfig& rc, const SynthConfig& base) {
  start("synth", rc);
  SynthConfig sc = base;
  sc.seed = rc.seed;
  SynthCorpus c = generate_synthetic(sc);
  fs::path dir(rc.out_dir);
  write_hierarchy(dir / "hierarchy.json", c.hierarchy);
  write_facts(dir / "facts.jsonl", c.docs);
  CorpusStats st = corpus_stats(c.docs, c.hierarchy);
  std::printf("synthetic corpus: %zu documents, %zu sections, %.3f labels per document\n",
              st.documents, st.labels, st.mean_labels_per_doc);
  return 0;
}

int cmd_split(const RunConfig& rc, const Paths& p, std::vector<double> ratios) {
  start("split", rc);
  require_file(p.facts, "facts");
  require_file(p.hierarchy, "hierarchy");
  StatuteHierarchy h = load_hierarchy(p.hierarchy);
  h.validate();
  auto loaded = load_and_report(p.facts, h);
  if (ratios.size() != 3) throw std::runtime_error("--ratios needs three values");
  SplitSpec spec;
  spec.ratios = {ratios[0], ratios[1], ratios[2]};
  spec.seed = rc.seed;
  SplitResult res = iterative_stratified_split(loaded.documents, spec);
  static const char* kNames[3] = {"train", "val", "test"};
  fs::path dir(rc.out_dir);
  for (int j = 0; j < 3; ++j) {
    for (auto& d : res.folds[j]) d.split = kNames[j];
    write_facts(dir / (std::string(kNames[j]) + ".jsonl"), res.folds[j]);
  }
  SplitReport rep = split_report(loaded.documents, res);
  nlohmann::ordered_json j;
  j["seed"] = rc.seed;
  j["ratios"] = ratios;
  j["sizes"] = {{"train", rep.sizes[0]}, {"val", rep.sizes[1]}, {"test", rep.sizes[2]}};
  auto& labels = j["labels"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < rep.labels.size(); ++k) {
    labels.push_back({{"label", rep.labels[k]},
                      {"support", rep.support[k]},
                      {"global", rep.global[k]},
                      {"train", rep.per_fold[0][k]},
                      {"val", rep.per_fold[1][k]},
                      {"test", rep.per_fold[2][k]}});
  }
  write_json(dir / "split_report.json", j);
  std::printf("split %zu documents: train %zu, val %zu, test %zu\n", loaded.documents.size(),
              rep.sizes[0], rep.sizes[1], rep.sizes[2]);
  return 0;
}

int cmd_build_graph(const RunConfig& rc, const Paths& p) {
  start("build-graph", rc);
  require_file(p.facts, "facts");
  require_file(p.hierarchy, "hierarchy");
  StatuteHierarchy h = load_hierarchy(p.hierarchy);
  h.validate();
  auto loaded = load_and_report(p.facts, h);
  for (const auto& d : loaded.documents) {
    if (d.split != "train") {
      throw std::runtime_error("build-graph accepts training facts only; document " + d.id +
                               (d.split.empty() ? " has no split tag" : " is from split " + d.split));
    }
  }
  HeteroGraph g = build_citation_graph(loaded.documents, h);
  g.check_invariants();
  fs::path dir(rc.out_dir);
  g.save(dir / "graph.json");
  GraphStats st = graph_stats(g);
  nlohmann::ordered_json j;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    j["nodes"][std::string(1, node_type_code(static_cast<NodeType>(t)))] = st.nodes[t];
  }
  for (int r = 0; r < kRelationCount; ++r) {
    j["edges"][std::string(relation_name(static_cast<Relation>(r)))] = st.edges[r];
  }
  write_json(dir / "graph_stats.json", j);
  std::printf("graph: %zu act, %zu chapter, %zu topic, %zu section, %zu fact nodes; %zu citation edges\n",
              st.nodes[0], st.nodes[1], st.nodes[2], st.nodes[3], st.nodes[4], st.edges[0]);
  return 0;
}

int cmd_train(const RunConfig& rc, const Paths& p) {
  RunConfig::Resolved r = start("train", rc);
  require_file(p.train, "train");
  require_file(p.hierarchy, "hierarchy");
  StatuteHierarchy h = load_hierarchy(p.hierarchy);
  h.validate();
  auto train_docs = load_and_report(p.train, h).documents;
  std::vector<FactDocument> val_docs;
  if (!p.val.empty()) {
    require_file(p.val, "val");
    val_docs = load_and_report(p.val, h).documents;
  }
  HeteroGraph g;
  if (!p.graph.empty()) {
    require_file(p.graph, "graph");
    g = HeteroGraph::load(p.graph);
  } else {
    for (auto& d : train_docs) {
      if (d.split.empty()) d.split = "train";
    }
    g = build_citation_graph(train_docs, h);
  }
  for (const auto& d : train_docs) {
    if (!g.find(NodeType::Fact, d.id)) {
      throw std::runtime_error("training fact " + d.id + " is not in the graph");
    }
  }
  auto streams = token_streams(train_docs, &h);
  Vocabulary vocab = build_vocab(streams, rc.min_freq);
  fs::path dir(rc.out_dir);
  vocab.save(dir / "vocab.txt");
  std::unique_ptr<ad::Matrix> pretrained;
  if (!p.pretrained.empty()) {
    require_file(p.pretrained, "pretrained");
    auto loaded = load_pretrained_vectors(p.pretrained, vocab, r.model.emb_dim, rc.seed);
    std::printf("pretrained vectors: %zu of %zu tokens matched\n", loaded.matched, vocab.size());
    pretrained = std::make_unique<ad::Matrix>(std::move(loaded.table));
  }
  Model model(r.model, std::move(vocab), h, std::move(g), pretrained.get());
  std::printf("model: %zu parameters\n", model.params().scalar_count());

  std::ofstream log(dir / "train_log.jsonl");
  TrainResult res = train(model, train_docs, val_docs, r.train, [&](const EpochLog& e) {
    log << e.to_json() << '\n' << std::flush;
    std::printf("epoch %3d  loss %.4f  (a %.4f  s %.4f  l %.4f)  val macro-F1 %.2f\n", e.epoch, e.loss,
                e.loss_a, e.loss_s, e.loss_l, e.val_macro_f1);
    std::fflush(stdout);
  });
  save_checkpoint(dir / "checkpoint.json", model, r.train, res);
  std::printf("best epoch %d, validation macro-F1 %.4f, tau %.2f\n", res.best_epoch,
              res.best_val_macro_f1, res.tau);
  return 0;
}

int cmd_evaluate(const RunConfig& rc, const Paths& p) {
  start("evaluate", rc);
  require_file(p.checkpoint, "checkpoint");
  require_file(p.facts, "facts");
  Checkpoint ck = load_checkpoint(p.checkpoint);
  const Model& model = *ck.model;
  auto docs = load_and_report(p.facts, model.hierarchy()).documents;
  double tau = rc.tau ? *rc.tau : ck.tau;
  Evaluation ev = evaluate_model(model, docs, ck.train.lambda_a, ck.train.lambda_l, tau);
  fs::path dir(rc.out_dir);
  {
    std::ofstream out(dir / "eval_report.json");
    out << ev.report.to_json() << '\n';
    std::ofstream txt(dir / "eval_report.txt");
    txt << ev.report.to_text();
    if (!out || !txt) throw std::runtime_error("cannot write evaluation report");
  }
  std::printf("tau %.2f  macro-P %.4f  macro-R %.4f  macro-F1 %.4f  Jaccard %.4f  (%zu documents)\n",
              tau, ev.report.macro_p, ev.report.macro_r, ev.report.macro_f1, ev.report.jaccard,
              ev.report.documents);
  std::printf("checkpoint best validation macro-F1 %.4f at epoch %d\n", ck.best_val_macro_f1,
              ck.best_epoch);
  return 0;
}

int cmd_predict(const RunConfig& rc, const Paths& p) {
  start("predict", rc);
  require_file(p.checkpoint, "checkpoint");
  Checkpoint ck = load_checkpoint(p.checkpoint);
  const Model& model = *ck.model;
  std::vector<FactDocument> docs;
  if (!p.text.empty()) {
    FactDocument d;
    d.id = "input";
    d.sentences = split_and_tokenize(p.text);
    if (d.sentences.empty()) throw std::runtime_error("--text has no tokens");
    docs.push_back(std::move(d));
  } else {
    require_file(p.facts, "facts");
    docs = load_and_report(p.facts, model.hierarchy()).documents;
  }
  double tau = rc.tau ? *rc.tau : ck.tau;
  Predictor pred(model);
  const auto ids = model.hierarchy().section_ids();
  std::ofstream out(fs::path(rc.out_dir) / "predictions.jsonl");
  for (const auto& d : docs) {
    Prediction pr = pred.predict(d, ck.train.lambda_a, ck.train.lambda_l, tau);
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["predicted"] = nlohmann::ordered_json::array();
    std::printf("%s:", d.id.c_str());
    for (int s : pr.labels) {
      j["predicted"].push_back(ids[static_cast<std::size_t>(s)]);
      std::printf(" %s (%.4f)", ids[static_cast<std::size_t>(s)].c_str(), pr.combined(s));
    }
    std::printf("\n");
    nlohmann::ordered_json scores;
    for (std::size_t s = 0; s < ids.size(); ++s) scores[ids[s]] = pr.combined(static_cast<Eigen::Index>(s));
    j["scores"] = std::move(scores);
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("cannot write predictions");
  return 0;
}

// Splices the keys of a --config file in after the subcommand name, skipping
// keys the command line already sets or the subcommand does not know.
std::vector<std::string> with_config_file(CLI::App& app, int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[1]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 2; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    std::string name = a.substr(2, a.find('=') - 2);
    given.insert(name);
    if (name == "config") path = a.find('=') != std::string::npos ? a.substr(a.find('=') + 1)
                                 : i + 1 < args.size()           ? args[i + 1]
                                                                 : "";
  }
  if (path.empty()) return args;
  require_file(path, "config");
  std::vector<std::string> extra;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    const CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (!opt || given.count(name) || item.inputs.empty()) continue;
    if (opt->get_expected_max() == 0) {
      if (CLI::detail::to_flag_value(item.inputs.front()) > 0) extra.push_back("--" + name);
    } else {
      extra.push_back("--" + name);
      extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  args.insert(args.begin() + 2, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Legal statute identification over a statute citation graph"};
  app.require_subcommand(1);
  RunConfig rc;
  Paths paths;
  SynthConfig synth;
  std::vector<double> ratios{0.64, 0.16, 0.20};

  auto* s_synth = app.add_subcommand("synth", "generate a synthetic corpus and hierarchy");
  add_common(s_synth, rc);
  s_synth->add_option("--n-docs", synth.n_docs);
  s_synth->add_option("--n-sections", synth.n_sections);
  s_synth->add_option("--n-topics", synth.n_topics);
  s_synth->add_option("--skew", synth.skew);
  s_synth->add_option("--implicit-rate", synth.implicit_rate);

  auto* s_split = app.add_subcommand("split", "stratified train/val/test split");
  add_common(s_split, rc);
  s_split->add_option("--facts", paths.facts)->required();
  s_split->add_option("--hierarchy", paths.hierarchy)->required();
  s_split->add_option("--ratios", ratios)->delimiter(',')->expected(3);

  auto* s_graph = app.add_subcommand("build-graph", "build the citation graph from training facts");
  add_common(s_graph, rc);
  s_graph->add_option("--facts", paths.facts)->required();
  s_graph->add_option("--hierarchy", paths.hierarchy)->required();

  auto* s_train = app.add_subcommand("train", "train a model");
  add_common(s_train, rc);
  add_model_options(s_train, rc);
  s_train->add_option("--train", paths.train)->required();
  s_train->add_option("--val", paths.val);
  s_train->add_option("--hierarchy", paths.hierarchy)->required();
  s_train->add_option("--graph", paths.graph, "graph from build-graph; built from --train if absent");
  s_train->add_option("--pretrained", paths.pretrained, "word vectors in word2vec text format");

  auto* s_eval = app.add_subcommand("evaluate", "evaluate a checkpoint");
  add_common(s_eval, rc);
  s_eval->add_option("--checkpoint", paths.checkpoint)->required();
  s_eval->add_option("--facts", paths.facts)->required();

  auto* s_pred = app.add_subcommand("predict", "predict sections for facts");
  add_common(s_pred, rc);
  s_pred->add_option("--checkpoint", paths.checkpoint)->required();
  auto* facts_opt = s_pred->add_option("--facts", paths.facts);
  s_pred->add_option("--text", paths.text, "a single fact description")->excludes(facts_opt);

  std::vector<std::string> args;
  try {
    args = with_config_file(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  CLI11_PARSE(app, static_cast<int>(cargs.size()), cargs.data());
  try {
    if (*s_synth) return cmd_synth(rc, synth);
    if (*s_split) return cmd_split(rc, paths, ratios);
    if (*s_graph) return cmd_build_graph(rc, paths);
    if (*s_train) return cmd_train(rc, paths);
    if (*s_eval) return cmd_evaluate(rc, paths);
    if (*s_pred) return cmd_predict(rc, paths);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
