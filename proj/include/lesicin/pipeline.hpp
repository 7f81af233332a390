#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesicin/corpus.hpp"
#include "lesicin/graph.hpp"
#include "lesicin/model.hpp"
#include "lesicin/split.hpp"
#include "lesicin/training.hpp"

namespace lesicin {

// Dimensions small enough for a laptop CPU.
void apply_desk_scale(ModelConfig& m);

// "full", "E" (lookup structural encoder), "S" (no structural loss), "V"
// (vanilla class weights).
void apply_ablation(const std::string& name, ModelConfig& m, TrainConfig& t);

// Everything a command can be configured with. Zero dimension overrides
// mean "keep the preset".
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string ablation = "full";
  bool desk_scale = false;
  std::optional<double> tau;
  double eta = 10.0;
  double theta_a = 1.0, theta_s = 2.0, theta_l = 3.0;
  double lambda_a = 0.25, lambda_l = 0.75;
  std::optional<double> lr;  // 1e-2 at desk scale, else 1e-3
  int batch_size = 32;
  int epochs = 100;
  std::string scheme = "tws";
  bool tune_tau = true;
  int instances = 8;
  bool exclude_self_edges = false;
  bool static_context = false;
  std::string structural = "metapath";
  int hidden = 0, emb_dim = 0, max_sents = 0, max_words = 0;
  double dropout = 0.5;
  std::size_t min_freq = 2;

  struct Resolved {
    ModelConfig model;
    TrainConfig train;
  };
  // Applies desk scale, explicit overrides, then the ablation.
  Resolved resolve() const;
};

// Flat "key = value" lines of the effective settings.
std::string describe(const RunConfig& run, const RunConfig::Resolved& r);

struct PreparedData {
  std::vector<FactDocument> train, val, test;
  Vocabulary vocab;
  HeteroGraph graph;
};

// Split, tag each document with its fold, build the vocabulary from training
// facts plus section texts, and build the graph from training facts.
PreparedData prepare_data(std::span<const FactDocument> docs, const StatuteHierarchy& hierarchy,
                          const SplitSpec& split, std::size_t min_freq);

std::unique_ptr<Model> make_model(const PreparedData& data, const StatuteHierarchy& hierarchy,
                                  const ModelConfig& cfg);

// Predicts the k sections cited most often in `train` for every document.
std::vector<LabelSet> top_k_baseline(std::span<const FactDocument> train, std::size_t n_docs,
                                     const StatuteHierarchy& hierarchy, std::size_t k);

}  // namespace lesicin
