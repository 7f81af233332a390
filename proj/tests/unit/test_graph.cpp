#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "lesicin/graph.hpp"

using namespace lesicin;

namespace {

HeteroGraph figure_graph() {
  auto facts = fixture::figure_facts();
  return build_citation_graph(facts, fixture::figure_hierarchy());
}

// Instances rendered as "F1-S1-F3" using external ids.
std::set<std::string> rendered(const HeteroGraph& g, const std::vector<MetapathInstance>& xs) {
  std::set<std::string> out;
  for (const auto& inst : xs) {
    std::string s;
    for (NodeId v : inst.nodes) s += (s.empty() ? "" : "-") + g.external_id(v);
    out.insert(s);
  }
  return out;
}

const MetapathSchema& schema(const std::vector<MetapathSchema>& all, const std::string& id) {
  return *std::find_if(all.begin(), all.end(), [&](const auto& p) { return p.id == id; });
}

// Number of schema instances ending at each node, from products of typed
// 0/1 adjacency matrices: count[v] = sum_u (D_0 A_1 D_1 ... A_M D_M)[u][v].
std::vector<long> path_counts(const HeteroGraph& g, const MetapathSchema& p) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<long>> m(n, std::vector<long>(n, 0));
  for (NodeId u = 0; u < n; ++u) m[u][u] = g.type(u) == p.node_types[0] ? 1 : 0;
  for (std::size_t step = 0; step < p.length(); ++step) {
    std::vector<std::vector<long>> next(n, std::vector<long>(n, 0));
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = 0; b < n; ++b) {
        if (m[a][b] == 0) continue;
        for (NodeId c = 0; c < n; ++c) {
          if (g.type(c) == p.node_types[step + 1] && g.has_edge(b, c, p.relations[step]))
            next[a][c] += m[a][b];
        }
      }
    m = std::move(next);
  }
  std::vector<long> out(n, 0);
  for (NodeId a = 0; a < n; ++a)
    for (NodeId v = 0; v < n; ++v) out[v] += m[a][v];
  return out;
}

struct Recorder : GraphAccessObserver {
  std::vector<NodeId> queried;
  void on_query(NodeId v) override { queried.push_back(v); }
  void on_lookup(NodeType, std::string_view, bool) override {}
};

}  // namespace

TEST(Graph, MinimalChainHasOneNodePerTypeAndNoFacts) {
  auto g = build_citation_graph(std::vector<FactDocument>{}, fixture::chain());
  auto st = graph_stats(g);
  EXPECT_EQ(st.nodes, (std::array<std::size_t, kNodeTypeCount>{1, 1, 1, 1, 0}));
  EXPECT_EQ(st.edges[static_cast<int>(Relation::Includes)], 3u);
  EXPECT_EQ(st.edges[static_cast<int>(Relation::PartOf)], 3u);
  EXPECT_EQ(st.edges[static_cast<int>(Relation::Cites)], 0u);
  g.check_invariants();
}

TEST(Graph, FigureGraphCountsAndSymmetry) {
  auto g = figure_graph();
  auto st = graph_stats(g);
  EXPECT_EQ(st.nodes, (std::array<std::size_t, kNodeTypeCount>{1, 2, 3, 4, 3}));
  EXPECT_EQ(st.edges, (std::array<std::size_t, kRelationCount>{4, 4, 9, 9}));
  g.check_invariants();
  for (int r = 0; r < kRelationCount; ++r) {
    Relation rel = static_cast<Relation>(r);
    for (NodeId u = 0; u < g.node_count(); ++u)
      for (NodeId v : g.neighbors(u, rel)) EXPECT_TRUE(g.has_edge(v, u, inverse(rel)));
  }
  NodeId f3 = g.at(NodeType::Fact, "F3");
  std::set<std::string> cited;
  for (NodeId s : g.neighbors(f3, Relation::Cites)) cited.insert(g.external_id(s));
  EXPECT_EQ(cited, (std::set<std::string>{"S1", "S3"}));
}

TEST(Graph, RejectsNonTrainingFactsAndUnknownSections) {
  std::vector<FactDocument> facts{fixture::fact("F1", {"S1"}, {}, "val")};
  EXPECT_THROW(build_citation_graph(facts, fixture::chain()), CorpusError);
  facts = {fixture::fact("F1", {"S9"})};
  EXPECT_THROW(build_citation_graph(facts, fixture::chain()), CorpusError);
}

TEST(Graph, UnknownNodesThrow) {
  auto g = figure_graph();
  EXPECT_THROW(g.at(NodeType::Fact, "F99"), UnknownNodeError);
  EXPECT_FALSE(g.find(NodeType::Section, "F1").has_value());
  EXPECT_THROW(g.neighbors(static_cast<NodeId>(g.node_count()), Relation::Cites), UnknownNodeError);
  EXPECT_THROW(g.type(static_cast<NodeId>(g.node_count() + 5)), UnknownNodeError);
}

TEST(Graph, JsonRoundTripPreservesNodesAndEdges) {
  auto g = figure_graph();
  auto h = HeteroGraph::from_json(g.to_json());
  ASSERT_EQ(h.node_count(), g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    EXPECT_EQ(h.qualified_id(v), g.qualified_id(v));
    for (int r = 0; r < kRelationCount; ++r) {
      auto a = g.neighbors(v, static_cast<Relation>(r));
      auto b = h.neighbors(v, static_cast<Relation>(r));
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
  }
}

TEST(Schemas, DefaultSetIsTheEightSymmetricSchemas) {
  auto all = default_schemas();
  ASSERT_EQ(all.size(), 8u);
  const char* want[8] = {
      "S-ctb-F-ct-S",
      "S-po-T-inc-S",
      "S-po-T-po-C-inc-T-inc-S",
      "S-po-T-po-C-po-A-inc-C-inc-T-inc-S",
      "F-ct-S-ctb-F",
      "F-ct-S-po-T-inc-S-ctb-F",
      "F-ct-S-po-T-po-C-inc-T-inc-S-ctb-F",
      "F-ct-S-po-T-po-C-po-A-inc-C-inc-T-inc-S-ctb-F",
  };
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(all[i].to_string(), want[i]);
    EXPECT_EQ(all[i].side, i < 4 ? SchemaSide::Section : SchemaSide::Fact);
    // Symmetric: reversed relation sequence is the inverse sequence.
    const auto& r = all[i].relations;
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_EQ(r[k], inverse(r[r.size() - 1 - k]));
  }
  EXPECT_EQ(schemas_for(all, NodeType::Section).size(), 4u);
  EXPECT_EQ(schemas_for(all, NodeType::Fact).size(), 4u);
}

TEST(Schemas, ParseRejectsIllTypedSteps) {
  EXPECT_THROW(parse_schema("S-ct-F-ct-S"), std::invalid_argument);
  EXPECT_THROW(parse_schema("S-po-C-inc-S"), std::invalid_argument);
  EXPECT_THROW(parse_schema("S-ctb-F"), std::invalid_argument);
  EXPECT_THROW(parse_schema("S-xx-F-ct-S"), std::invalid_argument);
  EXPECT_NO_THROW(parse_schema("T-po-C-inc-T"));
}

TEST(Metapaths, FigureGraphInstances) {
  auto g = figure_graph();
  auto all = default_schemas();
  auto f3 = g.at(NodeType::Fact, "F3");
  auto s3 = g.at(NodeType::Section, "S3");
  auto s2 = g.at(NodeType::Section, "S2");

  auto f_inst = rendered(g, enumerate_instances(g, f3, schema(all, "F1")));
  EXPECT_TRUE(f_inst.count("F1-S1-F3"));
  EXPECT_TRUE(f_inst.count("F2-S3-F3"));
  EXPECT_EQ(f_inst, (std::set<std::string>{"F1-S1-F3", "F3-S1-F3", "F2-S3-F3", "F3-S3-F3"}));

  auto s_inst = rendered(g, enumerate_instances(g, s3, schema(all, "S3")));
  EXPECT_TRUE(s_inst.count("S1-T1-C2-T2-S3"));
  EXPECT_TRUE(s_inst.count("S2-T1-C2-T2-S3"));
  EXPECT_FALSE(s_inst.count("S0-T0-C1-T2-S3"));

  auto s2_inst = rendered(g, enumerate_instances(g, s2, schema(all, "S3")));
  EXPECT_TRUE(s2_inst.count("S1-T1-C2-T1-S2"));

  // S2 is never cited, so it has no S-F-S instance.
  EXPECT_TRUE(enumerate_instances(g, s2, schema(all, "S1")).empty());
  for (const auto& p : all)
    for (NodeId v : g.nodes(p.target_type()))
      for (const auto& inst : enumerate_instances(g, v, p)) EXPECT_TRUE(conforms(g, inst, p));
}

TEST(Metapaths, EnumerationMatchesAdjacencyMatrixCounts) {
  std::mt19937_64 rng(11);
  auto all = default_schemas();
  for (int trial = 0; trial < 15; ++trial) {
    auto c = fixture::random_corpus(rng, 35);
    auto g = build_citation_graph(c.facts, c.hierarchy);
    for (const auto& p : all) {
      auto counts = path_counts(g, p);
      for (NodeId v : g.nodes(p.target_type())) {
        auto inst = enumerate_instances(g, v, p);
        ASSERT_EQ(static_cast<long>(inst.size()), counts[v]) << p.id << " " << g.qualified_id(v);
        std::set<std::vector<NodeId>> uniq;
        for (const auto& i : inst) {
          EXPECT_EQ(i.target(), v);
          uniq.insert(i.nodes);
        }
        EXPECT_EQ(uniq.size(), inst.size());
      }
    }
  }
}

TEST(Metapaths, SamplesAreEnumeratedInstancesAndDeterministic) {
  std::mt19937_64 rng(12);
  auto all = default_schemas();
  for (int trial = 0; trial < 10; ++trial) {
    auto c = fixture::random_corpus(rng, 40);
    auto g = build_citation_graph(c.facts, c.hierarchy);
    for (std::size_t pi = 0; pi < all.size(); ++pi) {
      const auto& p = all[pi];
      for (NodeId v : g.nodes(p.target_type())) {
        auto full = enumerate_instances(g, v, p);
        std::set<std::vector<NodeId>> pool;
        for (const auto& i : full) pool.insert(i.nodes);
        auto seed = derive_seed(99, v, pi);
        auto a = sample_instances(g, v, p, 6, seed);
        auto b = sample_instances(g, v, p, 6, seed);
        EXPECT_EQ(a, b);
        EXPECT_EQ(a.empty(), full.empty());
        if (!full.empty()) {
          EXPECT_EQ(a.size(), 6u);
        }
        for (const auto& i : a) {
          EXPECT_TRUE(pool.count(i.nodes));
          EXPECT_TRUE(conforms(g, i, p));
        }
      }
    }
  }
}

TEST(Metapaths, SingleInstanceIsRepeatedKTimes) {
  auto g = figure_graph();
  auto all = default_schemas();
  // S3 is alone under T2, so S3-T2-S3 is its only S-T-S instance.
  auto s3 = g.at(NodeType::Section, "S3");
  auto xs = sample_instances(g, s3, schema(all, "S2"), 5, 3);
  ASSERT_EQ(xs.size(), 5u);
  for (const auto& x : xs) EXPECT_EQ(rendered(g, {x}), std::set<std::string>{"S3-T2-S3"});
  SamplingOptions no_self{.exclude_self = true};
  EXPECT_TRUE(sample_instances(g, s3, schema(all, "S2"), 5, 3, no_self).empty());
}

TEST(Metapaths, SamplingDependsOnSeedAndRejectsBadInput) {
  auto g = figure_graph();
  auto all = default_schemas();
  auto f3 = g.at(NodeType::Fact, "F3");
  std::set<std::vector<std::vector<NodeId>>> draws;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::vector<std::vector<NodeId>> d;
    for (const auto& i : sample_instances(g, f3, schema(all, "F4"), 4, derive_seed(s, f3, 7)))
      d.push_back(i.nodes);
    draws.insert(d);
  }
  EXPECT_GT(draws.size(), 1u);
  EXPECT_THROW(sample_instances(g, f3, schema(all, "S1"), 3, 1), std::invalid_argument);
  EXPECT_THROW(sample_instances(g, f3, schema(all, "F1"), 0, 1), std::invalid_argument);
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
}

TEST(Graph, ObserverSeesEveryQueriedNode) {
  auto g = figure_graph();
  auto rec = std::make_shared<Recorder>();
  g.set_observer(rec);
  auto s1 = g.at(NodeType::Section, "S1");
  enumerate_instances(g, s1, schema(default_schemas(), "S2"));
  g.set_observer(nullptr);
  ASSERT_FALSE(rec->queried.empty());
  EXPECT_NE(std::find(rec->queried.begin(), rec->queried.end(), s1), rec->queried.end());
  for (NodeId v : rec->queried) EXPECT_NE(g.type(v), NodeType::Fact);
}
