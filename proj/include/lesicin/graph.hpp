#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lesicin/corpus.hpp"

namespace lesicin {

enum class NodeType : std::uint8_t { Act = 0, Chapter, Topic, Section, Fact };
inline constexpr int kNodeTypeCount = 5;

enum class Relation : std::uint8_t { Cites = 0, CitedBy, Includes, PartOf };
inline constexpr int kRelationCount = 4;

char node_type_code(NodeType t);
NodeType node_type_from_code(char c);
std::string_view relation_name(Relation r);
Relation relation_from_name(std::string_view name);
Relation inverse(Relation r);
// Source and destination node types a relation may connect.
bool relation_allows(Relation r, NodeType from, NodeType to);

using NodeId = std::uint32_t;

class UnknownNodeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Receives every node id the graph is asked about. Used to prove that
// evaluation never touches unseen facts.
class GraphAccessObserver {
 public:
  virtual ~GraphAccessObserver() = default;
  virtual void on_query(NodeId node) = 0;
  // Lookup of an external id, whether or not it exists in the graph.
  virtual void on_lookup(NodeType type, std::string_view id, bool found) = 0;
};

class HeteroGraph {
 public:
  HeteroGraph() = default;

  std::size_t node_count() const { return types_.size(); }
  std::size_t count(NodeType t) const { return by_type_[static_cast<int>(t)].size(); }
  std::size_t edge_count(Relation r) const;

  NodeType type(NodeId v) const;
  // Index of v among nodes of its type; column of X_A.
  std::size_t local_index(NodeId v) const;
  const std::string& external_id(NodeId v) const;
  // "S:302" style identifier, unique across types.
  std::string qualified_id(NodeId v) const;
  std::span<const NodeId> nodes(NodeType t) const { return by_type_[static_cast<int>(t)]; }

  std::optional<NodeId> find(NodeType t, std::string_view id) const;
  // Throws UnknownNodeError.
  NodeId at(NodeType t, std::string_view id) const;
  bool contains(NodeId v) const { return v < types_.size(); }

  // Out-neighbours of v along r. Throws UnknownNodeError for ids not in the
  // graph.
  std::span<const NodeId> neighbors(NodeId v, Relation r) const;
  bool has_edge(NodeId u, NodeId v, Relation r) const;

  void set_observer(std::shared_ptr<GraphAccessObserver> observer) const { observer_ = std::move(observer); }

  // Mutation is only used while building or deserializing.
  NodeId add_node(NodeType t, std::string id);
  void add_edge(NodeId u, NodeId v, Relation r);
  // Sorts adjacency lists; call once after the last add_edge.
  void finalize();

  // Throws std::logic_error on any violated symmetry or typing invariant.
  void check_invariants() const;

  void save(const std::filesystem::path& path) const;
  static HeteroGraph load(const std::filesystem::path& path);
  std::string to_json() const;
  static HeteroGraph from_json(std::string_view text);

 private:
  void touch(NodeId v) const;

  std::vector<NodeType> types_;
  std::vector<std::size_t> local_;
  std::vector<std::string> ids_;
  std::array<std::vector<NodeId>, kNodeTypeCount> by_type_;
  std::array<std::unordered_map<std::string, NodeId>, kNodeTypeCount> lookup_;
  std::array<std::vector<std::vector<NodeId>>, kRelationCount> adj_;
  mutable std::shared_ptr<GraphAccessObserver> observer_;
};

inline constexpr int kGraphFormatVersion = 1;

// Facts must all be training facts; a fact with split set to anything other
// than "train" is rejected. Throws CorpusError for unknown sections.
HeteroGraph build_citation_graph(std::span<const FactDocument> train_facts,
                                 const StatuteHierarchy& hierarchy);

struct GraphStats {
  std::array<std::size_t, kNodeTypeCount> nodes{};
  std::array<std::size_t, kRelationCount> edges{};
};
GraphStats graph_stats(const HeteroGraph& g);

// ---- metapaths ------------------------------------------------------------

enum class SchemaSide : std::uint8_t { Fact, Section };

struct MetapathSchema {
  std::string id;
  std::vector<NodeType> node_types;  // l + 1 entries
  std::vector<Relation> relations;   // l entries
  SchemaSide side = SchemaSide::Section;

  std::size_t length() const { return relations.size(); }
  NodeType target_type() const { return node_types.back(); }
  // Throws std::invalid_argument when the schema is ill-formed.
  void validate() const;
  std::string to_string() const;
};

// Parses "S-ctb-F-ct-S".
MetapathSchema parse_schema(std::string_view text, std::string id = "");

// Four Section-side schemas followed by four Fact-side schemas.
std::vector<MetapathSchema> default_schemas();
std::vector<MetapathSchema> schemas_for(std::span<const MetapathSchema> all, NodeType target);

// n_0 = metapath neighbour, n_M = target. Step i (1-based) follows schema
// relation R_i from n_{i-1} to n_i.
struct MetapathInstance {
  std::vector<NodeId> nodes;
  std::string schema_id;

  NodeId target() const { return nodes.back(); }
  NodeId neighbor() const { return nodes.front(); }
  bool operator==(const MetapathInstance&) const = default;
};

bool conforms(const HeteroGraph& g, const MetapathInstance& inst, const MetapathSchema& p);

// Every instance ending at v, depth first. Exponential on long schemas; meant
// for tests and small graphs.
std::vector<MetapathInstance> enumerate_instances(const HeteroGraph& g, NodeId v,
                                                  const MetapathSchema& p);

struct SamplingOptions {
  // Drop instances whose neighbour is the target itself.
  bool exclude_self = false;
};

// k instances with replacement from uniform random typed walks ending at v;
// each step chooses uniformly among the neighbours that can still complete
// the schema. Empty iff no instance exists. Deterministic given seed.
std::vector<MetapathInstance> sample_instances(const HeteroGraph& g, NodeId v,
                                               const MetapathSchema& p, int k,
                                               std::uint64_t seed,
                                               const SamplingOptions& opts = {});

// Seed for one (node, schema) draw, derived from a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t node, std::uint64_t schema);

}  // namespace lesicin
