#include "lesicin/graph.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace lesicin {

using nlohmann::json;

namespace {

constexpr std::array<char, kNodeTypeCount> kTypeCodes{'A', 'C', 'T', 'S', 'F'};
constexpr std::array<std::string_view, kRelationCount> kRelationNames{"ct", "ctb", "inc", "po"};

}  // namespace

char node_type_code(NodeType t) { return kTypeCodes[static_cast<int>(t)]; }

NodeType node_type_from_code(char c) {
  for (int i = 0; i < kNodeTypeCount; ++i) {
    if (kTypeCodes[i] == c) return static_cast<NodeType>(i);
  }
  throw std::invalid_argument(std::string("unknown node type code '") + c + "'");
}

std::string_view relation_name(Relation r) { return kRelationNames[static_cast<int>(r)]; }

Relation relation_from_name(std::string_view name) {
  for (int i = 0; i < kRelationCount; ++i) {
    if (kRelationNames[i] == name) return static_cast<Relation>(i);
  }
  throw std::invalid_argument("unknown relation \"" + std::string(name) + "\"");
}

Relation inverse(Relation r) {
  switch (r) {
    case Relation::Cites: return Relation::CitedBy;
    case Relation::CitedBy: return Relation::Cites;
    case Relation::Includes: return Relation::PartOf;
    case Relation::PartOf: return Relation::Includes;
  }
  return r;
}

bool relation_allows(Relation r, NodeType from, NodeType to) {
  auto level = [](NodeType t) { return static_cast<int>(t); };  // A=0 .. S=3
  switch (r) {
    case Relation::Cites: return from == NodeType::Fact && to == NodeType::Section;
    case Relation::CitedBy: return from == NodeType::Section && to == NodeType::Fact;
    case Relation::Includes:
      return from != NodeType::Fact && to != NodeType::Fact && level(to) == level(from) + 1;
    case Relation::PartOf:
      return from != NodeType::Fact && to != NodeType::Fact && level(from) == level(to) + 1;
  }
  return false;
}

// ---------------------------------------------------------------------------
// HeteroGraph

std::size_t HeteroGraph::edge_count(Relation r) const {
  std::size_t n = 0;
  for (const auto& l : adj_[static_cast<int>(r)]) n += l.size();
  return n;
}

void HeteroGraph::touch(NodeId v) const {
  if (v >= types_.size()) {
    throw UnknownNodeError("node " + std::to_string(v) + " is not in the graph");
  }
  if (observer_) observer_->on_query(v);
}

NodeType HeteroGraph::type(NodeId v) const {
  if (v >= types_.size()) throw UnknownNodeError("node " + std::to_string(v) + " is not in the graph");
  return types_[v];
}

std::size_t HeteroGraph::local_index(NodeId v) const {
  if (v >= types_.size()) throw UnknownNodeError("node " + std::to_string(v) + " is not in the graph");
  return local_[v];
}

const std::string& HeteroGraph::external_id(NodeId v) const {
  if (v >= types_.size()) throw UnknownNodeError("node " + std::to_string(v) + " is not in the graph");
  return ids_[v];
}

std::string HeteroGraph::qualified_id(NodeId v) const {
  return std::string(1, node_type_code(type(v))) + ":" + external_id(v);
}

std::optional<NodeId> HeteroGraph::find(NodeType t, std::string_view id) const {
  const auto& m = lookup_[static_cast<int>(t)];
  auto it = m.find(std::string(id));
  bool found = it != m.end();
  if (observer_) observer_->on_lookup(t, id, found);
  if (!found) return std::nullopt;
  return it->second;
}

NodeId HeteroGraph::at(NodeType t, std::string_view id) const {
  auto v = find(t, id);
  if (!v) {
    throw UnknownNodeError(std::string(1, node_type_code(t)) + ":" + std::string(id) +
                           " is not in the graph");
  }
  return *v;
}

std::span<const NodeId> HeteroGraph::neighbors(NodeId v, Relation r) const {
  touch(v);
  return adj_[static_cast<int>(r)][v];
}

bool HeteroGraph::has_edge(NodeId u, NodeId v, Relation r) const {
  auto nb = neighbors(u, r);
  return std::binary_search(nb.begin(), nb.end(), v);
}

NodeId HeteroGraph::add_node(NodeType t, std::string id) {
  auto& m = lookup_[static_cast<int>(t)];
  if (m.count(id)) {
    throw std::invalid_argument(std::string("duplicate node ") + node_type_code(t) + ":" + id);
  }
  NodeId v = static_cast<NodeId>(types_.size());
  types_.push_back(t);
  local_.push_back(by_type_[static_cast<int>(t)].size());
  by_type_[static_cast<int>(t)].push_back(v);
  m.emplace(id, v);
  ids_.push_back(std::move(id));
  for (auto& a : adj_) a.emplace_back();
  return v;
}

void HeteroGraph::add_edge(NodeId u, NodeId v, Relation r) {
  if (u >= types_.size() || v >= types_.size()) throw UnknownNodeError("edge endpoint not in graph");
  if (!relation_allows(r, types_[u], types_[v])) {
    throw std::invalid_argument("relation " + std::string(relation_name(r)) + " cannot connect " +
                                qualified_id(u) + " to " + qualified_id(v));
  }
  adj_[static_cast<int>(r)][u].push_back(v);
}

void HeteroGraph::finalize() {
  for (auto& rel : adj_) {
    for (auto& l : rel) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }
  }
}

void HeteroGraph::check_invariants() const {
  for (int ri = 0; ri < kRelationCount; ++ri) {
    Relation r = static_cast<Relation>(ri);
    for (NodeId u = 0; u < types_.size(); ++u) {
      for (NodeId v : adj_[ri][u]) {
        if (!relation_allows(r, types_[u], types_[v])) {
          throw std::logic_error("ill-typed edge " + qualified_id(u) + " -" +
                                 std::string(relation_name(r)) + "-> " + qualified_id(v));
        }
        const auto& back = adj_[static_cast<int>(inverse(r))][v];
        if (!std::binary_search(back.begin(), back.end(), u)) {
          throw std::logic_error("edge " + qualified_id(u) + " -" + std::string(relation_name(r)) +
                                 "-> " + qualified_id(v) + " has no inverse");
        }
      }
    }
  }
}

std::string HeteroGraph::to_json() const {
  json doc;
  doc["format_version"] = kGraphFormatVersion;
  json nodes = json::object();
  for (int t = 0; t < kNodeTypeCount; ++t) {
    json ids = json::array();
    for (NodeId v : by_type_[t]) ids.push_back(ids_[v]);
    nodes[std::string(1, kTypeCodes[t])] = std::move(ids);
  }
  doc["nodes"] = std::move(nodes);
  json adjacency = json::object();
  for (int r = 0; r < kRelationCount; ++r) {
    json rel = json::object();
    for (NodeId u = 0; u < types_.size(); ++u) {
      if (adj_[r][u].empty()) continue;
      json targets = json::array();
      for (NodeId v : adj_[r][u]) targets.push_back(qualified_id(v));
      rel[qualified_id(u)] = std::move(targets);
    }
    adjacency[std::string(kRelationNames[r])] = std::move(rel);
  }
  doc["adjacency"] = std::move(adjacency);
  return doc.dump();
}

HeteroGraph HeteroGraph::from_json(std::string_view text) {
  json doc = json::parse(text);
  if (doc.value("format_version", 0) != kGraphFormatVersion) {
    throw std::invalid_argument("unsupported graph format version");
  }
  HeteroGraph g;
  for (int t = 0; t < kNodeTypeCount; ++t) {
    std::string code(1, kTypeCodes[t]);
    for (const auto& id : doc.at("nodes").value(code, json::array())) {
      g.add_node(static_cast<NodeType>(t), id.get<std::string>());
    }
  }
  auto resolve = [&g](const std::string& q) {
    if (q.size() < 2 || q[1] != ':') throw std::invalid_argument("bad qualified id " + q);
    return g.at(node_type_from_code(q[0]), std::string_view(q).substr(2));
  };
  for (const auto& [rname, rel] : doc.at("adjacency").items()) {
    Relation r = relation_from_name(rname);
    for (const auto& [src, targets] : rel.items()) {
      NodeId u = resolve(src);
      for (const auto& t : targets) g.add_edge(u, resolve(t.get<std::string>()), r);
    }
  }
  g.finalize();
  g.check_invariants();
  return g;
}

void HeteroGraph::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json() << '\n';
}

HeteroGraph HeteroGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

HeteroGraph build_citation_graph(std::span<const FactDocument> train_facts,
                                 const StatuteHierarchy& hierarchy) {
  HeteroGraph g;
  const NodeId act = g.add_node(NodeType::Act, hierarchy.act().id);
  std::unordered_map<std::string, NodeId> chapters, topics;
  auto link = [&g](NodeId parent, NodeId child) {
    g.add_edge(parent, child, Relation::Includes);
    g.add_edge(child, parent, Relation::PartOf);
  };
  for (const auto& c : hierarchy.chapters()) {
    NodeId v = g.add_node(NodeType::Chapter, c.id);
    chapters.emplace(c.id, v);
    link(act, v);
  }
  for (const auto& t : hierarchy.topics()) {
    NodeId v = g.add_node(NodeType::Topic, t.id);
    topics.emplace(t.id, v);
    link(chapters.at(t.parent), v);
  }
  std::vector<NodeId> sections;
  for (const auto& s : hierarchy.sections()) {
    NodeId v = g.add_node(NodeType::Section, s.id);
    sections.push_back(v);
    link(topics.at(s.parent_topic), v);
  }
  for (const auto& f : train_facts) {
    if (!f.split.empty() && f.split != "train") {
      throw CorpusError("citation graph takes training facts only; " + f.id + " is from split \"" +
                        f.split + "\"");
    }
    NodeId v = g.add_node(NodeType::Fact, f.id);
    for (const auto& l : f.labels) {
      auto idx = hierarchy.section_index(l);
      if (!idx) throw CorpusError("fact " + f.id + " cites unknown section " + l);
      g.add_edge(v, sections[*idx], Relation::Cites);
      g.add_edge(sections[*idx], v, Relation::CitedBy);
    }
  }
  g.finalize();
  return g;
}

GraphStats graph_stats(const HeteroGraph& g) {
  GraphStats st;
  for (int t = 0; t < kNodeTypeCount; ++t) st.nodes[t] = g.count(static_cast<NodeType>(t));
  for (int r = 0; r < kRelationCount; ++r) st.edges[r] = g.edge_count(static_cast<Relation>(r));
  return st;
}

// ---------------------------------------------------------------------------
// Metapaths

void MetapathSchema::validate() const {
  if (relations.empty() || node_types.size() != relations.size() + 1) {
    throw std::invalid_argument("schema " + id + ": needs l relations and l+1 node types");
  }
  if (node_types.front() != node_types.back()) {
    throw std::invalid_argument("schema " + id + ": first and last node types differ");
  }
  for (std::size_t i = 0; i < relations.size(); ++i) {
    if (!relation_allows(relations[i], node_types[i], node_types[i + 1])) {
      throw std::invalid_argument("schema " + id + ": illegal step " + std::to_string(i + 1));
    }
  }
}

std::string MetapathSchema::to_string() const {
  std::string out(1, node_type_code(node_types[0]));
  for (std::size_t i = 0; i < relations.size(); ++i) {
    out += "-";
    out += relation_name(relations[i]);
    out += "-";
    out += node_type_code(node_types[i + 1]);
  }
  return out;
}

MetapathSchema parse_schema(std::string_view text, std::string id) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == '-') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3 || parts.size() % 2 == 0) {
    throw std::invalid_argument("cannot parse schema \"" + std::string(text) + "\"");
  }
  MetapathSchema p;
  p.id = id.empty() ? std::string(text) : std::move(id);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i % 2 == 0) {
      if (parts[i].size() != 1) throw std::invalid_argument("bad node type \"" + parts[i] + "\"");
      p.node_types.push_back(node_type_from_code(parts[i][0]));
    } else {
      p.relations.push_back(relation_from_name(parts[i]));
    }
  }
  p.side = p.node_types.front() == NodeType::Fact ? SchemaSide::Fact : SchemaSide::Section;
  p.validate();
  return p;
}

std::vector<MetapathSchema> default_schemas() {
  static const std::array<std::string_view, 8> kText{
      "S-ctb-F-ct-S",
      "S-po-T-inc-S",
      "S-po-T-po-C-inc-T-inc-S",
      "S-po-T-po-C-po-A-inc-C-inc-T-inc-S",
      "F-ct-S-ctb-F",
      "F-ct-S-po-T-inc-S-ctb-F",
      "F-ct-S-po-T-po-C-inc-T-inc-S-ctb-F",
      "F-ct-S-po-T-po-C-po-A-inc-C-inc-T-inc-S-ctb-F",
  };
  std::vector<MetapathSchema> out;
  for (std::size_t i = 0; i < kText.size(); ++i) {
    std::string id = (i < 4 ? "S" : "F") + std::to_string(i % 4 + 1);
    out.push_back(parse_schema(kText[i], id));
  }
  return out;
}

std::vector<MetapathSchema> schemas_for(std::span<const MetapathSchema> all, NodeType target) {
  std::vector<MetapathSchema> out;
  for (const auto& p : all) {
    if (p.target_type() == target) out.push_back(p);
  }
  return out;
}

bool conforms(const HeteroGraph& g, const MetapathInstance& inst, const MetapathSchema& p) {
  if (inst.nodes.size() != p.node_types.size()) return false;
  for (std::size_t i = 0; i < inst.nodes.size(); ++i) {
    if (!g.contains(inst.nodes[i]) || g.type(inst.nodes[i]) != p.node_types[i]) return false;
  }
  for (std::size_t i = 1; i < inst.nodes.size(); ++i) {
    if (!g.has_edge(inst.nodes[i - 1], inst.nodes[i], p.relations[i - 1])) return false;
  }
  return true;
}

namespace {

// Nodes x with (x, v) in E_r and type t: in-neighbours along r.
template <typename F>
void for_each_predecessor(const HeteroGraph& g, NodeId v, Relation r, NodeType t, F&& f) {
  for (NodeId x : g.neighbors(v, inverse(r))) {
    if (g.type(x) == t) f(x);
  }
}

}  // namespace

std::vector<MetapathInstance> enumerate_instances(const HeteroGraph& g, NodeId v,
                                                  const MetapathSchema& p) {
  if (g.type(v) != p.target_type()) {
    throw std::invalid_argument("enumerate_instances: node type does not match schema " + p.id);
  }
  const std::size_t m = p.length();
  std::vector<MetapathInstance> out;
  std::vector<NodeId> path(m + 1);
  path[m] = v;
  std::function<void(std::size_t)> dfs = [&](std::size_t pos) {
    if (pos == 0) {
      out.push_back({path, p.id});
      return;
    }
    for_each_predecessor(g, path[pos], p.relations[pos - 1], p.node_types[pos - 1],
                         [&](NodeId x) {
                           path[pos - 1] = x;
                           dfs(pos - 1);
                         });
  };
  dfs(m);
  return out;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t node, std::uint64_t schema) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(root ^ node) ^ (schema * 0x632be59bd9b4e019ULL));
}

std::vector<MetapathInstance> sample_instances(const HeteroGraph& g, NodeId v,
                                               const MetapathSchema& p, int k,
                                               std::uint64_t seed, const SamplingOptions& opts) {
  if (k < 1) throw std::invalid_argument("sample_instances: k must be >= 1");
  if (g.type(v) != p.target_type()) {
    throw std::invalid_argument("sample_instances: node type does not match schema " + p.id);
  }
  const std::size_t m = p.length();
  // feasible[pos][x]: a valid prefix n_0..n_pos exists ending at x.
  std::vector<std::unordered_map<NodeId, bool>> memo(m + 1);
  std::function<bool(std::size_t, NodeId)> feasible = [&](std::size_t pos, NodeId x) -> bool {
    if (pos == 0) return !(opts.exclude_self && x == v);
    auto it = memo[pos].find(x);
    if (it != memo[pos].end()) return it->second;
    bool ok = false;
    for (NodeId y : g.neighbors(x, inverse(p.relations[pos - 1]))) {
      if (g.type(y) == p.node_types[pos - 1] && feasible(pos - 1, y)) {
        ok = true;
        break;
      }
    }
    memo[pos][x] = ok;
    return ok;
  };
  std::vector<MetapathInstance> out;
  if (!feasible(m, v)) return out;

  std::mt19937_64 rng(seed);
  std::vector<NodeId> choices;
  for (int s = 0; s < k; ++s) {
    MetapathInstance inst;
    inst.schema_id = p.id;
    inst.nodes.assign(m + 1, v);
    for (std::size_t pos = m; pos > 0; --pos) {
      choices.clear();
      for_each_predecessor(g, inst.nodes[pos], p.relations[pos - 1], p.node_types[pos - 1],
                           [&](NodeId x) {
                             if (feasible(pos - 1, x)) choices.push_back(x);
                           });
      std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
      inst.nodes[pos - 1] = choices[pick(rng)];
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace lesicin
