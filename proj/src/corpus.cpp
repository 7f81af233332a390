#include "lesicin/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace lesicin {

using nlohmann::json;

// ---------------------------------------------------------------------------
// StatuteHierarchy

std::optional<std::size_t> StatuteHierarchy::section_index(std::string_view id) const {
  auto it = section_index_.find(std::string(id));
  if (it == section_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> StatuteHierarchy::section_ids() const {
  std::vector<std::string> ids;
  ids.reserve(sections_.size());
  for (const auto& s : sections_) ids.push_back(s.id);
  return ids;
}

void StatuteHierarchy::set_act(HierarchyNode act) { act_ = std::move(act); }
void StatuteHierarchy::add_chapter(HierarchyNode chapter) { chapters_.push_back(std::move(chapter)); }
void StatuteHierarchy::add_topic(HierarchyNode topic) { topics_.push_back(std::move(topic)); }

void StatuteHierarchy::add_section(Statute section) {
  section_index_.emplace(section.id, sections_.size());
  sections_.push_back(std::move(section));
}

namespace {

template <typename T, typename IdOf>
std::vector<std::string> duplicate_ids(const std::vector<T>& items, IdOf id_of) {
  std::unordered_map<std::string, int> seen;
  std::vector<std::string> dups;
  for (const auto& item : items) {
    if (++seen[id_of(item)] == 2) dups.push_back(id_of(item));
  }
  return dups;
}

}  // namespace

void StatuteHierarchy::validate() const {
  if (act_.id.empty()) throw HierarchyError("hierarchy has no act", {});
  auto node_id = [](const HierarchyNode& n) { return n.id; };
  auto section_id = [](const Statute& s) { return s.id; };

  std::vector<std::string> multi;
  for (auto& d : duplicate_ids(chapters_, node_id)) multi.push_back(d);
  for (auto& d : duplicate_ids(topics_, node_id)) multi.push_back(d);
  for (auto& d : duplicate_ids(sections_, section_id)) multi.push_back(d);
  if (!multi.empty()) {
    std::string msg = "hierarchy nodes with more than one parent:";
    for (const auto& m : multi) msg += " " + m;
    throw HierarchyError(msg, multi);
  }

  std::unordered_set<std::string> chapter_ids, topic_ids;
  for (const auto& c : chapters_) chapter_ids.insert(c.id);
  for (const auto& t : topics_) topic_ids.insert(t.id);

  std::vector<std::string> orphans;
  for (const auto& c : chapters_) {
    if (c.parent != act_.id) orphans.push_back(c.id);
  }
  for (const auto& t : topics_) {
    if (!chapter_ids.count(t.parent)) orphans.push_back(t.id);
  }
  for (const auto& s : sections_) {
    if (!topic_ids.count(s.parent_topic)) orphans.push_back(s.id);
  }
  if (!orphans.empty()) {
    std::string msg = "hierarchy nodes without a valid parent:";
    for (const auto& o : orphans) msg += " " + o;
    throw HierarchyError(msg, orphans);
  }
  for (const auto& s : sections_) {
    if (s.sentences.empty()) {
      throw HierarchyError("section " + s.id + " has no text", {s.id});
    }
  }
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

// Matches "[WORD]" or "[WORD 12]" starting at text[i]; returns its length.
std::size_t placeholder_length(std::string_view text, std::size_t i) {
  if (text[i] != '[') return 0;
  std::size_t j = i + 1;
  std::size_t letters = 0;
  while (j < text.size() && (std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
    ++j;
    ++letters;
  }
  if (letters == 0) return 0;
  if (j < text.size() && text[j] == ' ') {
    std::size_t k = j + 1, digits = 0;
    while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
      ++k;
      ++digits;
    }
    if (digits > 0) j = k;
  }
  if (j < text.size() && text[j] == ']') return j + 1 - i;
  return 0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::size_t len = placeholder_length(text, i); len > 0) {
      out.emplace_back(text.substr(i, len));
      i += len;
      continue;
    }
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      std::string word;
      while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) {
        unsigned char b = static_cast<unsigned char>(text[i]);
        word.push_back(b < 0x80 ? static_cast<char>(std::tolower(b)) : static_cast<char>(b));
        ++i;
      }
      out.push_back(std::move(word));
      continue;
    }
    ++i;
  }
  return out;
}

std::vector<Sentence> split_and_tokenize(std::string_view text) {
  std::vector<Sentence> sentences;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (end > start) {
      auto toks = tokenize(text.substr(start, end - start));
      if (!toks.empty()) sentences.push_back(std::move(toks));
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (std::size_t len = placeholder_length(text, i); len > 0) {
      i += len - 1;
      continue;
    }
    bool boundary = false;
    if (c == '\n') {
      boundary = true;
    } else if (c == '.' || c == '!' || c == '?') {
      boundary = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
    }
    if (boundary) {
      flush(i + 1);
      start = i + 1;
    }
  }
  flush(text.size());
  return sentences;
}

namespace {

std::vector<Sentence> sentences_from_json(const json& text) {
  std::vector<Sentence> out;
  if (text.is_string()) return split_and_tokenize(text.get<std::string>());
  if (text.is_array()) {
    for (const auto& s : text) {
      if (!s.is_string()) throw CorpusError("sentence entries must be strings");
      auto toks = tokenize(s.get<std::string>());
      if (!toks.empty()) out.push_back(std::move(toks));
    }
    return out;
  }
  throw CorpusError("\"text\" must be a string or an array of strings");
}

std::string id_from_json(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw CorpusError("ids must be strings or integers");
}

std::string join_sentence(const Sentence& s) {
  std::string out;
  for (const auto& w : s) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

json sentences_to_json(const std::vector<Sentence>& sentences) {
  json arr = json::array();
  for (const auto& s : sentences) arr.push_back(join_sentence(s));
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Facts

FactLoadResult parse_facts(std::istream& in, const StatuteHierarchy& hierarchy,
                           const std::string& source) {
  FactLoadResult result;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0, records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    ++records;
    auto fail = [&](const std::string& why) {
      return CorpusError(source + ":" + std::to_string(line_no) + ": " + why);
    };
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw fail(std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("text") ||
        !rec.contains("labels")) {
      throw fail("record needs \"id\", \"text\" and \"labels\"");
    }
    FactDocument doc;
    try {
      doc.id = id_from_json(rec["id"]);
      doc.sentences = sentences_from_json(rec["text"]);
      if (!rec["labels"].is_array()) throw CorpusError("\"labels\" must be an array");
      std::set<std::string> labels;
      for (const auto& l : rec["labels"]) {
        std::string lid = id_from_json(l);
        if (hierarchy.section_index(lid)) {
          labels.insert(lid);
        } else {
          ++result.dropped_labels;
        }
      }
      doc.labels.assign(labels.begin(), labels.end());
      doc.court = rec.contains("court") && rec["court"].is_string()
                      ? rec["court"].get<std::string>()
                      : std::string("unknown");
      if (rec.contains("split") && rec["split"].is_string()) doc.split = rec["split"];
    } catch (const CorpusError& e) {
      throw fail(e.what());
    } catch (const json::exception& e) {
      throw fail(e.what());
    }
    if (doc.id.empty()) throw fail("empty id");
    if (doc.sentences.empty()) throw fail("record " + doc.id + " has no tokens");
    if (!ids.insert(doc.id).second) throw fail("duplicate id " + doc.id);
    if (doc.labels.empty()) {
      ++result.excluded_documents;
      continue;
    }
    result.documents.push_back(std::move(doc));
  }
  if (records == 0) throw CorpusError(source + ": no records");
  return result;
}

FactLoadResult load_facts(const std::filesystem::path& path, const StatuteHierarchy& hierarchy) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open facts file " + path.string());
  return parse_facts(in, hierarchy, path.string());
}

void write_facts(const std::filesystem::path& path, std::span<const FactDocument> docs) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write " + path.string());
  for (const auto& d : docs) {
    json rec;
    rec["id"] = d.id;
    rec["court"] = d.court;
    rec["text"] = sentences_to_json(d.sentences);
    rec["labels"] = d.labels;
    if (!d.split.empty()) rec["split"] = d.split;
    out << rec.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Hierarchy

namespace {

std::string title_of(const json& j) {
  return j.contains("title") && j["title"].is_string() ? j["title"].get<std::string>() : "";
}

StatuteHierarchy parse_nested(const json& act) {
  StatuteHierarchy h;
  if (!act.is_object() || !act.contains("id")) throw CorpusError("act needs an \"id\"");
  std::string act_id = id_from_json(act["id"]);
  h.set_act({act_id, title_of(act), ""});
  for (const auto& ch : act.value("chapters", json::array())) {
    std::string cid = id_from_json(ch.at("id"));
    h.add_chapter({cid, title_of(ch), act_id});
    for (const auto& tp : ch.value("topics", json::array())) {
      std::string tid = id_from_json(tp.at("id"));
      h.add_topic({tid, title_of(tp), cid});
      for (const auto& sec : tp.value("sections", json::array())) {
        Statute s;
        s.id = id_from_json(sec.at("id"));
        s.title = title_of(sec);
        s.sentences = sentences_from_json(sec.contains("text") ? sec["text"] : json(s.title));
        s.parent_topic = tid;
        h.add_section(std::move(s));
      }
    }
  }
  return h;
}

StatuteHierarchy parse_flat(const json& nodes) {
  StatuteHierarchy h;
  int acts = 0;
  std::vector<std::string> act_ids;
  for (const auto& n : nodes) {
    std::string type = n.at("type").get<std::string>();
    std::string id = id_from_json(n.at("id"));
    std::string parent = n.contains("parent") && !n["parent"].is_null() ? id_from_json(n["parent"]) : "";
    if (type == "act") {
      ++acts;
      act_ids.push_back(id);
      h.set_act({id, title_of(n), ""});
    } else if (type == "chapter") {
      h.add_chapter({id, title_of(n), parent});
    } else if (type == "topic") {
      h.add_topic({id, title_of(n), parent});
    } else if (type == "section") {
      Statute s;
      s.id = id;
      s.title = title_of(n);
      s.sentences = sentences_from_json(n.contains("text") ? n["text"] : json(s.title));
      s.parent_topic = parent;
      h.add_section(std::move(s));
    } else {
      throw CorpusError("unknown hierarchy node type \"" + type + "\"");
    }
  }
  if (acts != 1) {
    throw HierarchyError("hierarchy must contain exactly one act, found " + std::to_string(acts),
                         act_ids);
  }
  return h;
}

}  // namespace

StatuteHierarchy parse_hierarchy(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw CorpusError(std::string("hierarchy does not parse: ") + e.what());
  }
  StatuteHierarchy h;
  try {
    if (doc.contains("nodes")) {
      h = parse_flat(doc["nodes"]);
    } else if (doc.contains("act")) {
      h = parse_nested(doc["act"]);
    } else {
      throw CorpusError("hierarchy needs an \"act\" or \"nodes\" member");
    }
  } catch (const json::exception& e) {
    throw CorpusError(std::string("malformed hierarchy: ") + e.what());
  }
  h.validate();
  return h;
}

StatuteHierarchy load_hierarchy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open hierarchy file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_hierarchy(ss.str());
}

void write_hierarchy(const std::filesystem::path& path, const StatuteHierarchy& h) {
  json act;
  act["id"] = h.act().id;
  act["title"] = h.act().title;
  act["chapters"] = json::array();
  for (const auto& c : h.chapters()) {
    json jc{{"id", c.id}, {"title", c.title}, {"topics", json::array()}};
    for (const auto& t : h.topics()) {
      if (t.parent != c.id) continue;
      json jt{{"id", t.id}, {"title", t.title}, {"sections", json::array()}};
      for (const auto& s : h.sections()) {
        if (s.parent_topic != t.id) continue;
        jt["sections"].push_back(
            {{"id", s.id}, {"title", s.title}, {"text", sentences_to_json(s.sentences)}});
      }
      jc["topics"].push_back(std::move(jt));
    }
    act["chapters"].push_back(std::move(jc));
  }
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write " + path.string());
  out << json{{"act", act}}.dump(2) << '\n';
}

std::string hierarchy_to_json(const StatuteHierarchy& h) {
  json nodes = json::array();
  nodes.push_back({{"id", h.act().id}, {"type", "act"}, {"title", h.act().title}});
  for (const auto& c : h.chapters()) {
    nodes.push_back({{"id", c.id}, {"type", "chapter"}, {"parent", c.parent}, {"title", c.title}});
  }
  for (const auto& t : h.topics()) {
    nodes.push_back({{"id", t.id}, {"type", "topic"}, {"parent", t.parent}, {"title", t.title}});
  }
  for (const auto& s : h.sections()) {
    nodes.push_back({{"id", s.id},
                     {"type", "section"},
                     {"parent", s.parent_topic},
                     {"title", s.title},
                     {"text", sentences_to_json(s.sentences)}});
  }
  return json{{"nodes", nodes}}.dump();
}

CorpusStats corpus_stats(std::span<const FactDocument> docs, const StatuteHierarchy& hierarchy) {
  CorpusStats st;
  st.documents = docs.size();
  st.labels = hierarchy.section_count();
  if (docs.empty()) return st;
  double labels = 0, words = 0;
  for (const auto& d : docs) {
    labels += static_cast<double>(d.labels.size());
    for (const auto& s : d.sentences) words += static_cast<double>(s.size());
  }
  st.mean_labels_per_doc = labels / static_cast<double>(docs.size());
  st.mean_words_per_doc = words / static_cast<double>(docs.size());
  return st;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary() {
  add(kPadToken, 0);
  add(kUnkToken, 0);
}

void Vocabulary::add(std::string token, std::size_t freq) {
  if (index_.count(token)) throw CorpusError("duplicate vocabulary token: " + token);
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
  freqs_.push_back(freq);
}

int Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << freqs_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open vocabulary " + path.string());
  Vocabulary v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      throw CorpusError(path.string() + ":" + std::to_string(line_no) + ": expected token<TAB>freq");
    }
    std::string tok = line.substr(0, tab);
    std::size_t freq = std::stoull(line.substr(tab + 1));
    if (line_no <= 2) {
      const char* expected = line_no == 1 ? kPadToken : kUnkToken;
      if (tok != expected) throw CorpusError(path.string() + ": reserved tokens missing");
      continue;
    }
    v.add(std::move(tok), freq);
  }
  return v;
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> corpora, std::size_t min_freq) {
  if (min_freq < 1) throw std::invalid_argument("build_vocab: min_freq must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& stream : corpora) {
    for (const auto& tok : stream) {
      ++counts[tok];
      ++total;
    }
  }
  if (total == 0) throw CorpusError("build_vocab: empty corpus");
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_freq && tok != Vocabulary::kPadToken && tok != Vocabulary::kUnkToken) {
      kept.emplace_back(tok, n);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  for (auto& [tok, n] : kept) v.add(tok, n);
  return v;
}

std::vector<std::vector<std::string>> token_streams(std::span<const FactDocument> docs,
                                                    const StatuteHierarchy* hierarchy) {
  std::vector<std::vector<std::string>> streams;
  for (const auto& d : docs) {
    for (const auto& s : d.sentences) streams.push_back(s);
  }
  if (hierarchy != nullptr) {
    for (const auto& sec : hierarchy->sections()) {
      for (const auto& s : sec.sentences) streams.push_back(s);
    }
  }
  return streams;
}

PretrainedLoadResult load_pretrained_vectors(const std::filesystem::path& path,
                                             const Vocabulary& vocab, int dim,
                                             unsigned long long seed) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open embeddings " + path.string());
  PretrainedLoadResult res;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(-0.1, 0.1);
  res.table = Eigen::MatrixXd(dim, static_cast<Eigen::Index>(vocab.size()));
  for (Eigen::Index i = 0; i < res.table.size(); ++i) res.table.data()[i] = init(rng);
  res.table.col(Vocabulary::kPad).setZero();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    std::vector<double> vals;
    double x;
    while (ls >> x) vals.push_back(x);
    if (line_no == 1 && vals.size() == 1) continue;  // "count dim" header
    if (static_cast<int>(vals.size()) != dim) {
      throw CorpusError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values");
    }
    if (!vocab.contains(tok)) continue;
    int idx = vocab.index(tok);
    for (int k = 0; k < dim; ++k) res.table(k, idx) = vals[static_cast<std::size_t>(k)];
    ++res.matched;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Encoding

int TextGrid::sentence_length(int s) const {
  int n = 0;
  for (int w = 0; w < max_words; ++w) n += real(s, w) ? 1 : 0;
  return n;
}

int TextGrid::sentence_count() const {
  int n = 0;
  for (int s = 0; s < max_sents; ++s) n += sentence_length(s) > 0 ? 1 : 0;
  return n;
}

std::size_t TextGrid::token_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

TextGrid encode_text(std::span<const Sentence> sentences, const Vocabulary& vocab, int max_sents,
                     int max_words) {
  if (max_sents < 1 || max_words < 1) {
    throw std::invalid_argument("encode_text: max_sents and max_words must be >= 1");
  }
  TextGrid g;
  g.max_sents = max_sents;
  g.max_words = max_words;
  g.ids.assign(static_cast<std::size_t>(max_sents * max_words), Vocabulary::kPad);
  g.mask.assign(g.ids.size(), 0);
  int row = 0;
  for (const auto& sent : sentences) {
    if (row == max_sents) break;
    if (sent.empty()) continue;
    int n = std::min<int>(static_cast<int>(sent.size()), max_words);
    for (int w = 0; w < n; ++w) {
      auto at = static_cast<std::size_t>(row * max_words + w);
      g.ids[at] = vocab.index(sent[static_cast<std::size_t>(w)]);
      g.mask[at] = 1;
    }
    ++row;
  }
  return g;
}

std::vector<std::vector<int>> decode_grid(const TextGrid& grid) {
  std::vector<std::vector<int>> out;
  for (int s = 0; s < grid.max_sents; ++s) {
    std::vector<int> sent;
    for (int w = 0; w < grid.max_words; ++w) {
      if (grid.real(s, w)) sent.push_back(grid.at(s, w));
    }
    if (!sent.empty()) out.push_back(std::move(sent));
  }
  return out;
}

}  // namespace lesicin
