#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace lesicin {

using Sentence = std::vector<std::string>;

struct FactDocument {
  std::string id;
  std::string court;
  std::vector<Sentence> sentences;
  // Sorted, unique section ids.
  std::vector<std::string> labels;
  // Set by the split command ("train", "val", "test"); empty when unknown.
  std::string split;
};

struct Statute {
  std::string id;
  std::string title;
  std::vector<Sentence> sentences;
  std::string parent_topic;
};

struct HierarchyNode {
  std::string id;
  std::string title;
  std::string parent;  // empty for the act
};

class StatuteHierarchy {
 public:
  const HierarchyNode& act() const { return act_; }
  const std::vector<HierarchyNode>& chapters() const { return chapters_; }
  const std::vector<HierarchyNode>& topics() const { return topics_; }
  // In file order; this order is the label order used everywhere else.
  const std::vector<Statute>& sections() const { return sections_; }

  std::size_t section_count() const { return sections_.size(); }
  std::optional<std::size_t> section_index(std::string_view id) const;
  std::vector<std::string> section_ids() const;

  // Throws HierarchyError if the parent links do not form a tree rooted at
  // the act.
  void validate() const;

  // Builders used by loaders and the synthetic generator.
  void set_act(HierarchyNode act);
  void add_chapter(HierarchyNode chapter);
  void add_topic(HierarchyNode topic);
  void add_section(Statute section);

 private:
  HierarchyNode act_;
  std::vector<HierarchyNode> chapters_;
  std::vector<HierarchyNode> topics_;
  std::vector<Statute> sections_;
  std::unordered_map<std::string, std::size_t> section_index_;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HierarchyError : public std::runtime_error {
 public:
  HierarchyError(const std::string& what, std::vector<std::string> offending)
      : std::runtime_error(what), offending_(std::move(offending)) {}
  const std::vector<std::string>& offending_ids() const { return offending_; }

 private:
  std::vector<std::string> offending_;
};

// ---- tokenization ---------------------------------------------------------

// Lowercases and splits on whitespace and punctuation. Entity placeholders
// such as "[PERSON 1]" survive as one token.
std::vector<std::string> tokenize(std::string_view text);
// Splits raw text on sentence-final punctuation, then tokenizes each sentence.
// Sentences that tokenize to nothing are dropped.
std::vector<Sentence> split_and_tokenize(std::string_view text);

// ---- loading --------------------------------------------------------------

struct FactLoadResult {
  std::vector<FactDocument> documents;
  std::size_t dropped_labels = 0;
  std::size_t excluded_documents = 0;
};

// JSONL: one {"id", "court", "text", "labels"[, "split"]} record per line.
// "text" is a string or an array of sentence strings.
FactLoadResult load_facts(const std::filesystem::path& path, const StatuteHierarchy& hierarchy);
// Parses a facts stream; `source` names the input in error messages.
FactLoadResult parse_facts(std::istream& in, const StatuteHierarchy& hierarchy,
                           const std::string& source = "<stream>");
void write_facts(const std::filesystem::path& path, std::span<const FactDocument> docs);

// Nested form {"act": {"id", "title", "chapters": [{"id", "title", "topics":
// [{"id", "title", "sections": [{"id", "title", "text"}]}]}]}} or flat form
// {"nodes": [{"id", "type": "act"|"chapter"|"topic"|"section", "parent",
// "title", "text"}]}.
StatuteHierarchy load_hierarchy(const std::filesystem::path& path);
StatuteHierarchy parse_hierarchy(std::string_view json_text);
void write_hierarchy(const std::filesystem::path& path, const StatuteHierarchy& hierarchy);
// Flat form; keeps section order even when topics interleave.
std::string hierarchy_to_json(const StatuteHierarchy& hierarchy);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t labels = 0;
  double mean_labels_per_doc = 0.0;
  double mean_words_per_doc = 0.0;
};
CorpusStats corpus_stats(std::span<const FactDocument> docs, const StatuteHierarchy& hierarchy);

// ---- vocabulary -----------------------------------------------------------

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnkToken = "<unk>";

  Vocabulary();

  int index(std::string_view token) const;
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return tokens_.size(); }
  std::size_t frequency(int index) const { return freqs_.at(static_cast<std::size_t>(index)); }
  bool contains(std::string_view token) const;

  // Token-per-line "token<TAB>frequency", pad and unk first.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  // Used by build_vocab and deserialization.
  void add(std::string token, std::size_t freq);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> freqs_;
  std::unordered_map<std::string, int> index_;
};

// Each stream is a flat sequence of tokens. Tokens are added in descending
// frequency, ties broken lexicographically.
Vocabulary build_vocab(std::span<const std::vector<std::string>> corpora, std::size_t min_freq);
// Streams of every sentence in the given documents and section texts.
std::vector<std::vector<std::string>> token_streams(std::span<const FactDocument> docs,
                                                    const StatuteHierarchy* hierarchy);

// Word vectors in word2vec text format ("token v1 ... vd" per line; an
// optional "count dim" header is skipped). Returns dim x |vocab| with
// uniform(-0.1, 0.1) columns for tokens without a vector.
struct PretrainedLoadResult {
  Eigen::MatrixXd table;
  std::size_t matched = 0;
};
PretrainedLoadResult load_pretrained_vectors(const std::filesystem::path& path,
                                             const Vocabulary& vocab, int dim,
                                             unsigned long long seed);

// ---- encoding -------------------------------------------------------------

struct TextGrid {
  int max_sents = 0;
  int max_words = 0;
  // Row-major (max_sents x max_words) word indices; kPad where mask is 0.
  std::vector<int> ids;
  std::vector<unsigned char> mask;

  int at(int s, int w) const { return ids[static_cast<std::size_t>(s * max_words + w)]; }
  bool real(int s, int w) const { return mask[static_cast<std::size_t>(s * max_words + w)] != 0; }
  int sentence_length(int s) const;
  int sentence_count() const;
  std::size_t token_count() const;
};

TextGrid encode_text(std::span<const Sentence> sentences, const Vocabulary& vocab, int max_sents,
                     int max_words);
// Tokens under the mask, sentence by sentence.
std::vector<std::vector<int>> decode_grid(const TextGrid& grid);

}  // namespace lesicin
