#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "retrace/util.hpp"

namespace retrace::text {

// Porter suffix stripping on lowercase ASCII words; other input is returned unchanged.
std::string porter_stem(std::string_view word);

const std::set<std::string>& default_english_stopwords();

// Plain text, one word per line, '#' comments; entries are lowercased.
std::set<std::string> load_word_list(const std::filesystem::path& path);

struct TokenPipelineConfig {
  std::set<std::string> base_stopwords = default_english_stopwords();
  std::set<std::string> extra_stopwords;
  std::size_t min_token_length = 3;
  bool stemming = true;
  bool lemmatization = false;
  std::map<std::string, std::string> lemmas;  // used when lemmatization is on
  bool strip_digits = true;

  // Throws ValidationError on min_token_length == 0 or non-lowercase stop-words.
  void validate() const;
  Json to_json() const;
  static TokenPipelineConfig from_json(const Json& j);
};

// Prepared form of a config: stop-words in raw and stemmed shape.
class Tokenizer {
 public:
  explicit Tokenizer(TokenPipelineConfig config);
  std::vector<std::string> operator()(std::string_view text) const;
  const TokenPipelineConfig& config() const { return config_; }

 private:
  bool is_stopword(const std::string& raw, const std::string& final_form) const;

  TokenPipelineConfig config_;
  std::set<std::string> stop_;
  std::set<std::string> stemmed_stop_;
};

std::vector<std::string> tokenize(std::string_view text, const TokenPipelineConfig& config);

using DocMetadata = std::map<std::string, std::vector<std::string>>;

struct Document {
  std::string id;
  std::string text;
  DocMetadata metadata;
};

struct TermCount {
  int term = 0;
  int count = 0;
  bool operator==(const TermCount&) const = default;
};

struct CorpusDocument {
  std::string id;
  std::vector<TermCount> counts;  // ascending term index, counts > 0
  DocMetadata metadata;

  long long length() const;
  bool operator==(const CorpusDocument&) const = default;
};

struct Corpus {
  std::vector<CorpusDocument> documents;
  std::vector<std::string> vocabulary;  // sorted

  long long total_tokens() const;
  // Corpus-wide term frequencies, indexed like the vocabulary.
  std::vector<long long> term_frequencies() const;
  std::string hash() const;
  bool operator==(const Corpus&) const = default;
};

struct CorpusOptions {
  long long min_term_frequency = 1;  // corpus-wide count floor
};

// Throws DomainError when no document keeps a token, SchemaError on duplicate ids.
Corpus build_corpus(const std::vector<Document>& documents, const TokenPipelineConfig& config,
                    const CorpusOptions& options = {});

Json to_json(const Corpus& c);
Corpus corpus_from_json(const Json& j);

std::vector<Document> documents_from_json(const Json& j);

}  // namespace retrace::text
