#include "retrace/textproc.hpp"

#include <algorithm>
#include <cctype>

namespace retrace::text {

namespace {

// Decodes one UTF-8 sequence at `i`; malformed bytes decode as U+FFFD and advance by one.
char32_t next_codepoint(std::string_view s, std::size_t& i) {
  auto b = static_cast<unsigned char>(s[i]);
  int len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
  for (int k = 1; k < len; ++k) {
    auto c = static_cast<unsigned char>(s[i + k]);
    if ((c >> 6) != 0x2) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// ASCII base letter for Latin-1 Supplement and Latin Extended-A letters ("" when none).
std::string_view fold_latin(char32_t cp) {
  static constexpr std::string_view latin1[] = {
      // U+00C0 .. U+00FF
      "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
      "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "ss",
      "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
      "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "y"};
  if (cp >= 0xC0 && cp <= 0xFF) return latin1[cp - 0xC0];
  if (cp >= 0x100 && cp <= 0x17F) {
    static constexpr char ext_a[] =
        "aaaaaaccccccccddddeeeeeeeeeegggggggghhhhiiiiiiiiiijjjjkkklllllllllnnnnnnnnnoooooooorrrrrrssssssssttttttuuuuuuu"
        "uuuuuwwyyyzzzzzs";
    std::size_t idx = cp - 0x100;
    if (idx < sizeof(ext_a) - 1) {
      if (cp == 0x152 || cp == 0x153) return "oe";
      if (cp == 0x132 || cp == 0x133) return "ij";
      return std::string_view(&ext_a[idx], 1);
    }
  }
  return {};
}

bool is_letter(char32_t cp) {
  if (cp < 0x80) return std::isalpha(static_cast<int>(cp)) != 0;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0xC0 && cp <= 0x24F) return true;                           // Latin-1 letters, Extended-A/B
  if (cp >= 0x370 && cp <= 0x3FF) return true;                          // Greek
  if (cp >= 0x400 && cp <= 0x52F) return true;                          // Cyrillic
  if (cp >= 0x1E00 && cp <= 0x1EFF) return true;                        // Latin Extended Additional
  if (cp >= 0x3040 && cp <= 0x9FFF) return true;                        // kana, CJK
  if (cp >= 0xAC00 && cp <= 0xD7AF) return true;                        // Hangul
  return false;
}

bool is_combining_mark(char32_t cp) { return cp >= 0x300 && cp <= 0x36F; }

char32_t lower_codepoint(char32_t cp) {
  if (cp < 0x80) return static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x17F && cp % 2 == 0 && cp != 0x130 && cp != 0x138) return cp + 1;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  return cp;
}

}  // namespace

const std::set<std::string>& default_english_stopwords() {
  static const std::set<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any", "are", "as", "at",
      "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did",
      "do", "does", "doing", "down", "during", "each", "et", "al", "few", "for", "from", "further", "had", "has",
      "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "however", "i",
      "if", "in", "into", "is", "it", "its", "itself", "just", "may", "me", "might", "more", "most", "must", "my",
      "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "one", "only", "or", "other", "our", "ours",
      "ourselves", "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that", "the",
      "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through", "thus",
      "to", "too", "under", "until", "up", "upon", "us", "very", "was", "we", "were", "what", "when", "where",
      "whether", "which", "while", "who", "whom", "why", "will", "with", "within", "without", "would", "you",
      "your", "yours", "yourself", "yourselves"};
  return words;
}

std::set<std::string> load_word_list(const std::filesystem::path& path) {
  std::set<std::string> out;
  for (const auto& line : split(read_file(path), "\n")) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.insert(to_lower(t));
  }
  return out;
}

void TokenPipelineConfig::validate() const {
  std::map<std::string, std::string> errors;
  if (min_token_length < 1) errors["min_token_length"] = "must be >= 1";
  auto check = [&](const std::set<std::string>& words, const char* field) {
    for (const auto& w : words)
      if (w != to_lower(w)) {
        errors[field] = "stop-word '" + w + "' is not lowercase";
        break;
      }
  };
  check(base_stopwords, "base_stopwords");
  check(extra_stopwords, "extra_stopwords");
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

Json TokenPipelineConfig::to_json() const {
  return Json{{"base_stopwords", base_stopwords},   {"extra_stopwords", extra_stopwords},
              {"min_token_length", min_token_length}, {"stemming", stemming},
              {"lemmatization", lemmatization},       {"lemmas", lemmas},
              {"strip_digits", strip_digits}};
}

TokenPipelineConfig TokenPipelineConfig::from_json(const Json& j) {
  static const std::set<std::string> known = {"base_stopwords", "extra_stopwords", "min_token_length", "stemming",
                                              "lemmatization",  "lemmas",          "strip_digits"};
  std::map<std::string, std::string> unknown;
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) unknown[key] = "unknown key";
  if (!unknown.empty()) throw ValidationError(std::move(unknown));
  TokenPipelineConfig c;
  if (j.contains("base_stopwords")) c.base_stopwords = j.at("base_stopwords").get<std::set<std::string>>();
  if (j.contains("extra_stopwords")) c.extra_stopwords = j.at("extra_stopwords").get<std::set<std::string>>();
  if (j.contains("min_token_length")) {
    auto v = j.at("min_token_length").get<long long>();
    if (v < 1) throw ValidationError(std::map<std::string, std::string>{{"min_token_length", "must be >= 1"}});
    c.min_token_length = static_cast<std::size_t>(v);
  }
  c.stemming = j.value("stemming", c.stemming);
  c.lemmatization = j.value("lemmatization", c.lemmatization);
  if (j.contains("lemmas")) c.lemmas = j.at("lemmas").get<std::map<std::string, std::string>>();
  c.strip_digits = j.value("strip_digits", c.strip_digits);
  c.validate();
  return c;
}

Tokenizer::Tokenizer(TokenPipelineConfig config) : config_(std::move(config)) {
  config_.validate();
  stop_ = config_.base_stopwords;
  stop_.insert(config_.extra_stopwords.begin(), config_.extra_stopwords.end());
  if (config_.stemming)
    for (const auto& w : stop_) stemmed_stop_.insert(porter_stem(w));
}

bool Tokenizer::is_stopword(const std::string& raw, const std::string& final_form) const {
  return stop_.count(raw) || stop_.count(final_form) || stemmed_stop_.count(final_form);
}

std::vector<std::string> Tokenizer::operator()(std::string_view text) const {
  std::vector<std::string> tokens;
  std::string raw;
  auto emit = [&] {
    if (raw.empty()) return;
    std::string form = raw;
    if (config_.lemmatization) {
      if (auto it = config_.lemmas.find(form); it != config_.lemmas.end()) form = it->second;
    }
    if (config_.stemming) form = porter_stem(form);
    if (form.size() >= config_.min_token_length && !is_stopword(raw, form)) tokens.push_back(std::move(form));
    raw.clear();
  };

  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = lower_codepoint(next_codepoint(text, i));
    if (is_combining_mark(cp)) {
      if (!config_.stemming && !raw.empty()) append_utf8(raw, cp);
      continue;
    }
    bool digit = cp < 0x80 && std::isdigit(static_cast<int>(cp));
    if (is_letter(cp) || (digit && !config_.strip_digits)) {
      if (cp >= 0x80 && config_.stemming) {
        // The stemmer works on ASCII; accented Latin letters lose their diacritics.
        auto folded = fold_latin(cp);
        if (!folded.empty()) {
          raw += folded;
          continue;
        }
      }
      append_utf8(raw, cp);
      continue;
    }
    if (digit) continue;  // digits are dropped without splitting the surrounding word
    emit();
  }
  emit();
  return tokens;
}

std::vector<std::string> tokenize(std::string_view text, const TokenPipelineConfig& config) {
  return Tokenizer(config)(text);
}

long long CorpusDocument::length() const {
  long long n = 0;
  for (const auto& tc : counts) n += tc.count;
  return n;
}

long long Corpus::total_tokens() const {
  long long n = 0;
  for (const auto& d : documents) n += d.length();
  return n;
}

std::vector<long long> Corpus::term_frequencies() const {
  std::vector<long long> freq(vocabulary.size(), 0);
  for (const auto& d : documents)
    for (const auto& tc : d.counts) freq[tc.term] += tc.count;
  return freq;
}

std::string Corpus::hash() const { return sha256_hex(to_json(*this).dump()); }

Corpus build_corpus(const std::vector<Document>& documents, const TokenPipelineConfig& config,
                    const CorpusOptions& options) {
  Tokenizer tokenizer(config);
  std::set<std::string> ids;
  std::vector<std::map<std::string, int>> bags;
  bags.reserve(documents.size());
  std::map<std::string, long long> totals;
  for (const auto& doc : documents) {
    if (!ids.insert(doc.id).second) throw SchemaError("duplicate document id '" + doc.id + "'");
    std::map<std::string, int> bag;
    for (auto& token : tokenizer(doc.text)) ++bag[token];
    for (const auto& [term, n] : bag) totals[term] += n;
    bags.push_back(std::move(bag));
  }

  Corpus corpus;
  std::map<std::string, int> index;
  for (const auto& [term, n] : totals) {
    if (n < options.min_term_frequency) continue;
    index[term] = static_cast<int>(corpus.vocabulary.size());
    corpus.vocabulary.push_back(term);
  }
  if (corpus.vocabulary.empty()) throw DomainError("corpus is empty after tokenization; nothing to model");

  for (std::size_t d = 0; d < documents.size(); ++d) {
    CorpusDocument cd{documents[d].id, {}, documents[d].metadata};
    for (const auto& [term, n] : bags[d]) {
      auto it = index.find(term);
      if (it != index.end()) cd.counts.push_back({it->second, n});
    }
    corpus.documents.push_back(std::move(cd));
  }
  return corpus;
}

Json to_json(const Corpus& c) {
  Json docs = Json::array();
  for (const auto& d : c.documents) {
    Json counts = Json::array();
    for (const auto& tc : d.counts) counts.push_back({tc.term, tc.count});
    docs.push_back({{"id", d.id}, {"counts", counts}, {"metadata", d.metadata}});
  }
  return Json{{"schema_version", 1}, {"vocabulary", c.vocabulary}, {"documents", docs}};
}

Corpus corpus_from_json(const Json& j) {
  Corpus c;
  c.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  std::set<std::string> ids;
  for (const auto& d : j.at("documents")) {
    CorpusDocument cd;
    cd.id = d.at("id").get<std::string>();
    if (!ids.insert(cd.id).second) throw SchemaError("duplicate document id '" + cd.id + "'");
    int previous = -1;
    for (const auto& pair : d.at("counts")) {
      TermCount tc{pair.at(0).get<int>(), pair.at(1).get<int>()};
      if (tc.term < 0 || tc.term >= static_cast<int>(c.vocabulary.size()) || tc.term <= previous || tc.count <= 0)
        throw SchemaError("document " + cd.id + ": invalid term count entry");
      previous = tc.term;
      cd.counts.push_back(tc);
    }
    if (d.contains("metadata")) cd.metadata = d.at("metadata").get<DocMetadata>();
    c.documents.push_back(std::move(cd));
  }
  return c;
}

std::vector<Document> documents_from_json(const Json& j) {
  const Json& arr = j.is_array() ? j : j.at("documents");
  std::vector<Document> out;
  for (const auto& d : arr) {
    Document doc{d.at("id").get<std::string>(), d.value("text", ""), {}};
    if (d.contains("metadata")) {
      for (const auto& [key, value] : d.at("metadata").items()) {
        if (value.is_array()) doc.metadata[key] = value.get<std::vector<std::string>>();
        else if (value.is_string()) doc.metadata[key] = {value.get<std::string>()};
        else if (!value.is_null()) doc.metadata[key] = {value.dump()};
      }
    }
    out.push_back(std::move(doc));
  }
  return out;
}

}  // namespace retrace::text
