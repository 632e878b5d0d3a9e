#include "retrace/annotation.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <ctime>
#include <fstream>
#include <limits>

#include "retrace/csv.hpp"

namespace retrace::annotation {

namespace {

constexpr std::pair<SectionLabel, std::string_view> kSectionNames[] = {
    {SectionLabel::introduction, "introduction"},
    {SectionLabel::method, "method"},
    {SectionLabel::abstract, "abstract"},
    {SectionLabel::results, "results"},
    {SectionLabel::conclusions, "conclusions"},
    {SectionLabel::background, "background"},
    {SectionLabel::discussion, "discussion"},
    {SectionLabel::first_section, "first_section"},
    {SectionLabel::middle_section, "middle_section"},
    {SectionLabel::final_section, "final_section"},
};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::optional<std::string> optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::string_view to_string(SectionLabel s) {
  for (const auto& [label, name] : kSectionNames)
    if (label == s) return name;
  return "middle_section";
}

SectionLabel section_from_string(std::string_view s) {
  for (const auto& [label, name] : kSectionNames)
    if (name == s) return label;
  throw SchemaError("unknown section label: " + std::string(s));
}

std::string_view to_string(Sentiment s) {
  switch (s) {
    case Sentiment::positive: return "positive";
    case Sentiment::negative: return "negative";
    case Sentiment::neutral: return "neutral";
  }
  return "neutral";
}

std::optional<Sentiment> sentiment_from_string(std::string_view s) {
  if (s == "positive") return Sentiment::positive;
  if (s == "negative") return Sentiment::negative;
  if (s == "neutral") return Sentiment::neutral;
  return std::nullopt;
}

Json to_json(const InTextCitation& c) {
  return Json{{"id", c.id},
              {"citing_entity_id", c.citing_entity_id},
              {"cited_item_id", c.cited_item_id},
              {"pointer_text", c.pointer_text},
              {"section", to_string(c.section)},
              {"context",
               {{"preceding", c.context.preceding ? Json(*c.context.preceding) : Json(nullptr)},
                {"anchor", c.context.anchor},
                {"following", c.context.following ? Json(*c.context.following) : Json(nullptr)}}}};
}

InTextCitation citation_from_json(const Json& j) {
  InTextCitation c;
  c.id = j.at("id").get<std::string>();
  c.citing_entity_id = j.at("citing_entity_id").get<std::string>();
  c.cited_item_id = j.at("cited_item_id").get<std::string>();
  c.pointer_text = j.value("pointer_text", "");
  c.section = section_from_string(j.value("section", "middle_section"));
  const auto& ctx = j.at("context");
  c.context.preceding = optional_string(ctx, "preceding");
  c.context.anchor = ctx.at("anchor").get<std::string>();
  c.context.following = optional_string(ctx, "following");
  return c;
}

std::vector<InTextCitation> citations_from_json(const Json& j) {
  const Json& arr = j.is_array() ? j : j.at("citations");
  std::vector<InTextCitation> out;
  std::set<std::string> ids;
  for (const auto& item : arr) {
    out.push_back(citation_from_json(item));
    if (!ids.insert(out.back().id).second) throw SchemaError("duplicate in-text citation id " + out.back().id);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Sentence> split_sentences(std::string_view text) {
  static const std::set<std::string> abbreviations = {
      "e.g", "i.e", "al", "cf", "vs", "fig", "figs", "eq", "eqs", "vol", "vols", "pp", "p", "no", "nos", "ed", "eds",
      "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "ch", "sec", "approx", "ca", "resp", "viz", "ibid", "op"};

  std::vector<Sentence> out;
  int paragraph = 0;
  std::string current;
  int depth = 0;
  bool in_quote = false;

  auto flush = [&] {
    auto t = trim(current);
    if (!t.empty()) out.push_back({std::move(t), paragraph});
    current.clear();
    depth = 0;
    in_quote = false;
  };
  auto last_word = [&]() {
    std::size_t end = current.size();
    std::size_t begin = end;
    while (begin > 0 && (is_word_char(current[begin - 1]) || current[begin - 1] == '.')) --begin;
    return to_lower(std::string_view(current).substr(begin, end - begin));
  };

  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    // Paragraph break: a newline followed by optional blanks and another newline.
    if (c == '\n') {
      std::size_t j = i + 1;
      while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
      if (j < text.size() && text[j] == '\n') {
        flush();
        ++paragraph;
        while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        i = j;
        continue;
      }
      current.push_back(' ');
      ++i;
      continue;
    }
    if (c == '(' || c == '[') ++depth;
    if ((c == ')' || c == ']') && depth > 0) --depth;
    if (c == '"') in_quote = !in_quote;
    if (text.substr(i, 3) == "\xE2\x80\x9C") in_quote = true;
    if (text.substr(i, 3) == "\xE2\x80\x9D") in_quote = false;

    if ((c == '.' || c == '!' || c == '?') && depth == 0) {
      bool abbreviation = false;
      if (c == '.') {
        auto word = last_word();
        abbreviation = abbreviations.count(word) > 0 ||
                       (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0])) && !current.empty() &&
                        std::isupper(static_cast<unsigned char>(current.back())));
      }
      current.push_back(c);
      std::size_t j = i + 1;
      // Run of terminators and closing marks stays with this sentence.
      while (j < text.size()) {
        if (text[j] == '.' || text[j] == '!' || text[j] == '?' || text[j] == ')' || text[j] == ']') {
          current.push_back(text[j++]);
        } else if (text[j] == '"' && in_quote) {
          current.push_back(text[j++]);
          in_quote = false;
        } else if (text.substr(j, 3) == "\xE2\x80\x9D") {
          current += text.substr(j, 3);
          j += 3;
          in_quote = false;
        } else {
          break;
        }
      }
      bool at_end = j >= text.size();
      bool followed_by_space = !at_end && std::isspace(static_cast<unsigned char>(text[j]));
      if (!abbreviation && !in_quote && (at_end || followed_by_space)) {
        std::size_t k = j;
        while (k < text.size() && text[k] == ' ') ++k;
        bool next_starts = k >= text.size() || !std::islower(static_cast<unsigned char>(text[k]));
        if (next_starts) {
          flush();
          i = j;
          continue;
        }
      }
      i = j;
      continue;
    }
    current.push_back(c);
    ++i;
  }
  flush();
  return out;
}

ContextResult extract_context(const std::vector<Sentence>& sentences, std::size_t anchor_index,
                              std::optional<std::string_view> pointer_text) {
  if (anchor_index >= sentences.size())
    throw DomainError("anchor index " + std::to_string(anchor_index) + " outside " +
                      std::to_string(sentences.size()) + " sentences");
  ContextResult r;
  const auto& anchor = sentences[anchor_index];
  r.context.anchor = anchor.text;
  if (anchor_index > 0 && sentences[anchor_index - 1].paragraph == anchor.paragraph)
    r.context.preceding = sentences[anchor_index - 1].text;
  if (anchor_index + 1 < sentences.size() && sentences[anchor_index + 1].paragraph == anchor.paragraph)
    r.context.following = sentences[anchor_index + 1].text;
  if (pointer_text && anchor.text.find(*pointer_text) == std::string::npos)
    r.warnings.push_back("anchor sentence does not contain pointer '" + std::string(*pointer_text) + "'");
  return r;
}

ContextResult extract_context(const std::vector<std::string>& sentences, std::size_t anchor_index,
                              std::optional<std::string_view> pointer_text) {
  std::vector<Sentence> s;
  s.reserve(sentences.size());
  for (const auto& text : sentences) s.push_back({text, 0});
  return extract_context(s, anchor_index, pointer_text);
}

// ---------------------------------------------------------------------------

SectionSynonyms SectionSynonyms::defaults() {
  SectionSynonyms s;
  s.entries = {
      {"introduction", SectionLabel::introduction},
      {"intro", SectionLabel::introduction},
      {"materials and methods", SectionLabel::method},
      {"methodology", SectionLabel::method},
      {"methods", SectionLabel::method},
      {"method", SectionLabel::method},
      {"experimental setup", SectionLabel::method},
      {"abstract", SectionLabel::abstract},
      {"results", SectionLabel::results},
      {"result", SectionLabel::results},
      {"findings", SectionLabel::results},
      {"concluding remarks", SectionLabel::conclusions},
      {"final remarks", SectionLabel::conclusions},
      {"conclusions", SectionLabel::conclusions},
      {"conclusion", SectionLabel::conclusions},
      {"background", SectionLabel::background},
      {"related work", SectionLabel::background},
      {"related works", SectionLabel::background},
      {"literature review", SectionLabel::background},
      {"state of the art", SectionLabel::background},
      {"discussion", SectionLabel::discussion},
      {"discussions", SectionLabel::discussion},
  };
  return s;
}

SectionSynonyms SectionSynonyms::from_json(const Json& j) {
  SectionSynonyms s;
  for (const auto& [label, phrases] : j.items()) {
    auto section = section_from_string(label);
    for (const auto& phrase : phrases) s.entries.emplace_back(to_lower(trim(phrase.get<std::string>())), section);
  }
  return s;
}

SectionLabel classify_section(std::string_view section_title, double relative_position,
                              const SectionSynonyms& synonyms) {
  auto title = to_lower(section_title);
  std::optional<std::pair<std::size_t, std::size_t>> best;  // (position, -length) ordering
  SectionLabel best_label = SectionLabel::middle_section;
  for (const auto& [phrase, label] : synonyms.entries) {
    std::size_t from = 0;
    while (true) {
      auto pos = title.find(phrase, from);
      if (pos == std::string::npos) break;
      bool left_ok = pos == 0 || !is_word_char(title[pos - 1]);
      bool right_ok = pos + phrase.size() >= title.size() || !is_word_char(title[pos + phrase.size()]);
      if (left_ok && right_ok) {
        std::pair<std::size_t, std::size_t> key{pos, std::numeric_limits<std::size_t>::max() - phrase.size()};
        if (!best || key < *best) {
          best = key;
          best_label = label;
        }
        break;
      }
      from = pos + 1;
    }
  }
  if (best) return best_label;
  if (relative_position < kFirstSectionBound) return SectionLabel::first_section;
  if (relative_position > kFinalSectionBound) return SectionLabel::final_section;
  return SectionLabel::middle_section;
}

// ---------------------------------------------------------------------------

const std::set<std::string>& cito_vocabulary() {
  static const std::set<std::string> vocabulary = {
      "agrees_with", "cites", "cites_as_authority", "cites_as_data_source", "cites_as_evidence",
      "cites_as_metadata_document", "cites_as_potential_solution", "cites_as_recommended_reading",
      "cites_as_related", "cites_as_source_document", "cites_for_information", "compiles", "confirms",
      "contains_assertion_from", "corrects", "credits", "critiques", "derides", "describes", "disagrees_with",
      "discusses", "disputes", "documents", "extends", "includes_excerpt_from", "includes_quotation_from",
      "links_to", "obtains_background_from", "obtains_support_from", "parodies", "plagiarizes", "qualifies",
      "refutes", "replies_to", "retracts", "reviews", "ridicules", "speculates_on", "supports", "updates",
      "uses_conclusions_from", "uses_data_from", "uses_method_in"};
  return vocabulary;
}

namespace {

std::string substitute(std::string sentence, const std::string& header, const std::string& function) {
  auto replace = [&](const std::string& token, const std::string& value) {
    if (value.empty()) return;
    auto pos = sentence.find(token);
    if (pos != std::string::npos) sentence.replace(pos, token.size(), value);
  };
  std::string readable = function;
  std::replace(readable.begin(), readable.end(), '_', ' ');
  replace("<HEADER>", header);
  replace("<FUNCTION>", readable);
  return sentence;
}

}  // namespace

CitoDecisionTree CitoDecisionTree::from_json(const Json& j, const std::set<std::string>& vocabulary) {
  CitoDecisionTree tree;
  tree.version_ = j.value("version", "1");
  std::string default_guide = j.value("guide_sentence", "");
  std::set<std::string> macro_keys;
  for (const auto& m : j.at("macro_categories")) {
    CitoMacroCategory macro;
    macro.id = m.at("id").get<std::string>();
    macro.label = m.value("label", macro.id);
    macro.guide_sentence = m.value("guide_sentence", default_guide);
    if (!macro_keys.insert(to_lower(macro.id)).second || !macro_keys.insert("label:" + to_lower(macro.label)).second)
      throw SchemaError("decision tree: duplicate macro category " + macro.id);
    std::set<std::string> headers;
    for (const auto& s : m.at("subcategories")) {
      CitoSubcategory sub;
      sub.header = s.at("header").get<std::string>();
      if (!headers.insert(to_lower(sub.header)).second)
        throw SchemaError("decision tree: duplicate subcategory '" + sub.header + "' in " + macro.id);
      std::set<std::string> rows;
      for (const auto& r : s.at("rows")) {
        CitoRow row;
        row.id = r.at("row").is_string() ? r.at("row").get<std::string>() : r.at("row").dump();
        if (!rows.insert(row.id).second)
          throw SchemaError("decision tree: duplicate row " + row.id + " under '" + sub.header + "'");
        std::set<std::string> codes;
        for (const auto& o : r.at("options")) {
          CitoOption opt{o.at("code").get<std::string>(), o.at("function").get<std::string>()};
          if (!codes.insert(opt.code).second)
            throw SchemaError("decision tree: duplicate option " + opt.code + " in row " + row.id);
          if (!vocabulary.count(opt.function))
            throw SchemaError("decision tree: '" + opt.function + "' is not a CiTO function");
          row.options.push_back(std::move(opt));
        }
        if (row.options.empty()) throw SchemaError("decision tree: row " + row.id + " has no options");
        sub.rows.push_back(std::move(row));
      }
      if (sub.rows.empty()) throw SchemaError("decision tree: subcategory '" + sub.header + "' has no rows");
      macro.subcategories.push_back(std::move(sub));
    }
    if (macro.subcategories.empty()) throw SchemaError("decision tree: macro " + macro.id + " has no subcategories");
    tree.macros_.push_back(std::move(macro));
  }
  if (tree.macros_.empty()) throw SchemaError("decision tree: no macro categories");
  return tree;
}

CitoDecisionTree CitoDecisionTree::from_file(const std::filesystem::path& path) { return from_json(read_json(path)); }

Json CitoDecisionTree::to_json() const {
  Json macros = Json::array();
  for (const auto& m : macros_) {
    Json subs = Json::array();
    for (const auto& s : m.subcategories) {
      Json rows = Json::array();
      for (const auto& r : s.rows) {
        Json options = Json::array();
        for (const auto& o : r.options) options.push_back({{"code", o.code}, {"function", o.function}});
        rows.push_back({{"row", r.id}, {"options", options}});
      }
      subs.push_back({{"header", s.header}, {"rows", rows}});
    }
    macros.push_back(
        {{"id", m.id}, {"label", m.label}, {"guide_sentence", m.guide_sentence}, {"subcategories", subs}});
  }
  return Json{{"version", version_}, {"macro_categories", macros}};
}

TraversalResult CitoDecisionTree::traverse(const std::vector<std::string>& path) const {
  TraversalResult result;
  if (path.empty()) {
    TreeStep step{"Why is the cited entity referred to?", {}};
    for (const auto& m : macros_) step.options.emplace_back(m.id, m.label);
    result.next = std::move(step);
    return result;
  }

  auto fail = [](const std::string& what, const std::string& got, std::vector<std::string> valid) -> void {
    std::string list;
    for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
    throw NavigationError("invalid " + what + " '" + got + "'; valid options: " + list, std::move(valid));
  };

  // Macro category.
  const CitoMacroCategory* macro = nullptr;
  {
    auto want = to_lower(path[0]);
    std::vector<const CitoMacroCategory*> prefix_hits;
    for (const auto& m : macros_) {
      if (to_lower(m.id) == want || to_lower(m.label) == want) {
        macro = &m;
        break;
      }
      if (!want.empty() && starts_with_ci(m.label, want)) prefix_hits.push_back(&m);
    }
    if (!macro && prefix_hits.size() == 1) macro = prefix_hits.front();
    if (!macro) {
      std::vector<std::string> valid;
      for (const auto& m : macros_) valid.push_back(m.id);
      fail("macro category", path[0], valid);
    }
  }
  result.guide_sentence = macro->guide_sentence;
  if (path.size() == 1) {
    TreeStep step{macro->guide_sentence, {}};
    for (const auto& s : macro->subcategories) step.options.emplace_back(s.header, s.header);
    result.next = std::move(step);
    return result;
  }

  const CitoSubcategory* sub = nullptr;
  for (const auto& s : macro->subcategories)
    if (to_lower(s.header) == to_lower(path[1])) sub = &s;
  if (!sub) {
    std::vector<std::string> valid;
    for (const auto& s : macro->subcategories) valid.push_back(s.header);
    fail("subcategory", path[1], valid);
  }
  result.guide_sentence = substitute(macro->guide_sentence, sub->header, "");
  if (path.size() == 2) {
    TreeStep step{result.guide_sentence, {}};
    for (const auto& r : sub->rows) {
      std::string display;
      for (const auto& o : r.options) display += (display.empty() ? "" : " ") + ("(" + o.code + ") " + o.function);
      step.options.emplace_back(r.id, display);
    }
    result.next = std::move(step);
    return result;
  }

  const CitoRow* row = nullptr;
  for (const auto& r : sub->rows)
    if (r.id == trim(path[2])) row = &r;
  if (!row) {
    std::vector<std::string> valid;
    for (const auto& r : sub->rows) valid.push_back(r.id);
    fail("row", path[2], valid);
  }
  if (path.size() == 3) {
    TreeStep step{result.guide_sentence, {}};
    for (const auto& o : row->options) step.options.emplace_back(o.code, o.function);
    result.next = std::move(step);
    return result;
  }

  const CitoOption* option = nullptr;
  for (const auto& o : row->options)
    if (o.code == trim(path[3]) || o.function == path[3]) option = &o;
  if (!option) {
    std::vector<std::string> valid;
    for (const auto& o : row->options) valid.push_back(o.code);
    fail("option", path[3], valid);
  }
  if (path.size() > 4) throw NavigationError("path continues past a leaf", {});
  result.function = option->function;
  result.guide_sentence = substitute(macro->guide_sentence, sub->header, option->function);
  return result;
}

std::vector<std::pair<std::vector<std::string>, std::string>> CitoDecisionTree::leaves() const {
  std::vector<std::pair<std::vector<std::string>, std::string>> out;
  for (const auto& m : macros_)
    for (const auto& s : m.subcategories)
      for (const auto& r : s.rows)
        for (const auto& o : r.options) out.push_back({{m.id, s.header, r.id, o.code}, o.function});
  return out;
}

// ---------------------------------------------------------------------------

std::string utc_now_iso8601() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json to_json(const AnnotationEvent& e) {
  return Json{{"seq", e.seq},
              {"citation_id", e.citation_id},
              {"sentiment", to_string(e.sentiment)},
              {"intent", e.intent},
              {"mentions_retraction", e.mentions_retraction},
              {"annotator", e.annotator},
              {"timestamp", e.timestamp}};
}

AnnotationEvent event_from_json(const Json& j) {
  AnnotationEvent e;
  e.seq = j.at("seq").get<long long>();
  e.citation_id = j.at("citation_id").get<std::string>();
  auto sentiment = sentiment_from_string(j.at("sentiment").get<std::string>());
  if (!sentiment) throw SchemaError("annotation event has an invalid sentiment");
  e.sentiment = *sentiment;
  e.intent = j.at("intent").get<std::string>();
  e.mentions_retraction = j.at("mentions_retraction").get<bool>();
  e.annotator = j.at("annotator").get<std::string>();
  e.timestamp = j.at("timestamp").get<std::string>();
  return e;
}

AnnotationState replay(std::string_view jsonl) {
  AnnotationState state;
  std::size_t line_no = 0;
  for (const auto& line : split(jsonl, "\n")) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto e = event_from_json(Json::parse(line));
      state[e.citation_id] = std::move(e);
    } catch (const Json::exception& ex) {
      throw SchemaError("annotation log line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return state;
}

Json state_to_json(const AnnotationState& state) {
  Json out = Json::object();
  for (const auto& [id, e] : state) out[id] = to_json(e);
  return out;
}

AnnotationStore::AnnotationStore(std::filesystem::path path, std::vector<InTextCitation> citations, Mode mode)
    : path_(std::move(path)), mode_(mode), citations_(std::move(citations)), vocabulary_(cito_vocabulary()),
      clock_(utc_now_iso8601) {
  for (std::size_t i = 0; i < citations_.size(); ++i) citation_index_[citations_[i].id] = i;

  if (mode_ == Mode::read_write) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    lock_path_ = path_;
    lock_path_ += ".lock";
    int fd = ::open(lock_path_.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd < 0) throw Error("cannot open lock file " + lock_path_.string());
    if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd);
      throw StoreLockedError("annotation store " + path_.string() + " is locked by another writer");
    }
    lock_fd_ = fd;
    locked_ = true;
  }

  if (std::filesystem::exists(path_)) {
    std::size_t line_no = 0;
    for (const auto& line : split(read_file(path_), "\n")) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        log_.push_back(event_from_json(Json::parse(line)));
      } catch (const Json::exception& ex) {
        throw SchemaError(path_.string() + ":" + std::to_string(line_no) + ": " + ex.what());
      }
      state_[log_.back().citation_id] = log_.back();
    }
  }
}

AnnotationStore::~AnnotationStore() {
  if (locked_) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

AnnotationEvent AnnotationStore::record(const AnnotationInput& input) {
  if (mode_ != Mode::read_write) throw Error("annotation store opened read-only");
  if (!citation_index_.count(input.citation_id))
    throw NotFoundError("unknown citation '" + input.citation_id + "'");
  std::map<std::string, std::string> errors;
  auto sentiment = sentiment_from_string(input.sentiment);
  if (!sentiment) errors["sentiment"] = "must be one of positive, negative, neutral; got '" + input.sentiment + "'";
  if (!vocabulary_.count(input.intent)) errors["intent"] = "'" + input.intent + "' is not a CiTO function";
  if (trim(input.annotator).empty()) errors["annotator"] = "required";
  if (!errors.empty()) throw ValidationError(std::move(errors));

  std::lock_guard lock(mutex_);
  AnnotationEvent e;
  e.seq = static_cast<long long>(log_.size()) + 1;
  e.citation_id = input.citation_id;
  e.sentiment = *sentiment;
  e.intent = input.intent;
  e.mentions_retraction = input.mentions_retraction;
  e.annotator = trim(input.annotator);
  e.timestamp = clock_();
  {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot append to " + path_.string());
    out << to_json(e).dump() << '\n';
    out.flush();
    if (!out) throw Error("write to " + path_.string() + " failed");
  }
  log_.push_back(e);
  state_[e.citation_id] = e;
  return e;
}

AnnotationState AnnotationStore::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::vector<AnnotationEvent> AnnotationStore::history(const std::string& citation_id) const {
  std::lock_guard lock(mutex_);
  std::vector<AnnotationEvent> out;
  for (const auto& e : log_)
    if (e.citation_id == citation_id) out.push_back(e);
  return out;
}

std::vector<AnnotationEvent> AnnotationStore::events() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::optional<InTextCitation> AnnotationStore::citation(const std::string& id) const {
  auto it = citation_index_.find(id);
  if (it == citation_index_.end()) return std::nullopt;
  return citations_[it->second];
}

std::vector<InTextCitation> AnnotationStore::unannotated() const {
  std::lock_guard lock(mutex_);
  std::vector<InTextCitation> out;
  for (const auto& c : citations_)
    if (!state_.count(c.id)) out.push_back(c);
  return out;
}

std::string export_csv(const AnnotationStore& store) {
  csv::Table table;
  table.header = {"citation_id", "citing_entity_id", "cited_item_id", "section",  "sentiment",
                  "intent",      "mentions_retraction", "annotator",  "timestamp"};
  auto state = store.state();
  for (const auto& c : store.citations()) {
    auto it = state.find(c.id);
    if (it == state.end()) {
      table.rows.push_back({c.id, c.citing_entity_id, c.cited_item_id, std::string(to_string(c.section)), "", "", "",
                            "", ""});
      continue;
    }
    const auto& e = it->second;
    table.rows.push_back({c.id, c.citing_entity_id, c.cited_item_id, std::string(to_string(c.section)),
                          std::string(to_string(e.sentiment)), e.intent, e.mentions_retraction ? "yes" : "no",
                          e.annotator, e.timestamp});
  }
  return csv::write(table);
}

std::size_t import_csv(AnnotationStore& store, std::string_view csv_text) {
  auto table = csv::parse(csv_text, csv::sniff_separator(csv_text));
  auto col = [&](const char* name) {
    auto c = table.column(name);
    if (!c) throw SchemaError(std::string("annotation CSV lacks column '") + name + "'");
    return *c;
  };
  auto c_id = col("citation_id"), c_sent = col("sentiment"), c_intent = col("intent");
  auto c_mention = col("mentions_retraction"), c_ann = col("annotator");
  std::size_t count = 0;
  for (const auto& row : table.rows) {
    auto cell = [&](std::size_t i) { return i < row.size() ? trim(row[i]) : std::string(); };
    if (cell(c_sent).empty() && cell(c_intent).empty()) continue;  // unannotated export row
    auto mention = to_lower(cell(c_mention));
    store.record({cell(c_id), cell(c_sent), cell(c_intent), mention == "yes" || mention == "true" || mention == "1",
                  cell(c_ann)});
    ++count;
  }
  return count;
}

}  // namespace retrace::annotation
