#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "retrace/util.hpp"

namespace retrace::annotation {

enum class SectionLabel {
  introduction,
  method,
  abstract,
  results,
  conclusions,
  background,
  discussion,
  first_section,
  middle_section,
  final_section,
};

std::string_view to_string(SectionLabel s);
SectionLabel section_from_string(std::string_view s);

enum class Sentiment { positive, negative, neutral };

std::string_view to_string(Sentiment s);
std::optional<Sentiment> sentiment_from_string(std::string_view s);

struct CitationContext {
  std::optional<std::string> preceding;
  std::string anchor;
  std::optional<std::string> following;

  std::size_t size() const { return 1 + (preceding ? 1 : 0) + (following ? 1 : 0); }
  bool operator==(const CitationContext&) const = default;
};

struct InTextCitation {
  std::string id;
  std::string citing_entity_id;
  std::string cited_item_id;
  std::string pointer_text;
  SectionLabel section = SectionLabel::middle_section;
  CitationContext context;
};

Json to_json(const InTextCitation& c);
InTextCitation citation_from_json(const Json& j);
std::vector<InTextCitation> citations_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Context extraction

struct Sentence {
  std::string text;
  int paragraph = 0;
};

// Rule-based splitter on [.!?] that skips common abbreviations, initials and decimals,
// and does not break inside parentheses or quotes. Blank lines start a new paragraph.
std::vector<Sentence> split_sentences(std::string_view text);

struct ContextResult {
  CitationContext context;
  std::vector<std::string> warnings;
};

// Anchor plus the neighbouring sentence on each side within the same paragraph.
// Throws DomainError when anchor_index is out of range.
ContextResult extract_context(const std::vector<Sentence>& sentences, std::size_t anchor_index,
                              std::optional<std::string_view> pointer_text = std::nullopt);
ContextResult extract_context(const std::vector<std::string>& sentences, std::size_t anchor_index,
                              std::optional<std::string_view> pointer_text = std::nullopt);

// ---------------------------------------------------------------------------
// Section classification

struct SectionSynonyms {
  std::vector<std::pair<std::string, SectionLabel>> entries;  // lowercase phrase -> label

  static SectionSynonyms defaults();
  static SectionSynonyms from_json(const Json& j);  // {"label": ["phrase", ...]}
};

inline constexpr double kFirstSectionBound = 1.0 / 3.0;
inline constexpr double kFinalSectionBound = 2.0 / 3.0;

SectionLabel classify_section(std::string_view section_title, double relative_position,
                              const SectionSynonyms& synonyms = SectionSynonyms::defaults());

// ---------------------------------------------------------------------------
// CiTO decision model

const std::set<std::string>& cito_vocabulary();

class NavigationError : public Error {
 public:
  NavigationError(const std::string& message, std::vector<std::string> valid_options)
      : Error(message), valid_options_(std::move(valid_options)) {}
  const std::vector<std::string>& valid_options() const { return valid_options_; }

 private:
  std::vector<std::string> valid_options_;
};

struct CitoOption {
  std::string code;  // "0.4"
  std::string function;
};

struct CitoRow {
  std::string id;  // "10"; opaque
  std::vector<CitoOption> options;
};

struct CitoSubcategory {
  std::string header;  // "Inconsistent with"
  std::vector<CitoRow> rows;
};

struct CitoMacroCategory {
  std::string id;
  std::string label;
  std::string guide_sentence;  // with <HEADER> and <FUNCTION> placeholders
  std::vector<CitoSubcategory> subcategories;
};

struct TreeStep {
  std::string question;
  std::vector<std::pair<std::string, std::string>> options;  // (key, display label)
};

struct TraversalResult {
  std::optional<std::string> function;  // set once a leaf is reached
  std::optional<TreeStep> next;         // set while the path is partial
  std::string guide_sentence;           // with the choices made so far substituted
};

class CitoDecisionTree {
 public:
  // Validates every leaf against `vocabulary` and rejects duplicate keys that would hide a leaf.
  static CitoDecisionTree from_json(const Json& j, const std::set<std::string>& vocabulary = cito_vocabulary());
  static CitoDecisionTree from_file(const std::filesystem::path& path);
  Json to_json() const;

  const std::string& version() const { return version_; }
  const std::vector<CitoMacroCategory>& macro_categories() const { return macros_; }

  // Path elements: macro id or label (a unique case-insensitive label prefix also works),
  // subcategory header, row id, option code. Throws NavigationError on an invalid step.
  TraversalResult traverse(const std::vector<std::string>& path) const;

  // Every (path, function) pair, in config order.
  std::vector<std::pair<std::vector<std::string>, std::string>> leaves() const;

 private:
  std::string version_;
  std::vector<CitoMacroCategory> macros_;
};

// ---------------------------------------------------------------------------
// Append-only annotation store

struct AnnotationEvent {
  long long seq = 0;
  std::string citation_id;
  Sentiment sentiment = Sentiment::neutral;
  std::string intent;
  bool mentions_retraction = false;
  std::string annotator;
  std::string timestamp;  // ISO-8601 UTC

  bool operator==(const AnnotationEvent&) const = default;
};

Json to_json(const AnnotationEvent& e);
AnnotationEvent event_from_json(const Json& j);

class StoreLockedError : public Error {
 public:
  using Error::Error;
};

struct AnnotationInput {
  std::string citation_id;
  std::string sentiment;
  std::string intent;
  bool mentions_retraction = false;
  std::string annotator;
};

using AnnotationState = std::map<std::string, AnnotationEvent>;  // latest event per citation

// Rebuilds the latest-per-citation state from JSON-lines text.
AnnotationState replay(std::string_view jsonl);
Json state_to_json(const AnnotationState& state);

class AnnotationStore {
 public:
  enum class Mode { read_write, read_only };

  // read_write takes <path>.lock exclusively; a held lock raises StoreLockedError.
  AnnotationStore(std::filesystem::path path, std::vector<InTextCitation> citations, Mode mode = Mode::read_write);
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Validates and appends. Throws NotFoundError for an unknown citation, ValidationError for bad fields.
  AnnotationEvent record(const AnnotationInput& input);

  AnnotationState state() const;
  std::vector<AnnotationEvent> history(const std::string& citation_id) const;
  std::vector<AnnotationEvent> events() const;
  std::optional<InTextCitation> citation(const std::string& id) const;
  std::vector<InTextCitation> citations() const { return citations_; }
  std::vector<InTextCitation> unannotated() const;
  const std::filesystem::path& path() const { return path_; }

  void set_clock(std::function<std::string()> clock) { clock_ = std::move(clock); }
  void set_vocabulary(std::set<std::string> vocabulary) { vocabulary_ = std::move(vocabulary); }

 private:
  std::filesystem::path path_;
  std::filesystem::path lock_path_;
  Mode mode_;
  bool locked_ = false;
  int lock_fd_ = -1;
  std::vector<InTextCitation> citations_;
  std::map<std::string, std::size_t> citation_index_;
  std::set<std::string> vocabulary_;
  std::function<std::string()> clock_;

  mutable std::mutex mutex_;
  std::vector<AnnotationEvent> log_;
  AnnotationState state_;
};

std::string utc_now_iso8601();

// citation_id,citing_entity_id,cited_item_id,section,sentiment,intent,mentions_retraction,annotator,timestamp
std::string export_csv(const AnnotationStore& store);
// Records one event per row (citation_id,sentiment,intent,mentions_retraction,annotator); returns the count.
std::size_t import_csv(AnnotationStore& store, std::string_view csv_text);

}  // namespace retrace::annotation
