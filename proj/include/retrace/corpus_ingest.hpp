#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retrace/util.hpp"

namespace retrace::ingest {

enum class SubjectSource { retraction_db, venue_lookup };

struct SubjectTag {
  std::string label;
  bool is_humanities = false;
  SubjectSource source = SubjectSource::retraction_db;

  bool operator==(const SubjectTag&) const = default;
};

enum class ItemType { article, book_chapter, commentary_editorial, other };

std::string_view to_string(ItemType t);
ItemType item_type_from_string(std::string_view s);
// Buckets free-text export values ("Research Article", "Book Chapter/Reference Work", ...).
ItemType classify_item_type(std::string_view raw);

struct RetractedPublication {
  std::string id;
  std::optional<std::string> doi;
  std::string title;
  int pub_year = 0;
  int retraction_year = 0;
  std::vector<SubjectTag> subjects;
  std::vector<std::string> humanities_disciplines;
  std::vector<std::string> reasons;
  ItemType item_type = ItemType::other;
  std::string venue_title;
  std::vector<std::string> venue_ids;
  bool excluded = false;
  std::string exclusion_rationale;

  bool operator==(const RetractedPublication&) const = default;
};

// Lowercased subject label with any leading "(CODE) " prefix removed: "(HUM) History" -> "history".
std::string subject_key(std::string_view label);

// Maps canonical field names to input column headers.
struct ColumnMapping {
  std::map<std::string, std::string> columns;
  std::string delimiter = ";";
  std::string humanities_marker = "(HUM)";

  static ColumnMapping canonical();
  static ColumnMapping retraction_watch();
  static ColumnMapping from_json(const Json& j);
  Json to_json() const;
};

struct RejectedRow {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string error;
  std::vector<std::string> raw;
};

struct ParseResult {
  std::vector<RetractedPublication> records;
  std::vector<RejectedRow> rejects;
};

// Throws SchemaError when a required column is missing from the header.
ParseResult parse_retraction_records(std::string_view csv_text, const ColumnMapping& mapping);

// Canonical CSV for the given records, readable by parse_retraction_records with ColumnMapping::canonical().
std::string serialize_records_csv(const std::vector<RetractedPublication>& records,
                                  const ColumnMapping& mapping = ColumnMapping::canonical());

std::vector<RetractedPublication> filter_humanities(const std::vector<RetractedPublication>& records);

struct ExclusionEntry {
  std::string id;
  std::string rationale;
};

struct ExclusionResult {
  std::vector<RetractedPublication> records;  // all input records, excluded ones flagged
  std::vector<std::string> warnings;
};

ExclusionResult apply_exclusions(std::vector<RetractedPublication> records,
                                 const std::vector<ExclusionEntry>& exclusions);

std::vector<RetractedPublication> selected(const std::vector<RetractedPublication>& records);

struct RetractionSummary {
  std::map<int, long long> per_year;
  std::map<std::string, long long> per_discipline;
  std::map<std::string, long long> per_reason;
  std::map<std::string, long long> per_type;

  bool operator==(const RetractionSummary&) const = default;
};

RetractionSummary summarize_retractions(const std::vector<RetractedPublication>& records);

Json to_json(const RetractedPublication& r);
RetractedPublication publication_from_json(const Json& j);
Json records_to_json(const std::vector<RetractedPublication>& records);
std::vector<RetractedPublication> records_from_json(const Json& j);
Json to_json(const std::vector<RejectedRow>& rejects);
Json to_json(const RetractionSummary& s);
std::vector<ExclusionEntry> exclusions_from_json(const Json& j);

}  // namespace retrace::ingest
