#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retrace/annotation.hpp"
#include "retrace/citation_harvest.hpp"
#include "retrace/corpus_ingest.hpp"
#include "retrace/timeline.hpp"
#include "retrace/util.hpp"

namespace retrace::reports {

struct ReportOptions {
  // Whether entities without accessible full text count in the retraction-mention denominator.
  bool mention_denominator_includes_unavailable = true;
};

struct Snapshot {
  std::vector<ingest::RetractedPublication> records;
  std::vector<harvest::CitingEntity> entities;
  std::vector<timeline::PairAssignment> assignments;
  std::vector<annotation::InTextCitation> in_text;
  annotation::AnnotationState annotations;
};

struct Row {
  std::map<std::string, long long> counts;
  long long total = 0;
  // Two-decimal shares of `total`, each rounded on its own (a row may sum to 99.99 or 100.01).
  std::map<std::string, double> percent;
};

struct CountTable {
  std::string row_key;
  std::string column_key;
  std::string unit;
  std::vector<std::string> columns;
  std::map<std::string, Row> rows;
};

struct Rate {
  long long numerator = 0;
  long long denominator = 0;
  double percent = 0;  // rounded to 2 decimals
};

struct Report {
  long long retracted_items = 0;
  long long citing_entities = 0;
  long long citation_pairs = 0;
  long long in_text_citations = 0;
  long long unannotated = 0;
  std::map<std::string, long long> entities_per_period;

  CountTable citing_by_period_and_discipline;
  CountTable subject_areas_by_period;
  std::map<std::string, CountTable> subject_areas_by_discipline;
  CountTable mention_status_by_period;
  CountTable fifth_histograms;
  CountTable in_text_by_period_sentiment;
  CountTable in_text_by_intent_sentiment;
  CountTable in_text_by_section_sentiment;
  Rate retraction_mentions;
  Rate fulltext_unavailable;
  ReportOptions options;
};

inline constexpr const char* kUnclassifiedArea = "Unclassified";
inline constexpr const char* kUnannotated = "unannotated";

// Share of each count in the row total, as a percentage rounded to hundredths.
std::map<std::string, double> rounded_shares(const std::map<std::string, long long>& counts);

// Throws DomainError on a snapshot without period assignments.
Report descriptive_report(const Snapshot& snapshot, const ReportOptions& options = {});

Json to_json(const CountTable& t);
Json to_json(const Report& r);

// Inputs of the topics part of a bundle; all absent when no model was fitted.
struct TopicOutputs {
  Json topic_map;       // visualization bundle: map, phi, p(w), vocabulary
  Json relevance;       // ranking at the configured lambda
  Json grouped_topics;  // group_key -> grouped table
  std::string corpus_ref;
  std::string model_ref;
};

struct BundleArtifact {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

struct ExportResult {
  std::filesystem::path directory;
  std::vector<BundleArtifact> artifacts;
  Json manifest;
};

// Builds the bundle in a sibling temporary directory and renames it into place.
ExportResult export_visualization(const Json& report, const std::optional<TopicOutputs>& topics,
                                  const std::string& series_csv, const std::filesystem::path& destination);
ExportResult export_visualization(const Report& report, const std::optional<TopicOutputs>& topics,
                                  const std::string& series_csv, const std::filesystem::path& destination);

// Minimal headless bar chart.
std::string bar_chart_svg(const std::string& title, const std::vector<std::pair<std::string, double>>& bars);

}  // namespace retrace::reports
