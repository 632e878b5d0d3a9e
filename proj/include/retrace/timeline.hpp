#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retrace/citation_harvest.hpp"
#include "retrace/corpus_ingest.hpp"

namespace retrace::timeline {

enum class Period { P_PRE, P_RET, P_POST };
enum class Fifth { F1, F2, F3, F4, F5 };

std::string_view to_string(Period p);
Period period_from_string(std::string_view s);
std::string_view to_string(Fifth f);
Fifth fifth_from_string(std::string_view s);
// "[-1.00, -0.61]", ..., "[0.61, 1.00]"
std::string_view label(Fifth f);

struct PeriodAssignment {
  Period period = Period::P_RET;
  std::optional<int> position_hundredths;  // normalized position on the 2-decimal grid, -100..100
  std::optional<Fifth> fifth;

  std::optional<double> position() const {
    if (!position_hundredths) return std::nullopt;
    return *position_hundredths / 100.0;
  }
  bool operator==(const PeriodAssignment&) const = default;
};

// 2*(offset)/(span) - 1 on the hundredths grid, rounded half away from zero.
// A zero-length span maps to the final border (100).
int normalized_hundredths(int year, int first, int last);

// Bins a grid position; the five labels partition [-100, 100].
Fifth fifth_for(int hundredths);

// Throws DomainError when citing_year < pub_year, pub_year > retraction_year,
// or a post-retraction citation lies beyond last_citation_year.
PeriodAssignment assign_period(int citing_year, int pub_year, int retraction_year, int last_citation_year);

struct PairAssignment {
  std::string citing_id;
  std::string cited_id;
  int citing_year = 0;
  PeriodAssignment assignment;
};

struct RejectedPair {
  std::string citing_id;
  std::string cited_id;
  std::string error;
};

struct Segmentation {
  std::vector<PairAssignment> assignments;  // sorted by (cited_id, citing_id)
  std::vector<RejectedPair> rejected;
};

// One assignment per (citing entity, cited item) pair. The last citation year of each
// cited item is the latest year among its valid citing entities.
Segmentation segment(const std::vector<ingest::RetractedPublication>& records,
                     const std::vector<harvest::CitingEntity>& entities);

struct CitationSeries {
  // discipline -> (years after retraction -> count); "all" holds the aggregate
  std::map<std::string, std::map<int, long long>> counts;
  std::map<std::string, double> avg_retraction_time;
};

inline constexpr const char* kAllDisciplines = "all";

CitationSeries build_series(const std::vector<ingest::RetractedPublication>& records,
                            const std::vector<PairAssignment>& assignments);

Json to_json(const PeriodAssignment& a);
PeriodAssignment assignment_from_json(const Json& j);
Json to_json(const Segmentation& s);
Segmentation segmentation_from_json(const Json& j);
Json to_json(const CitationSeries& s);
// discipline,years_after_retraction,count
std::string series_csv(const CitationSeries& s);

}  // namespace retrace::timeline
