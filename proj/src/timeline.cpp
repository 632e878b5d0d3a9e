#include "retrace/timeline.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "retrace/csv.hpp"

namespace retrace::timeline {

namespace {

constexpr std::string_view kFifthLabels[] = {"[-1.00, -0.61]", "[-0.60, -0.21]", "[-0.20, 0.20]", "[0.21, 0.60]",
                                             "[0.61, 1.00]"};

long long div_round_half_away(long long num, long long den) {
  if (num >= 0) return (2 * num + den) / (2 * den);
  return -((2 * -num + den) / (2 * den));
}

}  // namespace

std::string_view to_string(Period p) {
  switch (p) {
    case Period::P_PRE: return "P_PRE";
    case Period::P_RET: return "P_RET";
    case Period::P_POST: return "P_POST";
  }
  return "P_RET";
}

Period period_from_string(std::string_view s) {
  if (s == "P_PRE") return Period::P_PRE;
  if (s == "P_RET") return Period::P_RET;
  if (s == "P_POST") return Period::P_POST;
  throw SchemaError("unknown period: " + std::string(s));
}

std::string_view to_string(Fifth f) {
  static constexpr std::string_view names[] = {"F1", "F2", "F3", "F4", "F5"};
  return names[static_cast<int>(f)];
}

Fifth fifth_from_string(std::string_view s) {
  for (int i = 0; i < 5; ++i) {
    auto f = static_cast<Fifth>(i);
    if (s == to_string(f) || s == label(f)) return f;
  }
  throw SchemaError("unknown fifth: " + std::string(s));
}

std::string_view label(Fifth f) { return kFifthLabels[static_cast<int>(f)]; }

int normalized_hundredths(int year, int first, int last) {
  long long span = static_cast<long long>(last) - first;
  if (span <= 0) return 100;
  long long num = 100LL * (2LL * (year - first) - span);
  return static_cast<int>(div_round_half_away(num, span));
}

Fifth fifth_for(int h) {
  if (h <= -61) return Fifth::F1;
  if (h <= -21) return Fifth::F2;
  if (h <= 20) return Fifth::F3;
  if (h <= 60) return Fifth::F4;
  return Fifth::F5;
}

PeriodAssignment assign_period(int y, int p, int r, int last) {
  if (p > r)
    throw DomainError("publication year " + std::to_string(p) + " after retraction year " + std::to_string(r));
  if (y < p)
    throw DomainError("citation year " + std::to_string(y) + " predates publication year " + std::to_string(p));
  PeriodAssignment a;
  if (y == r) {
    a.period = Period::P_RET;
    return a;
  }
  int h = 0;
  if (y < r) {
    a.period = Period::P_PRE;
    h = normalized_hundredths(y, p, r - 1);
  } else {
    if (last < y)
      throw DomainError("citation year " + std::to_string(y) + " after last citation year " + std::to_string(last));
    a.period = Period::P_POST;
    h = normalized_hundredths(y, r + 1, last);
  }
  a.position_hundredths = h;
  a.fifth = fifth_for(h);
  return a;
}

Segmentation segment(const std::vector<ingest::RetractedPublication>& records,
                     const std::vector<harvest::CitingEntity>& entities) {
  std::map<std::string, const ingest::RetractedPublication*> by_id;
  for (const auto& r : records) {
    by_id[r.id] = &r;
    if (r.doi) by_id[*r.doi] = &r;
  }

  struct Pair {
    const harvest::CitingEntity* entity;
    const ingest::RetractedPublication* cited;
  };
  Segmentation out;
  std::vector<Pair> valid;
  std::map<std::string, int> last_year;
  for (const auto& e : entities) {
    for (const auto& cited_ref : e.cited_items) {
      auto it = by_id.find(cited_ref);
      if (it == by_id.end()) {
        out.rejected.push_back({e.id, cited_ref, "cited item not among the records"});
        continue;
      }
      const auto* rec = it->second;
      if (!e.year) {
        out.rejected.push_back({e.id, rec->id, "citing entity has no year"});
        continue;
      }
      if (*e.year < rec->pub_year) {
        out.rejected.push_back({e.id, rec->id,
                                "citation year " + std::to_string(*e.year) + " predates publication year " +
                                    std::to_string(rec->pub_year)});
        continue;
      }
      valid.push_back({&e, rec});
      auto& last = last_year[rec->id];
      last = std::max(last, *e.year);
    }
  }
  for (const auto& pair : valid) {
    int y = *pair.entity->year;
    out.assignments.push_back({pair.entity->id, pair.cited->id, y,
                               assign_period(y, pair.cited->pub_year, pair.cited->retraction_year,
                                             last_year[pair.cited->id])});
  }
  std::sort(out.assignments.begin(), out.assignments.end(), [](const auto& a, const auto& b) {
    return std::tie(a.cited_id, a.citing_id) < std::tie(b.cited_id, b.citing_id);
  });
  out.assignments.erase(std::unique(out.assignments.begin(), out.assignments.end(),
                                    [](const auto& a, const auto& b) {
                                      return a.cited_id == b.cited_id && a.citing_id == b.citing_id;
                                    }),
                        out.assignments.end());
  return out;
}

CitationSeries build_series(const std::vector<ingest::RetractedPublication>& records,
                            const std::vector<PairAssignment>& assignments) {
  std::map<std::string, const ingest::RetractedPublication*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;

  CitationSeries s;
  auto bump = [&](const std::string& key, int offset) { ++s.counts[key][offset]; };
  for (const auto& a : assignments) {
    auto it = by_id.find(a.cited_id);
    if (it == by_id.end()) throw DomainError("assignment references unknown item " + a.cited_id);
    int offset = a.citing_year - it->second->retraction_year;
    bump(kAllDisciplines, offset);
    for (const auto& d : std::set<std::string>(it->second->humanities_disciplines.begin(),
                                               it->second->humanities_disciplines.end()))
      bump(d, offset);
  }
  for (auto& [key, series] : s.counts) {
    if (series.empty()) continue;
    int lo = series.begin()->first, hi = series.rbegin()->first;
    for (int k = lo; k <= hi; ++k) series.try_emplace(k, 0);
  }

  std::map<std::string, std::pair<long long, long long>> sums;
  for (const auto& r : records) {
    long long gap = r.retraction_year - r.pub_year;
    auto add = [&](const std::string& key) {
      sums[key].first += gap;
      ++sums[key].second;
    };
    add(kAllDisciplines);
    for (const auto& d : std::set<std::string>(r.humanities_disciplines.begin(), r.humanities_disciplines.end()))
      add(d);
  }
  for (const auto& [key, sum] : sums)
    s.avg_retraction_time[key] = static_cast<double>(sum.first) / static_cast<double>(sum.second);
  return s;
}

Json to_json(const PeriodAssignment& a) {
  Json j{{"period", to_string(a.period)}};
  if (a.position_hundredths) {
    j["position"] = *a.position();
    j["position_hundredths"] = *a.position_hundredths;
  }
  if (a.fifth) {
    j["fifth"] = to_string(*a.fifth);
    j["fifth_label"] = label(*a.fifth);
  }
  return j;
}

PeriodAssignment assignment_from_json(const Json& j) {
  PeriodAssignment a;
  a.period = period_from_string(j.at("period").get<std::string>());
  if (j.contains("position_hundredths")) a.position_hundredths = j.at("position_hundredths").get<int>();
  if (j.contains("fifth")) a.fifth = fifth_from_string(j.at("fifth").get<std::string>());
  if ((a.period == Period::P_RET) != !a.fifth.has_value())
    throw SchemaError("fifth must be present exactly when the period is not P_RET");
  return a;
}

Json to_json(const Segmentation& s) {
  Json arr = Json::array();
  for (const auto& a : s.assignments) {
    Json row = to_json(a.assignment);
    row["citing_id"] = a.citing_id;
    row["cited_id"] = a.cited_id;
    row["citing_year"] = a.citing_year;
    arr.push_back(std::move(row));
  }
  Json rejected = Json::array();
  for (const auto& r : s.rejected)
    rejected.push_back({{"citing_id", r.citing_id}, {"cited_id", r.cited_id}, {"error", r.error}});
  return Json{{"schema_version", 1}, {"assignments", arr}, {"rejected", rejected}};
}

Segmentation segmentation_from_json(const Json& j) {
  Segmentation s;
  for (const auto& row : j.at("assignments")) {
    s.assignments.push_back({row.at("citing_id").get<std::string>(), row.at("cited_id").get<std::string>(),
                             row.at("citing_year").get<int>(), assignment_from_json(row)});
  }
  for (const auto& row : j.value("rejected", Json::array()))
    s.rejected.push_back({row.at("citing_id").get<std::string>(), row.at("cited_id").get<std::string>(),
                          row.value("error", "")});
  return s;
}

Json to_json(const CitationSeries& s) {
  Json counts = Json::object();
  for (const auto& [key, series] : s.counts) {
    Json points = Json::array();
    for (const auto& [offset, n] : series) points.push_back({{"years_after_retraction", offset}, {"count", n}});
    counts[key] = points;
  }
  return Json{{"schema_version", 1}, {"series", counts}, {"avg_retraction_time", s.avg_retraction_time}};
}

std::string series_csv(const CitationSeries& s) {
  std::string out = "discipline,years_after_retraction,count\n";
  for (const auto& [key, series] : s.counts)
    for (const auto& [offset, n] : series)
      out += csv::escape(key) + "," + std::to_string(offset) + "," + std::to_string(n) + "\n";
  return out;
}

}  // namespace retrace::timeline
