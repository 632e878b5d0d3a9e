#include "retrace/reports.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unistd.h>

namespace retrace::reports {

namespace {

using timeline::Period;

void add(CountTable& t, const std::string& row, const std::string& column, long long n = 1) {
  auto& r = t.rows[row];
  r.counts[column] += n;
  r.total += n;
}

// Zero-fills the declared columns of every row and computes row shares.
void finalize(CountTable& t) {
  for (auto& [_, row] : t.rows) {
    for (const auto& c : t.columns) row.counts.try_emplace(c, 0);
    row.percent = rounded_shares(row.counts);
  }
}

CountTable make_table(std::string row_key, std::string column_key, std::string unit,
                      std::vector<std::string> columns = {}) {
  CountTable t;
  t.row_key = std::move(row_key);
  t.column_key = std::move(column_key);
  t.unit = std::move(unit);
  t.columns = std::move(columns);
  return t;
}

void collect_columns(CountTable& t) {
  std::set<std::string> seen(t.columns.begin(), t.columns.end());
  std::set<std::string> extra;
  for (const auto& [_, row] : t.rows)
    for (const auto& [c, _n] : row.counts)
      if (!seen.count(c)) extra.insert(c);
  t.columns.insert(t.columns.end(), extra.begin(), extra.end());
}

Rate make_rate(long long num, long long den) { return Rate{num, den, percent(num, den)}; }

std::vector<std::string> period_names() {
  return {std::string(to_string(Period::P_PRE)), std::string(to_string(Period::P_RET)),
          std::string(to_string(Period::P_POST))};
}

}  // namespace

std::map<std::string, double> rounded_shares(const std::map<std::string, long long>& counts) {
  long long total = 0;
  for (const auto& [_, n] : counts) total += n;
  std::map<std::string, double> out;
  for (const auto& [k, n] : counts) out[k] = percent(n, total);
  return out;
}

Report descriptive_report(const Snapshot& s, const ReportOptions& options) {
  if (s.assignments.empty()) throw DomainError("snapshot has no period assignments; nothing to report");

  std::map<std::string, const harvest::CitingEntity*> entities;
  for (const auto& e : s.entities) entities[e.id] = &e;
  std::map<std::string, const ingest::RetractedPublication*> records;
  for (const auto& r : s.records) records[r.id] = &r;

  using PairKey = std::pair<std::string, std::string>;
  std::map<PairKey, const timeline::PairAssignment*> pairs;
  for (const auto& a : s.assignments) {
    if (!entities.count(a.citing_id)) throw SchemaError("assignment references unknown citing entity " + a.citing_id);
    if (!records.count(a.cited_id)) throw SchemaError("assignment references unknown retracted item " + a.cited_id);
    pairs[{a.citing_id, a.cited_id}] = &a;
  }

  // Retraction mentions come from the entity flag or from any annotated in-text citation.
  std::set<PairKey> mentioned;
  for (const auto& [key, _] : pairs)
    if (entities.at(key.first)->mentions_retraction.value_or(false)) mentioned.insert(key);
  for (const auto& c : s.in_text) {
    auto it = s.annotations.find(c.id);
    if (it != s.annotations.end() && it->second.mentions_retraction)
      mentioned.insert({c.citing_entity_id, c.cited_item_id});
  }

  Report r;
  r.options = options;
  const auto periods = period_names();
  for (const auto& rec : s.records)
    if (!rec.excluded) ++r.retracted_items;

  r.citing_by_period_and_discipline = make_table("discipline", "period", "citation pair", periods);
  r.subject_areas_by_period = make_table("period", "subject_area", "citation pair x subject area");
  r.mention_status_by_period = make_table("period", "mention_status", "citation pair",
                                          {"mentioned", "not_mentioned", "full_text_unavailable"});
  std::vector<std::string> fifth_columns;
  for (auto f : {timeline::Fifth::F1, timeline::Fifth::F2, timeline::Fifth::F3, timeline::Fifth::F4,
                 timeline::Fifth::F5})
    fifth_columns.emplace_back(timeline::label(f));
  fifth_columns.emplace_back("P-Ret");
  r.fifth_histograms = make_table("period", "fifth", "citation pair");

  std::set<std::string> all_entities;
  std::map<std::string, std::set<std::string>> entities_by_period;
  std::set<std::string> late_entities, late_mentioning;

  for (const auto& [key, a] : pairs) {
    const auto& entity = *entities.at(key.first);
    const auto& record = *records.at(key.second);
    const std::string period(to_string(a->assignment.period));
    all_entities.insert(entity.id);
    entities_by_period[period].insert(entity.id);

    add(r.citing_by_period_and_discipline, "all", period);
    std::set<std::string> disciplines(record.humanities_disciplines.begin(), record.humanities_disciplines.end());
    if (disciplines.empty()) disciplines.insert("unspecified");
    std::set<std::string> areas(entity.subject_areas.begin(), entity.subject_areas.end());
    if (areas.empty()) areas.insert(kUnclassifiedArea);
    for (const auto& d : disciplines) {
      add(r.citing_by_period_and_discipline, d, period);
      auto [it, fresh] = r.subject_areas_by_discipline.try_emplace(d);
      if (fresh) it->second = make_table("period", "subject_area", "citation pair x subject area");
      for (const auto& area : areas) add(it->second, period, area);
    }
    for (const auto& area : areas) add(r.subject_areas_by_period, period, area);

    const bool mentions = mentioned.count(key) > 0;
    std::string status = !entity.full_text_available ? "full_text_unavailable" : mentions ? "mentioned" : "not_mentioned";
    add(r.mention_status_by_period, period, status);

    if (a->assignment.fifth) {
      add(r.fifth_histograms, period, std::string(timeline::label(*a->assignment.fifth)));
    } else {
      add(r.fifth_histograms, period, "P-Ret");
    }

    if (a->assignment.period != Period::P_PRE) {
      if (entity.full_text_available || options.mention_denominator_includes_unavailable)
        late_entities.insert(entity.id);
      if (entity.full_text_available && mentions) late_mentioning.insert(entity.id);
    }
  }

  // Each period row only carries the columns that apply to it.
  for (auto& [period, row] : r.fifth_histograms.rows) {
    if (period == to_string(Period::P_RET)) continue;
    for (std::size_t i = 0; i + 1 < fifth_columns.size(); ++i) row.counts.try_emplace(fifth_columns[i], 0);
    row.percent = rounded_shares(row.counts);
  }
  if (auto it = r.fifth_histograms.rows.find(std::string(to_string(Period::P_RET)));
      it != r.fifth_histograms.rows.end())
    it->second.percent = rounded_shares(it->second.counts);
  r.fifth_histograms.columns = fifth_columns;

  r.citation_pairs = static_cast<long long>(pairs.size());
  r.citing_entities = static_cast<long long>(all_entities.size());
  for (const auto& p : periods) r.entities_per_period[p] = static_cast<long long>(entities_by_period[p].size());

  long long unavailable = 0;
  for (const auto& id : all_entities)
    if (!entities.at(id)->full_text_available) ++unavailable;
  r.fulltext_unavailable = make_rate(unavailable, r.citing_entities);
  r.retraction_mentions =
      make_rate(static_cast<long long>(late_mentioning.size()), static_cast<long long>(late_entities.size()));

  // In-text citations are only counted when their citing/cited pair is part of the snapshot.
  const std::vector<std::string> sentiments{"positive", "neutral", "negative", kUnannotated};
  r.in_text_by_period_sentiment = make_table("period", "sentiment", "in-text citation", sentiments);
  r.in_text_by_intent_sentiment = make_table("intent", "sentiment", "in-text citation", sentiments);
  r.in_text_by_section_sentiment = make_table("section", "sentiment", "in-text citation", sentiments);
  for (const auto& c : s.in_text) {
    auto pit = pairs.find({c.citing_entity_id, c.cited_item_id});
    if (pit == pairs.end()) continue;
    ++r.in_text_citations;
    std::string sentiment = kUnannotated, intent = kUnannotated;
    if (auto it = s.annotations.find(c.id); it != s.annotations.end()) {
      sentiment = std::string(annotation::to_string(it->second.sentiment));
      intent = it->second.intent;
    } else {
      ++r.unannotated;
    }
    add(r.in_text_by_period_sentiment, std::string(to_string(pit->second->assignment.period)), sentiment);
    add(r.in_text_by_intent_sentiment, intent, sentiment);
    add(r.in_text_by_section_sentiment, std::string(annotation::to_string(c.section)), sentiment);
  }

  for (auto* t : {&r.citing_by_period_and_discipline, &r.mention_status_by_period, &r.in_text_by_period_sentiment,
                  &r.in_text_by_intent_sentiment, &r.in_text_by_section_sentiment}) {
    finalize(*t);
  }
  collect_columns(r.subject_areas_by_period);
  finalize(r.subject_areas_by_period);
  for (auto& [_, t] : r.subject_areas_by_discipline) {
    collect_columns(t);
    finalize(t);
  }
  return r;
}

Json to_json(const CountTable& t) {
  Json rows = Json::object();
  for (const auto& [key, row] : t.rows) {
    Json counts = Json::object(), pct = Json::object();
    for (const auto& [c, n] : row.counts) counts[c] = n;
    for (const auto& [c, p] : row.percent) pct[c] = p;
    rows[key] = {{"counts", counts}, {"total", row.total}, {"percent", pct}};
  }
  return Json{{"row_key", t.row_key}, {"column_key", t.column_key}, {"unit", t.unit},
              {"columns", t.columns}, {"percent_of", "row total"},   {"rows", rows}};
}

namespace {
Json rate_json(const Rate& r) {
  return Json{{"numerator", r.numerator}, {"denominator", r.denominator}, {"percent", r.percent}};
}
}  // namespace

Json to_json(const Report& r) {
  Json by_discipline = Json::object();
  for (const auto& [d, t] : r.subject_areas_by_discipline) by_discipline[d] = to_json(t);
  Json mentions = rate_json(r.retraction_mentions);
  mentions["denominator_set"] = r.options.mention_denominator_includes_unavailable
                                    ? "P_RET and P_POST citing entities, including those without full text"
                                    : "P_RET and P_POST citing entities with full text";
  return Json{{"schema_version", 1},
              {"options",
               {{"mention_denominator_includes_unavailable", r.options.mention_denominator_includes_unavailable}}},
              {"totals",
               {{"retracted_items", r.retracted_items},
                {"citing_entities", r.citing_entities},
                {"citation_pairs", r.citation_pairs},
                {"in_text_citations", r.in_text_citations},
                {"unannotated", r.unannotated},
                {"entities_per_period", r.entities_per_period}}},
              {"citing_by_period_and_discipline", to_json(r.citing_by_period_and_discipline)},
              {"subject_areas_by_period", to_json(r.subject_areas_by_period)},
              {"subject_areas_by_discipline", by_discipline},
              {"mention_status_by_period", to_json(r.mention_status_by_period)},
              {"fifth_histograms", to_json(r.fifth_histograms)},
              {"in_text_by_period_sentiment", to_json(r.in_text_by_period_sentiment)},
              {"in_text_by_intent_sentiment", to_json(r.in_text_by_intent_sentiment)},
              {"in_text_by_section_sentiment", to_json(r.in_text_by_section_sentiment)},
              {"retraction_mention_rate", mentions},
              {"fulltext_unavailable_rate", rate_json(r.fulltext_unavailable)}};
}

ExportResult export_visualization(const Report& report, const std::optional<TopicOutputs>& topics,
                                  const std::string& series_csv, const std::filesystem::path& destination) {
  return export_visualization(to_json(report), topics, series_csv, destination);
}

ExportResult export_visualization(const Json& report, const std::optional<TopicOutputs>& topics,
                                  const std::string& series_csv, const std::filesystem::path& destination) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(destination).lexically_normal();
  const fs::path parent = target.parent_path();
  const fs::path staging = parent / (target.filename().string() + ".partial-" + std::to_string(::getpid()));

  std::error_code ec;
  fs::create_directories(parent, ec);
  if (!ec) {
    fs::remove_all(staging, ec);
    fs::create_directory(staging, ec);
  }
  if (ec) throw Error("destination " + target.string() + " is not writable: " + ec.message());

  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("report.json", report.dump(2) + "\n");
  files.emplace_back("series/series.csv", series_csv);
  if (topics) {
    files.emplace_back("topics/topic_map.json", topics->topic_map.dump(2) + "\n");
    files.emplace_back("topics/relevance.json", topics->relevance.dump(2) + "\n");
    files.emplace_back("topics/grouped_topics.json", topics->grouped_topics.dump(2) + "\n");
  }
  std::sort(files.begin(), files.end());

  ExportResult result;
  result.directory = target;
  try {
    Json artifacts = Json::array();
    for (const auto& [rel, content] : files) {
      fs::create_directories((staging / rel).parent_path());
      write_file_atomic(staging / rel, content);
      BundleArtifact a{rel, sha256_hex(content), content.size()};
      artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
      result.artifacts.push_back(std::move(a));
    }
    result.manifest = Json{
        {"schema_version", 1},
        {"artifacts", artifacts},
        {"topics", topics ? Json{{"status", "present"}, {"corpus_ref", topics->corpus_ref},
                                 {"model_ref", topics->model_ref}}
                          : Json{{"status", "absent"}}},
        {"report_options", report.value("options", Json::object())}};
    write_json(staging / "manifest.json", result.manifest);

    const fs::path old = parent / (target.filename().string() + ".old-" + std::to_string(::getpid()));
    if (fs::exists(target)) fs::rename(target, old);
    fs::rename(staging, target);
    fs::remove_all(old, ec);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
  return result;
}

std::string bar_chart_svg(const std::string& title, const std::vector<std::pair<std::string, double>>& bars) {
  const int bar_w = 40, gap = 10, height = 200, top = 30, bottom = 60;
  const int width = std::max(200, static_cast<int>(bars.size()) * (bar_w + gap) + gap);
  double max_v = 0;
  for (const auto& [_, v] : bars) max_v = std::max(max_v, v);
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else if (c == '"') o += "&quot;";
      else o += c;
    }
    return o;
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height + top + bottom
      << "\">\n<text x=\"" << gap << "\" y=\"20\" font-size=\"14\">" << esc(title) << "</text>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const int x = gap + static_cast<int>(i) * (bar_w + gap);
    const int h = max_v > 0 ? static_cast<int>(bars[i].second / max_v * height + 0.5) : 0;
    svg << "<rect x=\"" << x << "\" y=\"" << top + height - h << "\" width=\"" << bar_w << "\" height=\"" << h
        << "\" fill=\"#4a78a8\"/>\n<text x=\"" << x << "\" y=\"" << top + height + 15
        << "\" font-size=\"10\" transform=\"rotate(30 " << x << ' ' << top + height + 15 << ")\">"
        << esc(bars[i].first) << " (" << format_fixed(bars[i].second, 2) << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace retrace::reports
