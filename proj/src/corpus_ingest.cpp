#include "retrace/corpus_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <regex>
#include <set>

#include "retrace/csv.hpp"

namespace retrace::ingest {

namespace {

constexpr const char* kRequired[] = {"title", "pub_year", "retraction_year", "subjects", "reasons",
                                     "item_type"};

std::optional<int> parse_year(std::string_view cell) {
  std::string s = trim(cell);
  if (s.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec == std::errc() && ptr == s.data() + s.size()) {
    if (value < 1000 || value > 2999) return std::nullopt;
    return value;
  }
  // Date-shaped cells: "2010-05-03", "5/3/2010 0:00".
  static const std::regex four_digits(R"((^|[^0-9])([12][0-9]{3})($|[^0-9]))");
  std::smatch m;
  if (std::regex_search(s, m, four_digits)) return std::stoi(m[2].str());
  return std::nullopt;
}

std::vector<std::string> split_cell(std::string_view cell, std::string_view delim) {
  std::vector<std::string> out;
  for (auto& part : split(cell, delim)) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string_view to_string(SubjectSource s) {
  return s == SubjectSource::retraction_db ? "retraction_db" : "venue_lookup";
}

SubjectSource subject_source_from_string(std::string_view s) {
  if (s == "retraction_db") return SubjectSource::retraction_db;
  if (s == "venue_lookup") return SubjectSource::venue_lookup;
  throw SchemaError("unknown subject source: " + std::string(s));
}

std::string derive_id(const RetractedPublication& r) {
  std::string key = r.doi.value_or("") + "|" + normalize_title(r.title) + "|" +
                    std::to_string(r.pub_year) + "|" + std::to_string(r.retraction_year);
  return "rp-" + sha256_hex(key).substr(0, 12);
}

}  // namespace

std::string_view to_string(ItemType t) {
  switch (t) {
    case ItemType::article: return "article";
    case ItemType::book_chapter: return "book_chapter";
    case ItemType::commentary_editorial: return "commentary_editorial";
    case ItemType::other: return "other";
  }
  return "other";
}

ItemType item_type_from_string(std::string_view s) {
  if (s == "article") return ItemType::article;
  if (s == "book_chapter") return ItemType::book_chapter;
  if (s == "commentary_editorial") return ItemType::commentary_editorial;
  if (s == "other") return ItemType::other;
  throw SchemaError("unknown item_type: " + std::string(s));
}

ItemType classify_item_type(std::string_view raw) {
  auto s = to_lower(raw);
  if (s == "article" || s == "book_chapter" || s == "commentary_editorial" || s == "other")
    return item_type_from_string(s);
  if (s.find("book") != std::string::npos || s.find("chapter") != std::string::npos)
    return ItemType::book_chapter;
  if (s.find("commentary") != std::string::npos || s.find("editorial") != std::string::npos)
    return ItemType::commentary_editorial;
  if (s.find("article") != std::string::npos && s.find("in press") == std::string::npos)
    return ItemType::article;
  return ItemType::other;
}

std::string subject_key(std::string_view label) {
  std::string s = trim(label);
  if (!s.empty() && s.front() == '(') {
    auto close = s.find(')');
    if (close != std::string::npos) s = trim(std::string_view(s).substr(close + 1));
  }
  return to_lower(s);
}

ColumnMapping ColumnMapping::canonical() {
  ColumnMapping m;
  for (const char* f : {"id", "doi", "title", "pub_year", "retraction_year", "subjects", "reasons",
                        "item_type", "venue_title", "venue_ids"})
    m.columns[f] = f;
  return m;
}

ColumnMapping ColumnMapping::retraction_watch() {
  ColumnMapping m;
  m.columns = {{"id", "Record ID"},
               {"doi", "OriginalPaperDOI"},
               {"title", "Title"},
               {"pub_year", "OriginalPaperDate"},
               {"retraction_year", "RetractionDate"},
               {"subjects", "Subject"},
               {"reasons", "Reason"},
               {"item_type", "ArticleType"},
               {"venue_title", "Journal"}};
  return m;
}

ColumnMapping ColumnMapping::from_json(const Json& j) {
  ColumnMapping m;
  if (j.contains("profile")) {
    auto profile = j.at("profile").get<std::string>();
    if (profile == "retraction_watch")
      m = retraction_watch();
    else if (profile == "canonical")
      m = canonical();
    else
      throw SchemaError("unknown mapping profile: " + profile);
  }
  if (j.contains("columns")) {
    for (const auto& [field, column] : j.at("columns").items()) m.columns[field] = column.get<std::string>();
  }
  if (j.contains("delimiter")) m.delimiter = j.at("delimiter").get<std::string>();
  if (j.contains("humanities_marker")) m.humanities_marker = j.at("humanities_marker").get<std::string>();
  return m;
}

Json ColumnMapping::to_json() const {
  return Json{{"columns", columns}, {"delimiter", delimiter}, {"humanities_marker", humanities_marker}};
}

ParseResult parse_retraction_records(std::string_view csv_text, const ColumnMapping& mapping) {
  auto table = csv::parse(csv_text, csv::sniff_separator(csv_text));

  std::map<std::string, std::size_t> index;
  for (const char* field : kRequired) {
    auto it = mapping.columns.find(field);
    if (it == mapping.columns.end())
      throw SchemaError(std::string("mapping has no column for required field '") + field + "'");
    auto col = table.column(it->second);
    if (!col) throw SchemaError("missing required column '" + it->second + "' (field " + field + ")");
    index[field] = *col;
  }
  for (const auto& [field, column] : mapping.columns) {
    if (index.count(field)) continue;
    if (auto col = table.column(column)) index[field] = *col;
  }

  ParseResult result;
  std::set<std::string> seen_ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto cell = [&](const std::string& field) -> std::string {
      auto it = index.find(field);
      if (it == index.end() || it->second >= row.size()) return {};
      return row[it->second];
    };
    auto reject = [&](std::string message) {
      result.rejects.push_back({r + 1, std::move(message), row});
    };

    RetractedPublication rec;
    rec.title = trim(cell("title"));
    auto pub = parse_year(cell("pub_year"));
    auto ret = parse_year(cell("retraction_year"));
    if (!pub) {
      reject("unparseable pub_year '" + cell("pub_year") + "'");
      continue;
    }
    if (!ret) {
      reject("unparseable retraction_year '" + cell("retraction_year") + "'");
      continue;
    }
    if (*ret < *pub) {
      reject("year order: retraction_year " + std::to_string(*ret) + " precedes pub_year " +
             std::to_string(*pub));
      continue;
    }
    rec.pub_year = *pub;
    rec.retraction_year = *ret;

    auto doi = normalize_doi(cell("doi"));
    if (!doi.empty() && doi != "unavailable") rec.doi = doi;

    std::set<std::string> seen_labels;
    for (auto& label : split_cell(cell("subjects"), mapping.delimiter)) {
      if (!seen_labels.insert(label).second) continue;
      bool hum = !mapping.humanities_marker.empty() &&
                 label.find(mapping.humanities_marker) != std::string::npos;
      if (hum) rec.humanities_disciplines.push_back(subject_key(label));
      rec.subjects.push_back({label, hum, SubjectSource::retraction_db});
    }
    rec.reasons = split_cell(cell("reasons"), mapping.delimiter);
    for (auto& reason : rec.reasons) {
      // Retraction Watch prefixes reasons with '+'.
      if (!reason.empty() && reason.front() == '+') reason = trim(std::string_view(reason).substr(1));
    }
    auto types = split_cell(cell("item_type"), mapping.delimiter);
    rec.item_type = types.empty() ? ItemType::other : classify_item_type(types.front());
    rec.venue_title = trim(cell("venue_title"));
    rec.venue_ids = split_cell(cell("venue_ids"), mapping.delimiter);

    rec.id = trim(cell("id"));
    if (rec.id.empty()) rec.id = derive_id(rec);
    if (!seen_ids.insert(rec.id).second) {
      reject("duplicate id '" + rec.id + "'");
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::string serialize_records_csv(const std::vector<RetractedPublication>& records,
                                  const ColumnMapping& mapping) {
  static const std::vector<std::string> fields = {"id",       "doi",       "title",       "pub_year",
                                                  "retraction_year", "subjects", "reasons", "item_type",
                                                  "venue_title",     "venue_ids"};
  auto join = [&](const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += mapping.delimiter;
      out += parts[i];
    }
    return out;
  };
  csv::Table table;
  for (const auto& f : fields) table.header.push_back(mapping.columns.count(f) ? mapping.columns.at(f) : f);
  for (const auto& r : records) {
    std::vector<std::string> labels;
    for (const auto& s : r.subjects)
      if (s.source == SubjectSource::retraction_db) labels.push_back(s.label);
    table.rows.push_back({r.id, r.doi.value_or(""), r.title, std::to_string(r.pub_year),
                          std::to_string(r.retraction_year), join(labels), join(r.reasons),
                          std::string(to_string(r.item_type)), r.venue_title, join(r.venue_ids)});
  }
  return csv::write(table);
}

std::vector<RetractedPublication> filter_humanities(const std::vector<RetractedPublication>& records) {
  std::vector<RetractedPublication> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const auto& r) { return !r.humanities_disciplines.empty(); });
  return out;
}

ExclusionResult apply_exclusions(std::vector<RetractedPublication> records,
                                 const std::vector<ExclusionEntry>& exclusions) {
  ExclusionResult result;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) by_id[records[i].id] = i;
  for (const auto& entry : exclusions) {
    auto it = by_id.find(entry.id);
    if (it == by_id.end()) {
      result.warnings.push_back("exclusion list names unknown id '" + entry.id + "'; ignored");
      continue;
    }
    auto& rec = records[it->second];
    if (!rec.excluded) {
      rec.excluded = true;
      rec.exclusion_rationale = entry.rationale;
    } else if (rec.exclusion_rationale.find(entry.rationale) == std::string::npos) {
      rec.exclusion_rationale += "; " + entry.rationale;
    }
  }
  result.records = std::move(records);
  return result;
}

std::vector<RetractedPublication> selected(const std::vector<RetractedPublication>& records) {
  std::vector<RetractedPublication> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const auto& r) { return !r.excluded; });
  return out;
}

RetractionSummary summarize_retractions(const std::vector<RetractedPublication>& records) {
  RetractionSummary s;
  for (const auto& r : records) {
    ++s.per_year[r.retraction_year];
    ++s.per_type[std::string(to_string(r.item_type))];
    for (const auto& d : std::set<std::string>(r.humanities_disciplines.begin(), r.humanities_disciplines.end()))
      ++s.per_discipline[d];
    for (const auto& reason : std::set<std::string>(r.reasons.begin(), r.reasons.end())) ++s.per_reason[reason];
  }
  return s;
}

Json to_json(const RetractedPublication& r) {
  Json subjects = Json::array();
  for (const auto& s : r.subjects)
    subjects.push_back({{"label", s.label}, {"is_humanities", s.is_humanities}, {"source", to_string(s.source)}});
  return Json{{"id", r.id},
              {"doi", r.doi ? Json(*r.doi) : Json(nullptr)},
              {"title", r.title},
              {"pub_year", r.pub_year},
              {"retraction_year", r.retraction_year},
              {"subjects", subjects},
              {"humanities_disciplines", r.humanities_disciplines},
              {"reasons", r.reasons},
              {"item_type", to_string(r.item_type)},
              {"venue_title", r.venue_title},
              {"venue_ids", r.venue_ids},
              {"excluded", r.excluded},
              {"exclusion_rationale", r.exclusion_rationale}};
}

RetractedPublication publication_from_json(const Json& j) {
  RetractedPublication r;
  r.id = j.at("id").get<std::string>();
  if (j.contains("doi") && !j.at("doi").is_null()) r.doi = normalize_doi(j.at("doi").get<std::string>());
  r.title = j.value("title", "");
  r.pub_year = j.at("pub_year").get<int>();
  r.retraction_year = j.at("retraction_year").get<int>();
  if (r.retraction_year < r.pub_year) throw DomainError("record " + r.id + ": retraction_year < pub_year");
  for (const auto& s : j.value("subjects", Json::array())) {
    r.subjects.push_back({s.at("label").get<std::string>(), s.value("is_humanities", false),
                          subject_source_from_string(s.value("source", "retraction_db"))});
  }
  r.humanities_disciplines = j.value("humanities_disciplines", std::vector<std::string>{});
  r.reasons = j.value("reasons", std::vector<std::string>{});
  r.item_type = item_type_from_string(j.value("item_type", "other"));
  r.venue_title = j.value("venue_title", "");
  r.venue_ids = j.value("venue_ids", std::vector<std::string>{});
  r.excluded = j.value("excluded", false);
  r.exclusion_rationale = j.value("exclusion_rationale", "");
  return r;
}

Json records_to_json(const std::vector<RetractedPublication>& records) {
  Json arr = Json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return Json{{"schema_version", 1}, {"records", arr}};
}

std::vector<RetractedPublication> records_from_json(const Json& j) {
  const Json& arr = j.is_array() ? j : j.at("records");
  std::vector<RetractedPublication> out;
  for (const auto& item : arr) out.push_back(publication_from_json(item));
  return out;
}

Json to_json(const std::vector<RejectedRow>& rejects) {
  Json arr = Json::array();
  for (const auto& r : rejects) arr.push_back({{"row", r.row}, {"error", r.error}, {"raw", r.raw}});
  return Json{{"schema_version", 1}, {"rejects", arr}};
}

Json to_json(const RetractionSummary& s) {
  Json per_year = Json::object();
  for (const auto& [year, n] : s.per_year) per_year[std::to_string(year)] = n;
  return Json{{"schema_version", 1},
              {"per_year", per_year},
              {"per_discipline", s.per_discipline},
              {"per_reason", s.per_reason},
              {"per_type", s.per_type}};
}

std::vector<ExclusionEntry> exclusions_from_json(const Json& j) {
  const Json& arr = j.is_array() ? j : j.at("exclusions");
  std::vector<ExclusionEntry> out;
  for (const auto& e : arr) out.push_back({e.at("id").get<std::string>(), e.value("rationale", "")});
  return out;
}

}  // namespace retrace::ingest
