#include "retrace/affinity.hpp"

#include <algorithm>
#include <charconv>

#include "retrace/csv.hpp"

namespace retrace::affinity {

HumanitiesTagSet::HumanitiesTagSet(std::set<std::string> keys) {
  for (const auto& k : keys) keys_.insert(to_lower(trim(k)));
}

HumanitiesTagSet HumanitiesTagSet::defaults() {
  return HumanitiesTagSet({
      // Retraction Watch HUM disciplines
      "humanities", "history", "arts", "art", "religion", "philosophy", "journalism", "architecture",
      "literature", "music", "dance", "linguistics", "language",
      // Scimago area and its categories
      "arts and humanities", "archeology (arts and humanities)", "classics", "conservation",
      "history and philosophy of science", "language and linguistics", "literature and literary theory",
      "museology", "religious studies", "visual arts and performing arts",
      "arts and humanities (miscellaneous)",
  });
}

HumanitiesTagSet HumanitiesTagSet::from_file(const std::filesystem::path& path) {
  std::set<std::string> keys;
  for (auto& line : split(read_file(path), "\n")) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    keys.insert(t);
  }
  return HumanitiesTagSet(std::move(keys));
}

bool HumanitiesTagSet::contains(const SubjectTag& tag) const {
  if (tag.is_humanities) return true;
  auto key = ingest::subject_key(tag.label);
  if (keys_.count(key)) return true;
  auto dash = key.find(" - ");
  return dash != std::string::npos && keys_.count(key.substr(0, dash)) > 0;
}

AffinityScore score_affinity(const AffinityInputs& inputs, const HumanitiesTagSet& tags) {
  if (inputs.abstract_judgment < -1 || inputs.abstract_judgment > 1)
    throw DomainError("abstract judgment must be -1, 0 or 1, got " + std::to_string(inputs.abstract_judgment));
  auto any_hum = [&](const std::vector<SubjectTag>& list) {
    return std::any_of(list.begin(), list.end(), [&](const auto& t) { return tags.contains(t); });
  };
  AffinityScore s;
  s.venue_bonus = any_hum(inputs.retraction_db_subjects) && any_hum(inputs.venue_subjects) ? 1 : 0;
  s.all_subjects_bonus = !inputs.retraction_db_subjects.empty() &&
                                 std::all_of(inputs.retraction_db_subjects.begin(), inputs.retraction_db_subjects.end(),
                                             [&](const auto& t) { return tags.contains(t); })
                             ? 1
                             : 0;
  s.title_bonus = inputs.title_is_clearly_humanities ? 1 : 0;
  s.abstract_adjustment = inputs.abstract_judgment;
  s.total = s.base + s.venue_bonus + s.all_subjects_bonus + s.title_bonus + s.abstract_adjustment;
  return s;
}

FilterResult filter_by_affinity(const std::vector<ScoredItem>& items, int threshold) {
  FilterResult r;
  for (const auto& item : items) {
    if (!item.score) throw DomainError("item '" + item.id + "' has no affinity score");
    (item.score->total >= threshold ? r.kept : r.dropped).push_back(item);
  }
  return r;
}

std::map<std::string, HumanJudgment> parse_judgments(std::string_view csv_text) {
  auto table = csv::parse(csv_text, csv::sniff_separator(csv_text));
  auto c_id = table.column("item_id");
  auto c_title = table.column("title_bonus");
  auto c_abs = table.column("abstract_adjustment");
  if (!c_id || !c_title || !c_abs)
    throw SchemaError("judgment sidecar needs item_id, title_bonus and abstract_adjustment columns");
  auto c_note = table.column("note");
  auto to_int = [](const std::string& cell, const std::string& what) {
    auto t = trim(cell);
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw SchemaError(what + ": not an integer: '" + cell + "'");
    return v;
  };
  std::map<std::string, HumanJudgment> out;
  for (const auto& row : table.rows) {
    auto cell = [&](std::size_t i) { return i < row.size() ? row[i] : std::string(); };
    auto id = trim(cell(*c_id));
    HumanJudgment j;
    j.title_bonus = to_int(cell(*c_title), id + ".title_bonus");
    j.abstract_adjustment = to_int(cell(*c_abs), id + ".abstract_adjustment");
    if (j.title_bonus != 0 && j.title_bonus != 1) throw SchemaError(id + ": title_bonus must be 0 or 1");
    if (j.abstract_adjustment < -1 || j.abstract_adjustment > 1)
      throw SchemaError(id + ": abstract_adjustment must be -1, 0 or 1");
    if (c_note) j.note = cell(*c_note);
    out[id] = std::move(j);
  }
  return out;
}

std::map<std::string, HumanJudgment> load_judgments(const std::filesystem::path& csv_path) {
  return parse_judgments(read_file(csv_path));
}

std::vector<SubjectTag> venue_subjects(const harvest::VenueClassification& classification) {
  std::vector<SubjectTag> out;
  for (const auto& a : classification.areas) out.push_back({a, false, ingest::SubjectSource::venue_lookup});
  for (const auto& c : classification.categories) out.push_back({c, false, ingest::SubjectSource::venue_lookup});
  return out;
}

AffinityInputs inputs_for(const ingest::RetractedPublication& record, const harvest::LookupTables& tables,
                          const std::map<std::string, HumanJudgment>& judgments) {
  AffinityInputs in;
  for (const auto& s : record.subjects) {
    if (s.source == ingest::SubjectSource::retraction_db) in.retraction_db_subjects.push_back(s);
    else in.venue_subjects.push_back(s);
  }
  auto looked_up = venue_subjects(harvest::classify_venue(record.venue_ids, record.venue_title, tables));
  in.venue_subjects.insert(in.venue_subjects.end(), looked_up.begin(), looked_up.end());
  if (auto it = judgments.find(record.id); it != judgments.end()) {
    in.title_is_clearly_humanities = it->second.title_bonus == 1;
    in.abstract_judgment = it->second.abstract_adjustment;
  }
  return in;
}

std::vector<harvest::CitingEntity> prune_citations(const std::vector<harvest::CitingEntity>& entities,
                                                   const std::set<std::string>& kept_ids) {
  std::vector<harvest::CitingEntity> out;
  for (auto e : entities) {
    std::erase_if(e.cited_items, [&](const std::string& id) { return !kept_ids.count(id); });
    if (!e.cited_items.empty()) out.push_back(std::move(e));
  }
  return out;
}

Json to_json(const AffinityScore& s) {
  return Json{{"base", s.base},
              {"venue_bonus", s.venue_bonus},
              {"all_subjects_bonus", s.all_subjects_bonus},
              {"title_bonus", s.title_bonus},
              {"abstract_adjustment", s.abstract_adjustment},
              {"total", s.total}};
}

AffinityScore score_from_json(const Json& j) {
  AffinityScore s;
  s.base = j.value("base", 1);
  s.venue_bonus = j.at("venue_bonus").get<int>();
  s.all_subjects_bonus = j.at("all_subjects_bonus").get<int>();
  s.title_bonus = j.at("title_bonus").get<int>();
  s.abstract_adjustment = j.at("abstract_adjustment").get<int>();
  s.total = j.at("total").get<int>();
  if (s.total != s.base + s.venue_bonus + s.all_subjects_bonus + s.title_bonus + s.abstract_adjustment)
    throw SchemaError("affinity total does not match its components");
  return s;
}

Json audit_json(const std::vector<ScoredItem>& items, int threshold) {
  Json arr = Json::array();
  for (const auto& item : items) {
    Json row{{"id", item.id}};
    if (item.score) {
      row["score"] = to_json(*item.score);
      row["kept"] = item.score->total >= threshold;
    } else {
      row["score"] = nullptr;
    }
    arr.push_back(std::move(row));
  }
  return Json{{"schema_version", 1}, {"threshold", threshold}, {"items", arr}};
}

}  // namespace retrace::affinity
