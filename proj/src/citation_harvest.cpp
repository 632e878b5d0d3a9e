#include "retrace/citation_harvest.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <future>
#include <regex>
#include <thread>

#include "retrace/csv.hpp"

namespace retrace::harvest {

namespace {

std::optional<int> year_prefix(const std::string& s) {
  static const std::regex year_re(R"(^\s*([12][0-9]{3}))");
  std::smatch m;
  if (std::regex_search(s, m, year_re)) return std::stoi(m[1].str());
  return std::nullopt;
}

// COCI returns either a bare DOI or a space-separated id list ("omid:br/06 doi:10.1/x").
std::string citing_doi_from_coci(const std::string& field) {
  if (field.find(':') == std::string::npos || is_doi(normalize_doi(field))) return normalize_doi(field);
  for (const auto& token : split(field, " ")) {
    if (starts_with_ci(token, "doi:")) return normalize_doi(token);
  }
  return {};
}

std::vector<std::string> split_list(const std::string& cell) {
  std::vector<std::string> out;
  for (auto& part : split(cell, ";")) {
    auto t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

void insert_sorted_unique(std::vector<std::string>& v, const std::string& value) {
  auto it = std::lower_bound(v.begin(), v.end(), value);
  if (it == v.end() || *it != value) v.insert(it, value);
}

}  // namespace

bool is_doi(std::string_view id) { return id.size() > 3 && id.substr(0, 3) == "10."; }

Json to_json(const CitingEntity& e) {
  return Json{{"id", e.id},
              {"doi", e.doi ? Json(*e.doi) : Json(nullptr)},
              {"year", e.year ? Json(*e.year) : Json(nullptr)},
              {"title", e.title},
              {"venue_title", e.venue_title},
              {"venue_ids", e.venue_ids},
              {"subject_areas", e.subject_areas},
              {"subject_categories", e.subject_categories},
              {"abstract", e.abstract},
              {"full_text_available", e.full_text_available},
              {"is_retracted_itself", e.is_retracted_itself},
              {"mentions_retraction", e.mentions_retraction ? Json(*e.mentions_retraction) : Json(nullptr)},
              {"sources", e.sources},
              {"cited_items", e.cited_items}};
}

CitingEntity entity_from_json(const Json& j) {
  CitingEntity e;
  e.id = j.at("id").get<std::string>();
  if (j.contains("doi") && !j.at("doi").is_null()) e.doi = normalize_doi(j.at("doi").get<std::string>());
  if (j.contains("year") && !j.at("year").is_null()) e.year = j.at("year").get<int>();
  e.title = j.value("title", "");
  e.venue_title = j.value("venue_title", "");
  e.venue_ids = j.value("venue_ids", std::vector<std::string>{});
  e.subject_areas = j.value("subject_areas", std::vector<std::string>{});
  e.subject_categories = j.value("subject_categories", std::vector<std::string>{});
  e.abstract = j.value("abstract", "");
  e.full_text_available = j.value("full_text_available", true);
  e.is_retracted_itself = j.value("is_retracted_itself", false);
  if (j.contains("mentions_retraction") && !j.at("mentions_retraction").is_null())
    e.mentions_retraction = j.at("mentions_retraction").get<bool>();
  auto sources = j.value("sources", std::vector<std::string>{});
  e.sources = {sources.begin(), sources.end()};
  if (e.sources.empty()) throw SchemaError("citing entity " + e.id + " has no sources");
  e.cited_items = j.value("cited_items", std::vector<std::string>{});
  return e;
}

Json to_json(const CitationLink& l) {
  return Json{{"citing_id", l.citing_id},
              {"cited_id", l.cited_id},
              {"source", l.source},
              {"creation_year", l.creation_year ? Json(*l.creation_year) : Json(nullptr)},
              {"citing_title", l.citing_title}};
}

CitationLink link_from_json(const Json& j) {
  CitationLink l;
  l.citing_id = j.at("citing_id").get<std::string>();
  l.cited_id = normalize_doi(j.at("cited_id").get<std::string>());
  l.source = j.at("source").get<std::string>();
  if (j.contains("creation_year") && !j.at("creation_year").is_null()) l.creation_year = j.at("creation_year").get<int>();
  l.citing_title = j.value("citing_title", "");
  return l;
}

// ---------------------------------------------------------------------------

std::string FixtureTransport::fixture_name(const std::string& doi) {
  std::string name;
  for (char c : doi) name.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_');
  return name + ".json";
}

Response FixtureTransport::get(const std::string& doi) {
  auto path = dir_ / fixture_name(doi);
  if (!std::filesystem::exists(path)) return {404, {}};
  return {200, read_file(path)};
}

HttpTransport::HttpTransport(std::string base_url, std::string path_template, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), path_template_(std::move(path_template)), timeout_(timeout) {}

Response HttpTransport::get(const std::string& doi) {
  std::string path = path_template_;
  auto pos = path.find("{doi}");
  if (pos != std::string::npos) path.replace(pos, 5, httplib::detail::encode_url(doi));
  httplib::Client client(base_url_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  client.set_connection_timeout(secs.count(), 0);
  client.set_read_timeout(secs.count(), 0);
  client.set_follow_location(true);
  auto res = client.Get(path);
  if (!res) return {0, httplib::to_string(res.error())};
  return {res->status, res->body};
}

PayloadFormat payload_format_from_string(std::string_view s) {
  if (s == "coci") return PayloadFormat::coci;
  if (s == "generic") return PayloadFormat::generic;
  throw SchemaError("unknown payload format: " + std::string(s));
}

std::vector<CitationLink> parse_payload(const SourceAdapter& adapter, const std::string& cited_doi,
                                        const std::string& payload) {
  std::vector<CitationLink> links;
  if (trim(payload).empty()) return links;
  Json j;
  try {
    j = Json::parse(payload);
  } catch (const Json::parse_error& e) {
    throw AdapterError(adapter.name + ": malformed payload for " + cited_doi + ": " + e.what(), payload);
  }
  try {
    if (adapter.format == PayloadFormat::coci) {
      if (!j.is_array()) throw AdapterError(adapter.name + ": expected a JSON array", payload);
      for (const auto& item : j) {
        CitationLink link;
        link.citing_id = citing_doi_from_coci(item.at("citing").get<std::string>());
        if (link.citing_id.empty()) throw AdapterError(adapter.name + ": citing entry without DOI", payload);
        link.cited_id = cited_doi;
        link.source = adapter.name;
        if (item.contains("creation") && item.at("creation").is_string())
          link.creation_year = year_prefix(item.at("creation").get<std::string>());
        links.push_back(std::move(link));
      }
    } else {
      const Json& arr = j.is_array() ? j : j.at("citations");
      for (const auto& item : arr) {
        CitationLink link;
        std::string doi = item.contains("doi") && item.at("doi").is_string() ? normalize_doi(item.at("doi").get<std::string>()) : "";
        if (!doi.empty()) {
          link.citing_id = doi;
        } else {
          auto local = item.at("id");
          link.citing_id = adapter.name + ":" + (local.is_string() ? local.get<std::string>() : local.dump());
        }
        link.cited_id = cited_doi;
        link.source = adapter.name;
        if (item.contains("year") && item.at("year").is_number_integer()) link.creation_year = item.at("year").get<int>();
        link.citing_title = item.value("title", "");
        links.push_back(std::move(link));
      }
    }
  } catch (const Json::exception& e) {
    throw AdapterError(adapter.name + ": unexpected payload shape for " + cited_doi + ": " + e.what(), payload);
  }
  return links;
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_second, double burst)
    : rate_(requests_per_second), capacity_(std::max(1.0, burst)), tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {
  if (rate_ <= 0) throw DomainError("rate limit must be positive");
}

void RateLimiter::acquire() {
  std::unique_lock lock(mutex_);
  while (true) {
    auto now = std::chrono::steady_clock::now();
    std::chrono::duration<double> elapsed = now - last_;
    tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    // Holding the lock while sleeping queues other callers behind this one.
    std::this_thread::sleep_for(wait);
  }
}

std::filesystem::path CitationCache::path_for(const std::string& source, const std::string& doi) const {
  return root_ / source / (sha256_hex(doi) + ".json");
}

std::optional<std::string> CitationCache::load(const std::string& source, const std::string& doi) const {
  auto path = path_for(source, doi);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_file(path);
}

std::mutex& CitationCache::key_mutex(const std::string& key) {
  std::lock_guard lock(map_mutex_);
  auto& slot = key_mutexes_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void CitationCache::store(const std::string& source, const std::string& doi, const std::string& payload) {
  std::lock_guard lock(key_mutex(source + "\n" + doi));
  write_file_atomic(path_for(source, doi), payload);
}

std::vector<CitationLink> fetch_citations(const SourceAdapter& adapter, const std::string& cited_doi,
                                          FetchOptions& options) {
  std::string doi = normalize_doi(cited_doi);
  if (options.cache) {
    if (auto cached = options.cache->load(adapter.name, doi)) return parse_payload(adapter, doi, *cached);
  }
  if (!adapter.transport) throw Error(adapter.name + ": no transport configured");

  auto sleep = options.retry.sleep ? options.retry.sleep
                                   : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  auto delay = options.retry.base_delay;
  std::string last_error;
  for (int attempt = 1; attempt <= options.retry.max_attempts; ++attempt) {
    if (options.limiter) options.limiter->acquire();
    Response res = adapter.transport->get(doi);
    if (res.status == 404 || (res.status >= 200 && res.status < 300 && trim(res.body).empty())) {
      if (options.cache) options.cache->store(adapter.name, doi, "[]");
      return {};
    }
    if (res.status >= 200 && res.status < 300) {
      auto links = parse_payload(adapter, doi, res.body);
      if (options.cache) options.cache->store(adapter.name, doi, res.body);
      return links;
    }
    if (res.status != 0 && res.status != 429 && res.status < 500)
      throw AdapterError(adapter.name + ": HTTP " + std::to_string(res.status) + " for " + doi, res.body);
    last_error = res.status == 0 ? "network failure: " + res.body : "HTTP " + std::to_string(res.status);
    if (attempt < options.retry.max_attempts) {
      sleep(delay);
      delay = std::chrono::milliseconds(
          static_cast<long long>(std::llround(static_cast<double>(delay.count()) * options.retry.multiplier)));
    }
  }
  throw RetryableError(adapter.name + ": giving up on " + doi + " after " +
                           std::to_string(options.retry.max_attempts) + " attempts (" + last_error + ")",
                       options.retry.max_attempts);
}

std::map<std::string, std::vector<CitationLink>> harvest_all(const std::vector<SourceAdapter>& adapters,
                                                             const std::vector<std::string>& cited_dois,
                                                             FetchOptions& options, unsigned threads) {
  struct Job {
    std::size_t adapter;
    std::size_t doi;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < adapters.size(); ++a)
    for (std::size_t d = 0; d < cited_dois.size(); ++d) jobs.push_back({a, d});

  std::vector<std::vector<CitationLink>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      results[i] = fetch_citations(adapters[jobs[i].adapter], cited_dois[jobs[i].doi], options);
  };
  std::vector<std::future<void>> pool;
  for (unsigned t = 0; t < std::max(1u, threads); ++t) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();

  std::map<std::string, std::vector<CitationLink>> by_source;
  for (const auto& a : adapters) by_source[a.name];
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& dst = by_source[adapters[jobs[i].adapter].name];
    dst.insert(dst.end(), results[i].begin(), results[i].end());
  }
  return by_source;
}

// ---------------------------------------------------------------------------

MergeResult merge_entities(const std::vector<CitingEntity>& fragments) {
  struct Group {
    std::vector<const CitingEntity*> members;
  };
  std::map<std::string, Group> groups;  // keyed by final id
  std::map<std::pair<std::string, int>, std::string> title_year_index;

  auto register_title = [&](const CitingEntity& e, const std::string& key) {
    auto t = normalize_title(e.title);
    if (!t.empty() && e.year) title_year_index.emplace(std::make_pair(t, *e.year), key);
  };

  // Pass 1: DOI-bearing fragments.
  for (const auto& e : fragments) {
    if (!e.doi) continue;
    groups[*e.doi].members.push_back(&e);
  }
  for (const auto& [key, g] : groups)
    for (const auto* e : g.members) register_title(*e, key);

  // Pass 2: DOI-less fragments, matched on (normalized title, year) or grouped by local id.
  std::vector<const CitingEntity*> doi_less;
  for (const auto& e : fragments)
    if (!e.doi) doi_less.push_back(&e);
  std::sort(doi_less.begin(), doi_less.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (const auto* e : doi_less) {
    auto t = normalize_title(e->title);
    std::string key = e->id;
    if (!t.empty() && e->year) {
      auto it = title_year_index.find({t, *e->year});
      if (it != title_year_index.end()) {
        key = it->second;
      } else {
        title_year_index.emplace(std::make_pair(t, *e->year), key);
      }
    }
    groups[key].members.push_back(e);
  }

  MergeResult result;
  for (auto& [key, g] : groups) {
    CitingEntity merged;
    merged.id = key;
    std::set<int> years;
    std::set<std::string> cited;
    for (const auto* e : g.members) {
      if (e->doi) merged.doi = e->doi;
      if (e->year) years.insert(*e->year);
      auto pick_min = [](std::string& dst, const std::string& src) {
        if (!src.empty() && (dst.empty() || src < dst)) dst = src;
      };
      pick_min(merged.title, e->title);
      pick_min(merged.venue_title, e->venue_title);
      pick_min(merged.abstract, e->abstract);
      for (const auto& v : e->venue_ids) insert_sorted_unique(merged.venue_ids, v);
      for (const auto& v : e->subject_areas) insert_sorted_unique(merged.subject_areas, v);
      for (const auto& v : e->subject_categories) insert_sorted_unique(merged.subject_categories, v);
      merged.full_text_available = merged.full_text_available && e->full_text_available;
      merged.is_retracted_itself = merged.is_retracted_itself || e->is_retracted_itself;
      if (e->mentions_retraction)
        merged.mentions_retraction = merged.mentions_retraction.value_or(false) || *e->mentions_retraction;
      merged.sources.insert(e->sources.begin(), e->sources.end());
      cited.insert(e->cited_items.begin(), e->cited_items.end());
    }
    if (!years.empty()) {
      merged.year = *years.begin();
      if (years.size() > 1) result.conflicts.push_back({key, {years.begin(), years.end()}, *years.begin()});
    }
    merged.cited_items.assign(cited.begin(), cited.end());
    result.entities.push_back(std::move(merged));
  }
  return result;
}

MergeResult merge_sources(const std::map<std::string, std::vector<CitationLink>>& links_by_source) {
  std::vector<CitingEntity> fragments;
  for (const auto& [source, links] : links_by_source) {
    for (const auto& link : links) {
      CitingEntity e;
      e.id = link.citing_id;
      if (is_doi(link.citing_id)) e.doi = link.citing_id;
      e.year = link.creation_year;
      e.title = link.citing_title;
      e.sources = {link.source.empty() ? source : link.source};
      e.cited_items = {link.cited_id};
      fragments.push_back(std::move(e));
    }
  }
  return merge_entities(fragments);
}

// ---------------------------------------------------------------------------

FixtureMetadataSource FixtureMetadataSource::from_file(const std::filesystem::path& path) {
  return FixtureMetadataSource(read_json(path));
}

std::optional<MetadataRecord> FixtureMetadataSource::lookup(const CitingEntity& entity) const {
  const Json* hit = nullptr;
  if (table_.contains(entity.id)) hit = &table_.at(entity.id);
  if (!hit && entity.doi && table_.contains(*entity.doi)) hit = &table_.at(*entity.doi);
  if (!hit) return std::nullopt;
  const Json& j = *hit;
  MetadataRecord m;
  if (j.contains("doi") && j.at("doi").is_string()) m.doi = normalize_doi(j.at("doi").get<std::string>());
  if (j.contains("year") && j.at("year").is_number_integer()) m.year = j.at("year").get<int>();
  m.title = j.value("title", "");
  m.venue_title = j.value("venue_title", "");
  m.venue_ids = j.value("venue_ids", std::vector<std::string>{});
  m.type = j.value("type", "");
  m.abstract = j.value("abstract", "");
  m.full_text_available = j.value("full_text_available", true);
  m.is_retracted = j.value("is_retracted", false);
  return m;
}

ResolveOutcome resolve_metadata(CitingEntity entity, const MetadataSource& source, const ResolveOptions& options) {
  if (entity.id.empty() && !entity.doi) throw DomainError("entity has no identifier");
  ResolveOutcome out;
  auto meta = source.lookup(entity);
  if (!meta) {
    out.quarantine = QuarantineEntry{entity.id, "unresolvable identifier: no metadata record"};
    out.entity = std::move(entity);
    return out;
  }
  if (!entity.doi && meta->doi) entity.doi = meta->doi;
  if (meta->year) entity.year = entity.year ? std::min(*entity.year, *meta->year) : *meta->year;
  if (!meta->title.empty()) entity.title = meta->title;
  if (!meta->venue_title.empty()) entity.venue_title = meta->venue_title;
  if (!meta->venue_ids.empty()) entity.venue_ids = meta->venue_ids;
  if (!meta->abstract.empty()) entity.abstract = meta->abstract;
  entity.full_text_available = meta->full_text_available;
  entity.is_retracted_itself = meta->is_retracted || (entity.doi && options.retracted_dois.count(*entity.doi) > 0);

  if (!entity.year) {
    out.quarantine = QuarantineEntry{entity.id, "no publication year"};
  } else if (!meta->type.empty() && options.invalid_types.count(to_lower(meta->type))) {
    out.quarantine = QuarantineEntry{entity.id, "non-scholarly type: " + to_lower(meta->type)};
  }
  out.entity = std::move(entity);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ClassificationMethod m) {
  switch (m) {
    case ClassificationMethod::journal_lookup: return "journal_lookup";
    case ClassificationMethod::book_lcc_mapping: return "book_lcc_mapping";
    case ClassificationMethod::unclassified: return "unclassified";
  }
  return "unclassified";
}

Taxonomy Taxonomy::scimago_areas() {
  Taxonomy t;
  t.areas = {"Agricultural and Biological Sciences",
             "Arts and Humanities",
             "Biochemistry, Genetics and Molecular Biology",
             "Business, Management and Accounting",
             "Chemical Engineering",
             "Chemistry",
             "Computer Science",
             "Decision Sciences",
             "Dentistry",
             "Earth and Planetary Sciences",
             "Economics, Econometrics and Finance",
             "Energy",
             "Engineering",
             "Environmental Science",
             "Health Professions",
             "Immunology and Microbiology",
             "Materials Science",
             "Mathematics",
             "Medicine",
             "Multidisciplinary",
             "Neuroscience",
             "Nursing",
             "Pharmacology, Toxicology and Pharmaceutics",
             "Physics and Astronomy",
             "Psychology",
             "Social Sciences",
             "Veterinary"};
  return t;
}

std::string normalize_issn(std::string_view raw) {
  std::string digits;
  for (char c : raw) {
    if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    else if (c == 'x' || c == 'X') digits.push_back('X');
  }
  if (digits.size() != 8) return {};
  return digits.substr(0, 4) + "-" + digits.substr(4);
}

std::string normalize_isbn(std::string_view raw) {
  std::string digits;
  for (char c : raw) {
    if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    else if (c == 'x' || c == 'X') digits.push_back('X');
  }
  if (digits.size() != 10 && digits.size() != 13) return {};
  return digits;
}

std::vector<LookupTables::LccRule> LookupTables::default_lcc_rules() {
  return {
      {"A", "Multidisciplinary", ""},
      {"B", "Arts and Humanities", "Philosophy"},
      {"BF", "Psychology", "General Psychology"},
      {"BL", "Arts and Humanities", "Religious Studies"},
      {"BM", "Arts and Humanities", "Religious Studies"},
      {"BP", "Arts and Humanities", "Religious Studies"},
      {"BQ", "Arts and Humanities", "Religious Studies"},
      {"BR", "Arts and Humanities", "Religious Studies"},
      {"BS", "Arts and Humanities", "Religious Studies"},
      {"BT", "Arts and Humanities", "Religious Studies"},
      {"BV", "Arts and Humanities", "Religious Studies"},
      {"BX", "Arts and Humanities", "Religious Studies"},
      {"C", "Arts and Humanities", "History"},
      {"D", "Arts and Humanities", "History"},
      {"E", "Arts and Humanities", "History"},
      {"F", "Arts and Humanities", "History"},
      {"G", "Social Sciences", "Geography, Planning and Development"},
      {"GB", "Earth and Planetary Sciences", ""},
      {"GE", "Environmental Science", ""},
      {"GN", "Social Sciences", "Anthropology"},
      {"H", "Social Sciences", ""},
      {"HB", "Economics, Econometrics and Finance", ""},
      {"HF", "Business, Management and Accounting", ""},
      {"J", "Social Sciences", "Political Science and International Relations"},
      {"K", "Social Sciences", "Law"},
      {"L", "Social Sciences", "Education"},
      {"M", "Arts and Humanities", "Music"},
      {"N", "Arts and Humanities", "Visual Arts and Performing Arts"},
      {"NA", "Engineering", "Architecture"},
      {"P", "Arts and Humanities", "Literature and Literary Theory"},
      {"Q", "Multidisciplinary", ""},
      {"QA", "Mathematics", ""},
      {"QA76", "Computer Science", ""},
      {"QB", "Physics and Astronomy", ""},
      {"QC", "Physics and Astronomy", ""},
      {"QD", "Chemistry", ""},
      {"QE", "Earth and Planetary Sciences", ""},
      {"QH", "Agricultural and Biological Sciences", ""},
      {"QK", "Agricultural and Biological Sciences", ""},
      {"QL", "Agricultural and Biological Sciences", ""},
      {"QM", "Biochemistry, Genetics and Molecular Biology", ""},
      {"QP", "Neuroscience", ""},
      {"QR", "Immunology and Microbiology", ""},
      {"R", "Medicine", ""},
      {"RK", "Dentistry", ""},
      {"RS", "Pharmacology, Toxicology and Pharmaceutics", ""},
      {"RT", "Nursing", ""},
      {"S", "Agricultural and Biological Sciences", ""},
      {"SF", "Veterinary", ""},
      {"T", "Engineering", ""},
      {"TJ", "Energy", ""},
      {"TP", "Chemical Engineering", ""},
      {"U", "Social Sciences", ""},
      {"V", "Engineering", ""},
      {"Z", "Social Sciences", "Library and Information Sciences"},
  };
}

LookupTables LookupTables::load(const std::filesystem::path& journals_csv, const std::filesystem::path& isbn_csv,
                                const std::filesystem::path& rules_csv) {
  LookupTables t;
  auto need = [](const csv::Table& table, const char* col, const std::filesystem::path& p) {
    auto c = table.column(col);
    if (!c) throw SchemaError(p.string() + ": missing column '" + col + "'");
    return *c;
  };
  auto at = [](const std::vector<std::string>& row, std::size_t i) { return i < row.size() ? row[i] : std::string(); };

  if (!journals_csv.empty()) {
    auto table = csv::parse(read_file(journals_csv));
    auto c_issn = need(table, "issn", journals_csv), c_title = need(table, "title", journals_csv);
    auto c_areas = need(table, "areas", journals_csv);
    auto c_cats = table.column("categories");
    for (const auto& row : table.rows) {
      JournalEntry entry{split_list(at(row, c_areas)), c_cats ? split_list(at(row, *c_cats)) : std::vector<std::string>{}};
      for (const auto& issn : split_list(at(row, c_issn))) {
        auto key = normalize_issn(issn);
        if (!key.empty()) t.journals_by_issn[key] = entry;
      }
      auto title = normalize_title(at(row, c_title));
      if (!title.empty()) t.journals_by_title[title] = entry;
    }
  }
  if (!isbn_csv.empty()) {
    auto table = csv::parse(read_file(isbn_csv));
    auto c_isbn = need(table, "isbn", isbn_csv), c_lcc = need(table, "lcc", isbn_csv);
    for (const auto& row : table.rows) {
      auto key = normalize_isbn(at(row, c_isbn));
      if (!key.empty()) t.lcc_by_isbn[key] = trim(at(row, c_lcc));
    }
  }
  if (!rules_csv.empty()) {
    auto table = csv::parse(read_file(rules_csv));
    auto c_prefix = need(table, "lcc_prefix", rules_csv), c_area = need(table, "area", rules_csv);
    auto c_cat = table.column("category");
    for (const auto& row : table.rows)
      t.lcc_rules.push_back({trim(at(row, c_prefix)), trim(at(row, c_area)), c_cat ? trim(at(row, *c_cat)) : ""});
  } else {
    t.lcc_rules = default_lcc_rules();
  }
  t.validate();
  return t;
}

void LookupTables::validate() const {
  auto check_area = [&](const std::string& a, const std::string& where) {
    if (!taxonomy.areas.count(a)) throw SchemaError(where + ": area '" + a + "' not in taxonomy");
  };
  auto check_cat = [&](const std::string& c, const std::string& where) {
    if (!taxonomy.categories.empty() && !taxonomy.categories.count(c))
      throw SchemaError(where + ": category '" + c + "' not in taxonomy");
  };
  for (const auto& [k, e] : journals_by_issn) {
    for (const auto& a : e.areas) check_area(a, "journal " + k);
    for (const auto& c : e.categories) check_cat(c, "journal " + k);
  }
  for (const auto& r : lcc_rules) {
    check_area(r.area, "lcc rule " + r.prefix);
    if (!r.category.empty()) check_cat(r.category, "lcc rule " + r.prefix);
  }
}

VenueClassification classify_venue(const std::vector<std::string>& venue_ids, const std::string& venue_title,
                                   const LookupTables& tables) {
  VenueClassification out;
  auto from_journal = [&](const std::string& key, const LookupTables::JournalEntry& e) {
    out.venue_key = key;
    out.areas = e.areas;
    out.categories = e.categories;
    out.method = ClassificationMethod::journal_lookup;
    return out;
  };
  for (const auto& id : venue_ids) {
    auto issn = normalize_issn(id);
    if (issn.empty()) continue;
    if (auto it = tables.journals_by_issn.find(issn); it != tables.journals_by_issn.end())
      return from_journal(issn, it->second);
  }
  for (const auto& id : venue_ids) {
    auto isbn = normalize_isbn(id);
    if (isbn.empty()) continue;
    auto it = tables.lcc_by_isbn.find(isbn);
    if (it == tables.lcc_by_isbn.end()) continue;
    const std::string& lcc = it->second;
    const LookupTables::LccRule* best = nullptr;
    for (const auto& rule : tables.lcc_rules) {
      bool match = lcc.compare(0, rule.prefix.size(), rule.prefix) == 0;
      // A numeric prefix ("QA76") must end on a number boundary: it does not match "QA761".
      if (match && lcc.size() > rule.prefix.size() &&
          std::isdigit(static_cast<unsigned char>(rule.prefix.back())) &&
          std::isdigit(static_cast<unsigned char>(lcc[rule.prefix.size()])))
        match = false;
      if (match && (!best || rule.prefix.size() > best->prefix.size())) best = &rule;
    }
    if (best) {
      out.venue_key = isbn;
      out.areas = {best->area};
      if (!best->category.empty()) out.categories = {best->category};
      out.method = ClassificationMethod::book_lcc_mapping;
      return out;
    }
  }
  auto title = normalize_title(venue_title);
  if (!title.empty()) {
    if (auto it = tables.journals_by_title.find(title); it != tables.journals_by_title.end())
      return from_journal(title, it->second);
  }
  out.venue_key = !venue_ids.empty() ? venue_ids.front() : title;
  return out;
}

}  // namespace retrace::harvest
