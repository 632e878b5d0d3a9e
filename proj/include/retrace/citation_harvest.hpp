#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retrace/util.hpp"

namespace retrace::harvest {

// One citing -> cited link as reported by a single source.
struct CitationLink {
  std::string citing_id;  // normalized DOI, or "<source>:<local id>" when the source has no DOI
  std::string cited_id;   // normalized DOI of the retracted item
  std::string source;
  std::optional<int> creation_year;
  std::string citing_title;  // optional hint, used by the no-DOI join rule

  bool operator==(const CitationLink&) const = default;
};

bool is_doi(std::string_view id);

struct CitingEntity {
  std::string id;
  std::optional<std::string> doi;
  std::optional<int> year;
  std::string title;
  std::string venue_title;
  std::vector<std::string> venue_ids;
  std::vector<std::string> subject_areas;
  std::vector<std::string> subject_categories;
  std::string abstract;
  bool full_text_available = true;
  bool is_retracted_itself = false;
  std::optional<bool> mentions_retraction;
  std::set<std::string> sources;
  std::vector<std::string> cited_items;

  bool operator==(const CitingEntity&) const = default;
};

Json to_json(const CitingEntity& e);
CitingEntity entity_from_json(const Json& j);
Json to_json(const CitationLink& l);
CitationLink link_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Fetching

class AdapterError : public Error {
 public:
  AdapterError(const std::string& message, std::string raw_payload)
      : Error(message), raw_payload_(std::move(raw_payload)) {}
  const std::string& raw_payload() const { return raw_payload_; }

 private:
  std::string raw_payload_;
};

// Raised once the retry budget for a transient failure is spent.
class RetryableError : public Error {
 public:
  RetryableError(const std::string& message, int attempts) : Error(message), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

struct Response {
  int status = 0;  // HTTP-like; 0 means the transport failed before a response arrived
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual Response get(const std::string& doi) = 0;
};

// Serves <dir>/<fixture_name(doi)>; absent files answer 404.
class FixtureTransport : public Transport {
 public:
  explicit FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {}
  Response get(const std::string& doi) override;
  static std::string fixture_name(const std::string& doi);

 private:
  std::filesystem::path dir_;
};

// GET base_url + path_template with "{doi}" substituted.
class HttpTransport : public Transport {
 public:
  HttpTransport(std::string base_url, std::string path_template,
                std::chrono::milliseconds timeout = std::chrono::seconds(30));
  Response get(const std::string& doi) override;

 private:
  std::string base_url_;
  std::string path_template_;
  std::chrono::milliseconds timeout_;
};

enum class PayloadFormat {
  coci,     // [{"citing": "10.x/y", "cited": "...", "creation": "2011-05", ...}]
  generic,  // {"citations": [{"id": "...", "doi": "...", "title": "...", "year": 2011}]}
};

PayloadFormat payload_format_from_string(std::string_view s);

struct SourceAdapter {
  std::string name;
  PayloadFormat format = PayloadFormat::coci;
  std::shared_ptr<Transport> transport;
};

std::vector<CitationLink> parse_payload(const SourceAdapter& adapter, const std::string& cited_doi,
                                        const std::string& payload);

// Token bucket shared by concurrent fetches.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second = 5.0, double burst = 1.0);
  void acquire();

 private:
  std::mutex mutex_;
  double rate_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_delay{250};
  double multiplier = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to std::this_thread::sleep_for
};

// Raw payloads on disk at <root>/<source>/<sha256(doi)>.json.
class CitationCache {
 public:
  explicit CitationCache(std::filesystem::path root) : root_(std::move(root)) {}
  std::filesystem::path path_for(const std::string& source, const std::string& doi) const;
  std::optional<std::string> load(const std::string& source, const std::string& doi) const;
  void store(const std::string& source, const std::string& doi, const std::string& payload);

 private:
  std::mutex& key_mutex(const std::string& key);

  std::filesystem::path root_;
  std::mutex map_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> key_mutexes_;
};

struct FetchOptions {
  CitationCache* cache = nullptr;
  RateLimiter* limiter = nullptr;
  RetryPolicy retry;
};

std::vector<CitationLink> fetch_citations(const SourceAdapter& adapter, const std::string& cited_doi,
                                          FetchOptions& options);

// Fetches every DOI from every adapter using `threads` workers. Result keyed by source name.
std::map<std::string, std::vector<CitationLink>> harvest_all(const std::vector<SourceAdapter>& adapters,
                                                             const std::vector<std::string>& cited_dois,
                                                             FetchOptions& options, unsigned threads = 4);

// ---------------------------------------------------------------------------
// Merging

struct MergeConflict {
  std::string entity_id;
  std::vector<int> years;
  int kept_year = 0;
};

struct MergeResult {
  std::vector<CitingEntity> entities;  // sorted by id
  std::vector<MergeConflict> conflicts;
};

// Join key: normalized DOI; a DOI-less record joins an entity with the same normalized title and year.
MergeResult merge_sources(const std::map<std::string, std::vector<CitationLink>>& links_by_source);
MergeResult merge_entities(const std::vector<CitingEntity>& entities);

// ---------------------------------------------------------------------------
// Enrichment

struct MetadataRecord {
  std::optional<std::string> doi;
  std::optional<int> year;
  std::string title;
  std::string venue_title;
  std::vector<std::string> venue_ids;
  std::string type;
  std::string abstract;
  bool full_text_available = true;
  bool is_retracted = false;
};

class MetadataSource {
 public:
  virtual ~MetadataSource() = default;
  virtual std::optional<MetadataRecord> lookup(const CitingEntity& entity) const = 0;
};

// Keyed by entity id or DOI: {"<id>": {"year": ..., "title": ..., ...}}.
class FixtureMetadataSource : public MetadataSource {
 public:
  explicit FixtureMetadataSource(Json table) : table_(std::move(table)) {}
  static FixtureMetadataSource from_file(const std::filesystem::path& path);
  std::optional<MetadataRecord> lookup(const CitingEntity& entity) const override;

 private:
  Json table_;
};

struct QuarantineEntry {
  std::string entity_id;
  std::string reason;
};

struct ResolveOptions {
  std::set<std::string> invalid_types = {"bibliography", "retraction notice", "presentation",
                                         "data repository"};
  std::set<std::string> retracted_dois;
};

struct ResolveOutcome {
  CitingEntity entity;
  std::optional<QuarantineEntry> quarantine;
};

ResolveOutcome resolve_metadata(CitingEntity entity, const MetadataSource& source,
                                const ResolveOptions& options = {});

// ---------------------------------------------------------------------------
// Venue classification

enum class ClassificationMethod { journal_lookup, book_lcc_mapping, unclassified };
std::string_view to_string(ClassificationMethod m);

struct VenueClassification {
  std::string venue_key;
  std::vector<std::string> areas;
  std::vector<std::string> categories;
  ClassificationMethod method = ClassificationMethod::unclassified;
};

struct Taxonomy {
  std::set<std::string> areas;
  std::set<std::string> categories;  // empty: categories unchecked

  static Taxonomy scimago_areas();  // the 27 subject areas
};

struct LookupTables {
  struct JournalEntry {
    std::vector<std::string> areas;
    std::vector<std::string> categories;
  };
  struct LccRule {
    std::string prefix;
    std::string area;
    std::string category;
  };

  std::map<std::string, JournalEntry> journals_by_issn;
  std::map<std::string, JournalEntry> journals_by_title;
  std::map<std::string, std::string> lcc_by_isbn;
  std::vector<LccRule> lcc_rules;  // longest matching prefix wins
  Taxonomy taxonomy = Taxonomy::scimago_areas();

  // journals.csv: issn,title,areas,categories ('; '-separated lists)
  // isbn_lcc.csv: isbn,lcc
  // lcc_rules.csv: lcc_prefix,area,category
  static LookupTables load(const std::filesystem::path& journals_csv, const std::filesystem::path& isbn_csv,
                           const std::filesystem::path& rules_csv);
  static std::vector<LccRule> default_lcc_rules();
  // Throws SchemaError when a table names an area or category outside the taxonomy.
  void validate() const;
};

std::string normalize_issn(std::string_view raw);
std::string normalize_isbn(std::string_view raw);

VenueClassification classify_venue(const std::vector<std::string>& venue_ids, const std::string& venue_title,
                                   const LookupTables& tables);

}  // namespace retrace::harvest
