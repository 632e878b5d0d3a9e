#include "retrace/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <set>

#include "retrace/affinity.hpp"
#include "retrace/annotation.hpp"
#include "retrace/annotation_server.hpp"
#include "retrace/citation_harvest.hpp"
#include "retrace/corpus_ingest.hpp"
#include "retrace/reports.hpp"
#include "retrace/timeline.hpp"

namespace retrace::cli {

namespace fs = std::filesystem;
using FieldErrors = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// Configuration

namespace {

void reject_unknown(const Json& j, const std::string& section, const std::set<std::string>& known,
                    FieldErrors& errors) {
  if (!j.is_object()) {
    errors[section.empty() ? "config" : section] = "must be an object";
    return;
  }
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) errors[section.empty() ? key : section + "." + key] = "unknown key";
}

template <typename T>
void read(const Json& j, const char* key, T& dst, const std::string& field, FieldErrors& errors) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const Json::exception&) {
    errors[field] = "has the wrong type";
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const Json& j, const fs::path& base_dir) {
  PipelineConfig c;
  FieldErrors errors;
  reject_unknown(j, "", {"paths", "harvest", "affinity", "tokenizer", "corpus", "lda", "topics", "report"}, errors);
  if (!errors.empty()) throw ValidationError(std::move(errors));

  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    static const std::map<std::string, fs::path PipelineConfig::*> fields = {
        {"work_dir", &PipelineConfig::work_dir},     {"cache", &PipelineConfig::cache_dir},
        {"store", &PipelineConfig::store},           {"bundles", &PipelineConfig::bundles},
        {"metadata", &PipelineConfig::metadata},     {"journals", &PipelineConfig::journals},
        {"isbn_lcc", &PipelineConfig::isbn_lcc},     {"lcc_rules", &PipelineConfig::lcc_rules},
        {"humanities_tags", &PipelineConfig::humanities_tags}, {"judgments", &PipelineConfig::judgments},
        {"stopwords", &PipelineConfig::stopwords},   {"cito_tree", &PipelineConfig::cito_tree}};
    std::set<std::string> known;
    for (const auto& [k, _] : fields) known.insert(k);
    reject_unknown(p, "paths", known, errors);
    for (const auto& [key, member] : fields) {
      std::string raw;
      read(p, key.c_str(), raw, "paths." + key, errors);
      if (!raw.empty()) c.*member = resolve(base_dir, raw);
    }
  }

  if (j.contains("harvest")) {
    const auto& h = j.at("harvest");
    reject_unknown(h, "harvest", {"sources", "rate_limit", "threads"}, errors);
    read(h, "rate_limit", c.rate_limit, "harvest.rate_limit", errors);
    read(h, "threads", c.threads, "harvest.threads", errors);
    if (h.contains("sources")) {
      int i = 0;
      for (const auto& s : h.at("sources")) {
        std::string field = "harvest.sources[" + std::to_string(i++) + "]";
        reject_unknown(s, field, {"name", "format", "fixture_dir", "base_url", "path_template", "timeout_ms"},
                       errors);
        SourceConfig sc;
        std::string fixture;
        read(s, "name", sc.name, field + ".name", errors);
        read(s, "format", sc.format, field + ".format", errors);
        read(s, "fixture_dir", fixture, field + ".fixture_dir", errors);
        read(s, "base_url", sc.base_url, field + ".base_url", errors);
        read(s, "path_template", sc.path_template, field + ".path_template", errors);
        read(s, "timeout_ms", sc.timeout_ms, field + ".timeout_ms", errors);
        if (!fixture.empty()) sc.fixture_dir = resolve(base_dir, fixture);
        c.sources.push_back(std::move(sc));
      }
    }
  }

  if (j.contains("affinity")) {
    reject_unknown(j.at("affinity"), "affinity", {"threshold"}, errors);
    read(j.at("affinity"), "threshold", c.affinity_threshold, "affinity.threshold", errors);
  }
  if (j.contains("tokenizer")) {
    try {
      c.tokenizer = text::TokenPipelineConfig::from_json(j.at("tokenizer"));
    } catch (const ValidationError& e) {
      for (const auto& [k, v] : e.fields()) errors["tokenizer." + k] = v;
    } catch (const Json::exception&) {
      errors["tokenizer"] = "has the wrong type";
    }
  }
  if (j.contains("corpus")) {
    reject_unknown(j.at("corpus"), "corpus", {"min_term_frequency"}, errors);
    read(j.at("corpus"), "min_term_frequency", c.min_term_frequency, "corpus.min_term_frequency", errors);
  }
  if (j.contains("lda")) {
    const auto& l = j.at("lda");
    reject_unknown(l, "lda", {"k", "alpha", "beta", "iterations", "seed"}, errors);
    read(l, "k", c.lda.k, "lda.k", errors);
    if (l.contains("alpha") && !l.at("alpha").is_null()) {
      double a = 0;
      read(l, "alpha", a, "lda.alpha", errors);
      c.lda.alpha = a;
    }
    read(l, "beta", c.lda.beta, "lda.beta", errors);
    read(l, "iterations", c.lda.iterations, "lda.iterations", errors);
    read(l, "seed", c.lda.seed, "lda.seed", errors);
  }
  if (j.contains("topics")) {
    const auto& t = j.at("topics");
    reject_unknown(t, "topics", {"k_range", "lambda", "top_n", "coherence_top_n", "group_keys"}, errors);
    read(t, "k_range", c.k_range, "topics.k_range", errors);
    read(t, "lambda", c.lambda, "topics.lambda", errors);
    read(t, "top_n", c.top_n, "topics.top_n", errors);
    read(t, "coherence_top_n", c.coherence_top_n, "topics.coherence_top_n", errors);
    read(t, "group_keys", c.group_keys, "topics.group_keys", errors);
  }
  if (j.contains("report")) {
    reject_unknown(j.at("report"), "report", {"mention_denominator_includes_unavailable"}, errors);
    read(j.at("report"), "mention_denominator_includes_unavailable", c.mention_denominator_includes_unavailable,
         "report.mention_denominator_includes_unavailable", errors);
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  return from_json(read_json(path), fs::absolute(path).parent_path());
}

void PipelineConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
  FieldErrors errors;
  auto str = [&](const char* name, auto&& apply) {
    if (const char* v = getenv(name); v && *v) {
      try {
        apply(std::string(v));
      } catch (const std::exception&) {
        errors[name] = "invalid value '" + std::string(v) + "'";
      }
    }
  };
  auto strict_int = [](const std::string& s) {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  };
  str("RETRACE_WORK_DIR", [&](const std::string& v) { work_dir = v; });
  str("RETRACE_CACHE", [&](const std::string& v) { cache_dir = v; });
  str("RETRACE_STORE", [&](const std::string& v) { store = v; });
  str("RETRACE_BUNDLES", [&](const std::string& v) { bundles = v; });
  str("RETRACE_AFFINITY_THRESHOLD", [&](const std::string& v) { affinity_threshold = static_cast<int>(strict_int(v)); });
  str("RETRACE_LDA_K", [&](const std::string& v) { lda.k = static_cast<int>(strict_int(v)); });
  str("RETRACE_LDA_ITERATIONS", [&](const std::string& v) { lda.iterations = static_cast<int>(strict_int(v)); });
  str("RETRACE_SEED", [&](const std::string& v) { lda.seed = static_cast<std::uint64_t>(strict_int(v)); });
  str("RETRACE_K_RANGE", [&](const std::string& v) { k_range = v; });
  str("RETRACE_LAMBDA", [&](const std::string& v) {
    std::size_t used = 0;
    lambda = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
  });
  if (!errors.empty()) throw ValidationError(std::move(errors));
  validate();
}

void PipelineConfig::validate() const {
  FieldErrors errors;
  std::set<std::string> names;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& s = sources[i];
    std::string field = "harvest.sources[" + std::to_string(i) + "]";
    if (s.name.empty()) errors[field + ".name"] = "required";
    else if (!names.insert(s.name).second) errors[field + ".name"] = "duplicate source name";
    if (s.format != "coci" && s.format != "generic") errors[field + ".format"] = "must be coci or generic";
    if (s.fixture_dir.empty() && s.base_url.empty()) errors[field] = "needs fixture_dir or base_url";
    if (!s.base_url.empty() && s.path_template.find("{doi}") == std::string::npos)
      errors[field + ".path_template"] = "must contain {doi}";
  }
  if (!(rate_limit > 0)) errors["harvest.rate_limit"] = "must be > 0";
  if (threads < 1) errors["harvest.threads"] = "must be >= 1";
  if (min_term_frequency < 1) errors["corpus.min_term_frequency"] = "must be >= 1";
  try {
    lda.validate();
  } catch (const ValidationError& e) {
    for (const auto& [k, v] : e.fields()) errors["lda." + k] = v;
  }
  try {
    topics::parse_k_range(k_range);
  } catch (const ValidationError&) {
    errors["topics.k_range"] = "expected 'a..b' or a comma-separated list";
  }
  if (!(lambda >= 0 && lambda <= 1)) errors["topics.lambda"] = "must lie in [0, 1]";
  if (top_n < 1) errors["topics.top_n"] = "must be >= 1";
  if (coherence_top_n < 2) errors["topics.coherence_top_n"] = "must be >= 2";
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

// ---------------------------------------------------------------------------
// Stage helpers

namespace {

struct Context {
  PipelineConfig config;
  std::ostream& out;
  std::ostream& err;

  fs::path work(const std::string& name) const { return config.work_dir / name; }
};

Json load_stage(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw NotFoundError(what + " missing: " + path.string());
  return read_json(path);
}

fs::path pick(const std::string& flag, const fs::path& fallback) { return flag.empty() ? fallback : fs::path(flag); }

// Prefers the affinity-filtered file when it exists.
fs::path stage_or_filtered(const Context& ctx, const std::string& flag, const std::string& base,
                           const std::string& filtered) {
  if (!flag.empty()) return flag;
  return fs::exists(ctx.work(filtered)) ? ctx.work(filtered) : ctx.work(base);
}

harvest::LookupTables lookup_tables(const PipelineConfig& c) {
  return harvest::LookupTables::load(c.journals, c.isbn_lcc, c.lcc_rules);
}

struct CitationsFile {
  std::vector<harvest::CitingEntity> entities;
  Json raw;
};

CitationsFile load_citations(const fs::path& path) {
  CitationsFile f;
  f.raw = load_stage(path, "citations");
  for (const auto& e : f.raw.at("entities")) f.entities.push_back(harvest::entity_from_json(e));
  return f;
}

std::vector<ingest::RetractedPublication> load_records(const fs::path& path) {
  return ingest::records_from_json(load_stage(path, "records"));
}

std::vector<annotation::InTextCitation> load_in_text(const std::string& path) {
  if (path.empty()) return {};
  return annotation::citations_from_json(load_stage(path, "in-text citations"));
}

annotation::AnnotationState load_annotations(const fs::path& store) {
  if (!fs::exists(store)) return {};
  return annotation::replay(read_file(store));
}

// ---------------------------------------------------------------------------
// Stages

struct IngestArgs {
  std::string input, mapping, profile = "canonical", exclusions;
  bool humanities_only = false;
};

int do_ingest(Context& ctx, const IngestArgs& a) {
  ingest::ColumnMapping mapping;
  if (!a.mapping.empty()) mapping = ingest::ColumnMapping::from_json(read_json(a.mapping));
  else if (a.profile == "retraction_watch") mapping = ingest::ColumnMapping::retraction_watch();
  else if (a.profile == "canonical") mapping = ingest::ColumnMapping::canonical();
  else throw ValidationError(FieldErrors{{"profile", "unknown profile '" + a.profile + "'"}});

  auto parsed = ingest::parse_retraction_records(read_file(a.input), mapping);
  auto records = a.humanities_only ? ingest::filter_humanities(parsed.records) : parsed.records;
  if (!a.exclusions.empty()) {
    auto result = ingest::apply_exclusions(std::move(records), ingest::exclusions_from_json(read_json(a.exclusions)));
    for (const auto& w : result.warnings) ctx.err << "warning: " << w << "\n";
    records = std::move(result.records);
  }
  fs::create_directories(ctx.config.work_dir);
  write_json(ctx.work("records.json"), ingest::records_to_json(records));
  write_json(ctx.work("rejects.json"), ingest::to_json(parsed.rejects));
  write_json(ctx.work("summary.json"), ingest::to_json(ingest::summarize_retractions(ingest::selected(records))));
  ctx.out << "ingest: " << records.size() << " records (" << ingest::selected(records).size() << " selected), "
          << parsed.rejects.size() << " rejected rows\n";
  return 0;
}

int do_harvest(Context& ctx, const std::string& records_flag) {
  const auto& c = ctx.config;
  if (c.sources.empty()) throw ValidationError(FieldErrors{{"harvest.sources", "no citation sources configured"}});
  auto records = ingest::selected(load_records(pick(records_flag, ctx.work("records.json"))));

  std::map<std::string, std::string> id_by_doi;
  std::vector<std::string> dois;
  for (const auto& r : records) {
    if (!r.doi) {
      ctx.err << "warning: record " << r.id << " has no DOI; skipped\n";
      continue;
    }
    id_by_doi[normalize_doi(*r.doi)] = r.id;
    dois.push_back(normalize_doi(*r.doi));
  }
  std::sort(dois.begin(), dois.end());
  dois.erase(std::unique(dois.begin(), dois.end()), dois.end());

  std::vector<harvest::SourceAdapter> adapters;
  for (const auto& s : c.sources) {
    harvest::SourceAdapter a{s.name, harvest::payload_format_from_string(s.format), nullptr};
    if (!s.fixture_dir.empty()) a.transport = std::make_shared<harvest::FixtureTransport>(s.fixture_dir);
    else
      a.transport = std::make_shared<harvest::HttpTransport>(s.base_url, s.path_template,
                                                             std::chrono::milliseconds(s.timeout_ms));
    adapters.push_back(std::move(a));
  }
  harvest::CitationCache cache(c.resolved_cache());
  harvest::RateLimiter limiter(c.rate_limit, 1.0);
  harvest::FetchOptions options;
  options.cache = &cache;
  options.limiter = &limiter;
  auto links = harvest::harvest_all(adapters, dois, options, c.threads);
  auto merged = harvest::merge_sources(links);

  std::optional<harvest::FixtureMetadataSource> metadata;
  if (!c.metadata.empty()) metadata = harvest::FixtureMetadataSource::from_file(c.metadata);
  harvest::ResolveOptions resolve_options;
  for (const auto& doi : dois) resolve_options.retracted_dois.insert(doi);
  auto tables = lookup_tables(c);

  Json entities = Json::array(), quarantine = Json::array(), conflicts = Json::array(), link_json = Json::object();
  for (const auto& [source, list] : links) {
    Json arr = Json::array();
    for (const auto& l : list) arr.push_back(harvest::to_json(l));
    link_json[source] = arr;
  }
  for (const auto& conflict : merged.conflicts)
    conflicts.push_back({{"entity_id", conflict.entity_id}, {"years", conflict.years}, {"kept_year", conflict.kept_year}});
  std::size_t kept = 0;
  for (auto e : merged.entities) {
    for (auto& cited : e.cited_items)
      if (auto it = id_by_doi.find(normalize_doi(cited)); it != id_by_doi.end()) cited = it->second;
    std::sort(e.cited_items.begin(), e.cited_items.end());
    e.cited_items.erase(std::unique(e.cited_items.begin(), e.cited_items.end()), e.cited_items.end());
    if (metadata) {
      auto outcome = harvest::resolve_metadata(std::move(e), *metadata, resolve_options);
      if (outcome.quarantine) {
        quarantine.push_back({{"entity_id", outcome.quarantine->entity_id}, {"reason", outcome.quarantine->reason}});
        continue;
      }
      e = std::move(outcome.entity);
    }
    auto venue = harvest::classify_venue(e.venue_ids, e.venue_title, tables);
    if (e.subject_areas.empty()) e.subject_areas = venue.areas;
    if (e.subject_categories.empty()) e.subject_categories = venue.categories;
    entities.push_back(harvest::to_json(e));
    ++kept;
  }
  write_json(ctx.work("citations.json"), Json{{"schema_version", 1},
                                              {"links", link_json},
                                              {"entities", entities},
                                              {"quarantine", quarantine},
                                              {"conflicts", conflicts}});
  ctx.out << "harvest: " << dois.size() << " DOIs, " << merged.entities.size() << " merged citing entities, " << kept
          << " kept, " << quarantine.size() << " quarantined\n";
  return 0;
}

int do_affinity_score(Context& ctx, const std::string& records_flag) {
  const auto& c = ctx.config;
  auto records = ingest::selected(load_records(pick(records_flag, ctx.work("records.json"))));
  auto tags = c.humanities_tags.empty() ? affinity::HumanitiesTagSet::defaults()
                                        : affinity::HumanitiesTagSet::from_file(c.humanities_tags);
  auto judgments = c.judgments.empty() ? std::map<std::string, affinity::HumanJudgment>{}
                                       : affinity::load_judgments(c.judgments);
  auto tables = lookup_tables(c);
  std::vector<affinity::ScoredItem> items;
  for (const auto& r : records) items.push_back({r.id, affinity::score_affinity(affinity::inputs_for(r, tables, judgments), tags)});
  write_json(ctx.work("affinity.json"), affinity::audit_json(items, c.affinity_threshold));
  ctx.out << "affinity score: " << items.size() << " items scored\n";
  return 0;
}

int do_affinity_filter(Context& ctx, const std::string& records_flag, const std::string& citations_flag,
                       std::optional<int> threshold_flag) {
  int threshold = threshold_flag.value_or(ctx.config.affinity_threshold);
  auto records = load_records(pick(records_flag, ctx.work("records.json")));
  auto audit = load_stage(ctx.work("affinity.json"), "affinity scores");
  std::vector<affinity::ScoredItem> items;
  for (const auto& row : audit.at("items")) {
    affinity::ScoredItem item{row.at("id").get<std::string>(), std::nullopt};
    if (!row.at("score").is_null()) item.score = affinity::score_from_json(row.at("score"));
    items.push_back(std::move(item));
  }
  auto result = affinity::filter_by_affinity(items, threshold);
  std::set<std::string> kept, dropped;
  for (const auto& i : result.kept) kept.insert(i.id);
  for (const auto& i : result.dropped) dropped.insert(i.id);
  for (auto& r : records) {
    if (!dropped.count(r.id)) continue;
    const std::string reason = "affinity below " + std::to_string(threshold);
    r.exclusion_rationale = r.excluded ? r.exclusion_rationale + "; " + reason : reason;
    r.excluded = true;
  }
  write_json(ctx.work("records.filtered.json"), ingest::records_to_json(records));
  auto citations = load_citations(pick(citations_flag, ctx.work("citations.json")));
  Json pruned = Json::array();
  for (const auto& e : affinity::prune_citations(citations.entities, kept)) pruned.push_back(harvest::to_json(e));
  auto out = citations.raw;
  out["entities"] = pruned;
  write_json(ctx.work("citations.filtered.json"), out);
  ctx.out << "affinity filter: kept " << kept.size() << ", dropped " << dropped.size() << " at threshold " << threshold
          << "; " << pruned.size() << " citing entities remain\n";
  return 0;
}

int do_segment(Context& ctx, const std::string& records_flag, const std::string& citations_flag,
               const std::string& out_flag) {
  auto records = ingest::selected(load_records(stage_or_filtered(ctx, records_flag, "records.json", "records.filtered.json")));
  auto citations = load_citations(stage_or_filtered(ctx, citations_flag, "citations.json", "citations.filtered.json"));
  auto seg = timeline::segment(records, citations.entities);
  auto out = pick(out_flag, ctx.work("periods.json"));
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_json(out, timeline::to_json(seg));
  std::map<timeline::Period, long long> per;
  for (const auto& a : seg.assignments) ++per[a.assignment.period];
  ctx.out << "segment: " << seg.assignments.size() << " pairs (P_PRE " << per[timeline::Period::P_PRE] << ", P_RET "
          << per[timeline::Period::P_RET] << ", P_POST " << per[timeline::Period::P_POST] << "), "
          << seg.rejected.size() << " rejected\n";
  return 0;
}

void add_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

struct CorpusArgs {
  std::string documents, source = "abstracts", records, citations, periods, in_text;
};

int do_corpus_build(Context& ctx, const CorpusArgs& a) {
  auto& c = ctx.config;
  text::TokenPipelineConfig tokenizer = c.tokenizer;
  if (!c.stopwords.empty()) {
    auto extra = text::load_word_list(c.stopwords);
    tokenizer.extra_stopwords.insert(extra.begin(), extra.end());
  }
  std::vector<text::Document> docs;
  if (!a.documents.empty()) {
    docs = text::documents_from_json(read_json(a.documents));
  } else {
    auto records = load_records(stage_or_filtered(ctx, a.records, "records.json", "records.filtered.json"));
    auto citations = load_citations(stage_or_filtered(ctx, a.citations, "citations.json", "citations.filtered.json"));
    auto seg = timeline::segmentation_from_json(load_stage(pick(a.periods, ctx.work("periods.json")), "periods"));
    std::map<std::string, const ingest::RetractedPublication*> rec;
    for (const auto& r : records) rec[r.id] = &r;
    std::map<std::string, const harvest::CitingEntity*> ent;
    for (const auto& e : citations.entities) ent[e.id] = &e;
    std::map<std::pair<std::string, std::string>, std::string> period_of;
    std::map<std::string, text::DocMetadata> meta_by_entity;
    for (const auto& p : seg.assignments) {
      std::string period(timeline::to_string(p.assignment.period));
      period_of[{p.citing_id, p.cited_id}] = period;
      auto& m = meta_by_entity[p.citing_id];
      add_unique(m["period"], period);
      add_unique(m["cited_item"], p.cited_id);
      if (auto it = rec.find(p.cited_id); it != rec.end())
        for (const auto& d : it->second->humanities_disciplines) add_unique(m["discipline"], d);
      if (auto it = ent.find(p.citing_id); it != ent.end())
        for (const auto& area : it->second->subject_areas) add_unique(m["subject_area"], area);
    }
    if (a.source == "abstracts") {
      for (const auto& [id, meta] : meta_by_entity) {
        const auto* e = ent.count(id) ? ent.at(id) : nullptr;
        if (!e || trim(e->abstract).empty()) continue;
        docs.push_back({id, e->abstract, meta});
      }
    } else if (a.source == "contexts") {
      auto in_text = load_in_text(a.in_text.empty() ? ctx.work("intext.json").string() : a.in_text);
      auto state = load_annotations(c.resolved_store());
      for (const auto& cit : in_text) {
        auto pit = period_of.find({cit.citing_entity_id, cit.cited_item_id});
        if (pit == period_of.end()) continue;
        std::string body = cit.context.preceding.value_or("") + " " + cit.context.anchor + " " +
                           cit.context.following.value_or("");
        text::DocMetadata meta = meta_by_entity[cit.citing_entity_id];
        meta["period"] = {pit->second};
        meta["section"] = {std::string(annotation::to_string(cit.section))};
        if (auto s = state.find(cit.id); s != state.end()) {
          meta["intent"] = {s->second.intent};
          meta["sentiment"] = {std::string(annotation::to_string(s->second.sentiment))};
        }
        docs.push_back({cit.id, body, std::move(meta)});
      }
    } else {
      throw ValidationError(FieldErrors{{"source", "must be abstracts or contexts"}});
    }
    std::sort(docs.begin(), docs.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  }
  auto corpus = text::build_corpus(docs, tokenizer, {c.min_term_frequency});
  Json j = text::to_json(corpus);
  j["tokenizer"] = tokenizer.to_json();
  write_json(ctx.work("corpus.json"), j);
  ctx.out << "corpus build: " << corpus.documents.size() << " documents, " << corpus.vocabulary.size() << " terms, "
          << corpus.total_tokens() << " tokens\n";
  return 0;
}

text::Corpus load_corpus(const Context& ctx, const std::string& flag) {
  return text::corpus_from_json(load_stage(pick(flag, ctx.work("corpus.json")), "corpus"));
}

int do_topics_fit(Context& ctx, const std::string& corpus_flag) {
  auto corpus = load_corpus(ctx, corpus_flag);
  auto model = topics::fit_lda(corpus, ctx.config.lda);
  for (const auto& w : model.warnings) ctx.err << "warning: " << w << "\n";
  write_json(ctx.work("model.json"), topics::to_json(model));
  ctx.out << "topics fit: k=" << model.k << ", " << model.iterations << " sweeps, seed " << model.seed
          << ", coherence " << format_fixed(topics::coherence(model, corpus, ctx.config.coherence_top_n), 4) << "\n";
  return 0;
}

int do_topics_select_k(Context& ctx, const std::string& corpus_flag) {
  auto corpus = load_corpus(ctx, corpus_flag);
  auto report = topics::select_k(corpus, topics::parse_k_range(ctx.config.k_range), ctx.config.lda,
                                 ctx.config.coherence_top_n);
  write_json(ctx.work("coherence.json"), topics::to_json(report));
  for (const auto& [k, v] : report.per_k) ctx.out << "k=" << k << " coherence=" << format_fixed(v, 4) << "\n";
  ctx.out << "chosen_k=" << report.chosen_k << "\n";
  return 0;
}

int do_topics_export(Context& ctx, const std::string& corpus_flag, const std::string& model_flag) {
  auto corpus = load_corpus(ctx, corpus_flag);
  auto model_path = pick(model_flag, ctx.work("model.json"));
  if (!fs::exists(model_path)) throw NotFoundError("topic model missing: " + model_path.string());
  auto model_text = read_file(model_path);
  auto model = topics::model_from_json(Json::parse(model_text));
  if (model.corpus_ref != corpus.hash())
    throw DomainError("model.json was fitted on a different corpus; rerun `topics fit`");
  const auto dir = ctx.work("topics");
  fs::create_directories(dir);
  auto bundle = topics::visualization_bundle(model, corpus, ctx.config.lambda, ctx.config.top_n);
  bundle["model_ref"] = sha256_hex(model_text);
  write_json(dir / "topic_map.json", bundle);
  write_json(dir / "relevance.json",
             topics::to_json(topics::relevance(model, corpus, ctx.config.lambda, ctx.config.top_n), model.vocabulary));
  Json grouped{{"schema_version", 1}, {"groups", Json::object()}};
  for (const auto& key : ctx.config.group_keys) {
    auto table = topics::group_topic_distribution(model, corpus, key);
    grouped["groups"][key] = topics::to_json(table);
    write_file_atomic(dir / ("grouped_" + key + ".csv"), topics::grouped_csv(table));
  }
  write_json(dir / "grouped_topics.json", grouped);
  ctx.out << "topics export: " << dir.string() << "\n";
  return 0;
}

struct ReportArgs {
  std::string records, citations, periods, in_text, svg_dir;
};

int do_report(Context& ctx, const ReportArgs& a) {
  auto periods_path = pick(a.periods, ctx.work("periods.json"));
  if (!fs::exists(periods_path))
    throw NotFoundError("periods missing: " + periods_path.string() + " (run `retrace segment` first)");
  reports::Snapshot s;
  s.records = load_records(stage_or_filtered(ctx, a.records, "records.json", "records.filtered.json"));
  s.entities = load_citations(stage_or_filtered(ctx, a.citations, "citations.json", "citations.filtered.json")).entities;
  s.assignments = timeline::segmentation_from_json(read_json(periods_path)).assignments;
  std::string in_text = a.in_text;
  if (in_text.empty() && fs::exists(ctx.work("intext.json"))) in_text = ctx.work("intext.json").string();
  s.in_text = load_in_text(in_text);
  s.annotations = load_annotations(ctx.config.resolved_store());
  reports::ReportOptions options{ctx.config.mention_denominator_includes_unavailable};
  auto report = reports::descriptive_report(s, options);
  write_json(ctx.work("report.json"), reports::to_json(report));
  if (!a.svg_dir.empty()) {
    fs::create_directories(a.svg_dir);
    for (const auto& [period, row] : report.fifth_histograms.rows) {
      std::vector<std::pair<std::string, double>> bars;
      for (const auto& col : report.fifth_histograms.columns)
        if (auto it = row.counts.find(col); it != row.counts.end()) bars.emplace_back(col, static_cast<double>(it->second));
      write_file_atomic(fs::path(a.svg_dir) / ("fifths_" + period + ".svg"), reports::bar_chart_svg(period, bars));
    }
  }
  ctx.out << "report: " << report.citation_pairs << " citation pairs, " << report.citing_entities
          << " citing entities, " << report.in_text_citations << " in-text citations (" << report.unannotated
          << " unannotated)\n";
  return 0;
}

int do_export_vis(Context& ctx, const std::string& records_flag, const std::string& periods_flag,
                  const std::string& out_flag) {
  auto report = load_stage(ctx.work("report.json"), "report (run `retrace report` first)");
  auto records = load_records(stage_or_filtered(ctx, records_flag, "records.json", "records.filtered.json"));
  auto seg = timeline::segmentation_from_json(load_stage(pick(periods_flag, ctx.work("periods.json")), "periods"));
  auto series = timeline::series_csv(timeline::build_series(ingest::selected(records), seg.assignments));

  std::optional<reports::TopicOutputs> topic_outputs;
  const auto dir = ctx.work("topics");
  if (fs::exists(dir / "topic_map.json") && fs::exists(dir / "relevance.json") &&
      fs::exists(dir / "grouped_topics.json")) {
    reports::TopicOutputs t;
    t.topic_map = read_json(dir / "topic_map.json");
    t.relevance = read_json(dir / "relevance.json");
    t.grouped_topics = read_json(dir / "grouped_topics.json");
    t.corpus_ref = t.topic_map.value("corpus_ref", "");
    t.model_ref = t.topic_map.value("model_ref", "");
    topic_outputs = std::move(t);
  }
  auto result = reports::export_visualization(report, topic_outputs, series, pick(out_flag, ctx.config.resolved_bundles()));
  ctx.out << "export-vis: " << result.artifacts.size() << " artifacts in " << result.directory.string()
          << (topic_outputs ? "" : " (topics absent)") << "\n";
  return 0;
}

annotation::CitoDecisionTree load_tree(const PipelineConfig& c, const std::string& flag) {
  fs::path p = pick(flag, c.cito_tree);
  if (p.empty()) throw ValidationError(FieldErrors{{"paths.cito_tree", "decision-tree config required"}});
  return annotation::CitoDecisionTree::from_file(p);
}

struct AnnotateArgs {
  std::string in_text, tree, assets, host = "127.0.0.1", csv;
  int port = 8080;
};

int do_annotate_serve(Context& ctx, const AnnotateArgs& a) {
  auto tree = load_tree(ctx.config, a.tree);
  annotation::AnnotationStore store(ctx.config.resolved_store(),
                                    load_in_text(a.in_text.empty() ? ctx.work("intext.json").string() : a.in_text));
  annotation::AnnotationServer server(store, tree, ctx.config.resolved_bundles(), a.assets);
  int port = server.bind(a.host, a.port);
  ctx.out << "annotation API listening on http://" << a.host << ":" << port << std::endl;
  server.listen();
  return 0;
}

int do_annotate_export(Context& ctx, const AnnotateArgs& a) {
  annotation::AnnotationStore store(ctx.config.resolved_store(),
                                    load_in_text(a.in_text.empty() ? ctx.work("intext.json").string() : a.in_text),
                                    annotation::AnnotationStore::Mode::read_only);
  auto text = annotation::export_csv(store);
  if (a.csv.empty()) ctx.out << text;
  else write_file_atomic(a.csv, text);
  return 0;
}

int do_annotate_import(Context& ctx, const AnnotateArgs& a) {
  annotation::AnnotationStore store(ctx.config.resolved_store(),
                                    load_in_text(a.in_text.empty() ? ctx.work("intext.json").string() : a.in_text));
  auto n = annotation::import_csv(store, read_file(a.csv));
  ctx.out << "annotate import: " << n << " annotations recorded\n";
  return 0;
}

void print_field_errors(std::ostream& err, const ValidationError& e) {
  err << "error: " << e.what() << "\n";
  for (const auto& [field, message] : e.fields()) err << "  " << field << ": " << message << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry point

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retraction citation analysis pipeline", "retrace"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, work_dir;
  app.add_option("--config", config_path, "Pipeline configuration (JSON)");
  app.add_option("-w,--work-dir", work_dir, "Directory holding the stage files");

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse a retraction export into records.json");
  ingest_cmd->add_option("--input", ingest_args.input, "Retraction records (CSV)")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--mapping", ingest_args.mapping, "Column mapping (JSON)")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--profile", ingest_args.profile, "Built-in mapping: canonical or retraction_watch");
  ingest_cmd->add_option("--exclusions", ingest_args.exclusions, "Exclusion list (JSON)")->check(CLI::ExistingFile);
  ingest_cmd->add_flag("--humanities-only", ingest_args.humanities_only, "Keep records with a humanities subject");

  std::string records_flag, citations_flag, periods_flag, out_flag, corpus_flag, model_flag;
  auto* harvest_cmd = app.add_subcommand("harvest", "Fetch, merge and enrich citing entities");
  harvest_cmd->add_option("--records", records_flag);

  auto* affinity_cmd = app.add_subcommand("affinity", "Humanities affinity scoring");
  affinity_cmd->require_subcommand(1);
  auto* score_cmd = affinity_cmd->add_subcommand("score", "Score every selected record");
  score_cmd->add_option("--records", records_flag);
  std::optional<int> threshold;
  auto* filter_cmd = affinity_cmd->add_subcommand("filter", "Drop records below the threshold");
  filter_cmd->add_option("--records", records_flag);
  filter_cmd->add_option("--citations", citations_flag);
  filter_cmd->add_option("--threshold", threshold);

  auto* segment_cmd = app.add_subcommand("segment", "Assign periods and fifths");
  segment_cmd->add_option("--records", records_flag);
  segment_cmd->add_option("--citations", citations_flag);
  segment_cmd->add_option("--out", out_flag, "Output file (default <work-dir>/periods.json)");

  CorpusArgs corpus_args;
  auto* corpus_cmd = app.add_subcommand("corpus", "Text corpus construction");
  corpus_cmd->require_subcommand(1);
  auto* build_cmd = corpus_cmd->add_subcommand("build", "Tokenize documents into corpus.json");
  build_cmd->add_option("--documents", corpus_args.documents, "Documents (JSON) instead of harvested abstracts");
  build_cmd->add_option("--source", corpus_args.source, "abstracts or contexts");
  build_cmd->add_option("--records", corpus_args.records);
  build_cmd->add_option("--citations", corpus_args.citations);
  build_cmd->add_option("--periods", corpus_args.periods);
  build_cmd->add_option("--in-text", corpus_args.in_text);

  std::optional<std::uint64_t> seed;
  std::optional<int> k, iterations;
  std::string k_range;
  std::optional<double> lambda;
  auto* topics_cmd = app.add_subcommand("topics", "LDA topic modelling");
  topics_cmd->require_subcommand(1);
  auto* fit_cmd = topics_cmd->add_subcommand("fit", "Fit one model into model.json");
  fit_cmd->add_option("--corpus", corpus_flag);
  fit_cmd->add_option("--k", k);
  fit_cmd->add_option("--iterations", iterations);
  fit_cmd->add_option("--seed", seed);
  auto* select_cmd = topics_cmd->add_subcommand("select-k", "Choose k by UMass coherence");
  select_cmd->add_option("--corpus", corpus_flag);
  select_cmd->add_option("--k", k_range, "Range such as 2..6 or 4,8,16");
  select_cmd->add_option("--iterations", iterations);
  select_cmd->add_option("--seed", seed);
  auto* export_cmd = topics_cmd->add_subcommand("export", "Topic map, relevance and grouped tables");
  export_cmd->add_option("--corpus", corpus_flag);
  export_cmd->add_option("--model", model_flag);
  export_cmd->add_option("--lambda", lambda);

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Descriptive statistics into report.json");
  report_cmd->add_option("--records", report_args.records);
  report_cmd->add_option("--citations", report_args.citations);
  report_cmd->add_option("--periods", report_args.periods);
  report_cmd->add_option("--in-text", report_args.in_text);
  report_cmd->add_option("--svg", report_args.svg_dir, "Also write SVG fifth histograms here");

  auto* vis_cmd = app.add_subcommand("export-vis", "Assemble the visualization bundle");
  vis_cmd->add_option("--records", records_flag);
  vis_cmd->add_option("--periods", periods_flag);
  vis_cmd->add_option("--out", out_flag, "Bundle directory");

  AnnotateArgs annotate_args;
  auto* annotate_cmd = app.add_subcommand("annotate", "In-text citation annotation");
  annotate_cmd->require_subcommand(1);
  auto* serve_cmd = annotate_cmd->add_subcommand("serve", "Serve the annotation API");
  serve_cmd->add_option("--in-text", annotate_args.in_text);
  serve_cmd->add_option("--tree", annotate_args.tree);
  serve_cmd->add_option("--assets", annotate_args.assets, "Static workbench files");
  serve_cmd->add_option("--host", annotate_args.host);
  serve_cmd->add_option("--port", annotate_args.port);
  auto* aexport_cmd = annotate_cmd->add_subcommand("export", "Write the current annotations as CSV");
  aexport_cmd->add_option("--in-text", annotate_args.in_text);
  aexport_cmd->add_option("--csv", annotate_args.csv, "Output file (default stdout)");
  auto* aimport_cmd = annotate_cmd->add_subcommand("import", "Record annotations from CSV");
  aimport_cmd->add_option("--in-text", annotate_args.in_text);
  aimport_cmd->add_option("--csv", annotate_args.csv)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    Context ctx{config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path), out, err};
    ctx.config.apply_env([](const char* name) { return std::getenv(name); });
    auto& c = ctx.config;
    if (!work_dir.empty()) c.work_dir = work_dir;
    if (k) c.lda.k = *k;
    if (iterations) c.lda.iterations = *iterations;
    if (seed) c.lda.seed = *seed;
    if (!k_range.empty()) c.k_range = k_range;
    if (lambda) c.lambda = *lambda;
    c.validate();
    fs::create_directories(c.work_dir);

    if (ingest_cmd->parsed()) return do_ingest(ctx, ingest_args);
    if (harvest_cmd->parsed()) return do_harvest(ctx, records_flag);
    if (score_cmd->parsed()) return do_affinity_score(ctx, records_flag);
    if (filter_cmd->parsed()) return do_affinity_filter(ctx, records_flag, citations_flag, threshold);
    if (segment_cmd->parsed()) return do_segment(ctx, records_flag, citations_flag, out_flag);
    if (build_cmd->parsed()) return do_corpus_build(ctx, corpus_args);
    if (fit_cmd->parsed()) return do_topics_fit(ctx, corpus_flag);
    if (select_cmd->parsed()) return do_topics_select_k(ctx, corpus_flag);
    if (export_cmd->parsed()) return do_topics_export(ctx, corpus_flag, model_flag);
    if (report_cmd->parsed()) return do_report(ctx, report_args);
    if (vis_cmd->parsed()) return do_export_vis(ctx, records_flag, periods_flag, out_flag);
    if (serve_cmd->parsed()) return do_annotate_serve(ctx, annotate_args);
    if (aexport_cmd->parsed()) return do_annotate_export(ctx, annotate_args);
    if (aimport_cmd->parsed()) return do_annotate_import(ctx, annotate_args);
    err << app.help();
    return 2;
  } catch (const ValidationError& e) {
    print_field_errors(err, e);
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("retrace");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace retrace::cli
