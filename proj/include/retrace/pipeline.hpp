#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "retrace/textproc.hpp"
#include "retrace/topics.hpp"
#include "retrace/util.hpp"

namespace retrace::cli {

struct SourceConfig {
  std::string name;
  std::string format = "coci";
  std::filesystem::path fixture_dir;  // fixture transport when set
  std::string base_url;               // otherwise HTTP
  std::string path_template;
  int timeout_ms = 30000;
};

// Settings for every stage. Precedence: defaults, config file, RETRACE_* environment, command-line flags.
struct PipelineConfig {
  std::filesystem::path work_dir = ".";
  std::filesystem::path cache_dir;  // default <work_dir>/cache
  std::filesystem::path store;      // default <work_dir>/annotations.jsonl
  std::filesystem::path bundles;    // default <work_dir>/bundle
  std::filesystem::path metadata;
  std::filesystem::path journals;
  std::filesystem::path isbn_lcc;
  std::filesystem::path lcc_rules;
  std::filesystem::path humanities_tags;
  std::filesystem::path judgments;
  std::filesystem::path stopwords;
  std::filesystem::path cito_tree;

  std::vector<SourceConfig> sources;
  double rate_limit = 5.0;
  unsigned threads = 4;

  int affinity_threshold = 2;

  text::TokenPipelineConfig tokenizer;
  long long min_term_frequency = 1;

  topics::LdaParams lda{8, std::nullopt, 0.01, 1000, 0};
  std::string k_range = "2..10";
  double lambda = 0.3;
  std::size_t top_n = 30;
  std::size_t coherence_top_n = 10;
  std::vector<std::string> group_keys = {"period", "discipline", "subject_area"};

  bool mention_denominator_includes_unavailable = true;

  // Relative paths resolve against base_dir. Unknown keys raise ValidationError.
  static PipelineConfig from_json(const Json& j, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
  // Reads RETRACE_* variables through `getenv`.
  void apply_env(const std::function<const char*(const char*)>& getenv);
  void validate() const;

  std::filesystem::path resolved_cache() const { return cache_dir.empty() ? work_dir / "cache" : cache_dir; }
  std::filesystem::path resolved_store() const { return store.empty() ? work_dir / "annotations.jsonl" : store; }
  std::filesystem::path resolved_bundles() const { return bundles.empty() ? work_dir / "bundle" : bundles; }
};

// Exit status: 0 success, 1 data or configuration error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace retrace::cli
