#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "retrace/textproc.hpp"
#include "retrace/util.hpp"

namespace retrace::topics {

using Matrix = std::vector<std::vector<double>>;

struct LdaParams {
  int k = 2;
  std::optional<double> alpha;  // defaults to 50/k
  double beta = 0.01;
  int iterations = 1000;
  std::uint64_t seed = 0;

  double resolved_alpha() const { return alpha ? *alpha : 50.0 / k; }
  void validate() const;  // ValidationError
};

// Collapsed Gibbs sampler state. One instance is single-threaded and deterministic for a seed.
class LdaSampler {
 public:
  LdaSampler(const text::Corpus& corpus, const LdaParams& params);

  void sweep();
  int sweeps_done() const { return sweeps_; }

  Matrix phi() const;    // k x V
  Matrix theta() const;  // D x k
  const std::vector<long long>& topic_totals() const { return nk_; }
  long long total_tokens() const { return total_tokens_; }
  const std::vector<std::vector<int>>& assignments() const { return z_; }
  int k() const { return k_; }

 private:
  int k_;
  int vocab_;
  double alpha_;
  double beta_;
  std::mt19937_64 rng_;
  std::vector<std::vector<int>> words_;  // per document token term ids
  std::vector<std::vector<int>> z_;
  std::vector<long long> nw_;            // k*V, topic-major
  std::vector<std::vector<long long>> nd_;
  std::vector<long long> nk_;
  std::vector<double> p_;
  long long total_tokens_ = 0;
  int sweeps_ = 0;

  double uniform();
};

struct TopicModel {
  int k = 0;
  double alpha = 0;
  double beta = 0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::string corpus_ref;
  std::vector<std::string> vocabulary;
  std::vector<std::string> doc_ids;
  Matrix phi;
  Matrix theta;
  std::vector<std::vector<int>> assignments;
  std::vector<std::string> labels;  // editable, empty by default
  std::vector<std::string> warnings;
};

using SweepObserver = std::function<void(const LdaSampler&)>;

// Throws DomainError for k above the number of distinct terms, ValidationError on bad params.
TopicModel fit_lda(const text::Corpus& corpus, const LdaParams& params, const SweepObserver& observer = {});

// Term ids of a phi row ordered by descending probability; ties keep term order.
std::vector<int> top_terms(const std::vector<double>& row, std::size_t n);

struct DocumentFrequencies {
  explicit DocumentFrequencies(const text::Corpus& corpus);
  long long doc_freq(int w) const;
  long long co_doc_freq(int a, int b) const;

 private:
  std::vector<std::vector<int>> docs_of_term_;  // sorted document indices per term
};

// UMass coherence, averaged over topics. top_n is clamped to the vocabulary size.
double coherence(const TopicModel& model, const text::Corpus& corpus, std::size_t top_n = 10,
                 std::vector<std::string>* warnings = nullptr);

struct CoherenceReport {
  std::map<int, double> per_k;
  int chosen_k = 0;
  std::size_t top_n = 10;
};

// One fit per k, seeded with base seed + k; fits run in parallel.
CoherenceReport select_k(const text::Corpus& corpus, const std::vector<int>& k_range, const LdaParams& base,
                         std::size_t top_n = 10);

// Parses "2..6" or "2,4,8".
std::vector<int> parse_k_range(const std::string& spec);

struct RankedTerm {
  int term = 0;
  double relevance = 0;
};

struct RelevanceRanking {
  double lambda = 0.3;
  std::size_t top_n = 30;
  std::vector<std::vector<RankedTerm>> topics;
};

std::vector<double> term_probabilities(const text::Corpus& corpus);

RelevanceRanking relevance(const TopicModel& model, const std::vector<double>& p_w, double lambda,
                           std::size_t top_n = 30);
RelevanceRanking relevance(const TopicModel& model, const text::Corpus& corpus, double lambda,
                           std::size_t top_n = 30);

// Jensen-Shannon divergence in bits.
double jsd(const std::vector<double>& p, const std::vector<double>& q);

struct TopicMap {
  Matrix distance;
  std::vector<std::pair<double, double>> coords;
  std::vector<double> topic_share;
  std::vector<std::string> warnings;
};

// Classical multidimensional scaling to two dimensions.
std::vector<std::pair<double, double>> classical_mds(const Matrix& distance);

TopicMap topic_map(const TopicModel& model, const text::Corpus& corpus);

struct GroupedTopicTable {
  std::string group_key;
  std::map<std::string, std::vector<double>> rows;
  std::map<std::string, long long> documents;
};

inline constexpr const char* kUnknownGroup = "unknown";

// Mean theta per metadata value. Documents with several values count toward each.
GroupedTopicTable group_topic_distribution(const TopicModel& model, const text::Corpus& corpus,
                                           const std::string& group_key);

Json to_json(const TopicModel& m);
TopicModel model_from_json(const Json& j);
Json to_json(const CoherenceReport& r);
Json to_json(const RelevanceRanking& r, const std::vector<std::string>& vocabulary);
Json to_json(const TopicMap& m);
Json to_json(const GroupedTopicTable& t);
std::string grouped_csv(const GroupedTopicTable& t);

// Everything a client needs to re-rank at any lambda without the server.
Json visualization_bundle(const TopicModel& model, const text::Corpus& corpus, double lambda,
                          std::size_t top_n = 30);

}  // namespace retrace::topics
