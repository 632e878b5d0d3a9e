#include "retrace/topics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "retrace/csv.hpp"

namespace retrace::topics {

void LdaParams::validate() const {
  std::map<std::string, std::string> errors;
  if (k < 2) errors["k"] = "must be >= 2";
  if (alpha && !(*alpha > 0)) errors["alpha"] = "must be > 0";
  if (!(beta > 0)) errors["beta"] = "must be > 0";
  if (iterations < 1) errors["iterations"] = "must be >= 1";
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

LdaSampler::LdaSampler(const text::Corpus& corpus, const LdaParams& params)
    : k_(params.k), vocab_(static_cast<int>(corpus.vocabulary.size())), alpha_(params.resolved_alpha()),
      beta_(params.beta), rng_(params.seed) {
  nw_.assign(static_cast<std::size_t>(k_) * vocab_, 0);
  nk_.assign(k_, 0);
  p_.assign(k_, 0.0);
  for (const auto& doc : corpus.documents) {
    std::vector<int> words;
    for (const auto& tc : doc.counts) words.insert(words.end(), tc.count, tc.term);
    std::vector<int> z(words.size());
    std::vector<long long> nd(k_, 0);
    for (std::size_t i = 0; i < words.size(); ++i) {
      z[i] = static_cast<int>(rng_() % static_cast<std::uint64_t>(k_));
      ++nd[z[i]];
      ++nw_[static_cast<std::size_t>(z[i]) * vocab_ + words[i]];
      ++nk_[z[i]];
    }
    total_tokens_ += static_cast<long long>(words.size());
    words_.push_back(std::move(words));
    z_.push_back(std::move(z));
    nd_.push_back(std::move(nd));
  }
}

double LdaSampler::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

void LdaSampler::sweep() {
  const double vbeta = vocab_ * beta_;
  for (std::size_t d = 0; d < words_.size(); ++d) {
    auto& words = words_[d];
    auto& z = z_[d];
    auto& nd = nd_[d];
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int w = words[i];
      int t = z[i];
      --nd[t];
      --nw_[static_cast<std::size_t>(t) * vocab_ + w];
      --nk_[t];
      double total = 0;
      for (int s = 0; s < k_; ++s) {
        total += (nd[s] + alpha_) * (nw_[static_cast<std::size_t>(s) * vocab_ + w] + beta_) / (nk_[s] + vbeta);
        p_[s] = total;
      }
      const double u = uniform() * total;
      t = 0;
      while (t < k_ - 1 && p_[t] <= u) ++t;
      z[i] = t;
      ++nd[t];
      ++nw_[static_cast<std::size_t>(t) * vocab_ + w];
      ++nk_[t];
    }
  }
  ++sweeps_;
}

Matrix LdaSampler::phi() const {
  Matrix phi(k_, std::vector<double>(vocab_));
  for (int t = 0; t < k_; ++t) {
    const double denom = nk_[t] + vocab_ * beta_;
    for (int w = 0; w < vocab_; ++w) phi[t][w] = (nw_[static_cast<std::size_t>(t) * vocab_ + w] + beta_) / denom;
  }
  return phi;
}

Matrix LdaSampler::theta() const {
  Matrix theta(words_.size(), std::vector<double>(k_));
  for (std::size_t d = 0; d < words_.size(); ++d) {
    const double denom = static_cast<double>(words_[d].size()) + k_ * alpha_;
    for (int t = 0; t < k_; ++t) theta[d][t] = (nd_[d][t] + alpha_) / denom;
  }
  return theta;
}

TopicModel fit_lda(const text::Corpus& corpus, const LdaParams& params, const SweepObserver& observer) {
  params.validate();
  if (corpus.documents.empty() || corpus.total_tokens() == 0) throw DomainError("corpus has no tokens");
  if (static_cast<std::size_t>(params.k) > corpus.vocabulary.size())
    throw DomainError("k=" + std::to_string(params.k) + " exceeds the " + std::to_string(corpus.vocabulary.size()) +
                      " distinct terms in the corpus");

  TopicModel m;
  for (const auto& d : corpus.documents) {
    m.doc_ids.push_back(d.id);
    if (d.counts.empty()) m.warnings.push_back("document " + d.id + " is empty; theta row is uniform");
  }
  LdaSampler sampler(corpus, params);
  for (int it = 0; it < params.iterations; ++it) {
    sampler.sweep();
    if (observer) observer(sampler);
  }
  m.k = params.k;
  m.alpha = params.resolved_alpha();
  m.beta = params.beta;
  m.iterations = params.iterations;
  m.seed = params.seed;
  m.corpus_ref = corpus.hash();
  m.vocabulary = corpus.vocabulary;
  m.phi = sampler.phi();
  m.theta = sampler.theta();
  m.assignments = sampler.assignments();
  m.labels.assign(params.k, "");
  return m;
}

std::vector<int> top_terms(const std::vector<double>& row, std::size_t n) {
  std::vector<int> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return row[a] > row[b]; });
  idx.resize(std::min(n, idx.size()));
  return idx;
}

DocumentFrequencies::DocumentFrequencies(const text::Corpus& corpus) : docs_of_term_(corpus.vocabulary.size()) {
  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    for (const auto& tc : corpus.documents[d].counts) docs_of_term_[tc.term].push_back(static_cast<int>(d));
}

long long DocumentFrequencies::doc_freq(int w) const { return static_cast<long long>(docs_of_term_[w].size()); }

long long DocumentFrequencies::co_doc_freq(int a, int b) const {
  const auto& x = docs_of_term_[a];
  const auto& y = docs_of_term_[b];
  long long n = 0;
  for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
    if (x[i] < y[j]) ++i;
    else if (y[j] < x[i]) ++j;
    else ++n, ++i, ++j;
  }
  return n;
}

double coherence(const TopicModel& model, const text::Corpus& corpus, std::size_t top_n,
                 std::vector<std::string>* warnings) {
  if (model.vocabulary != corpus.vocabulary) throw DomainError("model was not fitted on this corpus");
  if (top_n > corpus.vocabulary.size()) {
    if (warnings)
      warnings->push_back("top_n " + std::to_string(top_n) + " clamped to vocabulary size " +
                          std::to_string(corpus.vocabulary.size()));
    top_n = corpus.vocabulary.size();
  }
  DocumentFrequencies df(corpus);
  double sum = 0;
  for (const auto& row : model.phi) {
    auto terms = top_terms(row, top_n);
    double c = 0;
    for (std::size_t i = 0; i < terms.size(); ++i)
      for (std::size_t j = i + 1; j < terms.size(); ++j) {
        // A term of the vocabulary always occurs in some document, so doc_freq > 0.
        c += std::log((df.co_doc_freq(terms[i], terms[j]) + 1.0) / static_cast<double>(df.doc_freq(terms[j])));
      }
    sum += c;
  }
  return model.phi.empty() ? 0.0 : sum / static_cast<double>(model.phi.size());
}

CoherenceReport select_k(const text::Corpus& corpus, const std::vector<int>& k_range, const LdaParams& base,
                         std::size_t top_n) {
  if (k_range.empty()) throw ValidationError(std::map<std::string, std::string>{{"k_range", "must not be empty"}});
  for (int k : k_range)
    if (k < 2) throw ValidationError(std::map<std::string, std::string>{{"k_range", "every k must be >= 2, got " + std::to_string(k)}});

  std::vector<std::future<double>> jobs;
  for (int k : k_range) {
    jobs.push_back(std::async(std::launch::async, [&, k] {
      LdaParams p = base;
      p.k = k;
      p.alpha = base.alpha;
      p.seed = base.seed + static_cast<std::uint64_t>(k);
      try {
        return coherence(fit_lda(corpus, p), corpus, top_n);
      } catch (const Error& e) {
        throw DomainError("k=" + std::to_string(k) + ": " + e.what());
      }
    }));
  }
  CoherenceReport report;
  report.top_n = top_n;
  for (std::size_t i = 0; i < k_range.size(); ++i) report.per_k[k_range[i]] = jobs[i].get();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [k, score] : report.per_k)  // ascending k, strict > keeps the smallest on ties
    if (score > best) best = score, report.chosen_k = k;
  return report;
}

std::vector<int> parse_k_range(const std::string& spec) {
  std::vector<int> out;
  auto parse_int = [&](const std::string& s) {
    auto t = trim(s);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (t.empty() || used != t.size()) throw ValidationError(std::map<std::string, std::string>{{"k_range", "cannot parse '" + spec + "'"}});
    return v;
  };
  if (auto dots = spec.find(".."); dots != std::string::npos) {
    int lo = parse_int(spec.substr(0, dots));
    int hi = parse_int(spec.substr(dots + 2));
    if (hi < lo) throw ValidationError(std::map<std::string, std::string>{{"k_range", "empty range '" + spec + "'"}});
    for (int k = lo; k <= hi; ++k) out.push_back(k);
  } else {
    for (const auto& part : split(spec, ",")) out.push_back(parse_int(part));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

std::vector<double> term_probabilities(const text::Corpus& corpus) {
  auto freq = corpus.term_frequencies();
  const double total = static_cast<double>(corpus.total_tokens());
  std::vector<double> p(freq.size(), 0.0);
  if (total > 0)
    for (std::size_t w = 0; w < freq.size(); ++w) p[w] = static_cast<double>(freq[w]) / total;
  return p;
}

RelevanceRanking relevance(const TopicModel& model, const std::vector<double>& p_w, double lambda,
                           std::size_t top_n) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  if (p_w.size() != model.vocabulary.size()) throw DomainError("term probabilities do not match the vocabulary");
  RelevanceRanking r;
  r.lambda = lambda;
  r.top_n = top_n;
  for (const auto& row : model.phi) {
    std::vector<RankedTerm> ranked(row.size());
    for (std::size_t w = 0; w < row.size(); ++w) {
      if (!(p_w[w] > 0)) throw DomainError("term '" + model.vocabulary[w] + "' has zero corpus probability");
      const double log_phi = std::log(row[w]);
      ranked[w] = {static_cast<int>(w), lambda * log_phi + (1.0 - lambda) * (log_phi - std::log(p_w[w]))};
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedTerm& a, const RankedTerm& b) { return a.relevance > b.relevance; });
    ranked.resize(std::min(top_n, ranked.size()));
    r.topics.push_back(std::move(ranked));
  }
  return r;
}

RelevanceRanking relevance(const TopicModel& model, const text::Corpus& corpus, double lambda, std::size_t top_n) {
  return relevance(model, term_probabilities(corpus), lambda, top_n);
}

double jsd(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DomainError("distributions differ in length");
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) sum += p[i] * std::log2(p[i] / m);
    if (q[i] > 0) sum += q[i] * std::log2(q[i] / m);
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

std::vector<std::pair<double, double>> classical_mds(const Matrix& distance) {
  const auto n = static_cast<Eigen::Index>(distance.size());
  std::vector<std::pair<double, double>> coords(distance.size(), {0.0, 0.0});
  if (n == 0) return coords;
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d2(i, j) = distance[i][j] * distance[i][j];
  Eigen::MatrixXd centering = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  Eigen::MatrixXd b = -0.5 * centering * d2 * centering;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();
  for (int dim = 0; dim < 2 && dim < n; ++dim) {
    const Eigen::Index col = n - 1 - dim;
    const double lambda = values(col);
    if (!(lambda > 1e-12)) continue;
    Eigen::VectorXd v = vectors.col(col);
    // Fix the sign so the largest-magnitude component is positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    const double scale = std::sqrt(lambda);
    for (Eigen::Index i = 0; i < n; ++i) (dim == 0 ? coords[i].first : coords[i].second) = v(i) * scale;
  }
  return coords;
}

TopicMap topic_map(const TopicModel& model, const text::Corpus& corpus) {
  TopicMap map;
  const std::size_t k = model.phi.size();
  map.distance.assign(k, std::vector<double>(k, 0.0));
  bool degenerate = true;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      map.distance[i][j] = map.distance[j][i] = jsd(model.phi[i], model.phi[j]);
      if (map.distance[i][j] > 0) degenerate = false;
    }
  if (degenerate) {
    map.coords.assign(k, {0.0, 0.0});
    map.warnings.push_back("all topics are identical; coordinates placed at the origin");
  } else {
    map.coords = classical_mds(map.distance);
  }

  map.topic_share.assign(k, 0.0);
  double total = 0;
  for (std::size_t d = 0; d < model.theta.size() && d < corpus.documents.size(); ++d) {
    const double len = static_cast<double>(corpus.documents[d].length());
    for (std::size_t t = 0; t < k; ++t) map.topic_share[t] += len * model.theta[d][t];
    total += len;
  }
  for (auto& s : map.topic_share) s = total > 0 ? s / total : 1.0 / static_cast<double>(k);
  return map;
}

GroupedTopicTable group_topic_distribution(const TopicModel& model, const text::Corpus& corpus,
                                           const std::string& group_key) {
  if (model.theta.size() != corpus.documents.size()) throw DomainError("model and corpus document counts differ");
  GroupedTopicTable table;
  table.group_key = group_key;
  std::map<std::string, std::vector<double>> sums;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& meta = corpus.documents[d].metadata;
    std::vector<std::string> groups;
    if (auto it = meta.find(group_key); it != meta.end())
      for (const auto& g : it->second)
        if (!trim(g).empty()) groups.push_back(g);
    if (groups.empty()) groups.push_back(kUnknownGroup);
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
    for (const auto& g : groups) {
      auto& acc = sums[g];
      acc.resize(model.theta[d].size(), 0.0);
      for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += model.theta[d][t];
      ++table.documents[g];
    }
  }
  for (auto& [g, acc] : sums) {
    const double total = std::accumulate(acc.begin(), acc.end(), 0.0);
    if (!(total > 0)) continue;
    for (auto& v : acc) v /= total;
    table.rows[g] = std::move(acc);
  }
  return table;
}

Json to_json(const TopicModel& m) {
  return Json{{"schema_version", 1},
              {"k", m.k},
              {"alpha", m.alpha},
              {"beta", m.beta},
              {"iterations", m.iterations},
              {"seed", m.seed},
              {"corpus_ref", m.corpus_ref},
              {"vocabulary", m.vocabulary},
              {"doc_ids", m.doc_ids},
              {"labels", m.labels},
              {"phi", m.phi},
              {"theta", m.theta},
              {"assignments", m.assignments},
              {"warnings", m.warnings}};
}

TopicModel model_from_json(const Json& j) {
  if (j.value("schema_version", 0) != 1) throw SchemaError("unsupported topic model schema version");
  TopicModel m;
  try {
    m.k = j.at("k").get<int>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.iterations = j.at("iterations").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.corpus_ref = j.at("corpus_ref").get<std::string>();
    m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    m.labels = j.value("labels", std::vector<std::string>(m.k, ""));
    m.phi = j.at("phi").get<Matrix>();
    m.theta = j.at("theta").get<Matrix>();
    m.assignments = j.value("assignments", std::vector<std::vector<int>>{});
    m.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("topic model: ") + e.what());
  }
  if (m.phi.size() != static_cast<std::size_t>(m.k) || m.labels.size() != static_cast<std::size_t>(m.k))
    throw SchemaError("topic model: phi/labels do not have k rows");
  for (const auto& row : m.phi)
    if (row.size() != m.vocabulary.size()) throw SchemaError("topic model: phi row width differs from vocabulary");
  if (m.theta.size() != m.doc_ids.size()) throw SchemaError("topic model: theta rows differ from documents");
  return m;
}

Json to_json(const CoherenceReport& r) {
  Json per_k = Json::object();
  for (const auto& [k, v] : r.per_k) per_k[std::to_string(k)] = v;
  return Json{{"schema_version", 1}, {"measure", "umass"}, {"top_n", r.top_n}, {"per_k", per_k},
              {"chosen_k", r.chosen_k}};
}

Json to_json(const RelevanceRanking& r, const std::vector<std::string>& vocabulary) {
  Json topics = Json::array();
  for (const auto& list : r.topics) {
    Json terms = Json::array();
    for (const auto& t : list) terms.push_back({{"term", vocabulary.at(t.term)}, {"relevance", t.relevance}});
    topics.push_back(terms);
  }
  return Json{{"schema_version", 1}, {"lambda", r.lambda}, {"top_n", r.top_n}, {"topics", topics}};
}

Json to_json(const TopicMap& m) {
  Json coords = Json::array();
  for (const auto& [x, y] : m.coords) coords.push_back({x, y});
  return Json{{"schema_version", 1},
              {"distance", "jensen-shannon (bits)"},
              {"distance_matrix", m.distance},
              {"coords_2d", coords},
              {"topic_share", m.topic_share},
              {"warnings", m.warnings}};
}

Json to_json(const GroupedTopicTable& t) {
  Json rows = Json::object();
  for (const auto& [g, row] : t.rows) rows[g] = {{"distribution", row}, {"documents", t.documents.at(g)}};
  return Json{{"schema_version", 1}, {"group_key", t.group_key}, {"aggregation", "mean_theta"}, {"rows", rows}};
}

std::string grouped_csv(const GroupedTopicTable& t) {
  std::size_t k = t.rows.empty() ? 0 : t.rows.begin()->second.size();
  std::vector<std::string> header{t.group_key, "documents"};
  for (std::size_t i = 0; i < k; ++i) header.push_back("topic_" + std::to_string(i));
  std::vector<std::vector<std::string>> rows;
  for (const auto& [g, row] : t.rows) {
    std::vector<std::string> cells{g, std::to_string(t.documents.at(g))};
    for (double v : row) cells.push_back(format_fixed(v, 6));
    rows.push_back(std::move(cells));
  }
  return csv::write(csv::Table{header, rows});
}

Json visualization_bundle(const TopicModel& model, const text::Corpus& corpus, double lambda, std::size_t top_n) {
  auto p_w = term_probabilities(corpus);
  return Json{{"schema_version", 1},
              {"corpus_ref", model.corpus_ref},
              {"k", model.k},
              {"labels", model.labels},
              {"vocabulary", model.vocabulary},
              {"p_w", p_w},
              {"phi", model.phi},
              {"topic_map", to_json(topic_map(model, corpus))},
              {"relevance", to_json(relevance(model, p_w, lambda, top_n), model.vocabulary)}};
}

}  // namespace retrace::topics
