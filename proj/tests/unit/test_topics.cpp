#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "retrace/topics.hpp"

using namespace retrace;
using namespace retrace::topics;
using text::Corpus;

namespace {

// Random corpus with integer counts; every document non-empty.
Corpus random_corpus(std::uint32_t seed, int docs, int vocab) {
  std::mt19937 rng(seed);
  Corpus c;
  for (int w = 0; w < vocab; ++w) c.vocabulary.push_back("t" + std::to_string(1000 + w));
  for (int d = 0; d < docs; ++d) {
    text::CorpusDocument doc;
    doc.id = "d" + std::to_string(d);
    for (int w = 0; w < vocab; ++w)
      if (rng() % 3 == 0 || w == d % vocab) doc.counts.push_back({w, 1 + static_cast<int>(rng() % 4)});
    doc.metadata["period"] = {d % 3 == 0 ? "P_PRE" : "P_POST"};
    if (d % 5 == 0) doc.metadata["discipline"] = {"history", "religion"};
    else if (d % 5 == 1) doc.metadata["discipline"] = {"music"};
    c.documents.push_back(doc);
  }
  return c;
}

double brute_jsd(const std::vector<double>& p, const std::vector<double>& q) {
  double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) total += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0) total += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return total;
}

}  // namespace

TEST_CASE("lda params validation") {
  LdaParams p;
  p.k = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.k = 2;
  p.beta = -1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.beta = 0.01;
  p.iterations = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK(LdaParams{4}.resolved_alpha() == 12.5);
}

TEST_CASE("count invariants hold after every sweep") {
  auto c = random_corpus(3, 12, 20);
  LdaParams p{3, std::nullopt, 0.01, 15, 9};
  int sweeps = 0;
  fit_lda(c, p, [&](const LdaSampler& s) {
    ++sweeps;
    CHECK(std::accumulate(s.topic_totals().begin(), s.topic_totals().end(), 0LL) == s.total_tokens());
    auto phi = s.phi();
    for (double v : phi[0]) CHECK(v > 0);
    for (const auto& row : s.theta()) CHECK(std::accumulate(row.begin(), row.end(), 0.0) == Catch::Approx(1.0));
  });
  CHECK(sweeps == 15);
}

TEST_CASE("same seed gives identical models, different seed differs") {
  auto c = random_corpus(4, 10, 15);
  LdaParams p{2, std::nullopt, 0.01, 30, 17};
  auto a = fit_lda(c, p), b = fit_lda(c, p);
  CHECK(a.assignments == b.assignments);
  CHECK(a.phi == b.phi);
  p.seed = 18;
  CHECK(fit_lda(c, p).assignments != a.assignments);
}

TEST_CASE("k above vocabulary size is a domain error") {
  auto c = random_corpus(5, 4, 3);
  CHECK_THROWS_AS(fit_lda(c, LdaParams{4, std::nullopt, 0.01, 5, 1}), DomainError);
}

TEST_CASE("empty documents are kept with a warning") {
  auto c = random_corpus(6, 5, 8);
  c.documents.push_back({"empty", {}, {}});
  auto m = fit_lda(c, LdaParams{2, std::nullopt, 0.01, 5, 1});
  CHECK(m.theta.size() == 6);
  CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("top terms: descending with stable ties") {
  CHECK(top_terms({0.1, 0.4, 0.1, 0.4}, 3) == std::vector<int>{1, 3, 0});
}

TEST_CASE("coherence equals a brute force sum") {
  auto c = random_corpus(7, 15, 12);
  auto m = fit_lda(c, LdaParams{3, std::nullopt, 0.01, 20, 2});
  const std::size_t n = 5;
  auto contains = [&](const text::CorpusDocument& d, int w) {
    return std::any_of(d.counts.begin(), d.counts.end(), [&](const auto& tc) { return tc.term == w; });
  };
  double total = 0;
  for (const auto& row : m.phi) {
    auto top = top_terms(row, n);
    double sum = 0;
    for (std::size_t i = 0; i < top.size(); ++i)
      for (std::size_t j = i + 1; j < top.size(); ++j) {
        double co = 0, dj = 0;
        for (const auto& d : c.documents) {
          bool hi = contains(d, top[i]), hj = contains(d, top[j]);
          if (hj) ++dj;
          if (hi && hj) ++co;
        }
        sum += std::log((co + 1) / dj);
      }
    total += sum;
  }
  CHECK(coherence(m, c, n) == Catch::Approx(total / m.phi.size()).epsilon(1e-12));
}

TEST_CASE("coherence clamps top_n with a warning") {
  auto c = random_corpus(8, 6, 4);
  auto m = fit_lda(c, LdaParams{2, std::nullopt, 0.01, 5, 2});
  std::vector<std::string> warnings;
  coherence(m, c, 50, &warnings);
  CHECK(warnings.size() == 1);
}

TEST_CASE("k range parsing") {
  CHECK(parse_k_range("2..5") == std::vector<int>{2, 3, 4, 5});
  CHECK(parse_k_range("2,4,8") == std::vector<int>{2, 4, 8});
  CHECK_THROWS(parse_k_range("5..2"));
  CHECK_THROWS(parse_k_range("x"));
}

TEST_CASE("jsd matches brute force and is symmetric and bounded") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(8), q(8);
    for (auto& v : p) v = u(rng) < 0.2 ? 0 : u(rng);
    for (auto& v : q) v = u(rng);
    double sp = std::accumulate(p.begin(), p.end(), 0.0), sq = std::accumulate(q.begin(), q.end(), 0.0);
    if (sp == 0) continue;
    for (auto& v : p) v /= sp;
    for (auto& v : q) v /= sq;
    CHECK(std::fabs(jsd(p, q) - brute_jsd(p, q)) < 1e-12);
    CHECK(jsd(p, q) == Catch::Approx(jsd(q, p)).epsilon(1e-12));
    CHECK(jsd(p, q) >= 0);
    CHECK(jsd(p, q) <= 1);
  }
  CHECK(jsd({1, 0}, {0, 1}) == Catch::Approx(1.0));
  CHECK(jsd({0.5, 0.5}, {0.5, 0.5}) == 0.0);
}

TEST_CASE("relevance at lambda one ranks by phi, at zero by lift") {
  auto c = random_corpus(9, 12, 14);
  auto m = fit_lda(c, LdaParams{3, std::nullopt, 0.01, 20, 3});
  auto pw = term_probabilities(c);
  auto r1 = relevance(m, pw, 1.0, 14);
  for (std::size_t t = 0; t < m.phi.size(); ++t) {
    std::vector<int> got;
    for (const auto& rt : r1.topics[t]) got.push_back(rt.term);
    CHECK(got == top_terms(m.phi[t], 14));
  }
  auto r0 = relevance(m, pw, 0.0, 3);
  for (std::size_t t = 0; t < m.phi.size(); ++t) {
    REQUIRE(r0.topics[t].size() == 3);
    int w = r0.topics[t][0].term;
    CHECK(r0.topics[t][0].relevance == Catch::Approx(std::log(m.phi[t][w] / pw[w])));
  }
  CHECK_THROWS(relevance(m, pw, 1.5, 3));
}

TEST_CASE("mds reproduces a known planar configuration") {
  std::vector<std::pair<double, double>> pts{{0, 0}, {3, 0}, {0, 4}, {3, 4}, {1, 1}};
  Matrix d(5, std::vector<double>(5));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) d[i][j] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
  auto xy = classical_mds(d);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(std::hypot(xy[i].first - xy[j].first, xy[i].second - xy[j].second) == Catch::Approx(d[i][j]).margin(1e-9));
}

TEST_CASE("topic map shares sum to one") {
  auto c = random_corpus(10, 10, 12);
  auto m = fit_lda(c, LdaParams{3, std::nullopt, 0.01, 10, 4});
  auto tm = topic_map(m, c);
  CHECK(tm.coords.size() == 3);
  CHECK(std::accumulate(tm.topic_share.begin(), tm.topic_share.end(), 0.0) == Catch::Approx(1.0));
  for (std::size_t i = 0; i < 3; ++i) CHECK(tm.distance[i][i] == 0.0);
}

TEST_CASE("grouped distribution equals brute force means") {
  auto c = random_corpus(11, 20, 10);
  auto m = fit_lda(c, LdaParams{2, std::nullopt, 0.01, 10, 5});
  auto g = group_topic_distribution(m, c, "discipline");
  std::map<std::string, std::vector<double>> sums;
  std::map<std::string, int> counts;
  for (std::size_t d = 0; d < c.documents.size(); ++d) {
    auto it = c.documents[d].metadata.find("discipline");
    std::vector<std::string> vals = it == c.documents[d].metadata.end() ? std::vector<std::string>{"unknown"} : it->second;
    for (const auto& v : vals) {
      auto& s = sums[v];
      s.resize(2);
      for (int k = 0; k < 2; ++k) s[k] += m.theta[d][k];
      ++counts[v];
    }
  }
  REQUIRE(g.rows.size() == sums.size());
  for (const auto& [key, s] : sums) {
    CHECK(g.documents.at(key) == counts.at(key));
    for (int k = 0; k < 2; ++k) CHECK(g.rows.at(key)[k] == Catch::Approx(s[k] / counts.at(key)).epsilon(1e-12));
  }
  CHECK(grouped_csv(g).rfind("discipline,documents,", 0) == 0);
}

TEST_CASE("model json round trip and bundle contents") {
  auto c = random_corpus(12, 8, 10);
  auto m = fit_lda(c, LdaParams{2, std::nullopt, 0.01, 10, 6});
  auto back = model_from_json(to_json(m));
  CHECK(back.phi == m.phi);
  CHECK(back.assignments == m.assignments);
  CHECK(back.corpus_ref == c.hash());
  auto b = visualization_bundle(m, c, 0.3, 5);
  for (const char* key : {"vocabulary", "p_w", "phi", "topic_map", "relevance", "corpus_ref"}) CHECK(b.contains(key));
}

TEST_CASE("select k picks the best coherence deterministically") {
  auto c = random_corpus(13, 12, 12);
  LdaParams base{2, std::nullopt, 0.01, 10, 7};
  auto r1 = select_k(c, {2, 3, 4}, base, 5);
  auto r2 = select_k(c, {2, 3, 4}, base, 5);
  CHECK(r1.per_k == r2.per_k);
  double best = -1e300;
  for (const auto& [k, v] : r1.per_k) best = std::max(best, v);
  CHECK(r1.per_k.at(r1.chosen_k) == best);
}
