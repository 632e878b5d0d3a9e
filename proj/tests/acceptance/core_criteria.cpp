#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

#include "acceptance.hpp"
#include "retrace/affinity.hpp"
#include "retrace/citation_harvest.hpp"
#include "retrace/timeline.hpp"

using namespace retrace;

namespace acceptance {

namespace {

std::string coci_payload(const std::string& cited, const std::vector<std::pair<std::string, int>>& citing) {
  Json arr = Json::array();
  for (const auto& [doi, year] : citing)
    arr.push_back({{"oci", "x"}, {"citing", doi}, {"cited", cited}, {"creation", std::to_string(year) + "-01"}});
  return arr.dump();
}

std::string generic_payload(const std::vector<std::pair<std::string, int>>& citing) {
  Json arr = Json::array();
  int n = 0;
  for (const auto& [doi, year] : citing) arr.push_back({{"id", "g" + std::to_string(n++)}, {"doi", doi}, {"year", year}});
  return Json{{"citations", arr}}.dump();
}

struct TwoSources {
  harvest::SourceAdapter coci{"coci", harvest::PayloadFormat::coci, nullptr};
  harvest::SourceAdapter other{"generic", harvest::PayloadFormat::generic, nullptr};
  std::map<std::string, std::vector<harvest::CitationLink>> links;

  void add_coci(const std::string& cited, const std::vector<std::pair<std::string, int>>& citing) {
    auto parsed = harvest::parse_payload(coci, cited, coci_payload(cited, citing));
    auto& out = links["coci"];
    out.insert(out.end(), parsed.begin(), parsed.end());
  }
  void add_other(const std::string& cited, const std::vector<std::pair<std::string, int>>& citing) {
    auto parsed = harvest::parse_payload(other, cited, generic_payload(citing));
    auto& out = links["generic"];
    out.insert(out.end(), parsed.begin(), parsed.end());
  }
};

}  // namespace

void merge_arithmetic(Checks& c) {
  std::mt19937 rng(2202);
  for (int trial = 0; trial < 200; ++trial) {
    const int universe = 1 + static_cast<int>(rng() % 400);
    const int cited_count = 1 + static_cast<int>(rng() % 3);
    std::set<int> a, b;
    TwoSources s;
    std::map<int, std::vector<std::pair<std::string, int>>> a_by_cited, b_by_cited;
    for (int i = 0; i < universe; ++i) {
      const std::string doi = "10.9000/t" + std::to_string(trial) + "." + std::to_string(i);
      const int year = 2000 + i % 20;
      const int cited = static_cast<int>(rng() % cited_count);
      const auto roll = rng() % 4;
      if (roll == 0 || roll == 2) {
        a.insert(i);
        a_by_cited[cited].push_back({doi, year});
      }
      if (roll == 1 || roll == 2) {
        b.insert(i);
        // The second source writes DOIs in resolver form and upper case.
        std::string shown = "https://doi.org/" + doi;
        std::transform(shown.begin(), shown.end(), shown.begin(), ::toupper);
        b_by_cited[cited].push_back({shown, year});
      }
    }
    for (const auto& [cited, rows] : a_by_cited) s.add_coci("10.1/cited." + std::to_string(cited), rows);
    for (const auto& [cited, rows] : b_by_cited) s.add_other("10.1/cited." + std::to_string(cited), rows);
    std::vector<int> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    const auto expected = a.size() + b.size() - both.size();
    const auto merged = harvest::merge_sources(s.links).entities.size();
    c.expect(merged == expected, "trial " + std::to_string(trial) + ": " + std::to_string(merged) +
                                     " != " + std::to_string(expected));
  }

  // 891 from the DOI-keyed generic source, 388 from the OCI source, 344 shared.
  TwoSources s;
  std::vector<std::pair<std::string, int>> larger, smaller;
  for (int i = 0; i < 891; ++i) larger.push_back({"10.4000/p." + std::to_string(i), 2000 + i % 21});
  for (int i = 0; i < 344; ++i) smaller.push_back(larger[i * 2]);
  for (int i = 0; i < 388 - 344; ++i) smaller.push_back({"10.4000/q." + std::to_string(i), 2010});
  for (int part = 0; part < 4; ++part) {
    auto slice = [&](const auto& v) {
      std::vector<std::pair<std::string, int>> out;
      for (std::size_t i = part; i < v.size(); i += 4) out.push_back(v[i]);
      return out;
    };
    const std::string cited = "10.1/ret." + std::to_string(part);
    s.add_other(cited, slice(larger));
    s.add_coci(cited, slice(smaller));
  }
  c.expect(s.links["generic"].size() == 891, "generic source link count");
  c.expect(s.links["coci"].size() == 388, "oci source link count");
  const auto merged = harvest::merge_sources(s.links).entities.size();
  c.expect(merged == 935, "891/388/344 fixture gave " + std::to_string(merged));
  c.note("891+388-344=" + std::to_string(merged));
}

// ---------------------------------------------------------------------------

namespace {

// Round-half-away-from-zero of 100 * (2*(y-first)/span - 1), in exact integers.
int expected_hundredths(int y, int first, int last) {
  const long long span = last - first;
  if (span == 0) return 100;
  const long long num = 100LL * (2LL * (y - first) - span);
  const long long mag = ((num < 0 ? -num : num) * 2 + span) / (2 * span);
  return static_cast<int>(num < 0 ? -mag : mag);
}

std::pair<int, int> parse_label(std::string_view label) {
  double lo = 0, hi = 0;
  std::sscanf(std::string(label).c_str(), "[%lf, %lf]", &lo, &hi);
  auto to_int = [](double v) { return static_cast<int>(v * 100 + (v < 0 ? -0.5 : 0.5)); };
  return {to_int(lo), to_int(hi)};
}

}  // namespace

void fifth_assignment(Checks& c) {
  using timeline::Fifth;
  using timeline::Period;
  auto worked = timeline::assign_period(2011, 2002, 2012, 2020);
  c.expect(worked.period == Period::P_PRE, "worked example period");
  c.expect(worked.fifth && timeline::label(*worked.fifth) == "[0.61, 1.00]", "worked example fifth label");
  c.expect(worked.position_hundredths == 100, "worked example position");

  const std::vector<Fifth> all{Fifth::F1, Fifth::F2, Fifth::F3, Fifth::F4, Fifth::F5};
  for (int h = -100; h <= 100; ++h) {
    int holders = 0;
    Fifth holder = Fifth::F1;
    for (auto f : all) {
      auto [lo, hi] = parse_label(timeline::label(f));
      if (lo <= h && h <= hi) {
        ++holders;
        holder = f;
      }
    }
    c.expect(holders == 1 && timeline::fifth_for(h) == holder, "grid point " + std::to_string(h) + " not in one bin");
  }

  std::mt19937 rng(3101);
  for (int trial = 0; trial < 10000; ++trial) {
    const int p = 1900 + static_cast<int>(rng() % 120);
    const int r = p + static_cast<int>(rng() % 16);
    const int last = r + static_cast<int>(rng() % 16);
    const int y = p + static_cast<int>(rng() % (last - p + 1));
    const std::string where = "(" + std::to_string(p) + "," + std::to_string(r) + "," + std::to_string(y) + "," +
                              std::to_string(last) + ")";
    auto a = timeline::assign_period(y, p, r, last);
    const Period want = y < r ? Period::P_PRE : y == r ? Period::P_RET : Period::P_POST;
    c.expect(a.period == want, "period " + where);
    if (want == Period::P_RET) {
      c.expect(!a.position_hundredths && !a.fifth, "retraction year carries no position " + where);
    } else {
      const int first = want == Period::P_PRE ? p : r + 1;
      const int end = want == Period::P_PRE ? r - 1 : last;
      const int h = expected_hundredths(y, first, end);
      c.expect(a.position_hundredths == h, "position " + where);
      c.expect(a.position() && *a.position() >= -1.0 && *a.position() <= 1.0, "range " + where);
      if (a.fifth) {
        auto [lo, hi] = parse_label(timeline::label(*a.fifth));
        c.expect(lo <= h && h <= hi, "bin " + where);
      } else {
        c.expect(false, "missing fifth " + where);
      }
    }
    const int shift = static_cast<int>(rng() % 1001) - 500;
    c.expect(timeline::assign_period(y + shift, p + shift, r + shift, last + shift) == a, "translation " + where);
  }
}

// ---------------------------------------------------------------------------

namespace {

ingest::SubjectTag tag(const std::string& label) { return {label, false, ingest::SubjectSource::retraction_db}; }

}  // namespace

void affinity_rules(Checks& c) {
  const auto hum = tag("(HUM) History");
  const auto hum2 = tag("(HUM) Religion");
  const auto other = tag("(HSC) Medicine");
  const auto tags = affinity::HumanitiesTagSet::defaults();
  c.expect(tags.contains(hum) && tags.contains(hum2) && !tags.contains(other), "default tag set");

  // venue, all subjects, title, abstract -> total (base 1)
  struct RuleRow {
    int venue, all, title, abstract_adj, total;
  };
  const std::vector<RuleRow> table{
      {0, 0, 0, -1, 0}, {0, 0, 0, 0, 1}, {0, 0, 0, 1, 2}, {0, 0, 1, -1, 1}, {0, 0, 1, 0, 2}, {0, 0, 1, 1, 3},
      {0, 1, 0, -1, 1}, {0, 1, 0, 0, 2}, {0, 1, 0, 1, 3}, {0, 1, 1, -1, 2}, {0, 1, 1, 0, 3}, {0, 1, 1, 1, 4},
      {1, 0, 0, -1, 1}, {1, 0, 0, 0, 2}, {1, 0, 0, 1, 3}, {1, 0, 1, -1, 2}, {1, 0, 1, 0, 3}, {1, 0, 1, 1, 4},
      {1, 1, 0, -1, 2}, {1, 1, 0, 0, 3}, {1, 1, 0, 1, 4}, {1, 1, 1, -1, 3}, {1, 1, 1, 0, 4}, {1, 1, 1, 1, 5},
  };
  c.expect(table.size() == 24, "rule table size");
  for (const auto& row : table) {
    affinity::AffinityInputs in;
    in.retraction_db_subjects = row.all ? std::vector{hum, hum2} : std::vector{hum, other};
    in.venue_subjects = row.venue ? std::vector{hum2} : std::vector{other};
    in.title_is_clearly_humanities = row.title == 1;
    in.abstract_judgment = row.abstract_adj;
    auto s = affinity::score_affinity(in, tags);
    const std::string where = std::to_string(row.venue) + std::to_string(row.all) + std::to_string(row.title) +
                              "/" + std::to_string(row.abstract_adj);
    c.expect(s.total == row.total, "total for " + where);
    c.expect(s.venue_bonus == row.venue && s.all_subjects_bonus == row.all && s.title_bonus == row.title &&
                 s.abstract_adjustment == row.abstract_adj,
             "components for " + where);
  }

  // Extending the subject lists never lowers the score.
  std::vector<ingest::SubjectTag> hum_pool, any_pool;
  for (const auto& k : tags.keys()) hum_pool.push_back(tag("(HUM) " + k));
  for (const char* l : {"(HSC) Medicine", "(ENV) Ecology", "(B/T) Engineering", "(BLS) Biology", "(SOC) Economics"})
    any_pool.push_back(tag(l));
  any_pool.insert(any_pool.end(), hum_pool.begin(), hum_pool.end());
  std::mt19937 rng(909);
  auto pick = [&](const std::vector<ingest::SubjectTag>& pool) { return pool[rng() % pool.size()]; };
  for (int trial = 0; trial < 2000; ++trial) {
    affinity::AffinityInputs in;
    for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) in.retraction_db_subjects.push_back(pick(any_pool));
    for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i) in.venue_subjects.push_back(pick(any_pool));
    in.title_is_clearly_humanities = rng() % 2;
    in.abstract_judgment = static_cast<int>(rng() % 3) - 1;
    const int before = affinity::score_affinity(in, tags).total;
    auto more_hum = in;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i)
      more_hum.retraction_db_subjects.push_back(pick(hum_pool));
    c.expect(affinity::score_affinity(more_hum, tags).total >= before, "humanities extension lowered the score");
    auto more_venue = in;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i) more_venue.venue_subjects.push_back(pick(any_pool));
    c.expect(affinity::score_affinity(more_venue, tags).total >= before, "venue extension lowered the score");
  }

  // 84 items, twelve of which stay below the threshold.
  std::vector<affinity::ScoredItem> items;
  std::set<std::string> low_ids;
  for (int i = 0; i < 84; ++i) {
    affinity::AffinityInputs in;
    const bool low = i % 7 == 3;
    if (low) {
      in.retraction_db_subjects = {hum, other};
      in.venue_subjects = i % 2 ? std::vector<ingest::SubjectTag>{} : std::vector{other};
      in.abstract_judgment = i % 3 == 0 ? -1 : 0;
      low_ids.insert("I" + std::to_string(i));
    } else {
      in.retraction_db_subjects = i % 2 ? std::vector{hum} : std::vector{hum, other};
      in.venue_subjects = {hum2};
      in.title_is_clearly_humanities = i % 5 == 0;
      in.abstract_judgment = i % 4 == 1 ? -1 : 0;
    }
    items.push_back({"I" + std::to_string(i), affinity::score_affinity(in, tags)});
  }
  auto filtered = affinity::filter_by_affinity(items, 2);
  std::set<std::string> dropped;
  for (const auto& d : filtered.dropped) dropped.insert(d.id);
  c.expect(filtered.kept.size() == 72, "kept " + std::to_string(filtered.kept.size()) + " of 84");
  c.expect(dropped == low_ids, "dropped set differs from the designed low-affinity items");
  c.note("84 -> " + std::to_string(filtered.kept.size()) + " kept, " + std::to_string(dropped.size()) + " dropped");
}

}  // namespace acceptance
