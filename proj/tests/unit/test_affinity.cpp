#include <catch_amalgamated.hpp>

#include "retrace/affinity.hpp"
#include "test_support.hpp"

using namespace retrace;
using namespace retrace::affinity;
using ingest::SubjectSource;

namespace {

SubjectTag hum(const std::string& label) { return {label, true, SubjectSource::retraction_db}; }
SubjectTag other(const std::string& label) { return {label, false, SubjectSource::retraction_db}; }
SubjectTag venue(const std::string& label) { return {label, false, SubjectSource::venue_lookup}; }

}  // namespace

TEST_CASE("score components") {
  AffinityInputs in;
  in.retraction_db_subjects = {hum("(HUM) Religion"), other("(SOC) Sociology")};
  in.venue_subjects = {venue("Arts and Humanities")};
  auto s = score_affinity(in);
  CHECK(s.base == 1);
  CHECK(s.venue_bonus == 1);
  CHECK(s.all_subjects_bonus == 0);
  CHECK(s.total == 2);

  in.retraction_db_subjects = {hum("(HUM) History")};
  in.title_is_clearly_humanities = true;
  in.abstract_judgment = 1;
  CHECK(score_affinity(in).total == 5);

  in.venue_subjects = {venue("Computer Science")};
  in.title_is_clearly_humanities = false;
  in.abstract_judgment = -1;
  CHECK(score_affinity(in).total == 1);

  in.abstract_judgment = 2;
  CHECK_THROWS_AS(score_affinity(in), DomainError);
}

TEST_CASE("tag set matches sub-disciplines by stem label") {
  auto tags = HumanitiesTagSet::defaults();
  CHECK(tags.contains(other("History - Europe")));
  CHECK(tags.contains(venue("Religious Studies")));
  CHECK_FALSE(tags.contains(other("(SOC) Sociology")));
}

TEST_CASE("filter keeps totals at or above threshold") {
  std::vector<ScoredItem> items;
  for (int t = 0; t <= 5; ++t) {
    AffinityScore s;
    s.total = t;
    items.push_back({"I" + std::to_string(t), s});
  }
  auto r = filter_by_affinity(items, 2);
  CHECK(r.kept.size() == 4);
  CHECK(r.dropped.size() == 2);
  items.push_back({"X", std::nullopt});
  CHECK_THROWS_AS(filter_by_affinity(items, 2), DomainError);
}

TEST_CASE("judgment sidecar parsing") {
  auto j = parse_judgments("item_id,title_bonus,abstract_adjustment,note\nR1,1,-1,x\n");
  CHECK(j.at("R1").title_bonus == 1);
  CHECK(j.at("R1").abstract_adjustment == -1);
  CHECK_THROWS_AS(parse_judgments("item_id,title_bonus,abstract_adjustment\nR1,2,0\n"), SchemaError);
  CHECK_THROWS_AS(parse_judgments("item_id,title_bonus\nR1,1\n"), SchemaError);
}

TEST_CASE("inputs combine record subjects, venue lookup and judgments") {
  harvest::LookupTables t;
  t.journals_by_issn["0022-4227"] = {{"Arts and Humanities"}, {"Religious Studies"}};
  ingest::RetractedPublication rec;
  rec.id = "R1";
  rec.subjects = {hum("(HUM) Religion")};
  rec.venue_ids = {"0022-4227"};
  auto in = inputs_for(rec, t, {{"R1", {1, 0, ""}}});
  CHECK(in.title_is_clearly_humanities);
  CHECK_FALSE(in.venue_subjects.empty());
  CHECK(score_affinity(in).total == 4);
}

TEST_CASE("pruning narrows cited items to kept ids") {
  harvest::CitingEntity a, b;
  a.id = "a";
  a.cited_items = {"R1", "R6"};
  b.id = "b";
  b.cited_items = {"R6"};
  auto out = prune_citations({a, b}, {"R1"});
  REQUIRE(out.size() == 1);
  CHECK(out[0].cited_items == std::vector<std::string>{"R1"});
}

TEST_CASE("score json round trip and audit") {
  AffinityScore s;
  s.venue_bonus = 1;
  s.total = 2;
  CHECK(score_from_json(to_json(s)) == s);
  auto audit = audit_json({{"R1", s}}, 2);
  CHECK(audit["items"][0]["kept"] == true);
  CHECK(audit["threshold"] == 2);
}
