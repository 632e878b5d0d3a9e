#include <catch_amalgamated.hpp>

#include <random>

#include "retrace/corpus_ingest.hpp"
#include "test_support.hpp"

using namespace retrace;
using namespace retrace::ingest;

namespace {

ParseResult sample() {
  return parse_retraction_records(read_file(testing::data_dir() / "ingest/sample10.csv"), ColumnMapping::canonical());
}

}  // namespace

TEST_CASE("sample file: nine valid records and one rejected row") {
  auto r = sample();
  CHECK(r.records.size() == 9);
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].row == 6);
  CHECK(r.rejects[0].error.find("pub_year") != std::string::npos);
}

TEST_CASE("fields are normalized") {
  auto r = sample();
  const auto& s1 = r.records[0];
  CHECK(s1.doi == "10.1000/a1");
  CHECK(s1.pub_year == 2001);
  CHECK(s1.subjects.size() == 2);
  CHECK(s1.subjects[0].is_humanities);
  CHECK_FALSE(s1.subjects[1].is_humanities);
  CHECK(s1.humanities_disciplines == std::vector<std::string>{"arts - music"});
  CHECK(s1.item_type == ItemType::article);
  CHECK(r.records[1].pub_year == 2003);  // date column keeps the year
  CHECK(r.records[1].title == "A, quoted \"title\"");
  CHECK_FALSE(r.records[2].doi);
  CHECK(r.records[2].item_type == ItemType::book_chapter);
}

TEST_CASE("humanities filter keeps any humanities tag") {
  auto h = filter_humanities(sample().records);
  CHECK(h.size() == 8);
  for (const auto& rec : h) CHECK(rec.id != "S4");
}

TEST_CASE("exclusions flag records and warn on unknown ids") {
  auto res = apply_exclusions(sample().records, {{"S7", "outlier"}, {"NOPE", "x"}});
  CHECK(res.records.size() == 9);
  CHECK(res.warnings.size() == 1);
  auto sel = selected(res.records);
  CHECK(sel.size() == 8);
  for (const auto& rec : res.records)
    if (rec.id == "S7") {
      CHECK(rec.excluded);
      CHECK(rec.exclusion_rationale == "outlier");
    }
}

TEST_CASE("missing required column is a schema error") {
  CHECK_THROWS_AS(parse_retraction_records("id,title\n1,x\n", ColumnMapping::canonical()), SchemaError);
}

TEST_CASE("summary tallies") {
  auto s = summarize_retractions(sample().records);
  CHECK(s.per_year.at(2012) == 1);
  CHECK(s.per_reason.at("Plagiarism") == 2);
  CHECK(s.per_discipline.at("history") == 1);
}

TEST_CASE("serialize then parse reproduces records") {
  auto r = sample();
  auto again = parse_retraction_records(serialize_records_csv(r.records), ColumnMapping::canonical());
  CHECK(again.rejects.empty());
  CHECK(again.records == r.records);
}

TEST_CASE("randomized csv round trip") {
  std::mt19937 rng(11);
  const std::string alphabet = "abc XYZ,\"\n;é-";
  auto word = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    return trim(s);
  };
  std::vector<RetractedPublication> recs;
  for (int i = 0; i < 60; ++i) {
    RetractedPublication p;
    p.id = "X" + std::to_string(i);
    if (i % 3) p.doi = "10.1/" + std::to_string(i);
    p.title = word(12);
    p.pub_year = 1990 + static_cast<int>(rng() % 20);
    p.retraction_year = p.pub_year + static_cast<int>(rng() % 5);
    p.subjects = {{"(HUM) History", true, SubjectSource::retraction_db}};
    if (i % 2) p.subjects.push_back({"(SOC) Sociology", false, SubjectSource::retraction_db});
    p.humanities_disciplines = {"history"};
    p.reasons = {"+Reason " + std::to_string(i % 4)};
    p.item_type = ItemType::article;
    p.venue_title = "Venue " + std::to_string(i);
    recs.push_back(p);
  }
  auto again = parse_retraction_records(serialize_records_csv(recs), ColumnMapping::canonical());
  REQUIRE(again.rejects.empty());
  REQUIRE(again.records.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(again.records[i].title == recs[i].title);
    CHECK(again.records[i].subjects == recs[i].subjects);
  }
}

TEST_CASE("record json round trip and mapping json") {
  auto r = sample();
  CHECK(records_from_json(records_to_json(r.records)) == r.records);
  auto m = ColumnMapping::from_json(ColumnMapping::retraction_watch().to_json());
  CHECK(m.columns == ColumnMapping::retraction_watch().columns);
}

TEST_CASE("subject key strips code prefix") {
  CHECK(subject_key("(HUM) History - Europe") == "history - europe");
  CHECK(subject_key("Philosophy") == "philosophy");
}

TEST_CASE("item type buckets") {
  CHECK(classify_item_type("Research Article") == ItemType::article);
  CHECK(classify_item_type("Commentary/Editorial") == ItemType::commentary_editorial);
  CHECK(classify_item_type("Letter") == ItemType::other);
}
