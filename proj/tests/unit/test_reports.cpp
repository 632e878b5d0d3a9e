#include <catch_amalgamated.hpp>

#include <fstream>

#include "retrace/reports.hpp"
#include "test_support.hpp"

using namespace retrace;
using namespace retrace::reports;

namespace {

struct Builder {
  Snapshot s;
  int n = 0;

  Builder() {
    ingest::RetractedPublication r;
    r.id = "R1";
    r.pub_year = 2000;
    r.retraction_year = 2010;
    r.humanities_disciplines = {"history"};
    s.records.push_back(r);
  }

  harvest::CitingEntity& add(int year, std::vector<std::string> areas = {"Arts and Humanities"}) {
    harvest::CitingEntity e;
    e.id = "e" + std::to_string(n++);
    e.year = year;
    e.subject_areas = std::move(areas);
    e.cited_items = {"R1"};
    s.entities.push_back(e);
    return s.entities.back();
  }

  Snapshot build() {
    auto seg = timeline::segment(s.records, s.entities);
    s.assignments = seg.assignments;
    return s;
  }
};

}  // namespace

TEST_CASE("shares round each value to hundredths") {
  auto p = rounded_shares({{"a", 39}, {"b", 131}});
  CHECK(p.at("a") == 22.94);
  CHECK(p.at("b") == 77.06);
  auto third = rounded_shares({{"a", 1}, {"b", 1}, {"c", 1}});
  CHECK(third.at("a") == 33.33);
  CHECK(rounded_shares({{"a", 0}}).at("a") == 0.0);
  CHECK(rounded_shares({{"a", 1}, {"b", 7}}).at("a") == 12.5);
}

TEST_CASE("period totals echo the fixture") {
  Builder b;
  for (int i = 0; i < 192; ++i) b.add(2000 + i % 10);
  for (int i = 0; i < 260; ++i) b.add(2011 + i % 10);
  auto r = descriptive_report(b.build());
  CHECK(r.entities_per_period.at("P_PRE") == 192);
  CHECK(r.entities_per_period.at("P_RET") == 0);
  CHECK(r.entities_per_period.at("P_POST") == 260);
  CHECK(r.citing_by_period_and_discipline.rows.at("all").counts.at("P_PRE") == 192);
  CHECK(r.citing_by_period_and_discipline.rows.at("history").counts.at("P_POST") == 260);
}

TEST_CASE("mention rate over late entities and the denominator flag") {
  Builder b;
  for (int i = 0; i < 40; ++i) b.add(2005);
  for (int i = 0; i < 222; ++i) {
    auto& e = b.add(i < 30 ? 2010 : 2015);
    if (i < 5) e.mentions_retraction = true;
    if (i >= 200) e.full_text_available = false;
  }
  auto snap = b.build();
  auto r = descriptive_report(snap);
  CHECK(r.retraction_mentions.numerator == 5);
  CHECK(r.retraction_mentions.denominator == 222);
  CHECK(r.retraction_mentions.percent == 2.25);
  CHECK(format_fixed(r.retraction_mentions.percent) == "2.25");

  auto strict = descriptive_report(snap, {false});
  CHECK(strict.retraction_mentions.denominator == 200);
  CHECK(strict.retraction_mentions.percent == 2.5);
  CHECK(to_json(strict)["options"]["mention_denominator_includes_unavailable"] == false);

  CHECK(r.mention_status_by_period.rows.at("P_POST").counts.at("full_text_unavailable") == 22);
  CHECK(r.fulltext_unavailable.numerator == 22);
}

TEST_CASE("annotated in-text citations count as mentions and fill sentiment tables") {
  Builder b;
  b.add(2012);
  b.add(2013);
  auto snap = b.build();
  annotation::InTextCitation c;
  c.id = "c1";
  c.citing_entity_id = "e0";
  c.cited_item_id = "R1";
  c.section = annotation::SectionLabel::discussion;
  snap.in_text.push_back(c);
  c.id = "c2";
  c.citing_entity_id = "e1";
  snap.in_text.push_back(c);
  c.id = "c3";
  c.citing_entity_id = "stranger";
  snap.in_text.push_back(c);
  snap.annotations["c1"] = {1, "c1", annotation::Sentiment::negative, "critiques", true, "a", "t"};
  auto r = descriptive_report(snap);
  CHECK(r.retraction_mentions.numerator == 1);
  CHECK(r.in_text_citations == 2);
  CHECK(r.unannotated == 1);
  CHECK(r.in_text_by_intent_sentiment.rows.at("critiques").counts.at("negative") == 1);
  CHECK(r.in_text_by_section_sentiment.rows.at("discussion").counts.at("unannotated") == 1);
  CHECK(r.in_text_by_period_sentiment.rows.at("P_POST").total == 2);
}

TEST_CASE("subject areas count per area with an unclassified bucket") {
  Builder b;
  b.add(2005, {"Arts and Humanities", "Psychology"});
  b.add(2005, {});
  b.add(2010, {"Medicine"});
  auto r = descriptive_report(b.build());
  const auto& pre = r.subject_areas_by_period.rows.at("P_PRE");
  CHECK(pre.total == 3);
  CHECK(pre.counts.at(kUnclassifiedArea) == 1);
  CHECK(pre.percent.at("Psychology") == 33.33);
  CHECK(r.subject_areas_by_discipline.at("history").rows.at("P_RET").counts.at("Medicine") == 1);
}

TEST_CASE("fifth histogram keeps a single column for the retraction year") {
  Builder b;
  b.add(2000);
  b.add(2009);
  b.add(2010);
  b.add(2011);
  b.add(2020);
  auto r = descriptive_report(b.build());
  const auto& h = r.fifth_histograms;
  CHECK(h.rows.at("P_PRE").counts.at("[-1.00, -0.61]") == 1);
  CHECK(h.rows.at("P_PRE").counts.at("[0.61, 1.00]") == 1);
  CHECK(h.rows.at("P_PRE").counts.size() == 5);
  CHECK(h.rows.at("P_RET").counts.size() == 1);
  CHECK(h.rows.at("P_RET").counts.at("P-Ret") == 1);
  CHECK(h.columns.back() == "P-Ret");
}

TEST_CASE("empty snapshot is a domain error") { CHECK_THROWS_AS(descriptive_report(Snapshot{}), DomainError); }

TEST_CASE("report is a pure function of the snapshot") {
  Builder b;
  for (int i = 0; i < 30; ++i) b.add(2000 + i % 20, {i % 2 ? "Psychology" : "Arts and Humanities"});
  auto snap = b.build();
  CHECK(to_json(descriptive_report(snap)).dump() == to_json(descriptive_report(snap)).dump());
}

TEST_CASE("bundle export: manifest hashes, topics absent, byte-identical re-export") {
  testing::TempDir dir;
  Builder b;
  b.add(2005);
  auto report = descriptive_report(b.build());
  auto res = export_visualization(report, std::nullopt, "discipline,years_after_retraction,count\n", dir / "bundle");
  CHECK(res.artifacts.size() == 2);
  auto manifest = read_json(dir / "bundle/manifest.json");
  CHECK(manifest["topics"]["status"] == "absent");
  CHECK(manifest["report_options"]["mention_denominator_includes_unavailable"] == true);
  for (const auto& a : manifest["artifacts"]) {
    auto content = read_file(dir / "bundle" / a["path"].get<std::string>());
    CHECK(sha256_hex(content) == a["sha256"]);
    CHECK(content.size() == a["bytes"]);
  }
  auto first = read_file(dir / "bundle/manifest.json");
  TopicOutputs topics{Json{{"k", 2}}, Json::array(), Json::object(), "c", "m"};
  export_visualization(report, topics, "x\n", dir / "bundle");
  CHECK(read_json(dir / "bundle/manifest.json")["artifacts"].size() == 5);
  export_visualization(report, std::nullopt, "discipline,years_after_retraction,count\n", dir / "bundle");
  CHECK(read_file(dir / "bundle/manifest.json") == first);
  CHECK_FALSE(std::filesystem::exists(dir / "bundle/topics"));
}

TEST_CASE("unwritable destination fails before writing anything") {
  testing::TempDir dir;
  std::ofstream(dir / "file") << "x";
  Builder b;
  b.add(2005);
  auto report = descriptive_report(b.build());
  CHECK_THROWS_AS(export_visualization(report, std::nullopt, "", dir / "file/sub/bundle"), Error);
  CHECK(read_file(dir / "file") == "x");
}

TEST_CASE("svg bar chart escapes labels") {
  auto svg = bar_chart_svg("A & B", {{"<x>", 2.0}, {"y", 1.0}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("A &amp; B") != std::string::npos);
  CHECK(svg.find("&lt;x&gt;") != std::string::npos);
}
