#include <catch_amalgamated.hpp>

#include <httplib.h>

#include <fstream>
#include <thread>

#include "retrace/annotation.hpp"
#include "retrace/annotation_server.hpp"
#include "test_support.hpp"

using namespace retrace;
using namespace retrace::annotation;

namespace {

CitoDecisionTree tree() { return CitoDecisionTree::from_file(testing::data_dir() / "config/cito_tree.json"); }

std::vector<InTextCitation> citations() {
  std::vector<InTextCitation> out;
  for (int i = 0; i < 3; ++i) {
    InTextCitation c;
    c.id = "c" + std::to_string(i);
    c.citing_entity_id = "10.1/e" + std::to_string(i);
    c.cited_item_id = "R1";
    c.pointer_text = "[1]";
    c.section = SectionLabel::discussion;
    c.context.anchor = "As shown in [1].";
    out.push_back(c);
  }
  return out;
}

std::function<std::string()> fixed_clock() {
  return [] { return std::string("2024-01-01T00:00:00Z"); };
}

}  // namespace

TEST_CASE("sentence splitting respects abbreviations, decimals and parentheses") {
  auto s = split_sentences("Smith et al. found 3.5 times more. See e.g. (Fig. 2. here) the note! Next one?\n\nNew para.");
  REQUIRE(s.size() == 4);
  CHECK(s[0].text == "Smith et al. found 3.5 times more.");
  CHECK(s[1].text == "See e.g. (Fig. 2. here) the note!");
  CHECK(s[2].paragraph == 0);
  CHECK(s[3].paragraph == 1);
}

TEST_CASE("context takes neighbours within the paragraph") {
  auto s = split_sentences("One. Two [1]. Three.\n\nFour.");
  auto r = extract_context(s, 1, std::string_view("[1]"));
  CHECK(r.context.preceding == "One.");
  CHECK(r.context.anchor == "Two [1].");
  CHECK(r.context.following == "Three.");
  CHECK(r.context.size() == 3);
  auto edge = extract_context(s, 2);
  CHECK_FALSE(edge.context.following);
  auto warn = extract_context(s, 0, std::string_view("[9]"));
  CHECK_FALSE(warn.warnings.empty());
  CHECK_THROWS_AS(extract_context(s, 9), DomainError);
}

TEST_CASE("section classification by title, then by position") {
  CHECK(classify_section("2. Materials and Methods", 0.5) == SectionLabel::method);
  CHECK(classify_section("Results and Discussion", 0.5) == SectionLabel::results);
  CHECK(classify_section("Related Work", 0.1) == SectionLabel::background);
  CHECK(classify_section("Archival sources", 0.1) == SectionLabel::first_section);
  CHECK(classify_section("Archival sources", 0.5) == SectionLabel::middle_section);
  CHECK(classify_section("Archival sources", 0.9) == SectionLabel::final_section);
  CHECK(classify_section("Methodical issues", 0.5) == SectionLabel::middle_section);
}

TEST_CASE("decision tree paths reach the configured functions") {
  auto t = tree();
  auto r = t.traverse({"reviewing", "Inconsistent with", "10", "0.4"});
  CHECK(r.function == "critiques");
  CHECK_FALSE(r.next);
  CHECK(r.guide_sentence.find("critiques") != std::string::npos);
  CHECK(t.traverse({"Reviewing", "Consistent with", "10", "0.2"}).function == "confirms");
  CHECK(t.traverse({"rev", "Talking about", "40", "0.1"}).function == "discusses");
}

TEST_CASE("partial paths offer the next options") {
  auto t = tree();
  auto root = t.traverse({});
  REQUIRE(root.next);
  CHECK(root.next->options.size() == t.macro_categories().size());
  auto rows = t.traverse({"reviewing", "Inconsistent with"});
  REQUIRE(rows.next);
  CHECK(rows.next->options.size() == 2);
}

TEST_CASE("invalid steps list valid options") {
  auto t = tree();
  try {
    t.traverse({"reviewing", "Inconsistent with", "99"});
    FAIL("expected NavigationError");
  } catch (const NavigationError& e) {
    CHECK(e.valid_options() == std::vector<std::string>{"10", "20"});
  }
}

TEST_CASE("every leaf is reachable through traverse") {
  auto t = tree();
  auto leaves = t.leaves();
  CHECK(leaves.size() > 15);
  for (const auto& [path, function] : leaves) CHECK(t.traverse(path).function == function);
}

TEST_CASE("tree config validation") {
  auto j = tree().to_json();
  CHECK(CitoDecisionTree::from_json(j).leaves().size() == tree().leaves().size());
  auto bad = j;
  bad["macro_categories"][0]["subcategories"][0]["rows"][0]["options"][0]["function"] = "not_a_cito_term";
  CHECK_THROWS_AS(CitoDecisionTree::from_json(bad), SchemaError);
  auto dup = j;
  dup["macro_categories"][0]["subcategories"][0]["rows"][0]["options"][1]["code"] = "0.1";
  CHECK_THROWS_AS(CitoDecisionTree::from_json(dup), SchemaError);
}

TEST_CASE("store records, persists and replays") {
  testing::TempDir dir;
  auto path = dir / "ann.jsonl";
  {
    AnnotationStore store(path, citations());
    store.set_clock(fixed_clock());
    auto e1 = store.record({"c0", "negative", "critiques", true, "a1"});
    CHECK(e1.seq == 1);
    store.record({"c0", "neutral", "discusses", false, "a1"});
    store.record({"c1", "positive", "supports", false, "a2"});
    CHECK(store.history("c0").size() == 2);
    CHECK(store.state().at("c0").intent == "discusses");
    CHECK(store.unannotated().size() == 1);
  }
  AnnotationStore again(path, citations(), AnnotationStore::Mode::read_only);
  CHECK(again.state().at("c0").sentiment == Sentiment::neutral);
  CHECK(again.events().size() == 3);
  CHECK(replay(read_file(path)) == again.state());
}

TEST_CASE("store rejects unknown citations and invalid fields") {
  testing::TempDir dir;
  AnnotationStore store(dir / "a.jsonl", citations());
  CHECK_THROWS_AS(store.record({"nope", "neutral", "discusses", false, "a"}), NotFoundError);
  try {
    store.record({"c0", "grumpy", "not_a_function", false, ""});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.fields().count("sentiment"));
    CHECK(e.fields().count("intent"));
    CHECK(e.fields().count("annotator"));
  }
  CHECK(store.events().empty());
}

TEST_CASE("a second writer is refused") {
  testing::TempDir dir;
  AnnotationStore first(dir / "a.jsonl", citations());
  CHECK_THROWS_AS(AnnotationStore(dir / "a.jsonl", citations()), StoreLockedError);
  CHECK_NOTHROW(AnnotationStore(dir / "a.jsonl", citations(), AnnotationStore::Mode::read_only));
}

TEST_CASE("csv export and import round trip") {
  testing::TempDir dir;
  AnnotationStore a(dir / "a.jsonl", citations());
  a.set_clock(fixed_clock());
  a.record({"c0", "negative", "critiques", true, "x"});
  a.record({"c2", "positive", "supports", false, "y"});
  auto csv_text = export_csv(a);
  AnnotationStore b(dir / "b.jsonl", citations());
  b.set_clock(fixed_clock());
  CHECK(import_csv(b, csv_text) == 2);
  CHECK(state_to_json(b.state()) == state_to_json(a.state()));
}

TEST_CASE("event json round trip") {
  AnnotationEvent e{7, "c1", Sentiment::negative, "disputes", true, "me", "2024-01-01T00:00:00Z"};
  CHECK(event_from_json(to_json(e)) == e);
}

TEST_CASE("http api: queue, detail, annotate, tree, bundles") {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "bundle/series");
  std::ofstream(dir / "bundle/manifest.json") << "{}";
  std::ofstream(dir / "bundle/series/series.csv") << "a,b\n";
  AnnotationStore store(dir / "a.jsonl", citations());
  AnnotationServer server(store, tree(), dir / "bundle");
  int port = server.bind("127.0.0.1", 0);
  std::thread th([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  for (int i = 0; i < 100 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));

  auto queue = client.Get("/api/queue");
  REQUIRE(queue);
  CHECK(queue->status == 200);
  CHECK(Json::parse(queue->body).size() == 3);

  auto detail = client.Get("/api/citations/c1");
  REQUIRE(detail);
  auto dj = Json::parse(detail->body);
  CHECK(dj["annotation"].is_null());
  CHECK(dj["tree"]["options"].size() == tree().macro_categories().size());
  CHECK(client.Get("/api/citations/zzz")->status == 404);

  Json body{{"sentiment", "negative"},
            {"path", {"reviewing", "Inconsistent with", "20", "0.2"}},
            {"mentions_retraction", true},
            {"annotator", "a1"}};
  auto put = client.Put("/api/citations/c1/annotation", body.dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(Json::parse(put->body)["intent"] == "disputes");
  CHECK(store.state().at("c1").mentions_retraction);

  auto bad = client.Put("/api/citations/c1/annotation", R"({"sentiment": 3})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);
  auto errors = Json::parse(bad->body)["errors"];
  CHECK(errors.contains("sentiment"));
  CHECK(errors.contains("mentions_retraction"));
  CHECK(client.Put("/api/citations/c1/annotation", "{oops", "application/json")->status == 422);

  auto nav = client.Post("/api/tree/navigate", R"({"path": ["reviewing"]})", "application/json");
  REQUIRE(nav);
  CHECK(Json::parse(nav->body)["options"].size() == 3);
  auto nav_bad = client.Post("/api/tree/navigate", R"({"path": ["nothing"]})", "application/json");
  CHECK(nav_bad->status == 422);
  CHECK(Json::parse(nav_bad->body)["valid_options"].size() == tree().macro_categories().size());

  CHECK(Json::parse(client.Get("/api/tree")->body)["version"] == "1.1");
  auto files = Json::parse(client.Get("/api/bundles")->body);
  CHECK(files == Json::array({"/bundles/manifest.json", "/bundles/series/series.csv"}));
  CHECK(client.Get("/bundles/series/series.csv")->body == "a,b\n");

  CHECK(Json::parse(client.Get("/api/queue")->body).size() == 2);
  server.stop();
  th.join();
}
