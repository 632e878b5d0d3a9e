#!/usr/bin/env python3
"""Regenerates the bundled fixtures under data/. Output is deterministic."""

import csv
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data"

POOL_A = ("ritual sacred church scripture pilgrimage monastery medieval archive chronicle empire "
          "theology liturgy saint bishop heresy doctrine crusade manuscript parish dynasty").split()
POOL_B = ("melody rhythm therapy anxiety emotion listening performance cognition depression harmony "
          "orchestra stress mood tempo singer wellbeing trauma clinic patient symptom").split()
GLUE = "the of and in this study we show that a to for with on its these results".split()


def dump(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def abstract(rng, pool, n=45):
    words = []
    for _ in range(n):
        r = rng.random()
        words.append(rng.choice(pool) if r < 0.7 else rng.choice(GLUE))
    return " ".join(words).capitalize() + "."


# ---------------------------------------------------------------------------
# Mini corpus for the end-to-end run

def mini():
    rng = random.Random(20240917)
    out = ROOT / "mini"
    records = [
        # id, doi, title, pub, ret, subjects, reasons, type, venue, issn
        ("R1", "10.5555/hum.001", "Sacred ritual in early modern parishes", "2008", "2013",
         "(HUM) Religion;(SOC) Sociology", "+Plagiarism of Article", "Research Article",
         "Journal of Religious History", "0022-4227"),
        ("R2", "10.5555/hum.002", "Chronicles of a medieval dynasty", "2005", "2011",
         "(HUM) History", "+Fabrication of Data", "Research Article", "Medieval Review", "1234-5679"),
        ("R3", "10.5555/hum.003", "Music listening and anxiety", "2010", "2015",
         "(HUM) Arts - Music;(BLS) Psychology", "+Duplication of Article", "Research Article",
         "Psychology of Music", "0305-7356"),
        ("R4", "10.5555/hum.004", "Emotion and the philosophy of harmony", "2009", "2014",
         "(HUM) Philosophy", "+Error in Analyses", "Research Article", "Journal of Aesthetics", "0021-8529"),
        ("R5", "10.5555/hum.005", "Personality, stress and public health", "2000", "2010",
         "(HUM) Journalism;(HSC) Public Health and Safety;(SOC) Sociology", "+Concerns about Data",
         "Research Article", "Psychological Reports", "0033-2941"),
        ("R6", "10.5555/hum.006", "Evaluation models of enterprise architecture artefacts", "2012", "2016",
         "(HUM) Architecture;(B/T) Computer Science", "+Plagiarism of Text", "Review Article",
         "Information Systems Review", "1111-2222"),
        ("R7", "10.5555/hum.007", "Undated pamphlet", "unknown", "2012", "(HUM) History", "+Withdrawal",
         "Research Article", "Medieval Review", "1234-5679"),
        ("R8", "10.5555/med.008", "Clinical outcomes of a trial", "2007", "2012", "(HSC) Medicine",
         "+Falsification", "Clinical Study", "Clinical Journal", "9999-0001"),
    ]
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "retractions.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "doi", "title", "pub_year", "retraction_year", "subjects", "reasons", "item_type",
                    "venue_title", "venue_ids"])
        for r in records:
            w.writerow(r)
    dump(out / "exclusions.json", {"exclusions": [
        {"id": "R5", "rationale": "outlier: humanities label marginal to a health-science article"}]})
    (out / "judgments.csv").write_text(
        "item_id,title_bonus,abstract_adjustment,note\n"
        "R2,1,0,title is clearly historical\n"
        "R4,1,1,philosophy of music\n"
        "R6,0,-1,computer science study\n")
    (out / "journals.csv").write_text(
        "issn,title,areas,categories\n"
        "0022-4227,Journal of Religious History,Arts and Humanities,Religious Studies; History\n"
        "1234-5679,Medieval Review,Arts and Humanities,History\n"
        "0305-7356,Psychology of Music,Arts and Humanities; Psychology,Music; Applied Psychology\n"
        "0021-8529,Journal of Aesthetics,Arts and Humanities,Philosophy\n"
        "1111-2222,Information Systems Review,Computer Science,Information Systems\n"
        "2000-0001,Humanities Quarterly,Arts and Humanities,Literature and Literary Theory\n"
        "2000-0002,Society and Culture,Social Sciences; Arts and Humanities,Sociology and Political Science\n"
        "2000-0003,Clinical Psychology Letters,Psychology,Clinical Psychology\n"
        "2000-0004,Medical Humanities,Medicine; Arts and Humanities,\n")
    (out / "isbn_lcc.csv").write_text("isbn,lcc\n978-0-19-000001-1,BL51\n978-0-19-000002-8,ML3830\n")
    (out / "stopwords.txt").write_text("# domain stop-words\nstudy\nresults\nshow\n")

    venues = [("Humanities Quarterly", "2000-0001"), ("Society and Culture", "2000-0002"),
              ("Clinical Psychology Letters", "2000-0003"), ("Medical Humanities", "2000-0004"),
              ("Journal of Religious History", "0022-4227")]
    plan = {"R1": (14, 2009, 2020, POOL_A), "R2": (12, 2006, 2018, POOL_A),
            "R3": (12, 2011, 2021, POOL_B), "R4": (8, 2010, 2019, POOL_B), "R6": (5, 2013, 2019, POOL_B)}
    doi_of = {r[0]: r[1] for r in records}
    entities = {}  # doi -> dict
    n = 0
    for item, (count, lo, hi, pool) in plan.items():
        for _ in range(count):
            n += 1
            doi = f"10.6666/cite.{n:03d}"
            year = rng.randint(lo, hi)
            venue = venues[rng.randrange(len(venues))]
            entities[doi] = {"cited": [item], "year": year, "pool": pool, "venue": venue}
    # Two entities cite a second item as well.
    entities["10.6666/cite.003"]["cited"].append("R2")
    entities["10.6666/cite.030"]["cited"].append("R4")

    coci, mag = {}, {}
    for doi, e in sorted(entities.items()):
        idx = int(doi.rsplit(".", 1)[1])
        for item in e["cited"]:
            cited = doi_of[item]
            if idx % 7 != 0:  # every seventh entity is only known to the second source
                coci.setdefault(cited, []).append(
                    {"oci": f"0{idx}-{item}", "citing": doi, "cited": cited, "creation": f"{e['year']}-03"})
            if idx % 3 == 0 or idx % 7 == 0:
                mag.setdefault(cited, []).append({"id": f"m-{idx}", "doi": doi, "year": e["year"]})
    # A record without DOI, resolvable by its local id, and two that will be quarantined.
    mag.setdefault(doi_of["R1"], []).append({"id": "m-901", "title": "Parish chronicles revisited", "year": 2016})
    mag.setdefault(doi_of["R2"], []).append({"id": "m-902", "title": "Unknown fragment", "year": 2015})
    coci.setdefault(doi_of["R3"], []).append(
        {"oci": "0999-R3", "citing": "10.6666/notice.999", "cited": doi_of["R3"], "creation": "2016-01"})
    for cited, rows in coci.items():
        dump(out / "sources" / "coci" / (fixture_name(cited) + ".json"), rows)
    for cited, rows in mag.items():
        dump(out / "sources" / "mag" / (fixture_name(cited) + ".json"), {"citations": rows})

    metadata = {}
    for doi, e in sorted(entities.items()):
        idx = int(doi.rsplit(".", 1)[1])
        metadata[doi] = {"year": e["year"], "title": f"Citing study {idx}", "venue_title": e["venue"][0],
                         "venue_ids": [e["venue"][1]], "type": "journal-article",
                         "abstract": abstract(rng, e["pool"]), "full_text_available": idx % 11 != 0}
    metadata["mag:m-901"] = {"year": 2016, "title": "Parish chronicles revisited", "venue_title": "",
                             "venue_ids": ["978-0-19-000001-1"], "type": "book",
                             "abstract": abstract(rng, POOL_A)}
    metadata["10.6666/notice.999"] = {"year": 2016, "title": "Retraction notice", "type": "retraction notice"}
    dump(out / "metadata.json", metadata)

    sections = ["introduction", "background", "method", "discussion", "conclusions"]
    in_text = []
    for doi, e in sorted(entities.items()):
        idx = int(doi.rsplit(".", 1)[1])
        if idx % 2 or idx % 11 == 0:
            continue
        item = e["cited"][0]
        words = lambda k: " ".join(rng.choice(e["pool"]) for _ in range(k))
        in_text.append({"id": f"it-{idx:03d}", "citing_entity_id": doi, "cited_item_id": item,
                        "pointer_text": f"[{rng.randint(1, 40)}]", "section": sections[idx % len(sections)],
                        "context": {"preceding": f"Earlier work examined {words(4)}.",
                                    "anchor": f"The findings on {words(3)} were reported [x].",
                                    "following": f"We return to {words(3)} below."}})
    dump(out / "intext.json", {"citations": in_text})

    dump(out / "pipeline.json", {
        "paths": {"metadata": "metadata.json", "journals": "journals.csv", "isbn_lcc": "isbn_lcc.csv",
                  "judgments": "judgments.csv", "stopwords": "stopwords.txt",
                  "cito_tree": "../config/cito_tree.json"},
        "harvest": {"rate_limit": 1000.0, "threads": 4, "sources": [
            {"name": "coci", "format": "coci", "fixture_dir": "sources/coci"},
            {"name": "mag", "format": "generic", "fixture_dir": "sources/mag"}]},
        "affinity": {"threshold": 2},
        "corpus": {"min_term_frequency": 2},
        "lda": {"k": 3, "iterations": 200, "seed": 42, "beta": 0.01},
        "topics": {"k_range": "2..4", "lambda": 0.3, "top_n": 30, "coherence_top_n": 10,
                   "group_keys": ["period", "discipline", "subject_area"]},
        "report": {"mention_denominator_includes_unavailable": True},
    })


def fixture_name(doi):
    return "".join(c if c.isalnum() or c in ".-" else "_" for c in doi)


# ---------------------------------------------------------------------------
# 300 citing entities for the report oracle

def report300():
    rng = random.Random(300)
    disciplines = ["Religion", "History", "Arts - Music", "Philosophy"]
    records = []
    for i in range(8):
        d = disciplines[i % 4]
        records.append({"id": f"RP{i}", "doi": f"10.7777/rp.{i}", "title": f"Retracted item {i}",
                        "pub_year": 2000 + i % 3, "retraction_year": 2010 + i % 2,
                        "subjects": [{"label": f"(HUM) {d}", "is_humanities": True, "source": "retraction_db"}],
                        "humanities_disciplines": [d.lower()] + (["religion"] if i == 5 else []),
                        "reasons": ["Plagiarism"], "item_type": "article", "venue_title": "", "venue_ids": [],
                        "excluded": False, "exclusion_rationale": ""})
    others = ["Social Sciences", "Psychology", "Medicine", "Nursing", "Engineering", "Computer Science"]
    # (entities, area assignments, Arts and Humanities assignments) per period
    plan = {"pre": (130, 170, 39), "ret": (30, 38, 7), "post": (140, 215, 39)}
    entities = []
    n = 0
    for period, (count, assignments, humanities) in plan.items():
        doubles = assignments - count  # entities carrying two areas
        per_entity = [2 if i < doubles else 1 for i in range(count)]
        rng.shuffle(per_entity)
        # Arts and Humanities goes to `humanities` distinct entities.
        with_hum = set(rng.sample(range(count), humanities))
        for idx, c in enumerate(per_entity):
            chosen = ["Arts and Humanities"] if idx in with_hum else []
            chosen += rng.sample(others, c - len(chosen))
            rng.shuffle(chosen)
            rec = records[n % len(records)]
            r = rec["retraction_year"]
            if period == "pre":
                year = rng.randint(rec["pub_year"], r - 1)
            elif period == "ret":
                year = r
            else:
                year = rng.randint(r + 1, r + 9)
            n += 1
            entities.append({"id": f"10.8888/ce.{n:03d}", "doi": f"10.8888/ce.{n:03d}", "year": year,
                             "title": f"Citing entity {n}", "venue_title": "", "venue_ids": [],
                             "subject_areas": chosen, "subject_categories": [], "abstract": "",
                             "full_text_available": rng.random() > 0.08, "is_retracted_itself": False,
                             "mentions_retraction": (rng.random() < 0.05) if period != "pre" else None,
                             "sources": ["coci"], "cited_items": [rec["id"]]})
    # Reorder so records and entities are not grouped by period.
    rng.shuffle(entities)
    sections = ["introduction", "background", "method", "results", "discussion", "conclusions", "middle_section"]
    intents = ["supports", "critiques", "discusses", "cites_for_information", "uses_method_in", "agrees_with"]
    sentiments = ["positive", "neutral", "negative"]
    in_text, events = [], []
    seq = 0
    for e in entities:
        if not e["full_text_available"]:
            continue
        for j in range(rng.randint(1, 3)):
            cid = f"{e['id']}#{j}"
            in_text.append({"id": cid, "citing_entity_id": e["id"], "cited_item_id": e["cited_items"][0],
                            "pointer_text": "[1]", "section": rng.choice(sections),
                            "context": {"preceding": None, "anchor": "As shown in [1].", "following": None}})
            if rng.random() < 0.85:
                seq += 1
                events.append({"seq": seq, "citation_id": cid, "sentiment": rng.choice(sentiments),
                               "intent": rng.choice(intents), "mentions_retraction": rng.random() < 0.03,
                               "annotator": "a1", "timestamp": "2024-01-01T00:00:00Z"})
    # A few re-annotations: the latest event wins.
    for ev in rng.sample(events, 10):
        seq += 1
        events.append(dict(ev, seq=seq, sentiment="negative", intent="disputes"))
    dump(ROOT / "report300" / "snapshot.json", {
        "schema_version": 1, "records": records, "entities": entities, "in_text": in_text})
    (ROOT / "report300" / "annotations.jsonl").write_text(
        "".join(json.dumps(ev, sort_keys=True) + "\n" for ev in events))


# ---------------------------------------------------------------------------

def ingest_sample():
    rows = [
        ["id", "doi", "title", "pub_year", "retraction_year", "subjects", "reasons", "item_type", "venue_title",
         "venue_ids"],
        ["S1", "https://doi.org/10.1000/A1", "Sacred music", "2001", "2005", "(HUM) Arts - Music;(BLS) Psychology",
         "+Plagiarism", "Research Article", "Music Journal", "1111-1111"],
        ["S2", "10.1000/a2", "A, quoted \"title\"", "2003-04-01", "2007", "(HUM) History", "+Fake Peer Review",
         "Review Article", "History Today", "2222-2222"],
        ["S3", "", "No DOI here", "1999", "2001", "(HUM) Religion", "", "Book Chapter/Reference Work", "", ""],
        ["S4", "10.1000/a4", "Medicine only", "2004", "2009", "(HSC) Medicine", "+Error", "Clinical Study",
         "Med", ""],
        ["S5", "10.1000/a5", "Multi reason", "2010", "2012", "(HUM) Philosophy", "+Plagiarism;+Duplication",
         "Research Article", "", ""],
        ["S6", "10.1000/a6", "Bad year", "n/a", "2012", "(HUM) History", "", "Research Article", "", ""],
        ["S7", "10.1000/a7", "Journalism", "2000", "2010", "(HUM) Journalism;(SOC) Sociology", "+Concerns",
         "Research Article", "", ""],
        ["S8", "10.1000/a8", "Architecture", "2012", "2016", "(HUM) Architecture", "", "Review Article", "", ""],
        ["S9", "10.1000/a9", "Same year", "2015", "2015", "(HUM) Arts - Film", "", "Letter", "", ""],
        ["S10", "10.1000/a10", "Linguistics", "2011", "2019", "(HUM) Language & Linguistics", "", "Research Article",
         "", ""],
    ]
    path = ROOT / "ingest" / "sample10.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)


def two_block():
    rng = random.Random(2)
    letters = "abcdefghij"
    def term(prefix, i):
        return prefix + letters[i // 10] + letters[i % 10] + "k"
    docs = []
    for block, prefix in (("A", "zq"), ("B", "xv")):
        for d in range(20):
            words = []
            for i in range(50):
                words += [term(prefix, i)] * rng.randint(1, 3)
            rng.shuffle(words)
            docs.append({"id": f"{block}{d:02d}", "text": " ".join(words), "metadata": {"block": block}})
    dump(ROOT / "topics" / "two_block_documents.json", {"documents": docs})
    dump(ROOT / "topics" / "two_block_config.json", {
        "lda": {"k": 2, "iterations": 300, "seed": 7}, "topics": {"k_range": "2..6"}})


if __name__ == "__main__":
    mini()
    report300()
    ingest_sample()
    two_block()
