#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "relex/docred.hpp"
#include "relex/errors.hpp"

using nlohmann::json;
using namespace relex;

namespace {

json docred_doc(const std::string& title) {
  return json{
      {"title", title},
      {"sents", {{"The", "Portland", "Golf", "Club", "opened", "."},
                 {"PGC", "is", "in", "Oregon", "."}}},
      {"vertexSet",
       {
           {{{"name", "Portland Golf Club"}, {"sent_id", 0}, {"pos", {1, 4}}, {"type", "ORG"}},
            {{"name", "PGC"}, {"sent_id", 1}, {"pos", {0, 1}}, {"type", "ORG"}}},
           {{{"name", "Oregon"}, {"sent_id", 1}, {"pos", {3, 4}}, {"type", "LOC"}}},
       }},
      {"labels", {{{"h", 0}, {"t", 1}, {"r", "P131"}, {"evidence", {1}}}}},
  };
}

}  // namespace

TEST_CASE("load_docred parses documents and establishes invariants") {
  json root = json::array({docred_doc("d0")});
  const auto docs = parse_docred(root, "test");
  REQUIRE(docs.size() == 1);
  const Document& doc = docs[0];
  CHECK(doc.doc_id == "d0");
  CHECK(doc.num_tokens() == 11);
  CHECK(doc.sentences.size() == 2);
  CHECK(doc.gold_mentions.size() == 3);
  CHECK(doc.gold_clusters.size() == 2);
  REQUIRE(doc.gold_relations.size() == 1);
  CHECK(doc.gold_relations[0].relation_type == "P131");
  // Sentence-local positions were lifted to document level.
  CHECK(doc.gold_mentions[1].span == Span{6, 7});
  CHECK(doc.span_surface(doc.gold_mentions[0].span) == "Portland Golf Club");
  CHECK(doc.sentence_of(doc.gold_mentions[1].span) == 1);
}

TEST_CASE("empty JSON array yields an empty corpus") {
  CHECK(parse_docred(json::array(), "test").empty());
}

TEST_CASE("relation referencing a missing vertex index is an ingestion error") {
  json bad = docred_doc("d0");
  bad["labels"][0]["t"] = 7;
  CHECK_THROWS_AS(parse_docred(json::array({bad}), "test"), DataError);
}

TEST_CASE("cross-sentence gold mention is an ingestion error") {
  json bad = docred_doc("d0");
  // Sentence 1 has 5 tokens; an end past it would cross into the next one.
  bad["vertexSet"][0][1]["pos"] = {0, 9};
  CHECK_THROWS_AS(parse_docred(json::array({bad}), "test"), DataError);
}

TEST_CASE("schema violations name the document and field") {
  json bad = docred_doc("my-doc");
  bad.erase("sents");
  try {
    parse_docred(json::array({bad}), "test");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("my-doc") != std::string::npos);
    CHECK(what.find("sents") != std::string::npos);
  }
}

TEST_CASE("docred round trip preserves structure") {
  const auto docs = parse_docred(json::array({docred_doc("d0")}), "test");
  const json out = document_to_docred_json(docs[0]);
  const auto reparsed = parse_docred(json::array({out}), "roundtrip");
  CHECK(reparsed[0].gold_mentions == docs[0].gold_mentions);
  CHECK(reparsed[0].gold_relations.size() == docs[0].gold_relations.size());
}

TEST_CASE("corpus statistics count duplicates and handle empty corpora") {
  CHECK(corpus_statistics({}) == CorpusStatistics{0, 0, 0, 0});
  auto docs = parse_docred(json::array({docred_doc("d0")}), "test");
  docs[0].gold_relations.push_back(docs[0].gold_relations[0]);  // duplicate
  const CorpusStatistics stats = corpus_statistics(docs);
  CHECK(stats.documents == 1);
  CHECK(stats.mentions == 3);
  CHECK(stats.entities == 2);
  CHECK(stats.relations == 2);  // duplicates included
  CHECK(docs[0].deduplicated_relations().size() == 1);
}

namespace {

std::vector<Document> mixed_corpus(int clean, int mixed) {
  std::vector<Document> docs;
  for (int i = 0; i < clean; ++i) {
    Document doc = fixtures::make_document({{"a", "b", "c"}},
                                           "clean-" + std::to_string(i));
    fixtures::add_cluster(doc, "PER", {{0, 1}, {1, 2}});
    docs.push_back(std::move(doc));
  }
  for (int i = 0; i < mixed; ++i) {
    Document doc = fixtures::make_document({{"a", "b", "c"}},
                                           "mixed-" + std::to_string(i));
    EntityCluster cluster;
    cluster.entity_type = "PER";
    cluster.mentions = {0, 1};
    doc.gold_mentions.push_back({{0, 1}, "PER"});
    doc.gold_mentions.push_back({{1, 2}, "ORG"});
    doc.gold_clusters.push_back(cluster);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::set<std::string> ids(const std::vector<Document>& docs) {
  std::set<std::string> out;
  for (const Document& d : docs) out.insert(d.doc_id);
  return out;
}

}  // namespace

TEST_CASE("end-to-end split filters mixed-type documents and conserves counts") {
  const auto docs = mixed_corpus(20, 3);
  SplitSizes sizes{10, 4, 6};
  const SplitResult split = make_end_to_end_split(docs, 7, sizes);
  CHECK(split.filtered_ids.size() == 3);
  CHECK(split.train.size() == 10);
  CHECK(split.dev.size() == 4);
  CHECK(split.test.size() == 6);
  // Conservation: train + dev + test + filtered = input.
  CHECK(split.train.size() + split.dev.size() + split.test.size() +
            split.filtered_ids.size() ==
        docs.size());
  // Filter soundness: no surviving document has a mixed-type cluster.
  for (const auto* part : {&split.train, &split.dev, &split.test}) {
    for (const Document& doc : *part) {
      CHECK_FALSE(has_mixed_type_cluster(doc));
    }
  }
  // A count different from the expected 45 warns instead of failing.
  CHECK(!split.warnings.empty());
}

TEST_CASE("split is deterministic and independent of input order") {
  auto docs = mixed_corpus(20, 3);
  SplitSizes sizes{10, 4, 6};
  const SplitResult a = make_end_to_end_split(docs, 99, sizes);
  std::reverse(docs.begin(), docs.end());
  const SplitResult b = make_end_to_end_split(docs, 99, sizes);
  CHECK(ids(a.train) == ids(b.train));
  CHECK(ids(a.dev) == ids(b.dev));
  CHECK(ids(a.test) == ids(b.test));

  const SplitResult c = make_end_to_end_split(docs, 100, sizes);
  CHECK(ids(a.train) != ids(c.train));  // different seed, different partition
}

TEST_CASE("split adjusts the train size when counts drift, errors when too small") {
  const auto docs = mixed_corpus(20, 0);
  SplitSizes sizes{99, 4, 6};
  const SplitResult split = make_end_to_end_split(docs, 1, sizes);
  CHECK(split.train.size() == 10);  // 20 - 4 - 6
  CHECK(!split.warnings.empty());

  SplitSizes impossible{1, 15, 15};
  CHECK_THROWS_AS(make_end_to_end_split(docs, 1, impossible), DataError);
}

TEST_CASE("validate_document rejects broken references") {
  Document doc = fixtures::make_document({{"a", "b"}});
  fixtures::add_cluster(doc, "PER", {{0, 1}});
  doc.gold_relations.push_back({0, 0, "r"});  // reflexive
  CHECK_THROWS_AS(validate_document(doc), DataError);

  Document doc2 = fixtures::make_document({{"a", "b"}});
  fixtures::add_cluster(doc2, "PER", {{0, 1}});
  doc2.gold_clusters[0].mentions.push_back(5);  // missing mention
  CHECK_THROWS_AS(validate_document(doc2), DataError);
}
