#pragma once

// Deterministic synthetic corpora: a small overfit corpus exercising all
// four tasks, and a statistics mirror of the end-to-end split for exercising
// the filter/split machinery at full scale.

#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "relex/types.hpp"

namespace synthetic {

// Documents with <= 30 tokens, 2-4 entities (some with two mentions) and
// 1-3 relations each. Entity surfaces are type-marked and cluster-unique so
// a small model can fit mention detection, coreference, typing and
// relations exactly.
inline std::vector<relex::Document> overfit_corpus(int n_docs = 8,
                                                   uint64_t seed = 17) {
  std::mt19937_64 rng(seed);
  std::vector<relex::Document> docs;
  for (int d = 0; d < n_docs; ++d) {
    const std::string ds = std::to_string(d);
    const std::string person = "Pers" + ds;
    const std::string person_alias = "Pers" + ds + "x";
    const std::string org_a = "Orga" + ds;
    const std::string org_b = "Orgb" + ds;
    const std::string city = "City" + ds;

    std::vector<std::vector<std::string>> sentences = {
        {person, "started", org_a, "near", city, "."},
        {org_a, "also", "called", org_b, "stays", "in", city, "."},
        {person_alias, "runs", org_a, "today", "."},
    };
    const bool third_sentence = d % 2 == 0;
    if (!third_sentence) sentences.pop_back();
    relex::Document doc =
        fixtures::make_document(sentences, "synthetic-" + ds);

    auto span_of = [&](const std::string& surface) {
      for (const relex::Token& tok : doc.tokens) {
        if (tok.surface == surface) return relex::Span{tok.index, tok.index + 1};
      }
      return relex::Span{0, 1};
    };
    auto spans_of_all = [&](const std::string& surface) {
      std::vector<relex::Span> spans;
      for (const relex::Token& tok : doc.tokens) {
        if (tok.surface == surface) spans.push_back({tok.index, tok.index + 1});
      }
      return spans;
    };

    std::vector<relex::Span> person_spans = {span_of(person)};
    if (third_sentence) person_spans.push_back(span_of(person_alias));
    const int person_cluster = fixtures::add_cluster(doc, "PER", person_spans);

    std::vector<relex::Span> org_spans = spans_of_all(org_a);
    org_spans.push_back(span_of(org_b));
    const int org_cluster = fixtures::add_cluster(doc, "ORG", org_spans);

    const int city_cluster =
        fixtures::add_cluster(doc, "LOC", spans_of_all(city));

    doc.gold_relations.push_back({person_cluster, org_cluster, "r:founded"});
    doc.gold_relations.push_back({org_cluster, city_cluster, "r:based_in"});
    if (rng() % 2 == 0 && third_sentence) {
      doc.gold_relations.push_back({city_cluster, org_cluster, "r:part_of"});
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

// A corpus whose post-filter statistics equal the reference end-to-end
// split totals: 4,008 surviving documents carrying 104,367 mentions,
// 78,107 entities and 49,951 relations, plus `mixed` documents with
// mixed-type clusters that the filter must drop.
inline std::vector<relex::Document> split_mirror_corpus(int clean = 4008,
                                                        int mixed = 45) {
  const long total_mentions = 104367;
  const long total_entities = 78107;
  const long total_relations = 49951;
  const long base_entities = total_entities / clean;
  const long extra_entities = total_entities - base_entities * clean;
  const long base_mentions = total_mentions / clean;
  const long extra_mentions = total_mentions - base_mentions * clean;
  const long base_relations = total_relations / clean;
  const long extra_relations = total_relations - base_relations * clean;
  const std::vector<std::string> types = {"LOC", "MISC", "NUM",
                                          "ORG", "PER", "TIME"};

  std::vector<relex::Document> docs;
  docs.reserve(static_cast<std::size_t>(clean + mixed));
  for (int d = 0; d < clean; ++d) {
    const long entities = base_entities + (d < extra_entities ? 1 : 0);
    const long mentions = base_mentions + (d < extra_mentions ? 1 : 0);
    const long relations = base_relations + (d < extra_relations ? 1 : 0);

    std::vector<std::vector<std::string>> sentences;
    long made = 0;
    while (made < mentions) {
      std::vector<std::string> sentence;
      for (int t = 0; t < 10 && made + t < mentions; ++t) {
        sentence.push_back("w" + std::to_string(made + t));
      }
      made += static_cast<long>(sentence.size());
      sentences.push_back(std::move(sentence));
    }
    char doc_id[32];
    std::snprintf(doc_id, sizeof(doc_id), "mirror-%05d", d);
    relex::Document doc = fixtures::make_document(sentences, doc_id);

    // One mention per token; the first `entities` mentions seed clusters,
    // the rest join existing clusters round-robin.
    std::vector<std::vector<relex::Span>> cluster_spans(
        static_cast<std::size_t>(entities));
    for (long m = 0; m < mentions; ++m) {
      const long cluster = m < entities ? m : m % entities;
      cluster_spans[static_cast<std::size_t>(cluster)].push_back(
          {static_cast<int>(m), static_cast<int>(m) + 1});
    }
    for (long e = 0; e < entities; ++e) {
      fixtures::add_cluster(doc, types[static_cast<std::size_t>(e) % types.size()],
                            cluster_spans[static_cast<std::size_t>(e)]);
    }
    for (long r = 0; r < relations; ++r) {
      const int head = static_cast<int>(r % entities);
      int tail = static_cast<int>((r + 1 + r / entities) % entities);
      if (tail == head) tail = (tail + 1) % static_cast<int>(entities);
      doc.gold_relations.push_back(
          {head, tail, "P" + std::to_string(1 + r % 10)});
    }
    docs.push_back(std::move(doc));
  }

  for (int d = 0; d < mixed; ++d) {
    char doc_id[32];
    std::snprintf(doc_id, sizeof(doc_id), "mirror-mixed-%03d", d);
    relex::Document doc = fixtures::make_document(
        {{"m0", "m1", "m2", "m3"}}, doc_id);
    relex::EntityCluster bad;
    bad.entity_type = "PER";
    bad.mentions = {0, 1};
    doc.gold_mentions.push_back({{0, 1}, "PER"});
    doc.gold_mentions.push_back({{1, 2}, "ORG"});  // type disagreement
    doc.gold_clusters.push_back(bad);
    fixtures::add_cluster(doc, "LOC", {{2, 3}});
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace synthetic
