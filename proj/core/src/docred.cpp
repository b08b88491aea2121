#include "relex/docred.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "relex/errors.hpp"

namespace relex {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& doc, const std::string& field,
                               const std::string& what) {
  throw DataError("document '" + doc + "', field '" + field + "': " + what);
}

Document parse_document(const json& j, std::size_t index) {
  std::string doc_id = "#" + std::to_string(index);
  if (j.contains("title") && j["title"].is_string()) {
    doc_id = j["title"].get<std::string>();
  }
  Document doc;
  doc.doc_id = doc_id;

  if (!j.contains("sents") || !j["sents"].is_array()) {
    schema_error(doc_id, "sents", "missing or not an array");
  }
  for (const json& sent : j["sents"]) {
    if (!sent.is_array()) schema_error(doc_id, "sents", "sentence is not an array");
    Sentence s;
    s.start = doc.num_tokens();
    for (const json& tok : sent) {
      if (!tok.is_string()) schema_error(doc_id, "sents", "token is not a string");
      Token t;
      t.index = doc.num_tokens();
      t.sentence_index = static_cast<int>(doc.sentences.size());
      t.surface = tok.get<std::string>();
      doc.tokens.push_back(std::move(t));
    }
    s.end = doc.num_tokens();
    doc.sentences.push_back(s);
  }

  if (!j.contains("vertexSet") || !j["vertexSet"].is_array()) {
    schema_error(doc_id, "vertexSet", "missing or not an array");
  }
  for (const json& vertex : j["vertexSet"]) {
    if (!vertex.is_array() || vertex.empty()) {
      schema_error(doc_id, "vertexSet", "vertex is not a non-empty array");
    }
    EntityCluster cluster;
    for (const json& men : vertex) {
      if (!men.is_object() || !men.contains("sent_id") || !men.contains("pos") ||
          !men.contains("type")) {
        schema_error(doc_id, "vertexSet", "mention missing sent_id/pos/type");
      }
      const int sent_id = men["sent_id"].get<int>();
      if (sent_id < 0 || sent_id >= static_cast<int>(doc.sentences.size())) {
        schema_error(doc_id, "vertexSet",
                     "mention sent_id " + std::to_string(sent_id) + " out of range");
      }
      const json& pos = men["pos"];
      if (!pos.is_array() || pos.size() != 2) {
        schema_error(doc_id, "vertexSet", "mention pos is not [start, end]");
      }
      const Sentence& sent = doc.sentences[static_cast<std::size_t>(sent_id)];
      const int local_start = pos[0].get<int>();
      const int local_end = pos[1].get<int>();
      if (local_start < 0 || local_start >= local_end) {
        schema_error(doc_id, "vertexSet", "mention pos is empty or negative");
      }
      if (local_end > sent.length()) {
        // A span reaching past its sentence would cross into the next one.
        schema_error(doc_id, "vertexSet",
                     "mention crosses sentence boundary (pos end " +
                         std::to_string(local_end) + " > sentence length " +
                         std::to_string(sent.length()) + ")");
      }
      Mention m;
      m.span = Span{sent.start + local_start, sent.start + local_end};
      m.entity_type = men["type"].get<std::string>();
      cluster.mentions.push_back(static_cast<int>(doc.gold_mentions.size()));
      doc.gold_mentions.push_back(std::move(m));
    }
    cluster.entity_type =
        doc.gold_mentions[static_cast<std::size_t>(cluster.mentions.front())]
            .entity_type;
    doc.gold_clusters.push_back(std::move(cluster));
  }

  if (j.contains("labels")) {
    if (!j["labels"].is_array()) schema_error(doc_id, "labels", "not an array");
    const int num_clusters = static_cast<int>(doc.gold_clusters.size());
    for (const json& label : j["labels"]) {
      if (!label.is_object() || !label.contains("h") || !label.contains("t") ||
          !label.contains("r")) {
        schema_error(doc_id, "labels", "label missing h/t/r");
      }
      RelationTriple rel;
      rel.head = label["h"].get<int>();
      rel.tail = label["t"].get<int>();
      rel.relation_type = label["r"].get<std::string>();
      if (rel.head < 0 || rel.head >= num_clusters || rel.tail < 0 ||
          rel.tail >= num_clusters) {
        schema_error(doc_id, "labels",
                     "relation references missing vertex index " +
                         std::to_string(rel.head >= num_clusters || rel.head < 0
                                            ? rel.head
                                            : rel.tail));
      }
      // `evidence` is parsed as part of the schema but unused.
      doc.gold_relations.push_back(std::move(rel));
    }
  }

  validate_document(doc);
  return doc;
}

}  // namespace

std::vector<Document> parse_docred(const json& root, const std::string& origin) {
  if (!root.is_array()) {
    throw DataError(origin + ": top-level JSON is not an array");
  }
  std::vector<Document> docs;
  docs.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    docs.push_back(parse_document(root[i], i));
  }
  return docs;
}

std::vector<Document> load_docred(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw DataError(path + ": JSON parse failure: " + e.what());
  }
  return parse_docred(root, path);
}

json document_to_docred_json(const Document& doc) {
  json j;
  j["title"] = doc.doc_id;
  json sents = json::array();
  for (const Sentence& s : doc.sentences) {
    json sent = json::array();
    for (int i = s.start; i < s.end; ++i) {
      sent.push_back(doc.tokens[static_cast<std::size_t>(i)].surface);
    }
    sents.push_back(std::move(sent));
  }
  j["sents"] = std::move(sents);
  json vertex_set = json::array();
  for (const EntityCluster& cluster : doc.gold_clusters) {
    json vertex = json::array();
    for (int m : cluster.mentions) {
      const Mention& mention = doc.gold_mentions[static_cast<std::size_t>(m)];
      const int sent_id = doc.sentence_of(mention.span);
      const Sentence& sent = doc.sentences[static_cast<std::size_t>(sent_id)];
      json men;
      men["name"] = doc.span_surface(mention.span);
      men["sent_id"] = sent_id;
      men["pos"] = {mention.span.start - sent.start, mention.span.end - sent.start};
      men["type"] = mention.entity_type;
      vertex.push_back(std::move(men));
    }
    vertex_set.push_back(std::move(vertex));
  }
  j["vertexSet"] = std::move(vertex_set);
  json labels = json::array();
  for (const RelationTriple& rel : doc.gold_relations) {
    json label;
    label["h"] = rel.head;
    label["t"] = rel.tail;
    label["r"] = rel.relation_type;
    label["evidence"] = json::array();
    labels.push_back(std::move(label));
  }
  j["labels"] = std::move(labels);
  return j;
}

void save_docred(const std::vector<Document>& docs, const std::string& path) {
  json root = json::array();
  for (const Document& doc : docs) {
    root.push_back(document_to_docred_json(doc));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << root.dump(1) << "\n";
}

CorpusStatistics corpus_statistics(const std::vector<Document>& docs) {
  CorpusStatistics stats;
  stats.documents = static_cast<long>(docs.size());
  for (const Document& doc : docs) {
    stats.mentions += static_cast<long>(doc.gold_mentions.size());
    stats.entities += static_cast<long>(doc.gold_clusters.size());
    stats.relations += static_cast<long>(doc.gold_relations.size());
  }
  return stats;
}

bool has_mixed_type_cluster(const Document& doc) {
  for (const EntityCluster& cluster : doc.gold_clusters) {
    const std::string& first =
        doc.gold_mentions[static_cast<std::size_t>(cluster.mentions.front())]
            .entity_type;
    for (int m : cluster.mentions) {
      if (doc.gold_mentions[static_cast<std::size_t>(m)].entity_type != first) {
        return true;
      }
    }
  }
  return false;
}

SplitResult make_end_to_end_split(const std::vector<Document>& documents,
                                  uint64_t seed, const SplitSizes& sizes) {
  SplitResult result;
  std::vector<const Document*> eligible;
  for (const Document& doc : documents) {
    if (has_mixed_type_cluster(doc)) {
      result.filtered_ids.push_back(doc.doc_id);
    } else {
      eligible.push_back(&doc);
    }
  }
  std::sort(result.filtered_ids.begin(), result.filtered_ids.end());
  if (static_cast<int>(result.filtered_ids.size()) != kExpectedFilteredDocuments) {
    result.warnings.push_back(
        "filtered " + std::to_string(result.filtered_ids.size()) +
        " mixed-type documents, expected " +
        std::to_string(kExpectedFilteredDocuments) +
        " on the reference release");
  }

  // IDs consumed in sorted order before shuffling: the partition depends on
  // (seed, id set) only, not on ingestion order.
  std::sort(eligible.begin(), eligible.end(),
            [](const Document* a, const Document* b) {
              return a->doc_id < b->doc_id;
            });
  const int available = static_cast<int>(eligible.size());
  if (available < sizes.dev + sizes.test + 1) {
    throw DataError("insufficient documents after filtering: " +
                    std::to_string(available) + " left, need at least " +
                    std::to_string(sizes.dev + sizes.test + 1));
  }
  int train_size = sizes.train;
  if (available != sizes.train + sizes.dev + sizes.test) {
    train_size = available - sizes.dev - sizes.test;
    result.warnings.push_back(
        "document count " + std::to_string(available) +
        " does not match requested split " + std::to_string(sizes.train) + "/" +
        std::to_string(sizes.dev) + "/" + std::to_string(sizes.test) +
        "; train size adjusted to " + std::to_string(train_size));
  }

  std::mt19937_64 rng(seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);

  auto take = [&](int from, int count) {
    std::vector<Document> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = from; i < from + count; ++i) {
      out.push_back(*eligible[static_cast<std::size_t>(i)]);
    }
    std::sort(out.begin(), out.end(),
              [](const Document& a, const Document& b) {
                return a.doc_id < b.doc_id;
              });
    return out;
  };
  result.train = take(0, train_size);
  result.dev = take(train_size, sizes.dev);
  result.test = take(train_size + sizes.dev, sizes.test);
  return result;
}

}  // namespace relex
