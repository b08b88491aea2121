#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "relex/types.hpp"

namespace relex {

// DocRED JSON ingestion. Expected schema per document:
//   title: string
//   sents: [[token, ...], ...]
//   vertexSet: [[{name, sent_id, pos: [start, end), type}, ...], ...]
//   labels: [{h, t, r, evidence}, ...]   (evidence parsed but unused)
// Every schema violation raises DataError naming the document and field.
std::vector<Document> load_docred(const std::string& path);
std::vector<Document> parse_docred(const nlohmann::json& root,
                                   const std::string& origin);

nlohmann::json document_to_docred_json(const Document& doc);
void save_docred(const std::vector<Document>& docs, const std::string& path);

struct CorpusStatistics {
  long documents = 0;
  long mentions = 0;
  long entities = 0;
  long relations = 0;  // duplicates included

  bool operator==(const CorpusStatistics&) const = default;
};

CorpusStatistics corpus_statistics(const std::vector<Document>& docs);

// A cluster whose mentions disagree on entity type. Such documents are
// dropped by the end-to-end split.
bool has_mixed_type_cluster(const Document& doc);

struct SplitSizes {
  int train = 3008;
  int dev = 300;
  int test = 700;
};

struct SplitResult {
  std::vector<Document> train;
  std::vector<Document> dev;
  std::vector<Document> test;
  std::vector<std::string> filtered_ids;  // dropped mixed-type documents
  std::vector<std::string> warnings;
};

// Drops mixed-type documents, then partitions the remainder into
// train/dev/test. Document IDs are consumed in sorted order before
// shuffling, so the partition is independent of input order. When the
// surviving count differs from the requested total, the train size absorbs
// the difference (with a warning); dev/test sizes stay fixed. Throws
// DataError when fewer than dev + test + 1 documents survive.
SplitResult make_end_to_end_split(const std::vector<Document>& documents,
                                  uint64_t seed,
                                  const SplitSizes& sizes = SplitSizes{});

// Expected number of filter-dropped documents on the reference release;
// a differing count warns instead of failing (release versions drift).
constexpr int kExpectedFilteredDocuments = 45;

}  // namespace relex
