#include "relex/subword.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "relex/errors.hpp"

namespace relex {

namespace {
constexpr const char* kUnkPiece = "[UNK]";
}

SubwordVocab SubwordVocab::build(const std::vector<Document>& docs,
                                 int max_words, int min_freq) {
  std::map<std::string, long> counts;
  std::set<std::string> bytes;
  for (const Document& doc : docs) {
    for (const Token& tok : doc.tokens) {
      if (tok.surface.empty()) continue;
      ++counts[tok.surface];
      for (char c : tok.surface) bytes.insert(std::string(1, c));
    }
  }
  // Order: [UNK], all single bytes (sorted), then words by frequency
  // (descending, ties lexicographic). Deterministic given the corpus.
  SubwordVocab vocab;
  vocab.pieces_.push_back(kUnkPiece);
  for (const std::string& b : bytes) vocab.pieces_.push_back(b);
  std::vector<std::pair<std::string, long>> words(counts.begin(), counts.end());
  std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  int added = 0;
  for (const auto& [word, freq] : words) {
    if (freq < min_freq) break;
    if (word.size() == 1) continue;  // already present as a byte
    if (added >= max_words) break;
    vocab.pieces_.push_back(word);
    ++added;
  }
  vocab.index_pieces();
  return vocab;
}

void SubwordVocab::index_pieces() {
  piece_ids_.clear();
  max_piece_len_ = 1;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    piece_ids_[pieces_[i]] = static_cast<int>(i);
    if (i > 0) max_piece_len_ = std::max(max_piece_len_, pieces_[i].size());
  }
}

std::vector<int> SubwordVocab::tokenize(const std::string& surface) const {
  std::vector<int> out;
  if (surface.empty()) {
    out.push_back(kUnkId);
    return out;
  }
  std::size_t pos = 0;
  while (pos < surface.size()) {
    const std::size_t remaining = surface.size() - pos;
    std::size_t len = std::min(max_piece_len_, remaining);
    int id = kUnkId;
    for (; len >= 1; --len) {
      const auto it = piece_ids_.find(surface.substr(pos, len));
      if (it != piece_ids_.end() && it->second != kUnkId) {
        id = it->second;
        break;
      }
    }
    if (id == kUnkId) len = 1;  // skip one unknown byte
    out.push_back(id);
    pos += len;
  }
  return out;
}

void SubwordVocab::save(std::ostream& out) const {
  // One piece per line, escaped so newlines in surfaces cannot corrupt it.
  for (const std::string& p : pieces_) {
    std::string escaped;
    for (char c : p) {
      if (c == '\\') {
        escaped += "\\\\";
      } else if (c == '\n') {
        escaped += "\\n";
      } else {
        escaped += c;
      }
    }
    out << escaped << "\n";
  }
}

SubwordVocab SubwordVocab::load(std::istream& in) {
  SubwordVocab vocab;
  std::string line;
  while (std::getline(in, line)) {
    std::string piece;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '\\' && i + 1 < line.size()) {
        piece += line[i + 1] == 'n' ? '\n' : line[i + 1];
        ++i;
      } else {
        piece += line[i];
      }
    }
    vocab.pieces_.push_back(piece);
  }
  if (vocab.pieces_.empty() || vocab.pieces_.front() != kUnkPiece) {
    throw DataError("subword vocabulary file is malformed");
  }
  vocab.index_pieces();
  return vocab;
}

}  // namespace relex
