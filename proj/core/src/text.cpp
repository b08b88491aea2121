#include "relex/text.hpp"

#include <cctype>

namespace relex {

namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;  // letters, digits, UTF-8 bytes
}

bool is_word_joiner(unsigned char c) { return c == '\'' || c == '-'; }

}  // namespace

Document tokenize_plain_text(const std::string& text, const std::string& doc_id) {
  Document doc;
  doc.doc_id = doc_id;
  std::vector<std::string> current_sentence;

  auto flush_sentence = [&] {
    if (current_sentence.empty()) return;
    Sentence sent;
    sent.start = doc.num_tokens();
    for (std::string& surface : current_sentence) {
      Token tok;
      tok.index = doc.num_tokens();
      tok.sentence_index = static_cast<int>(doc.sentences.size());
      tok.surface = std::move(surface);
      doc.tokens.push_back(std::move(tok));
    }
    sent.end = doc.num_tokens();
    doc.sentences.push_back(sent);
    current_sentence.clear();
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i + 1;
      while (j < text.size()) {
        const unsigned char cj = static_cast<unsigned char>(text[j]);
        if (is_word_char(cj)) {
          ++j;
        } else if (is_word_joiner(cj) && j + 1 < text.size() &&
                   is_word_char(static_cast<unsigned char>(text[j + 1]))) {
          j += 2;
        } else {
          break;
        }
      }
      current_sentence.push_back(text.substr(i, j - i));
      i = j;
      continue;
    }
    // single-character punctuation token
    current_sentence.push_back(std::string(1, text[i]));
    if (c == '.' || c == '!' || c == '?') flush_sentence();
    ++i;
  }
  flush_sentence();
  return doc;
}

}  // namespace relex
