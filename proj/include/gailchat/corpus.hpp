#pragma once

// Movie-dialog corpus reader. Files use the literal field separator
// " +++$+++ " and ISO-8859-1 text (decoded to UTF-8 here).

#include <string>
#include <vector>

namespace gailchat {

struct RawUtterance {
  std::string id;       // line identifier, e.g. "L1045"
  std::string speaker;  // character name
  std::string movie;    // movie id
  std::string text;     // raw utterance, may be empty
};

struct Conversation {
  std::vector<RawUtterance> utterances;  // in listed order
};

struct CorpusStats {
  std::size_t parsed_lines = 0;
  std::size_t malformed_lines = 0;
  std::size_t conversations = 0;
  std::size_t skipped_conversations = 0;  // unresolvable line ids
};

struct Corpus {
  std::vector<Conversation> conversations;
  std::vector<std::string> speaker_names;  // unique, for the person lexicon
  CorpusStats stats;
};

// Throws std::runtime_error when either file is missing.
Corpus parse_corpus(const std::string& lines_path, const std::string& conversations_path);

}  // namespace gailchat
