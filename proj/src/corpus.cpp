#include "gailchat/corpus.hpp"

#include <fstream>
#include <iostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "gailchat/text.hpp"

namespace gailchat {

namespace {

constexpr const char* kSep = " +++$+++ ";

std::vector<std::string> split_fields(const std::string& line, std::size_t max_fields) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  const std::size_t sep_len = std::string(kSep).size();
  while (fields.size() + 1 < max_fields) {
    const std::size_t next = line.find(kSep, pos);
    if (next == std::string::npos) break;
    fields.push_back(line.substr(pos, next - pos));
    pos = next + sep_len;
  }
  fields.push_back(line.substr(pos));
  return fields;
}

std::string rstrip_cr(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

// line-id list like "['L194', 'L195', 'L196']"
std::vector<std::string> parse_id_list(const std::string& field) {
  std::vector<std::string> ids;
  std::size_t i = 0;
  while (i < field.size()) {
    if (field[i] == '\'' || field[i] == '"') {
      const char q = field[i++];
      std::string id;
      while (i < field.size() && field[i] != q) id.push_back(field[i++]);
      if (i < field.size()) ++i;
      if (!id.empty()) ids.push_back(std::move(id));
    } else {
      ++i;
    }
  }
  return ids;
}

}  // namespace

Corpus parse_corpus(const std::string& lines_path, const std::string& conversations_path) {
  std::ifstream lines_file(lines_path, std::ios::binary);
  if (!lines_file) throw std::runtime_error("cannot open corpus lines file: " + lines_path);
  std::ifstream conv_file(conversations_path, std::ios::binary);
  if (!conv_file) throw std::runtime_error("cannot open corpus conversations file: " + conversations_path);

  Corpus corpus;
  std::unordered_map<std::string, RawUtterance> by_id;
  std::unordered_set<std::string> speakers;

  std::string line;
  while (std::getline(lines_file, line)) {
    line = rstrip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line, 5);
    if (fields.size() != 5 || fields[0].empty()) {
      ++corpus.stats.malformed_lines;
      continue;
    }
    RawUtterance u;
    u.id = fields[0];
    u.movie = fields[2];
    u.speaker = latin1_to_utf8(fields[3]);
    u.text = latin1_to_utf8(fields[4]);
    speakers.insert(u.speaker);
    by_id[u.id] = std::move(u);
    ++corpus.stats.parsed_lines;
  }

  while (std::getline(conv_file, line)) {
    line = rstrip_cr(line);
    if (line.empty()) continue;
    auto fields = split_fields(line, 4);
    if (fields.size() != 4) {
      ++corpus.stats.malformed_lines;
      continue;
    }
    auto ids = parse_id_list(fields[3]);
    Conversation conv;
    bool ok = !ids.empty();
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        ok = false;
        break;
      }
      conv.utterances.push_back(it->second);
    }
    if (!ok) {
      ++corpus.stats.skipped_conversations;
      if (corpus.stats.skipped_conversations <= 5)
        std::cerr << "warning: skipping conversation with unresolvable line ids: " << fields[3]
                  << "\n";
      continue;
    }
    corpus.conversations.push_back(std::move(conv));
    ++corpus.stats.conversations;
  }

  corpus.speaker_names.assign(speakers.begin(), speakers.end());
  return corpus;
}

}  // namespace gailchat
