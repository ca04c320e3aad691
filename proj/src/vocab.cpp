#include "gailchat/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace gailchat {

const std::vector<std::string>& Vocabulary::special_tokens() {
  static const std::vector<std::string> specials = {
      "<pad>", "<sos>", "<eos>",  "<person>", "<cardinal>", "<date>",
      "<time>", "<org>", "<gpe>", "<norp>",   "<language>",
  };
  return specials;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& token_streams,
                             std::int64_t min_count) {
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& stream : token_streams)
    for (const auto& tok : stream) ++counts[tok];

  Vocabulary v;
  for (const auto& sp : special_tokens()) {
    v.ids_[sp] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(sp);
    auto it = counts.find(sp);
    v.counts_.push_back(it == counts.end() ? 0 : it->second);
  }

  std::vector<std::pair<std::string, std::int64_t>> rest;
  for (const auto& [tok, cnt] : counts) {
    if (v.ids_.count(tok)) continue;  // specials already placed
    if (cnt >= min_count) rest.emplace_back(tok, cnt);
  }
  std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (auto& [tok, cnt] : rest) {
    v.ids_[tok] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(tok);
    v.counts_.push_back(cnt);
  }
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= static_cast<int>(tokens_.size()))
    throw std::out_of_range("Vocabulary: id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::int64_t Vocabulary::count(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? 0 : counts_[it->second];
}

bool Vocabulary::is_special(int id) const {
  return id >= 0 && id < static_cast<int>(special_tokens().size());
}

TokenSeq Vocabulary::encode(const std::vector<std::string>& tokens) const {
  TokenSeq out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    const int i = id(tok);
    if (i < 0) throw std::invalid_argument("Vocabulary: token not in vocabulary: " + tok);
    out.push_back(i);
  }
  return out;
}

std::vector<std::string> Vocabulary::decode(const TokenSeq& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

void Vocabulary::save_tsv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write vocab file " + path);
  for (std::size_t i = 0; i < tokens_.size(); ++i) f << tokens_[i] << "\t" << counts_[i] << "\n";
}

Vocabulary Vocabulary::load_tsv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read vocab file " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("malformed vocab line in " + path + ": " + line);
    const std::string tok = line.substr(0, tab);
    v.ids_[tok] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(tok);
    v.counts_.push_back(std::stoll(line.substr(tab + 1)));
  }
  const auto& specials = special_tokens();
  for (std::size_t i = 0; i < specials.size(); ++i)
    if (i >= v.tokens_.size() || v.tokens_[i] != specials[i])
      throw std::runtime_error("vocab file " + path + " missing special token " + specials[i]);
  return v;
}

}  // namespace gailchat
