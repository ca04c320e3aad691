#pragma once

// Min-count vocabulary with deterministic id assignment: the fixed special
// tokens come first (<pad> is id 0), then surviving tokens by descending
// count, ties broken lexicographically.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace gailchat {

using TokenSeq = std::vector<int>;

class Vocabulary {
 public:
  static const std::vector<std::string>& special_tokens();  // fixed order

  static Vocabulary build(const std::vector<std::vector<std::string>>& token_streams,
                          std::int64_t min_count = 5);

  int id(const std::string& token) const;  // -1 when absent
  const std::string& token(int id) const;
  std::int64_t count(const std::string& token) const;  // 0 when absent
  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  bool is_special(int id) const;

  int pad_id() const { return 0; }
  int sos_id() const { return 1; }
  int eos_id() const { return 2; }

  TokenSeq encode(const std::vector<std::string>& tokens) const;  // throws on OOV
  std::vector<std::string> decode(const TokenSeq& ids) const;

  // TSV: one "token<TAB>count" per line, id = line order.
  void save_tsv(const std::string& path) const;
  static Vocabulary load_tsv(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace gailchat
