#include "gailchat/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gailchat {

namespace {

bool is_letter(unsigned char c) {
  // bytes >= 0x80 are UTF-8 pieces of Latin-1 accented letters
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_wordch(unsigned char c) { return is_letter(c) || is_digit(c) || c == '\''; }

// title and clock abbreviations kept as single tokens (dot attached)
const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> abbr = {
      "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "prof.", "a.m.", "p.m.",
  };
  return abbr;
}

// words that are corpus speaker names but far more often plain English
const std::unordered_set<std::string>& person_stoplist() {
  static const std::unordered_set<std::string> stop = {
      "man",   "woman",  "boy",    "girl",    "guy",     "kid",      "doctor",  "nurse",
      "captain", "sergeant", "general", "colonel", "officer", "cop",   "guard",   "soldier",
      "priest", "father", "mother", "mom",     "dad",     "mama",     "papa",    "king",
      "queen", "prince", "princess", "sir",    "madam",   "miss",     "lady",    "gentleman",
      "waiter", "waitress", "bartender", "teacher", "professor", "student", "judge", "lawyer",
      "president", "secretary", "agent", "detective", "voice", "narrator", "announcer",
      "reporter", "crowd", "stranger", "husband", "wife", "son", "daughter", "uncle", "aunt",
      "grandma", "grandpa", "granny", "boss", "chief", "baby", "honey", "doc", "buddy",
      "red", "duke", "angel", "grace", "rose", "bill", "frank", "mark", "art", "will",
      "may", "june", "dawn", "ray", "gene", "herb", "pat", "sunny", "joy", "young", "old",
      "big", "little", "first", "second", "third", "one", "two", "the", "and", "his", "her",
  };
  return stop;
}

const std::unordered_set<std::string>& speak_context() {
  static const std::unordered_set<std::string> ctx = {"speak", "speaks", "speaking",
                                                      "spoke",  "spoken", "in"};
  return ctx;
}

std::string lowercase_ascii(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// number-like token: digits with optional , . : separators
bool number_shape(const std::string& tok, bool& has_colon, std::string& digits) {
  has_colon = false;
  digits.clear();
  bool any = false;
  for (unsigned char c : tok) {
    if (is_digit(c)) {
      digits.push_back(static_cast<char>(c));
      any = true;
    } else if (c == ':') {
      has_colon = true;
    } else if (c != ',' && c != '.') {
      return false;
    }
  }
  return any;
}

// splits trailing contraction suffixes off a word token
void split_contraction(const std::string& tok, std::vector<std::string>& out) {
  static const std::vector<std::string> suffixes = {"n't", "'s", "'re", "'ll", "'m", "'ve"};
  for (const auto& suf : suffixes) {
    if (tok.size() > suf.size() && tok.compare(tok.size() - suf.size(), suf.size(), suf) == 0) {
      out.push_back(tok.substr(0, tok.size() - suf.size()));
      out.push_back(suf);
      return;
    }
  }
  out.push_back(tok);
}

}  // namespace

std::string latin1_to_utf8(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  const std::string lower = lowercase_ascii(text);
  std::vector<std::string> raw;

  std::size_t i = 0;
  const std::size_t n = lower.size();
  while (i < n) {
    const unsigned char c = lower[i];
    if (std::isspace(c)) {
      ++i;
      continue;
    }

    // abbreviation match at a token boundary ("mrs.", "a.m."), longest first
    {
      bool matched = false;
      for (std::size_t len = 5; len >= 3 && !matched; --len) {
        if (i + len > n) continue;
        std::string cand = lower.substr(i, len);
        if (abbreviations().count(cand) &&
            (i + len == n || !is_wordch(static_cast<unsigned char>(lower[i + len])))) {
          raw.push_back(std::move(cand));
          i += len;
          matched = true;
        }
      }
      if (matched) continue;
    }

    if (is_wordch(c)) {
      std::string word;
      while (i < n) {
        const unsigned char w = lower[i];
        if (is_wordch(w)) {
          word.push_back(static_cast<char>(w));
          ++i;
        } else if ((w == '-' || w == ',' || w == '.' || w == ':') && i + 1 < n && !word.empty() &&
                   ((w == '-' && is_letter(lower[i + 1]) && is_letter(word.back())) ||
                    (w != '-' && is_digit(lower[i + 1]) && is_digit(word.back())))) {
          // word-internal hyphen between letters, or , . : between digits
          word.push_back(static_cast<char>(w));
          ++i;
        } else {
          break;
        }
      }
      raw.push_back(std::move(word));
      continue;
    }

    // punctuation: coalesce runs of '.' and '-'
    if (c == '.') {
      std::size_t run = 0;
      while (i < n && lower[i] == '.') {
        ++run;
        ++i;
      }
      raw.push_back(run == 1 ? "." : (run == 2 ? ".." : "..."));
      continue;
    }
    if (c == '-') {
      std::size_t run = 0;
      while (i < n && lower[i] == '-') {
        ++run;
        ++i;
      }
      raw.push_back(run == 1 ? "-" : "--");
      continue;
    }
    raw.push_back(std::string(1, static_cast<char>(c)));
    ++i;
  }

  std::vector<std::string> out;
  out.reserve(raw.size());
  for (const auto& tok : raw) {
    if (tok.empty()) continue;
    if (is_letter(static_cast<unsigned char>(tok[0])) || tok[0] == '\'')
      split_contraction(tok, out);
    else
      out.push_back(tok);
  }
  // drop bare apostrophes left over from quoting
  out.erase(std::remove(out.begin(), out.end(), "'"), out.end());
  return out;
}

std::vector<std::string> normalize(const std::string& text, const EntityLexicons& lex) {
  std::vector<std::string> tokens = tokenize(text);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];

    bool has_colon = false;
    std::string digits;
    if (number_shape(tok, has_colon, digits)) {
      if (has_colon) {
        out.push_back("<time>");
      } else if (digits.size() == 4 && (digits[0] == '1' || digits[0] == '2')) {
        out.push_back("<date>");  // reads as a year
      } else {
        out.push_back("<cardinal>");
      }
      continue;
    }
    if (lex.cardinal_words.count(tok)) {
      out.push_back("<cardinal>");
    } else if (lex.date_words.count(tok)) {
      out.push_back("<date>");
    } else if (lex.time_words.count(tok)) {
      out.push_back("<time>");
    } else if (lex.demonyms.count(tok)) {
      const bool lang = i > 0 && speak_context().count(tokens[i - 1]) > 0;
      out.push_back(lang ? "<language>" : "<norp>");
    } else if (lex.norp_only.count(tok)) {
      out.push_back("<norp>");
    } else if (lex.gpe.count(tok)) {
      out.push_back("<gpe>");
    } else if (lex.org.count(tok)) {
      out.push_back("<org>");
    } else if (lex.person.count(tok)) {
      out.push_back("<person>");
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

EntityLexicons EntityLexicons::builtin() {
  EntityLexicons lex;
  lex.cardinal_words = {"zero",    "two",     "three",   "four",   "five",    "six",      "seven",
                        "eight",   "nine",    "ten",     "eleven", "twelve",  "thirteen", "fourteen",
                        "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
                        "thirty",  "forty",   "fifty",   "sixty",  "seventy", "eighty",   "ninety",
                        "hundred", "thousand", "million", "billion", "dozen"};
  lex.date_words = {"monday",   "tuesday",  "wednesday", "thursday", "friday",   "saturday",
                    "sunday",   "january",  "february",  "march",    "april",    "may",
                    "june",     "july",     "august",    "september", "october", "november",
                    "december", "today",    "tomorrow",  "yesterday", "christmas", "easter",
                    "thanksgiving", "halloween"};
  lex.time_words = {"morning", "afternoon", "evening", "night", "tonight",
                    "noon",    "midnight",  "o'clock", "a.m.",  "p.m."};
  lex.org = {"fbi", "cia", "kgb", "nasa", "pentagon", "interpol", "nato", "nypd", "lapd"};
  lex.gpe = {"america",  "england", "france",  "germany", "russia",    "italy",   "spain",
             "china",    "japan",   "india",   "egypt",   "mexico",    "canada",  "australia",
             "ireland",  "scotland", "london", "paris",   "rome",      "berlin",  "moscow",
             "vienna",   "madrid",  "tokyo",   "chicago", "boston",    "texas",   "california",
             "hollywood", "vegas",  "brooklyn", "manhattan", "washington", "york"};
  lex.norp_only = {"american", "british",    "mexican",  "canadian", "australian", "indian",
                   "egyptian", "jewish",     "christian", "muslim",  "catholic",   "protestant",
                   "buddhist", "communist",  "fascist",  "nazi",     "nazis",      "republican",
                   "democrat", "republicans", "democrats", "soviet", "irish",      "scottish"};
  lex.demonyms = {"english",  "french",  "spanish", "german",     "italian", "russian",
                  "chinese",  "japanese", "greek",  "latin",      "arabic",  "hebrew",
                  "portuguese", "dutch", "polish",  "swedish",    "danish",  "norwegian",
                  "turkish",  "korean",  "yiddish"};
  return lex;
}

void EntityLexicons::add_person_names(const std::vector<std::string>& speaker_names) {
  for (const auto& name : speaker_names) {
    std::string word;
    auto flush = [&] {
      if (word.size() >= 2 && !person_stoplist().count(word) && !cardinal_words.count(word) &&
          !date_words.count(word) && !time_words.count(word) && !gpe.count(word) &&
          !org.count(word) && !norp_only.count(word) && !demonyms.count(word))
        person.insert(word);
      word.clear();
    };
    for (unsigned char c : lowercase_ascii(name)) {
      if (is_letter(c))
        word.push_back(static_cast<char>(c));
      else
        flush();
    }
    flush();
  }
}

void EntityLexicons::save(const std::string& path) const {
  std::vector<std::string> names(person.begin(), person.end());
  std::sort(names.begin(), names.end());
  nlohmann::json j;
  j["person"] = names;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write lexicon file " + path);
  f << j.dump(2) << "\n";
}

EntityLexicons EntityLexicons::load(const std::string& path) {
  EntityLexicons lex = builtin();
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read lexicon file " + path);
  nlohmann::json j;
  f >> j;
  for (const auto& name : j.at("person")) lex.person.insert(name.get<std::string>());
  return lex;
}

}  // namespace gailchat
