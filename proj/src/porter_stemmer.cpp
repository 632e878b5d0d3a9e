// Porter (1980) suffix-stripping stemmer, following the published rule tables
// without the later departures of the reference C implementation.

#include "retrace/textproc.hpp"

#include <array>

namespace retrace::text {

namespace {

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

class Word {
 public:
  explicit Word(std::string w) : w_(std::move(w)) {}

  const std::string& str() const { return w_; }

  bool consonant(std::size_t i) const {
    switch (w_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 ? true : !consonant(i - 1);
      default: return true;
    }
  }

  // m in [C](VC)^m[V] over the first `len` letters.
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(i)) ++i;
    while (i < len) {
      while (i < len && !consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i)
      if (!consonant(i)) return true;
    return false;
  }

  bool double_consonant(std::size_t len) const {
    return len >= 2 && w_[len - 1] == w_[len - 2] && consonant(len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, the last not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) return false;
    char c = w_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends_with(std::string_view s) const {
    return w_.size() >= s.size() && std::string_view(w_).substr(w_.size() - s.size()) == s;
  }

  std::size_t stem_len(std::string_view suffix) const { return w_.size() - suffix.size(); }

  void replace_suffix(std::string_view suffix, std::string_view replacement) {
    w_.resize(w_.size() - suffix.size());
    w_.append(replacement);
  }

  char back() const { return w_.back(); }
  std::size_t size() const { return w_.size(); }
  void pop() { w_.pop_back(); }
  void push(char c) { w_.push_back(c); }

 private:
  std::string w_;
};

// Applies the first (longest) rule whose suffix matches, provided the stem measure exceeds min_m.
template <std::size_t N>
void apply_measure_rules(Word& w, const std::array<Rule, N>& rules, int min_m) {
  for (const auto& r : rules) {
    if (!w.ends_with(r.suffix)) continue;
    if (w.measure(w.stem_len(r.suffix)) > min_m) w.replace_suffix(r.suffix, r.replacement);
    return;
  }
}

void step1a(Word& w) {
  if (w.ends_with("sses")) w.replace_suffix("sses", "ss");
  else if (w.ends_with("ies")) w.replace_suffix("ies", "i");
  else if (w.ends_with("ss")) return;
  else if (w.ends_with("s")) w.replace_suffix("s", "");
}

void step1b(Word& w) {
  if (w.ends_with("eed")) {
    if (w.measure(w.stem_len("eed")) > 0) w.replace_suffix("eed", "ee");
    return;
  }
  std::string_view hit;
  if (w.ends_with("ed") && w.has_vowel(w.stem_len("ed"))) hit = "ed";
  else if (w.ends_with("ing") && w.has_vowel(w.stem_len("ing"))) hit = "ing";
  if (hit.empty()) return;
  w.replace_suffix(hit, "");
  if (w.ends_with("at")) w.replace_suffix("at", "ate");
  else if (w.ends_with("bl")) w.replace_suffix("bl", "ble");
  else if (w.ends_with("iz")) w.replace_suffix("iz", "ize");
  else if (w.double_consonant(w.size()) && w.back() != 'l' && w.back() != 's' && w.back() != 'z') w.pop();
  else if (w.measure(w.size()) == 1 && w.cvc(w.size())) w.push('e');
}

void step1c(Word& w) {
  if (w.ends_with("y") && w.has_vowel(w.stem_len("y"))) w.replace_suffix("y", "i");
}

void step2(Word& w) {
  static constexpr std::array<Rule, 20> rules{{
      {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},    {"izer", "ize"},
      {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},        {"ousli", "ous"},
      {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},    {"alism", "al"},     {"iveness", "ive"},
      {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},    {"biliti", "ble"},
  }};
  apply_measure_rules(w, rules, 0);
}

void step3(Word& w) {
  static constexpr std::array<Rule, 7> rules{{
      {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""}, {"ness", ""},
  }};
  apply_measure_rules(w, rules, 0);
}

void step4(Word& w) {
  static constexpr std::array<std::string_view, 19> suffixes{
      "al",  "ance", "ence", "er", "ic",  "able", "ible", "ant", "ement", "ment",
      "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
  for (auto s : suffixes) {
    if (!w.ends_with(s)) continue;
    auto len = w.stem_len(s);
    if (w.measure(len) <= 1) return;
    if (s == "ion") {
      char c = len > 0 ? w.str()[len - 1] : '\0';
      if (c != 's' && c != 't') return;
    }
    w.replace_suffix(s, "");
    return;
  }
}

void step5(Word& w) {
  if (w.ends_with("e")) {
    auto len = w.stem_len("e");
    int m = w.measure(len);
    if (m > 1 || (m == 1 && !w.cvc(len))) w.pop();
  }
  if (w.measure(w.size()) > 1 && w.double_consonant(w.size()) && w.back() == 'l') w.pop();
}

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.empty()) return {};
  for (char c : word)
    if (c < 'a' || c > 'z') return std::string(word);  // only plain lowercase ASCII is stemmed
  Word w{std::string(word)};
  step1a(w);
  step1b(w);
  step1c(w);
  step2(w);
  step3(w);
  step4(w);
  step5(w);
  return w.str();
}

}  // namespace retrace::text
