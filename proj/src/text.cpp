#include "seqlab/text.hpp"

#include <cctype>

namespace seqlab::text {
namespace {

std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Latin-1 supplement letters encode as C3 80..C3 BF. Uppercase 80..9E
// (minus 97, the multiplication sign) map to lowercase by +0x20.
bool latin1_upper(std::string_view cp) {
  if (cp.size() != 2 || static_cast<unsigned char>(cp[0]) != 0xC3) return false;
  auto b = static_cast<unsigned char>(cp[1]);
  return b >= 0x80 && b <= 0x9E && b != 0x97;
}

bool latin1_lower(std::string_view cp) {
  if (cp.size() != 2 || static_cast<unsigned char>(cp[0]) != 0xC3) return false;
  auto b = static_cast<unsigned char>(cp[1]);
  return b >= 0x9F && b <= 0xBF && b != 0xB7;
}

}  // namespace

std::vector<std::string_view> code_points(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t n = sequence_length(static_cast<unsigned char>(s[i]));
    if (i + n > s.size()) n = 1;
    for (std::size_t k = 1; k < n; ++k) {
      if (!is_continuation(static_cast<unsigned char>(s[i + k]))) {
        n = 1;
        break;
      }
    }
    out.push_back(s.substr(i, n));
    i += n;
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::string_view cp : code_points(s)) {
    if (cp.size() == 1) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(cp[0]))));
    } else if (latin1_upper(cp)) {
      out.push_back(cp[0]);
      out.push_back(static_cast<char>(static_cast<unsigned char>(cp[1]) + 0x20));
    } else {
      out.append(cp);
    }
  }
  return out;
}

bool is_upper_letter(std::string_view cp) {
  if (cp.size() == 1) return std::isupper(static_cast<unsigned char>(cp[0])) != 0;
  return latin1_upper(cp);
}

bool is_lower_letter(std::string_view cp) {
  if (cp.size() == 1) return std::islower(static_cast<unsigned char>(cp[0])) != 0;
  return latin1_lower(cp);
}

bool is_ascii_digit(std::string_view cp) {
  return cp.size() == 1 && cp[0] >= '0' && cp[0] <= '9';
}

bool is_ascii_punct(std::string_view cp) {
  return cp.size() == 1 && std::ispunct(static_cast<unsigned char>(cp[0])) != 0;
}

bool starts_upper(std::string_view word) {
  auto cps = code_points(word);
  return !cps.empty() && is_upper_letter(cps.front());
}

bool all_upper(std::string_view word) {
  bool cased = false;
  for (std::string_view cp : code_points(word)) {
    if (is_lower_letter(cp)) return false;
    if (is_upper_letter(cp)) cased = true;
  }
  return cased;
}

bool all_digits(std::string_view word) {
  auto cps = code_points(word);
  if (cps.empty()) return false;
  for (std::string_view cp : cps) {
    if (!is_ascii_digit(cp)) return false;
  }
  return true;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace seqlab::text
