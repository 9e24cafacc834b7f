#include "seqlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "seqlab/random.hpp"
#include "seqlab/text.hpp"

namespace seqlab {

std::string_view entity_name(EntityType type) {
  switch (type) {
    case EntityType::kPer: return "PER";
    case EntityType::kOrg: return "ORG";
    case EntityType::kLoc: return "LOC";
    case EntityType::kOther: return "OTHER";
  }
  return "?";
}

std::optional<EntityType> parse_entity(std::string_view name) {
  if (name == "PER") return EntityType::kPer;
  if (name == "ORG") return EntityType::kOrg;
  if (name == "LOC") return EntityType::kLoc;
  if (name == "OTHER" || name == "OTH") return EntityType::kOther;
  return std::nullopt;
}

BioLabel BioLabel::from_index(int index) {
  if (index < 0 || index >= kCount) {
    throw BoundsError("BIO label index " + std::to_string(index) + " out of range");
  }
  return BioLabel(index);
}

std::optional<BioLabel> BioLabel::parse(std::string_view s) {
  if (s == "O") return outside();
  if (s.size() < 3 || s[1] != '-') return std::nullopt;
  auto type = parse_entity(s.substr(2));
  if (!type) return std::nullopt;
  if (s[0] == 'B') return begin(*type);
  if (s[0] == 'I') return inside(*type);
  return std::nullopt;
}

std::string BioLabel::str() const {
  if (is_outside()) return "O";
  std::string out = prefix() == BioPrefix::kB ? "B-" : "I-";
  out += entity_name(type());
  return out;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

namespace {

std::vector<std::string_view> split_columns(std::string_view line) {
  std::vector<std::string_view> cols;
  if (line.find('\t') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    return cols;
  }
  // No tab: fall back to runs of spaces.
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) cols.push_back(line.substr(start, i - start));
  }
  return cols;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t'; });
}

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  });
}

}  // namespace

RawCorpus read_conll_raw(std::istream& in, std::string source_id) {
  RawCorpus corpus;
  corpus.source_id = std::move(source_id);
  RawSentence current;
  std::string buffer;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    current = RawSentence{};
  };
  while (std::getline(in, buffer)) {
    ++line_no;
    std::string_view line = text::chomp(buffer);
    if (is_blank(line)) {
      flush();
      continue;
    }
    auto cols = split_columns(line);
    if (cols.size() != 2) {
      throw ParseError("expected 2 columns (token<TAB>label), found " +
                           std::to_string(cols.size()),
                       line_no);
    }
    if (cols[0].empty() || has_whitespace(cols[0])) {
      throw ParseError("empty or whitespace-bearing token", line_no);
    }
    if (cols[1].empty()) throw ParseError("empty label", line_no);
    if (current.tokens.empty()) current.first_line = line_no;
    current.tokens.emplace_back(cols[0]);
    current.labels.emplace_back(cols[1]);
  }
  flush();
  if (corpus.sentences.empty()) throw EmptyCorpusError("corpus contains no sentences");
  return corpus;
}

Corpus parse_conll(std::istream& in, std::string source_id) {
  RawCorpus raw = read_conll_raw(in, std::move(source_id));
  Corpus corpus;
  corpus.source_id = raw.source_id;
  corpus.sentences.reserve(raw.sentences.size());
  for (auto& rs : raw.sentences) {
    TaggedSentence s;
    s.first_line = rs.first_line;
    s.labels.reserve(rs.labels.size());
    for (std::size_t i = 0; i < rs.labels.size(); ++i) {
      auto label = BioLabel::parse(rs.labels[i]);
      if (!label) throw LabelError("unknown label '" + rs.labels[i] + "'", rs.first_line + i);
      s.labels.push_back(*label);
    }
    s.tokens = std::move(rs.tokens);
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

Corpus parse_conll(std::string_view text, std::string source_id) {
  std::istringstream in{std::string(text)};
  return parse_conll(in, std::move(source_id));
}

Corpus apply_tag_map(const RawCorpus& raw, const TagMap& map) {
  Corpus corpus;
  corpus.source_id = raw.source_id;
  std::set<std::string> unknown;
  for (const auto& rs : raw.sentences) {
    TaggedSentence s;
    s.tokens = rs.tokens;
    s.first_line = rs.first_line;
    for (const auto& tag : rs.labels) {
      auto it = map.find(tag);
      const std::string& mapped = it == map.end() ? tag : it->second;
      auto label = BioLabel::parse(mapped);
      if (!label) {
        unknown.insert(tag);
        s.labels.push_back(BioLabel::outside());
      } else {
        s.labels.push_back(*label);
      }
    }
    corpus.sentences.push_back(std::move(s));
  }
  if (!unknown.empty()) {
    std::string msg = "unmappable tags:";
    for (const auto& t : unknown) msg += " " + t;
    throw MappingError(msg);
  }
  return corpus;
}

TagMap read_tag_map(std::istream& in) {
  TagMap map;
  std::string buffer;
  std::size_t line_no = 0;
  while (std::getline(in, buffer)) {
    ++line_no;
    std::string_view line = text::chomp(buffer);
    if (is_blank(line) || line.front() == '#') continue;
    auto cols = split_columns(line);
    if (cols.size() != 2) throw ParseError("expected 'foreign<TAB>canonical'", line_no);
    map[std::string(cols[0])] = std::string(cols[1]);
  }
  return map;
}

void write_conll(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.tokens[i] << '\t' << s.labels[i].str() << '\n';
    }
    out << '\n';
  }
}

std::vector<std::vector<std::string>> read_token_sentences(std::istream& in) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> current;
  std::string buffer;
  while (std::getline(in, buffer)) {
    std::string_view line = text::chomp(buffer);
    if (is_blank(line)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    current.emplace_back(split_columns(line).front());
  }
  if (!current.empty()) out.push_back(std::move(current));
  if (out.empty()) throw EmptyCorpusError("input contains no sentences");
  return out;
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : DataError([&] {
        std::ostringstream msg;
        msg << violations.size() << " orphan I- label(s):";
        std::size_t shown = 0;
        for (const auto& v : violations) {
          if (shown++ == 10) {
            msg << " ...";
            break;
          }
          msg << " [sentence " << v.sentence << ", token " << v.token;
          if (v.line != 0) msg << ", line " << v.line;
          msg << ", " << v.label.str() << "]";
        }
        return msg.str();
      }()),
      violations_(std::move(violations)) {}

bool is_orphan(const std::optional<BioLabel>& previous, BioLabel label) {
  if (label.prefix() != BioPrefix::kI) return false;
  if (!previous || previous->is_outside()) return true;
  return previous->type() != label.type();
}

std::vector<Violation> find_orphans(const Corpus& corpus) {
  std::vector<Violation> out;
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const auto& s = corpus.sentences[si];
    std::optional<BioLabel> prev;
    for (std::size_t ti = 0; ti < s.size(); ++ti) {
      if (is_orphan(prev, s.labels[ti])) {
        out.push_back({si, ti, s.labels[ti], s.first_line == 0 ? 0 : s.first_line + ti});
      }
      prev = s.labels[ti];
    }
  }
  return out;
}

ValidationResult validate_bio(const Corpus& corpus, BioMode mode) {
  ValidationResult result;
  result.violations = find_orphans(corpus);
  if (mode == BioMode::kStrict && !result.violations.empty()) {
    throw ValidationError(result.violations);
  }
  result.corpus = corpus;
  for (const auto& v : result.violations) {
    auto& label = result.corpus.sentences[v.sentence].labels[v.token];
    label = BioLabel::begin(label.type());
  }
  result.repairs = mode == BioMode::kRepair ? result.violations.size() : 0;
  return result;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& r) {
  if (!(r.train > 0) || !(r.dev > 0) || !(r.test > 0)) {
    throw ConfigError("split ratios must all be positive");
  }
  if (std::abs(r.train + r.dev + r.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  // The small slack keeps products like 100 * 0.29 from flooring one short.
  auto part = [n](double ratio) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
  };
  std::size_t dev = part(r.dev);
  std::size_t test = part(r.test);
  return {n - dev - test, dev, test};
}

CorpusSplit split(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  const std::size_t n = corpus.sentences.size();
  auto [n_train, n_dev, n_test] = split_sizes(n, ratios);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  // 0 = train, 1 = dev, 2 = test
  std::vector<int> part(n, 0);
  for (std::size_t i = 0; i < n_test; ++i) part[order[i]] = 2;
  for (std::size_t i = n_test; i < n_test + n_dev; ++i) part[order[i]] = 1;

  CorpusSplit out;
  out.train.source_id = corpus.source_id + ":train";
  out.dev.source_id = corpus.source_id + ":dev";
  out.test.source_id = corpus.source_id + ":test";
  out.train.sentences.reserve(n_train);
  for (std::size_t i = 0; i < n; ++i) {
    Corpus& dst = part[i] == 0 ? out.train : (part[i] == 1 ? out.dev : out.test);
    dst.sentences.push_back(corpus.sentences[i]);
  }
  return out;
}

LabelCounts stats(const Corpus& corpus) {
  LabelCounts counts;
  for (const auto& s : corpus.sentences) {
    for (BioLabel l : s.labels) ++counts[l];
  }
  return counts;
}

void write_stats_table(std::ostream& out, const LabelCounts& counts) {
  std::size_t total = 0;
  out << std::left << std::setw(10) << "Label" << std::right << std::setw(10) << "Count" << '\n';
  for (const auto& [label, n] : counts) {
    out << std::left << std::setw(10) << label.str() << std::right << std::setw(10) << n << '\n';
    total += n;
  }
  out << std::left << std::setw(10) << "total" << std::right << std::setw(10) << total << '\n';
}

void write_stats_tsv(std::ostream& out, const LabelCounts& counts) {
  for (const auto& [label, n] : counts) out << label.str() << '\t' << n << '\n';
}

std::vector<std::string> tokenize_raw(std::string_view raw) {
  std::vector<std::string> tokens;
  for (const std::string& word : text::split_whitespace(raw)) {
    auto cps = text::code_points(word);
    std::size_t lo = 0;
    std::size_t hi = cps.size();
    while (lo < hi && text::is_ascii_punct(cps[lo])) ++lo;
    if (lo == hi) {
      tokens.push_back(word);
      continue;
    }
    while (hi > lo && text::is_ascii_punct(cps[hi - 1])) --hi;
    for (std::size_t i = 0; i < lo; ++i) tokens.emplace_back(cps[i]);
    std::string core;
    for (std::size_t i = lo; i < hi; ++i) core.append(cps[i]);
    tokens.push_back(std::move(core));
    for (std::size_t i = hi; i < cps.size(); ++i) tokens.emplace_back(cps[i]);
  }
  if (tokens.empty()) throw DataError("empty sentence: input has no tokens");
  return tokens;
}

}  // namespace seqlab
