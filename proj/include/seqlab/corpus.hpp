#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqlab/error.hpp"

namespace seqlab {

enum class EntityType : std::uint8_t { kPer = 0, kOrg = 1, kLoc = 2, kOther = 3 };

inline constexpr std::array<EntityType, 4> kEntityTypes = {
    EntityType::kPer, EntityType::kOrg, EntityType::kLoc, EntityType::kOther};

std::string_view entity_name(EntityType type);
// Accepts PER, ORG, LOC, OTHER and the short alias OTH.
std::optional<EntityType> parse_entity(std::string_view name);

enum class BioPrefix : std::uint8_t { kB, kI, kO };

// A BIO tag. Canonical order is O, B-PER, I-PER, B-ORG, I-ORG, B-LOC, I-LOC,
// B-OTHER, I-OTHER, and index() is the position in that order.
class BioLabel {
 public:
  static constexpr int kCount = 9;

  constexpr BioLabel() = default;

  static constexpr BioLabel outside() { return BioLabel(); }
  static constexpr BioLabel begin(EntityType t) { return BioLabel(1 + 2 * static_cast<int>(t)); }
  static constexpr BioLabel inside(EntityType t) { return BioLabel(2 + 2 * static_cast<int>(t)); }
  static BioLabel from_index(int index);
  static std::optional<BioLabel> parse(std::string_view s);

  constexpr int index() const { return index_; }
  constexpr BioPrefix prefix() const {
    return index_ == 0 ? BioPrefix::kO : (index_ % 2 == 1 ? BioPrefix::kB : BioPrefix::kI);
  }
  constexpr bool is_outside() const { return index_ == 0; }
  // Only meaningful when !is_outside().
  constexpr EntityType type() const { return static_cast<EntityType>((index_ - 1) / 2); }

  std::string str() const;

  constexpr auto operator<=>(const BioLabel&) const = default;

 private:
  constexpr explicit BioLabel(int index) : index_(index) {}
  int index_ = 0;
};

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<BioLabel> labels;
  // 1-based line of the first token in the source file, 0 when unknown.
  std::size_t first_line = 0;

  std::size_t size() const { return tokens.size(); }
};

struct Corpus {
  std::vector<TaggedSentence> sentences;
  std::string source_id;

  std::size_t token_count() const;
};

// Sentences whose labels are still uninterpreted strings. Used when a tag
// mapping has to be applied before labels can be parsed.
struct RawSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
  std::size_t first_line = 0;
};

struct RawCorpus {
  std::vector<RawSentence> sentences;
  std::string source_id;
};

// Foreign tag string -> canonical tag string. Tags absent from the map pass
// through unchanged.
using TagMap = std::map<std::string, std::string, std::less<>>;

// Two-column "token<TAB>label" lines, blank lines between sentences.
RawCorpus read_conll_raw(std::istream& in, std::string source_id = {});
Corpus parse_conll(std::istream& in, std::string source_id = {});
Corpus parse_conll(std::string_view text, std::string source_id = {});

// Applies the map, then parses every label. Unknown tags are collected and
// reported together in a MappingError.
Corpus apply_tag_map(const RawCorpus& raw, const TagMap& map);
TagMap read_tag_map(std::istream& in);

void write_conll(std::ostream& out, const Corpus& corpus);

// Token-only input for tagging: first column of each line, blank-line
// separated. Extra columns are ignored.
std::vector<std::vector<std::string>> read_token_sentences(std::istream& in);

enum class BioMode { kStrict, kRepair };

struct Violation {
  std::size_t sentence = 0;
  std::size_t token = 0;
  BioLabel label;
  std::size_t line = 0;  // 0 when the sentence carries no line info
};

class ValidationError : public DataError {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

struct ValidationResult {
  Corpus corpus;
  std::vector<Violation> violations;
  std::size_t repairs = 0;
};

// I-X is an orphan unless the previous label is B-X or I-X.
bool is_orphan(const std::optional<BioLabel>& previous, BioLabel label);
std::vector<Violation> find_orphans(const Corpus& corpus);

// Strict mode throws ValidationError on any orphan. Repair mode rewrites
// each orphan I-X to B-X.
ValidationResult validate_bio(const Corpus& corpus, BioMode mode);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Dev and test sizes are floor(n * ratio); train takes the remainder.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

// Seeded shuffle, then partition. Each part keeps the corpus order.
CorpusSplit split(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

using LabelCounts = std::map<BioLabel, std::size_t>;

LabelCounts stats(const Corpus& corpus);
void write_stats_table(std::ostream& out, const LabelCounts& counts);
void write_stats_tsv(std::ostream& out, const LabelCounts& counts);

// Whitespace split, then leading and trailing ASCII punctuation is detached
// one character per token. Tokens made only of punctuation stay whole.
std::vector<std::string> tokenize_raw(std::string_view text);

}  // namespace seqlab
