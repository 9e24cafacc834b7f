#include "seqlab/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "seqlab/hash.hpp"
#include "seqlab/random.hpp"
#include "seqlab/text.hpp"

namespace seqlab {

ClusterMap::ClusterMap(std::unordered_map<std::string, int> clusters, int k)
    : clusters_(std::move(clusters)), k_(k) {
  for (const auto& [word, id] : clusters_) {
    if (id < 0 || id >= k_) {
      throw DataError("cluster id " + std::to_string(id) + " for '" + word + "' outside [0, " +
                      std::to_string(k_) + ")");
    }
  }
}

int ClusterMap::lookup(std::string_view word) const {
  auto it = clusters_.find(std::string(word));
  return it == clusters_.end() ? k_ : it->second;
}

std::vector<std::pair<std::string, int>> ClusterMap::entries() const {
  std::vector<std::pair<std::string, int>> out(clusters_.begin(), clusters_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t ClusterMap::digest() const {
  Fnv1a h;
  h.update_u64(static_cast<std::uint64_t>(k_));
  for (const auto& [word, id] : entries()) {
    h.update(word);
    h.update(std::string_view("\t", 1));
    h.update_u64(static_cast<std::uint64_t>(id));
  }
  return h.digest();
}

namespace {

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& s) {
  // from_chars for double is missing on older libstdc++.
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

ClusterLoadResult load_clusters(std::istream& in, std::optional<int> k) {
  ClusterLoadResult result;
  std::unordered_map<std::string, int> map;
  std::string buffer;
  std::size_t line_no = 0;
  int max_id = -1;
  while (std::getline(in, buffer)) {
    ++line_no;
    std::string_view line = text::chomp(buffer);
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 'word<TAB>cluster_id'");
    }
    std::string word(line.substr(0, tab));
    auto id = parse_int(line.substr(tab + 1));
    if (word.empty() || !id) {
      throw FormatError("line " + std::to_string(line_no) + ": malformed cluster entry");
    }
    if (*id < 0 || (k && *id >= *k) || *id > std::numeric_limits<int>::max() - 1) {
      throw FormatError("line " + std::to_string(line_no) + ": cluster id " +
                        std::to_string(*id) + " out of range");
    }
    auto [it, inserted] = map.insert_or_assign(word, static_cast<int>(*id));
    if (!inserted) {
      result.warnings.push_back("line " + std::to_string(line_no) + ": duplicate word '" + word +
                                "', keeping the later id");
    }
    max_id = std::max(max_id, static_cast<int>(*id));
  }
  int kk = k ? *k : max_id + 1;
  result.clusters = ClusterMap(std::move(map), kk);
  return result;
}

void write_clusters(std::ostream& out, const ClusterMap& clusters) {
  for (const auto& [word, id] : clusters.entries()) out << word << '\t' << id << '\n';
}

void EmbeddingTable::add(std::string word, std::vector<double> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_ || dim_ == 0) {
    throw DataError("embedding for '" + word + "' has dimension " + std::to_string(vec.size()) +
                    ", expected " + std::to_string(dim_));
  }
  for (double v : vec) {
    if (!std::isfinite(v)) throw DataError("non-finite embedding value for '" + word + "'");
  }
  words_.push_back(std::move(word));
  values_.insert(values_.end(), vec.begin(), vec.end());
}

EmbeddingTable load_embeddings(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string buffer;
  while (std::getline(in, buffer)) {
    auto fields = text::split_whitespace(text::chomp(buffer));
    if (!fields.empty()) rows.push_back(std::move(fields));
  }
  std::size_t start = 0;
  // "count dim" header: two integers, and the next row has dim values.
  if (rows.size() >= 2 && rows[0].size() == 2 && parse_int(rows[0][0]) && parse_int(rows[0][1]) &&
      rows[1].size() == static_cast<std::size_t>(*parse_int(rows[0][1])) + 1) {
    start = 1;
  }
  EmbeddingTable table;
  for (std::size_t r = start; r < rows.size(); ++r) {
    std::vector<double> vec;
    vec.reserve(rows[r].size() - 1);
    for (std::size_t i = 1; i < rows[r].size(); ++i) {
      auto v = parse_double(rows[r][i]);
      if (!v) throw FormatError("line " + std::to_string(r + 1) + ": bad number '" + rows[r][i] + "'");
      vec.push_back(*v);
    }
    try {
      table.add(rows[r][0], std::move(vec));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  if (table.size() == 0) throw DataError("embedding table is empty");
  return table;
}

namespace {

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace

KMeansResult cluster_embeddings(const EmbeddingTable& table, int k, std::uint64_t seed,
                                int max_iters) {
  const std::size_t n = table.size();
  const std::size_t d = table.dim();
  if (k < 2) throw ConfigError("k must be at least 2");
  if (n == 0) throw ConfigError("embedding table is empty");
  if (static_cast<std::size_t>(k) > n) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds vocabulary size " + std::to_string(n));
  }
  if (max_iters < 0) throw ConfigError("max_iters must be non-negative");
  const auto kk = static_cast<std::size_t>(k);

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<double> centroids(kk * d);
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  auto take = [&](std::size_t c, std::size_t point) {
    chosen[point] = true;
    std::copy_n(table.vector(point), d, centroids.begin() + static_cast<std::ptrdiff_t>(c * d));
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(table.vector(i), table.vector(point), d));
    }
  };
  take(0, rng.index(n));
  for (std::size_t c = 1; c < kk; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += nearest[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        acc += nearest[i];
        pick = i;
        if (acc > r) break;
      }
    }
    if (pick == n) {
      // All remaining points coincide with a centre; pick uniformly among the rest.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) free.push_back(i);
      }
      pick = free[rng.index(free.size())];
    }
    take(c, pick);
  }

  std::vector<std::size_t> assign(n, kk);
  auto assign_all = [&]() {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kk; ++c) {
        double dist = squared_distance(table.vector(i), centroids.data() + c * d, d);
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
      objective += best_d;
    }
    return std::pair{changed, objective};
  };

  KMeansResult result;
  result.objective.push_back(assign_all().second);
  std::vector<double> sums(kk * d);
  std::vector<std::size_t> counts(kk);
  for (int iter = 0; iter < max_iters; ++iter) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* v = table.vector(i);
      double* s = sums.data() + assign[i] * d;
      for (std::size_t j = 0; j < d; ++j) s[j] += v[j];
      ++counts[assign[i]];
    }
    // Empty clusters keep their previous centre.
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        centroids[c * d + j] = sums[c * d + j] / static_cast<double>(counts[c]);
      }
    }
    auto [changed, objective] = assign_all();
    result.objective.push_back(objective);
    result.iterations = iter + 1;
    if (!changed) break;
  }

  std::unordered_map<std::string, int> map;
  for (std::size_t i = 0; i < n; ++i) {
    // First spelling wins when two words lowercase to the same key.
    map.emplace(text::to_lower(table.word(i)), static_cast<int>(assign[i]));
  }
  result.clusters = ClusterMap(std::move(map), k);
  return result;
}

namespace {

std::string ngram(const std::vector<std::string_view>& cps, std::size_t n, bool prefix) {
  std::string out;
  if (cps.size() <= n) {
    for (auto cp : cps) out.append(cp);
    return out;
  }
  std::size_t start = prefix ? 0 : cps.size() - n;
  for (std::size_t i = start; i < start + n; ++i) out.append(cps[i]);
  return out;
}

}  // namespace

FeatureSet extract_token_features(const std::vector<std::string>& tokens, std::size_t index,
                                  const ClusterMap& clusters) {
  if (index >= tokens.size()) {
    throw BoundsError("token index " + std::to_string(index) + " out of range for sentence of " +
                      std::to_string(tokens.size()));
  }
  const std::string& word = tokens[index];
  const std::string lower = text::to_lower(word);
  const auto cps = text::code_points(lower);

  FeatureSet f;
  f.reserve(16);
  f.emplace_back("bias");
  f.push_back("w0=" + lower);
  if (text::starts_upper(word)) f.emplace_back("w0.istitle=1");
  if (text::all_upper(word)) f.emplace_back("w0.isupper=1");
  if (text::all_digits(word)) f.emplace_back("w0.isdigit=1");
  f.push_back("w0.prefix2=" + ngram(cps, 2, true));
  f.push_back("w0.prefix3=" + ngram(cps, 3, true));
  f.push_back("w0.suffix2=" + ngram(cps, 2, false));
  f.push_back("w0.suffix3=" + ngram(cps, 3, false));
  if (index == 0) f.emplace_back("BOS");
  if (index + 1 == tokens.size()) f.emplace_back("EOS");
  if (index >= 2) f.push_back("w-2=" + text::to_lower(tokens[index - 2]));
  if (index >= 1) f.push_back("w-1=" + text::to_lower(tokens[index - 1]));
  if (index + 1 < tokens.size()) f.push_back("w+1=" + text::to_lower(tokens[index + 1]));
  if (index + 2 < tokens.size()) f.push_back("w+2=" + text::to_lower(tokens[index + 2]));
  f.push_back("cluster=" + std::to_string(clusters.lookup(lower)));

  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

FeatureSet extract_token_features(const TaggedSentence& sentence, std::size_t index,
                                  const ClusterMap& clusters) {
  return extract_token_features(sentence.tokens, index, clusters);
}

std::vector<FeatureSet> extract_sentence_features(const std::vector<std::string>& tokens,
                                                  const ClusterMap& clusters) {
  std::vector<FeatureSet> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(extract_token_features(tokens, i, clusters));
  }
  return out;
}

std::vector<FeatureSet> extract_sentence_features(const TaggedSentence& sentence,
                                                  const ClusterMap& clusters) {
  return extract_sentence_features(sentence.tokens, clusters);
}

std::uint64_t template_fingerprint(const ClusterMap& clusters) {
  Fnv1a h;
  h.update(kTemplateName);
  h.update_u64(clusters.digest());
  return h.digest();
}

std::uint32_t FeatureAlphabet::add(const std::string& feature) {
  auto [it, inserted] = ids_.try_emplace(feature, static_cast<std::uint32_t>(names_.size()));
  if (inserted) names_.push_back(feature);
  return it->second;
}

std::optional<std::uint32_t> FeatureAlphabet::find(std::string_view feature) const {
  auto it = ids_.find(feature);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

FeatureAlphabet build_alphabet(const std::vector<std::vector<FeatureSet>>& sentences,
                               std::size_t min_frequency) {
  if (min_frequency < 1) throw ConfigError("min_frequency must be at least 1");
  FeatureAlphabet all;
  std::vector<std::size_t> counts;
  for (const auto& sentence : sentences) {
    for (const auto& set : sentence) {
      for (const auto& feature : set) {
        std::uint32_t id = all.add(feature);
        if (id == counts.size()) counts.push_back(0);
        ++counts[id];
      }
    }
  }
  FeatureAlphabet out;
  out.set_min_frequency(min_frequency);
  for (std::uint32_t id = 0; id < all.size(); ++id) {
    if (counts[id] >= min_frequency) out.add(all.name(id));
  }
  if (out.size() == 0) throw DataError("feature alphabet is empty after the frequency cutoff");
  return out;
}

}  // namespace seqlab
