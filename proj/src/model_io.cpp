#include "seqlab/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <string_view>

#include "seqlab/hash.hpp"

namespace seqlab {
namespace {

constexpr std::string_view kMagic = "SEQLABCRF";

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { buf_.append(s); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  std::string& buffer() { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view take(std::size_t n) {
    if (data_.size() - pos_ < n) throw CorruptionError("model file is truncated");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t le(int n) {
    auto b = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() { return std::string(take(u32())); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const CrfModel& model) {
  Writer w;
  w.bytes(kMagic);
  w.u32(kModelFormatVersion);
  w.u64(model.fingerprint());
  w.u32(static_cast<std::uint32_t>(model.features().min_frequency()));
  w.u32(static_cast<std::uint32_t>(model.num_labels()));
  for (const auto& l : model.labels()) w.str(l);
  w.u32(static_cast<std::uint32_t>(model.num_features()));
  for (const auto& f : model.features().names()) w.str(f);
  w.u64(model.num_weights());
  for (double v : model.weights()) w.f64(v);
  Fnv1a h;
  h.update(w.buffer());
  w.u64(h.digest());
  return std::move(w.buffer());
}

void save_model(const CrfModel& model, std::ostream& out) {
  std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed to write model");
}

CrfModel deserialize_model(const std::string& bytes) {
  Reader r(bytes);
  if (bytes.size() < kMagic.size() || std::string_view(bytes).substr(0, kMagic.size()) != kMagic) {
    throw FormatError("not a seqlab model (bad magic)");
  }
  r.take(kMagic.size());
  std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  if (bytes.size() < 8) throw CorruptionError("model file is truncated");
  {
    Fnv1a h;
    h.update(std::string_view(bytes).substr(0, bytes.size() - 8));
    Reader tail(std::string_view(bytes).substr(bytes.size() - 8));
    if (tail.u64() != h.digest()) {
      // Either truncated or damaged; a short file fails the checksum too.
      throw CorruptionError("model checksum mismatch (truncated or corrupted file)");
    }
  }
  std::uint64_t fingerprint = r.u64();
  std::uint32_t min_frequency = r.u32();
  std::uint32_t n_labels = r.u32();
  if (n_labels == 0 || n_labels > r.remaining()) throw CorruptionError("bad label count");
  std::vector<std::string> labels;
  labels.reserve(n_labels);
  for (std::uint32_t i = 0; i < n_labels; ++i) labels.push_back(r.str());
  std::uint32_t n_features = r.u32();
  if (n_features > r.remaining()) throw CorruptionError("bad feature count");
  FeatureAlphabet alphabet;
  alphabet.set_min_frequency(min_frequency);
  for (std::uint32_t i = 0; i < n_features; ++i) {
    std::string name = r.str();
    if (alphabet.add(name) != i) throw CorruptionError("duplicate feature '" + name + "'");
  }
  CrfModel model(std::move(labels), std::move(alphabet), fingerprint);
  std::uint64_t n_weights = r.u64();
  if (n_weights != model.num_weights()) throw CorruptionError("weight count does not match shape");
  std::vector<double> weights(n_weights);
  for (auto& v : weights) {
    v = r.f64();
    if (!std::isfinite(v)) throw CorruptionError("non-finite weight");
  }
  if (r.remaining() != 8) throw CorruptionError("trailing bytes in model file");
  model.set_weights(std::move(weights));
  return model;
}

CrfModel load_model(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace seqlab
