#pragma once

#include <iosfwd>
#include <string>

#include "seqlab/crf.hpp"

namespace seqlab {

// Binary model layout, all integers little-endian:
//
//   9 bytes   magic "SEQLABCRF"
//   u32       format version (kModelFormatVersion)
//   u64       feature-template fingerprint
//   u32       feature min_frequency
//   u32 L     label count, then L strings
//   u32 F     feature count, then F strings (id order)
//   u64 W     weight count, W = F*L + L*L + L
//   W x f64   weights (IEEE-754 bit patterns), layout as in CrfModel
//   u64       FNV-1a 64 checksum of every preceding byte
//
// A string is a u32 byte length followed by the bytes.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const CrfModel& model, std::ostream& out);
std::string serialize_model(const CrfModel& model);

// Throws FormatError on bad magic or version, CorruptionError on truncation,
// checksum mismatch or inconsistent sizes.
CrfModel load_model(std::istream& in);
CrfModel deserialize_model(const std::string& bytes);

}  // namespace seqlab
