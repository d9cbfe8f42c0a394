#pragma once

// Binary snapshot of a StreamingFit: plan, kernel, standardization, the full
// observation history with its bandwidths, the weight ledger and the stored
// moment rows. Reloading reproduces every later update bit for bit.
//
// Layout (all integers little-endian u64 unless noted, reals IEEE-754
// binary64 little-endian):
//   "RSAVECKP"  u32 version
//   plan: gamma_scale gamma_exponent c1 c2 epsilon  u8 strict  u8 has_h  h
//   kernel: u8 id  constant
//   d  N  whitening mean[d]  inv_sqrt packed[d(d+1)/2]
//   n  ledger scale  ledger pi  raw weights[n]
//   row_scale  ys[n]  hs[n]  features[n*w]  moments[n*w]
//   u64 FNV-1a hash of everything above

#include <cstdint>
#include <iosfwd>
#include <string>

#include "resave/save_estimator.hpp"

namespace resave {

inline constexpr std::uint32_t checkpoint_version = 1;

void write_checkpoint(std::ostream& out, const StreamingFit& fit);
StreamingFit read_checkpoint(std::istream& in);

/// File wrappers; failures raise io-error, malformed content schema-error.
void save_checkpoint(const std::string& path, const StreamingFit& fit);
StreamingFit load_checkpoint(const std::string& path);

}  // namespace resave
