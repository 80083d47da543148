// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#ifndef LISTDEC_COMMON_HPP
#define LISTDEC_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace listdec {

enum class ErrorCode {
  NotPsd,
  NonFinite,
  Empty,
  BadRank,
  AllZeroScores,
  NoSparseSubinterval,
  DegenerateRange,
  TooFewPoints,
  DepthExceeded,
  BadCounts,
  UnknownAdversary,
  BadWeights,
  SubsetTooSmall,
  KernelNotNested,
  PremiseViolated,
  NotPositiveDefinite,
  MissingLabels,
  InvalidArgument,
  Io,
};

/// All library failures funnel through this type so callers (and the CLI exit
/// code mapping) can branch on the code instead of parsing strings.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

// ---------------------------------------------------------------------------
// Seed derivation and random streams.
//
// All randomness in the library flows through Rng, a hand-rolled
// splitmix64-seeded xoshiro256** stream. Identical seeds give identical
// streams on every platform we build on, which the determinism contracts
// (bit-identical datasets and traces) rely on.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Stable master-seed -> trial-seed derivation used by the CLI and the
/// parallel sweeps: trial_seed(s, i) = splitmix64(s ^ splitmix64(i + 1)).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x = splitmix64(x);
      s = x;
    }
    has_spare_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) %
           n;
  }

  /// Standard normal via Box-Muller (cached pair).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
  bool has_spare_;
  double spare_;
};

// ---------------------------------------------------------------------------
// Point sets. Points are stored flat row-major; the estimator only ever sees
// a PointSet, never labels (the label-stripping conversion in datagen is the
// type-level separation between truth and input).
// ---------------------------------------------------------------------------

class PointSet {
 public:
  PointSet() : dim_(0) {}
  PointSet(int dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
    require(dim_ > 0, ErrorCode::InvalidArgument, "PointSet: dim must be positive");
    require(data_.size() % static_cast<std::size_t>(dim_) == 0,
            ErrorCode::InvalidArgument, "PointSet: data size not a multiple of dim");
  }

  int dim() const { return dim_; }
  std::size_t size() const {
    return dim_ == 0 ? 0 : data_.size() / static_cast<std::size_t>(dim_);
  }
  bool empty() const { return data_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void push_back(std::span<const double> p) {
    require(static_cast<int>(p.size()) == dim_, ErrorCode::InvalidArgument,
            "PointSet: wrong point dimension");
    data_.insert(data_.end(), p.begin(), p.end());
  }

  PointSet select(const std::vector<std::size_t>& indices) const {
    PointSet out;
    out.dim_ = dim_;
    out.data_.reserve(indices.size() * static_cast<std::size_t>(dim_));
    for (std::size_t i : indices) {
      auto r = row(i);
      out.data_.insert(out.data_.end(), r.begin(), r.end());
    }
    return out;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  int dim_;
  std::vector<double> data_;
};

}  // namespace listdec

#endif  // LISTDEC_COMMON_HPP
