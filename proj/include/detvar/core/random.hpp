#pragma once

#include "detvar/core/types.hpp"

#include <cstdint>

namespace detvar {

//! Counter-based generator: SplitMix64 output function applied to
//! key + counter * golden-gamma. A (seed, stream) pair fixes the key, so the
//! k-th draw of any sample is reproducible without replaying earlier samples.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  //! Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  //! Standard normal by Box-Muller (one value per call, pairs not cached).
  double normal();

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);
  Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);
  //! Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
  Matrix orthogonal(Eigen::Index n);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace detvar
