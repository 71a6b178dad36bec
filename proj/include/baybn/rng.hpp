#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace baybn {

// Seedable generator with distribution transforms written out here, since the
// std:: distributions are implementation-defined and would make samples
// differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  bool coin() { return (engine_() >> 63) != 0; }
  // Standard normal by the Marsaglia polar method.
  double normal();
  // Student t with integer degrees of freedom: Z / sqrt(chi2_df / df).
  double student_t(int df);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Combines a master seed with stream identifiers into an independent seed
// (splitmix64 finalizer over each word).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream);

}  // namespace baybn
