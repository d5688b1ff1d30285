#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace dmcle {

// Counter-based generator: output t is splitmix64(key + t * golden), with
// key derived from (seed, stream). Any (seed, stream, counter) triple can be
// recomputed independently, so replications keyed by index never share
// state. Normals are drawn by Box-Muller.
class CounterRng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view kAlgorithm = "splitmix64-counter+box-muller";

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dmcle
