#pragma once

#include <cstdint>
#include <random>

namespace decouple {

// Deterministic substream generator. Stream k of seed s is a pure function of
// (s, k), so worker count and scheduling never change what a stream produces.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double next_u01();                              // uniform on [0, 1)
  double next_range(double lo, double hi);        // uniform on [lo, hi)
  std::uint64_t next_below(std::uint64_t bound);  // uniform on {0, ..., bound-1}

private:
  std::mt19937_64 gen_;
};

}  // namespace decouple
