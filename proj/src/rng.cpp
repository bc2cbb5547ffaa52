#include "decouple/rng.hpp"

namespace decouple {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  // seed_seq expansion is fully specified by the standard, so streams are
  // reproducible across platforms and standard libraries.
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream & 0xffffffffu),
                    static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  gen_.seed(seq);
}

std::uint64_t RngStream::next_u64() { return gen_(); }

double RngStream::next_u01() {
  // 53 random bits scaled to [0,1); avoids distribution-object portability gaps
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_range(double lo, double hi) {
  return lo + (hi - lo) * next_u01();
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  if (bound == 0) return 0;
  // Lemire's multiply-shift with rejection for exact uniformity
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    const std::uint64_t t = (0 - bound) % bound;
    while (lo < t) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace decouple
