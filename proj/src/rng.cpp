#include "almostcomm/rng.hpp"

#include <cmath>

namespace almostcomm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngSeed RngSeed::child(std::uint64_t k) const {
  return RngSeed{seed, splitmix64(stream_id ^ splitmix64(k + 0x632be59bd9b4e019ULL))};
}

Rng::Rng(RngSeed s) {
  const std::uint64_t a = splitmix64(s.seed);
  const std::uint64_t b = splitmix64(s.stream_id ^ 0xd1b54a32d192ed03ULL);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

std::complex<double> Rng::complex_normal() {
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

}  // namespace almostcomm
