#include "captive/random.hpp"

#include <bit>

namespace captive {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

std::array<std::uint64_t, 2> RandomSource::words(Stream stream,
                                                 std::uint64_t index) const noexcept {
  // Counter: (index lo, index hi ^ stream << 24, path lo, path hi). Stream ids
  // occupy bits that block indices of realistic runs never reach.
  const auto s = static_cast<std::uint32_t>(stream);
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(index),
      static_cast<std::uint32_t>(index >> 32) ^ (s << 24),
      static_cast<std::uint32_t>(path_),
      static_cast<std::uint32_t>(path_ >> 32),
  };
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  const auto r = philox4x32(ctr, key);
  return {(static_cast<std::uint64_t>(r[1]) << 32) | r[0],
          (static_cast<std::uint64_t>(r[3]) << 32) | r[2]};
}

double uniform_from_bits(std::uint64_t bits) noexcept {
  return std::bit_cast<double>((bits >> 12) | 0x3FF0000000000000ull) - 1.0;
}

double RandomSource::uniform(Stream stream, std::uint64_t index) const noexcept {
  return uniform_from_bits(words(stream, index)[0]);
}

double RandomSource::uniform_pos(Stream stream, std::uint64_t index) const noexcept {
  return 1.0 - uniform(stream, index);
}

void RandomSource::fill_words(Stream stream, std::uint64_t first, std::span<std::uint64_t> a,
                              std::span<std::uint64_t> b) const noexcept {
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = words(stream, first + i);
    a[i] = w[0];
    b[i] = w[1];
  }
}

}  // namespace captive
