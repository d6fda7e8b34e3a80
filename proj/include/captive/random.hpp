#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace captive {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Independent sub-streams of one path.
enum class Stream : std::uint32_t {
  brownian = 1,
  brownian2 = 2,
  jumps = 3,
  jumps2 = 4,
  theta = 5,
  theta2 = 6,
  thinning = 7,
};

/// Counter-based source for one path. Every draw is a pure function of
/// (master_seed, path_index, stream, index), so paths can be generated in any
/// order and on any worker.
class RandomSource {
 public:
  RandomSource(std::uint64_t master_seed, std::uint64_t path_index) noexcept
      : seed_(master_seed), path_(path_index) {}

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t path_index() const noexcept { return path_; }

  /// Two 64-bit words of block `index` in `stream`.
  std::array<std::uint64_t, 2> words(Stream stream, std::uint64_t index) const noexcept;

  /// U[0, 1) with 52 random bits, from the first word of the block.
  double uniform(Stream stream, std::uint64_t index) const noexcept;
  /// U(0, 1], the complement of `uniform`.
  double uniform_pos(Stream stream, std::uint64_t index) const noexcept;

  /// Fills `a` and `b` with the two words of consecutive blocks
  /// first, first + 1, ...
  void fill_words(Stream stream, std::uint64_t first, std::span<std::uint64_t> a,
                  std::span<std::uint64_t> b) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
};

/// U[0, 1) from the top 52 bits of a word, matching the Box-Muller kernels.
double uniform_from_bits(std::uint64_t bits) noexcept;

}  // namespace captive
