#pragma once

#include <array>
#include <cstdint>

namespace cltlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11): a keyed
/// bijection of a 128-bit counter, so any block of the stream can be produced
/// independently of every other block.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    ctr = round(ctr, key);
    for (int i = 1; i < 10; ++i) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }
};

/// The random stream of one Monte Carlo replicate: Philox keyed by the run
/// seed, with counter (block index, replicate index). Streams of different
/// replicates never share a block.
class ReplicateStream {
 public:
  ReplicateStream(std::uint64_t seed, std::uint64_t replicate)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replicate_(replicate) {}

  /// Next whole block of four words.
  Philox4x32::Counter next_block() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(replicate_),
                                  static_cast<std::uint32_t>(replicate_ >> 32)};
    ++block_;
    pos_ = 4;
    return Philox4x32::generate(ctr, key_);
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      buf_ = next_block();
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1) with 52 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return to_unit((hi << 32) | lo);
  }

  /// Midpoint of one of 2^52 equal cells, so the result lies strictly in (0, 1).
  static double to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
  }

 private:
  Philox4x32::Key key_;
  std::uint64_t replicate_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
};

}  // namespace cltlab
