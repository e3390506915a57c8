#ifndef MFC_RNG_HPP
#define MFC_RNG_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mfc {

/**
 * Deterministic random stream keyed by (root_seed, stream_id).
 *
 * The generator is SplitMix64 over a per-stream state derived by scrambling
 * the key, so replication r can use stream_id r and obtain a stream that is
 * independent of every other replication and bit-stable across platforms.
 * std::random distributions are deliberately avoided: the standard does not
 * pin their output, and reruns must be byte-identical everywhere.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed, std::uint64_t stream_id = 0)
      : state_(scramble(root_seed ^ scramble(stream_id + 0x632be59bd9b4e019ULL))) {}

  /// Next raw 64-bit word.
  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return scramble_z(state_);
  }

  /// Uniform double in [0, 1) with 53 significant bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Uniform integer in [0, n). Requires n > 0.
  int next_below(int n) {
    if (n <= 0) throw std::invalid_argument("RngStream::next_below: n must be positive");
    const int k = static_cast<int>(next_unit() * n);
    return k >= n ? n - 1 : k;
  }

  /**
   * Index drawn from `weights` by inverse-CDF walk with one uniform draw.
   * Weights must be nonnegative; any total mass shortfall (from rounding)
   * resolves to the last index with positive weight.
   */
  int sample(const std::vector<double>& weights) {
    if (weights.empty()) throw std::invalid_argument("RngStream::sample: empty weights");
    const double u = next_unit();
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) last_positive = static_cast<int>(i);
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    if (last_positive < 0) throw std::invalid_argument("RngStream::sample: zero total mass");
    return last_positive;
  }

 private:
  static std::uint64_t scramble_z(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }
  static std::uint64_t scramble(std::uint64_t z) {
    return scramble_z(z + 0x9e3779b97f4a7c15ULL);
  }

  std::uint64_t state_;
};

}  // namespace mfc

#endif  // MFC_RNG_HPP
