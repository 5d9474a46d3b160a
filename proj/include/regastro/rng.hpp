// Counter-based random number streams keyed by (run, iteration, role, sample
// index). Derivation is stateless, so identical keys give bit-identical draw
// sequences on any thread schedule and common-random-numbers evaluation needs
// no stream bookkeeping.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace regastro {

enum class StreamRole : std::uint8_t {
  Center = 0,
  Trial = 1,
  HessColumn = 2,
  Baseline = 3,
};

struct StreamKey {
  std::int64_t run_id = 0;
  std::int64_t iteration = 0;
  StreamRole role = StreamRole::Center;
  int hess_column = 0;  // 1..d, meaningful only for HessColumn
  std::int64_t sample_index = 0;

  bool operator==(const StreamKey&) const = default;
};

namespace detail {

// Threefry-2x64, 20 rounds.
struct Threefry2x64 {
  static constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ULL;
  static constexpr int kRotations[8] = {16, 42, 12, 31, 16, 32, 24, 21};

  static void block(std::uint64_t k0, std::uint64_t k1, std::uint64_t c0,
                    std::uint64_t c1, std::uint64_t out[2]) {
    const std::uint64_t ks[3] = {k0, k1, kParity ^ k0 ^ k1};
    std::uint64_t x0 = c0 + ks[0];
    std::uint64_t x1 = c1 + ks[1];
    for (int r = 0; r < 20; ++r) {
      x0 += x1;
      const int rot = kRotations[r % 8];
      x1 = (x1 << rot) | (x1 >> (64 - rot));
      x1 ^= x0;
      if (r % 4 == 3) {
        const int s = r / 4 + 1;
        x0 += ks[s % 3];
        x1 += ks[(s + 1) % 3] + static_cast<std::uint64_t>(s);
      }
    }
    out[0] = x0;
    out[1] = x1;
  }
};

// Wichura's PPND16 (AS 241): inverse standard normal CDF, ~1e-15 accurate.
inline double inverse_normal_cdf(double p) {
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
  } else {
    r -= 5.0;
    v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
  }
  return (q < 0.0) ? -v : v;
}

}  // namespace detail

// A substream derived from (root_seed, key). Draws are indexed by an internal
// counter, one counter block per draw, so a given (seed, key, draw index)
// always maps to the same value.
class Substream {
 public:
  Substream(std::uint64_t root_seed, const StreamKey& key)
      : k0_(root_seed),
        k1_(static_cast<std::uint64_t>(key.run_id) * 0x9E3779B97F4A7C15ULL +
            0x85EBCA77C2B2AE63ULL),
        c0_((static_cast<std::uint64_t>(key.role) << 56) |
            ((static_cast<std::uint64_t>(key.hess_column) & 0xFFFF) << 40) |
            (static_cast<std::uint64_t>(key.iteration) & 0xFFFFFFFFFFULL)),
        base_c1_(static_cast<std::uint64_t>(key.sample_index) << 24),
        draw_(0) {}

  // Uniform on (0, 1), endpoints excluded.
  double next_uniform() {
    std::uint64_t out[2];
    detail::Threefry2x64::block(k0_, k1_, c0_, base_c1_ + draw_++, out);
    // 53-bit mantissa, shifted into (0,1).
    return (static_cast<double>(out[0] >> 11) + 0.5) * 0x1.0p-53;
  }

  // One counter maps to one Gaussian draw via the inverse CDF; no rejection,
  // so CRN indices never desynchronize.
  double next_normal() { return detail::inverse_normal_cdf(next_uniform()); }

  double next_exponential(double mean) {
    return -mean * std::log(next_uniform());
  }

  std::int64_t draws_consumed() const { return static_cast<std::int64_t>(draw_); }

 private:
  std::uint64_t k0_, k1_, c0_, base_c1_;
  std::uint64_t draw_;
};

inline Substream derive_stream(std::uint64_t root_seed, const StreamKey& key) {
  return Substream(root_seed, key);
}

// CRN evaluation: the trial point re-consumes the exact draws used at the
// center for the same sample index. The noise-generating component of the
// trial key collapses to Center; the Trial role survives only in telemetry.
inline std::pair<StreamKey, StreamKey> crn_pair(std::int64_t run_id,
                                                std::int64_t iteration,
                                                std::int64_t sample_index) {
  StreamKey center{run_id, iteration, StreamRole::Center, 0, sample_index};
  return {center, center};
}

}  // namespace regastro
