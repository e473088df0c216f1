#pragma once

#include <array>
#include <cstdint>

namespace sds {

using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

/// Philox4x64 with 10 rounds (Salmon et al., Random123). Stateless block function.
PhiloxCounter philox4x64(PhiloxCounter counter, PhiloxKey key) noexcept;

/// A counter-based random substream addressed by (seed, replica, step, domain).
///
/// Two substreams with equal coordinates produce identical sequences regardless
/// of which thread creates them or in what order, which is what makes replica
/// results independent of scheduling.  Within a substream, successive blocks
/// are obtained by bumping the first counter word.
class Substream {
 public:
  Substream(std::uint64_t seed, std::uint64_t replica, std::uint64_t step,
            std::uint64_t domain = 0) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;

 private:
  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter buffer_{};
  unsigned pos_ = 4;
};

/// Counter domains keep different uses of a step's randomness disjoint.
namespace stream_domain {
inline constexpr std::uint64_t maps = 0;
inline constexpr std::uint64_t initial_state = 1;
inline constexpr std::uint64_t auxiliary = 2;
}  // namespace stream_domain

}  // namespace sds
