#pragma once

#include <cstdint>

#include "xprobe/image.hpp"

namespace xprobe {

inline constexpr int kSynthSceneKinds = 4;

/// Procedural photo-like image used for desk-scale fixtures and the bundled
/// distraction images. Scene kind (0 landscape, 1 still life, 2 pattern,
/// 3 clutter) doubles as the semantic label of the fixture corpus. Colors are
/// drawn from an earthy/foliage/sky hue prior.
[[nodiscard]] ImageBuffer synth_photo(std::uint64_t seed, std::uint32_t width, std::uint32_t height, int scene_kind);

}  // namespace xprobe
