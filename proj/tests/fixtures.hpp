#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xprobe/image.hpp"
#include "xprobe/rng.hpp"
#include "xprobe/synth.hpp"

namespace fixture {

inline xprobe::ImageBuffer noise_image(std::uint32_t w, std::uint32_t h, std::uint64_t seed) {
    xprobe::DetRng rng(seed);
    xprobe::ImageBuffer img(w, h);
    for (auto& v : img.bytes()) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return img;
}

inline xprobe::ImageBuffer constant(std::uint32_t w, std::uint32_t h, std::uint8_t v) {
    return xprobe::ImageBuffer(w, h, xprobe::Rgb{v, v, v});
}

inline xprobe::ImageBuffer photo(std::uint64_t seed, std::uint32_t size = 64) {
    return xprobe::synth_photo(seed, size, size, static_cast<int>(seed % xprobe::kSynthSceneKinds));
}

/// Twenty seeded images: photos and raw noise, square and not.
inline std::vector<xprobe::ImageBuffer> corpus20() {
    std::vector<xprobe::ImageBuffer> out;
    for (std::uint64_t i = 0; i < 10; ++i) out.push_back(photo(1000 + i, 48));
    for (std::uint64_t i = 0; i < 10; ++i) out.push_back(noise_image(i % 2 ? 40 : 32, 32, 2000 + i));
    return out;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("xprobe_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixture
