#pragma once

#include <array>
#include <cstdint>

namespace skyrmion {

struct Rgb {
    std::uint8_t r, g, b;
};

/// 256-entry viridis table, dark to bright.
extern const std::array<Rgb, 256> kViridis;

/// Nearest table entry for t in [0, 1]; values outside are clamped.
Rgb colormap(double t);

}  // namespace skyrmion
