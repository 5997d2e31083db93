#pragma once

#include <algorithm>
#include <vector>

#include "gsscene/image.hpp"

namespace gsscene::geometry {

// Grows the false (unknown) region by a square of Chebyshev radius `radius_px`:
// an output pixel is true iff every in-bounds pixel within the radius is true.
inline PixelMask dilate_mask(const PixelMask& mask, int radius_px) {
    if (radius_px < 0) throw InvalidArgument("dilate_mask: negative radius");
    if (radius_px == 0 || mask.empty()) return mask;
    const int w = mask.width();
    const int h = mask.height();

    // separable: horizontal pass then vertical pass over prefix counts of false pixels
    PixelMask rows(w, h, 0);
    std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);
    for (int y = 0; y < h; ++y) {
        prefix[0] = 0;
        for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + (mask(x, y) ? 0 : 1);
        for (int x = 0; x < w; ++x) {
            const int lo = std::max(0, x - radius_px);
            const int hi = std::min(w - 1, x + radius_px);
            rows(x, y) = (prefix[hi + 1] - prefix[lo]) == 0 ? 1 : 0;
        }
    }
    PixelMask out(w, h, 0);
    for (int x = 0; x < w; ++x) {
        prefix[0] = 0;
        for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + (rows(x, y) ? 0 : 1);
        for (int y = 0; y < h; ++y) {
            const int lo = std::max(0, y - radius_px);
            const int hi = std::min(h - 1, y + radius_px);
            out(x, y) = (prefix[hi + 1] - prefix[lo]) == 0 ? 1 : 0;
        }
    }
    return out;
}

}  // namespace gsscene::geometry
