#pragma once

#include <cmath>

#include "gsscene/image.hpp"

namespace gsscene::geometry {

struct AlignmentParams {
    double scale = 1.0;
    double shift = 0.0;
};

struct AlignmentResult {
    AlignmentParams params;
    DepthMap aligned;
};

// Global scale/shift least squares: minimizes sum over overlap of (s*D + b - D0)^2 and applies
// D' = s*D + b to every pixel. The normal equations are solved in a form centered on the first
// overlap sample, which is algebraically the usual closed form
//   s = (n*sum(D*D0) - sum(D)*sum(D0)) / (n*sum(D^2) - sum(D)^2),  b = (sum(D0) - s*sum(D)) / n
// but avoids the cancellation that form suffers for large depths.
inline AlignmentResult align_depth(const DepthMap& estimated, const DepthMap& reference, const PixelMask& overlap) {
    require_same_shape(estimated, reference, "align_depth");
    require_same_shape(estimated, overlap, "align_depth");

    std::size_t n = 0;
    double pivot_d = 0.0;
    double pivot_r = 0.0;
    for (std::size_t i = 0; i < overlap.size(); ++i) {
        if (overlap[i]) {
            pivot_d = estimated[i];
            pivot_r = reference[i];
            break;
        }
    }
    double sum_d = 0.0, sum_r = 0.0;
    for (std::size_t i = 0; i < overlap.size(); ++i) {
        if (!overlap[i]) continue;
        ++n;
        sum_d += estimated[i] - pivot_d;
        sum_r += reference[i] - pivot_r;
    }
    if (n < 2) throw DegenerateAlignment("align_depth: fewer than two overlap pixels");

    const double mean_d = sum_d / static_cast<double>(n);
    const double mean_r = sum_r / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < overlap.size(); ++i) {
        if (!overlap[i]) continue;
        const double dx = (estimated[i] - pivot_d) - mean_d;
        const double dy = (reference[i] - pivot_r) - mean_r;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0)) throw DegenerateAlignment("align_depth: estimated depth is constant over the overlap");

    AlignmentResult out;
    out.params.scale = sxy / sxx;
    out.params.shift = (pivot_r + mean_r) - out.params.scale * (pivot_d + mean_d);
    if (!std::isfinite(out.params.scale) || !std::isfinite(out.params.shift)) {
        throw DegenerateAlignment("align_depth: non-finite solution");
    }
    out.aligned = DepthMap(estimated.width(), estimated.height());
    for (std::size_t i = 0; i < estimated.size(); ++i) {
        out.aligned[i] = out.params.scale * estimated[i] + out.params.shift;
    }
    return out;
}

}  // namespace gsscene::geometry
