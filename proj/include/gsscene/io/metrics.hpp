#pragma once

#include <cmath>

#include "gsscene/image.hpp"

namespace gsscene::io {

inline constexpr double kPsnrCap = 100.0;

inline double mean_squared_error(const ColorImage& a, const ColorImage& b) {
    require_same_shape(a, b, "mse");
    if (a.empty()) throw InvalidArgument("mse: empty images");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).squaredNorm();
    return sum / (3.0 * static_cast<double>(a.size()));
}

// 10 log10(1 / MSE) over the [0,1] range with channel-pooled MSE; exact matches return the cap.
inline double psnr(const ColorImage& a, const ColorImage& b) {
    const double mse = mean_squared_error(a, b);
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

}  // namespace gsscene::io
