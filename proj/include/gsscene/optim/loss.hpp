#pragma once

#include "gsscene/optim/ssim.hpp"

namespace gsscene::optim {

struct PhotometricLoss {
    double value = 0.0;
    double l1 = 0.0;
    double ssim = 0.0;
    // dL / d render
    ColorImage gradient;
};

// lambda * L1 + (1 - lambda) * (1 - SSIM). The L1 subgradient at zero residual is 0.
inline PhotometricLoss photometric_loss(const ColorImage& render, const ColorImage& target, const LossConfig& cfg = {}) {
    cfg.validate();
    require_same_shape(render, target, "photometric_loss");
    if (render.empty()) throw InvalidArgument("photometric_loss: empty images");
    PhotometricLoss out;
    out.gradient = ColorImage(render.width(), render.height(), Vec3::Zero());
    const double n = 3.0 * static_cast<double>(render.size());
    double l1 = 0.0;
    for (std::size_t i = 0; i < render.size(); ++i) {
        const Vec3 r = render[i] - target[i];
        l1 += r.cwiseAbs().sum();
        for (int c = 0; c < 3; ++c) {
            out.gradient[i][c] = cfg.lambda * (r[c] > 0.0 ? 1.0 : (r[c] < 0.0 ? -1.0 : 0.0)) / n;
        }
    }
    out.l1 = l1 / n;
    out.value = cfg.lambda * out.l1;
    if (cfg.lambda < 1.0) {
        const SsimResult s = ssim_with_gradient(render, target, cfg);
        out.ssim = s.value;
        out.value += (1.0 - cfg.lambda) * (1.0 - s.value);
        for (std::size_t i = 0; i < render.size(); ++i) out.gradient[i] -= (1.0 - cfg.lambda) * s.gradient[i];
    } else if (render.width() >= cfg.window && render.height() >= cfg.window) {
        out.ssim = ssim(render, target, cfg);
    }
    return out;
}

// Loss restricted to supervised pixels: unsupervised target pixels are replaced by the
// render itself and their gradients are zeroed, so their target values cannot matter.
inline PhotometricLoss masked_photometric_loss(const ColorImage& render, const ColorImage& target,
                                               const PixelMask& supervision, const LossConfig& cfg = {}) {
    require_same_shape(render, supervision, "masked_photometric_loss");
    require_same_shape(render, target, "masked_photometric_loss");
    ColorImage effective = target;
    bool full = true;
    for (std::size_t i = 0; i < effective.size(); ++i) {
        if (!supervision[i]) {
            effective[i] = render[i];
            full = false;
        }
    }
    PhotometricLoss out = photometric_loss(render, effective, cfg);
    if (!full) {
        for (std::size_t i = 0; i < out.gradient.size(); ++i) {
            if (!supervision[i]) out.gradient[i] = Vec3::Zero();
        }
    }
    return out;
}

}  // namespace gsscene::optim
