#pragma once

#include <cmath>
#include <vector>

#include "gsscene/image.hpp"

namespace gsscene::optim {

struct LossConfig {
    // weight of the L1 term; D-SSIM gets 1 - lambda
    double lambda = 0.8;
    int window = 11;
    double window_sigma = 1.5;
    double c1 = 0.01 * 0.01;
    double c2 = 0.03 * 0.03;

    void validate() const {
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("loss config: lambda must lie in [0, 1]");
        if (window < 1 || window % 2 == 0) throw InvalidArgument("loss config: window must be odd and positive");
        if (!(window_sigma > 0.0)) throw InvalidArgument("loss config: window sigma must be positive");
    }
};

struct SsimResult {
    double value = 0.0;
    // d value / d a, per pixel and channel
    ColorImage gradient;
};

namespace detail {

inline std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(size));
    const int half = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        k[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i - half) * (i - half) / (sigma * sigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// A single-channel plane, row-major.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> v;
    Plane(int w, int h) : width(w), height(h), v(static_cast<std::size_t>(w) * h, 0.0) {}
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
};

// Correlation with the separable window over positions where it fits entirely.
inline Plane filter_valid(const Plane& in, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    Plane rows(in.width - n + 1, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < rows.width; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * in.at(x + i, y);
            rows.at(x, y) = s;
        }
    }
    Plane out(rows.width, in.height - n + 1);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * rows.at(x, y + i);
            out.at(x, y) = s;
        }
    }
    return out;
}

// Adjoint of filter_valid.
inline Plane filter_adjoint(const Plane& in, const std::vector<double>& k, int width, int height) {
    const int n = static_cast<int>(k.size());
    Plane cols(in.width, height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            const double g = in.at(x, y);
            for (int i = 0; i < n; ++i) cols.at(x, y + i) += k[static_cast<std::size_t>(i)] * g;
        }
    }
    Plane out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < cols.width; ++x) {
            const double g = cols.at(x, y);
            for (int i = 0; i < n; ++i) out.at(x + i, y) += k[static_cast<std::size_t>(i)] * g;
        }
    }
    return out;
}

inline Plane channel(const ColorImage& img, int c) {
    Plane p(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) p.v[i] = img[i][c];
    return p;
}

inline Plane product(const Plane& a, const Plane& b) {
    Plane p(a.width, a.height);
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = a.v[i] * b.v[i];
    return p;
}

inline SsimResult ssim_impl(const ColorImage& a, const ColorImage& b, const LossConfig& cfg, bool want_gradient) {
    cfg.validate();
    require_same_shape(a, b, "ssim");
    if (a.width() < cfg.window || a.height() < cfg.window) {
        throw InvalidArgument("ssim: images smaller than the window");
    }
    const auto k = gaussian_kernel(cfg.window, cfg.window_sigma);
    const int vw = a.width() - cfg.window + 1;
    const int vh = a.height() - cfg.window + 1;
    const double norm = 1.0 / (3.0 * vw * vh);

    SsimResult out;
    if (want_gradient) out.gradient = ColorImage(a.width(), a.height(), Vec3::Zero());
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const Plane pa = channel(a, c);
        const Plane pb = channel(b, c);
        const Plane ma = filter_valid(pa, k);
        const Plane mb = filter_valid(pb, k);
        const Plane eaa = filter_valid(product(pa, pa), k);
        const Plane ebb = filter_valid(product(pb, pb), k);
        const Plane eab = filter_valid(product(pa, pb), k);
        Plane g_m(vw, vh), g_aa(vw, vh), g_ab(vw, vh);
        for (std::size_t i = 0; i < ma.v.size(); ++i) {
            const double mua = ma.v[i], mub = mb.v[i];
            const double var_a = eaa.v[i] - mua * mua;
            const double var_b = ebb.v[i] - mub * mub;
            const double cov = eab.v[i] - mua * mub;
            const double a1 = 2.0 * mua * mub + cfg.c1;
            const double a2 = 2.0 * cov + cfg.c2;
            const double b1 = mua * mua + mub * mub + cfg.c1;
            const double b2 = var_a + var_b + cfg.c2;
            const double s = (a1 * a2) / (b1 * b2);
            total += s;
            if (!want_gradient) continue;
            // derivatives with respect to the raw windowed moments of a
            g_m.v[i] = norm * ((2.0 * mub * a2 - 2.0 * mub * a1) / (b1 * b2) - s * (2.0 * mua / b1 - 2.0 * mua / b2));
            g_aa.v[i] = norm * (-s / b2);
            g_ab.v[i] = norm * (2.0 * a1 / (b1 * b2));
        }
        if (!want_gradient) continue;
        const Plane am = filter_adjoint(g_m, k, a.width(), a.height());
        const Plane aaa = filter_adjoint(g_aa, k, a.width(), a.height());
        const Plane aab = filter_adjoint(g_ab, k, a.width(), a.height());
        for (std::size_t i = 0; i < a.size(); ++i) {
            out.gradient[i][c] = am.v[i] + 2.0 * pa.v[i] * aaa.v[i] + pb.v[i] * aab.v[i];
        }
    }
    out.value = total * norm;
    return out;
}

}  // namespace detail

// Mean SSIM over all valid 11x11 Gaussian windows, averaged over channels.
inline double ssim(const ColorImage& a, const ColorImage& b, const LossConfig& cfg = {}) {
    return detail::ssim_impl(a, b, cfg, false).value;
}

inline SsimResult ssim_with_gradient(const ColorImage& a, const ColorImage& b, const LossConfig& cfg = {}) {
    return detail::ssim_impl(a, b, cfg, true);
}

}  // namespace gsscene::optim
