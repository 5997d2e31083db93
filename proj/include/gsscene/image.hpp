#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gsscene/error.hpp"

namespace gsscene {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Dense row-major 2D grid. Pixel (x, y) has its center at image coordinate (x, y).
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;
    Raster(int width, int height, const T& fill = T{}) : width_(width), height_(height) {
        if (width < 0 || height < 0) {
            throw InvalidArgument("raster dimensions must be non-negative");
        }
        values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    T& operator()(int x, int y) { return values_[index(x, y)]; }
    const T& operator()(int x, int y) const { return values_[index(x, y)]; }

    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    template <typename U>
    bool same_shape(const Raster<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    bool operator==(const Raster& other) const {
        return width_ == other.width_ && height_ == other.height_ && values_ == other.values_;
    }

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> values_;
};

// RGB in [0,1]^3.
using ColorImage = Raster<Vec3>;
// Camera-frame z-depth in meters.
using DepthMap = Raster<double>;
// 1 = pixel known/visible, 0 = unknown.
using PixelMask = Raster<std::uint8_t>;

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw InvalidArgument(std::string(what) + ": raster dimensions disagree (" +
                              std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                              std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
    }
}

inline std::size_t count_true(const PixelMask& mask) {
    std::size_t n = 0;
    for (auto v : mask) n += v ? 1 : 0;
    return n;
}

inline PixelMask invert(const PixelMask& mask) {
    PixelMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 0 : 1;
    return out;
}

}  // namespace gsscene
