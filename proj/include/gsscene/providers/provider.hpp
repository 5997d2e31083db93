#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "gsscene/geometry/camera.hpp"

namespace gsscene::providers {

// Per-call record threaded through by the pipeline. View-agnostic providers ignore it; the
// synthetic oracle needs the camera that produced the request.
struct ProviderContext {
    std::optional<geometry::CameraPose> pose;
    std::optional<geometry::CameraIntrinsics> intrinsics;
};

enum class Capability { text2image, outpaint, inpaint, depth, superres };

// The generative-model boundary. Public entry points validate every response against the
// contract; implementations override the do_* hooks.
class Provider {
public:
    virtual ~Provider() = default;

    ColorImage text2image(const std::string& prompt, int width, int height, std::uint64_t seed,
                          const ProviderContext& ctx = {}) {
        count(Capability::text2image);
        if (width < 1 || height < 1) throw InvalidArgument("text2image: dimensions must be positive");
        ColorImage out = do_text2image(prompt, width, height, seed, ctx);
        if (out.width() != width || out.height() != height) {
            throw ContractViolation("text2image: response has the wrong dimensions");
        }
        return out;
    }

    ColorImage outpaint(const std::string& prompt, const ColorImage& image, const PixelMask& known_mask,
                        std::uint64_t seed, const ProviderContext& ctx = {}) {
        count(Capability::outpaint);
        require_same_shape(image, known_mask, "outpaint");
        ColorImage out = do_outpaint(prompt, image, known_mask, seed, ctx);
        enforce_known_pixels(image, known_mask, out, "outpaint");
        return out;
    }

    ColorImage inpaint(const std::string& prompt, const ColorImage& image, const PixelMask& known_mask,
                       std::uint64_t seed, const ProviderContext& ctx = {}) {
        count(Capability::inpaint);
        require_same_shape(image, known_mask, "inpaint");
        ColorImage out = do_inpaint(prompt, image, known_mask, seed, ctx);
        enforce_known_pixels(image, known_mask, out, "inpaint");
        return out;
    }

    DepthMap estimate_depth(const ColorImage& image, const ProviderContext& ctx = {}) {
        count(Capability::depth);
        DepthMap out = do_estimate_depth(image, ctx);
        if (!out.same_shape(image)) throw ContractViolation("estimate_depth: response has the wrong dimensions");
        for (double d : out) {
            if (!std::isfinite(d) || !(d > 0.0)) throw ContractViolation("estimate_depth: non-positive depth");
        }
        return out;
    }

    ColorImage superresolve(const ColorImage& image, int scale, const ProviderContext& ctx = {}) {
        count(Capability::superres);
        if (scale < 1) throw InvalidArgument("superresolve: scale must be at least 1");
        ColorImage out = do_superresolve(image, scale, ctx);
        if (out.width() != image.width() * scale || out.height() != image.height() * scale) {
            throw ContractViolation("superresolve: response has the wrong dimensions");
        }
        return out;
    }

    std::size_t calls(Capability c) const { return calls_[static_cast<std::size_t>(c)]; }
    std::size_t total_calls() const {
        std::size_t n = 0;
        for (auto c : calls_) n += c;
        return n;
    }

protected:
    virtual ColorImage do_text2image(const std::string& prompt, int width, int height, std::uint64_t seed,
                                     const ProviderContext& ctx) = 0;
    virtual ColorImage do_outpaint(const std::string& prompt, const ColorImage& image, const PixelMask& known_mask,
                                   std::uint64_t seed, const ProviderContext& ctx) = 0;
    virtual ColorImage do_inpaint(const std::string& prompt, const ColorImage& image, const PixelMask& known_mask,
                                  std::uint64_t seed, const ProviderContext& ctx) = 0;
    virtual DepthMap do_estimate_depth(const ColorImage& image, const ProviderContext& ctx) = 0;
    virtual ColorImage do_superresolve(const ColorImage& image, int scale, const ProviderContext& ctx) = 0;

private:
    static void enforce_known_pixels(const ColorImage& in, const PixelMask& known, const ColorImage& out,
                                     const char* what) {
        if (!out.same_shape(in)) throw ContractViolation(std::string(what) + ": response has the wrong dimensions");
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (known[i] && !(out[i] == in[i])) {
                throw ContractViolation(std::string(what) + ": known pixel " + std::to_string(i) + " was modified");
            }
        }
    }

    void count(Capability c) { ++calls_[static_cast<std::size_t>(c)]; }

    std::array<std::size_t, 5> calls_{};
};

}  // namespace gsscene::providers
