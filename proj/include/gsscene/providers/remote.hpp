#pragma once

// Eigen must be parsed before httplib: <resolv.h> defines a `_res` macro.
#include "gsscene/io/codec.hpp"
#include "gsscene/providers/provider.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <string>

namespace gsscene::providers {

struct RemoteConfig {
    std::string base_url = "http://127.0.0.1:8000";
    std::chrono::milliseconds timeout{120000};
    // extra attempts after a transport failure
    int retries = 2;
};

// Client for the model gateway's JSON-over-HTTP protocol. Images travel as base64 PNG
// (RGB8, masks GRAY8 with 255 = known), depth as base64 little-endian float32.
class RemoteProvider : public Provider {
public:
    explicit RemoteProvider(RemoteConfig cfg) : cfg_(std::move(cfg)), client_(cfg_.base_url) {
        if (cfg_.retries < 0) throw InvalidArgument("remote provider: retries must be non-negative");
        if (!client_.is_valid()) throw InvalidArgument("remote provider: invalid base url " + cfg_.base_url);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
        client_.set_connection_timeout(secs.count(), usecs.count());
        client_.set_read_timeout(secs.count(), usecs.count());
        client_.set_write_timeout(secs.count(), usecs.count());
    }

    // HTTP attempts made so far, including failed ones.
    std::size_t attempts() const noexcept { return attempts_; }

protected:
    ColorImage do_text2image(const std::string& prompt, int width, int height, std::uint64_t seed,
                             const ProviderContext&) override {
        const nlohmann::json req = {{"prompt", prompt}, {"width", width}, {"height", height}, {"seed", seed}};
        return decode_image(post("/v1/text2image", req), width, height);
    }

    ColorImage do_outpaint(const std::string& prompt, const ColorImage& image, const PixelMask& known,
                           std::uint64_t seed, const ProviderContext&) override {
        return fill("/v1/outpaint", prompt, image, known, seed);
    }

    ColorImage do_inpaint(const std::string& prompt, const ColorImage& image, const PixelMask& known,
                          std::uint64_t seed, const ProviderContext&) override {
        return fill("/v1/inpaint", prompt, image, known, seed);
    }

    DepthMap do_estimate_depth(const ColorImage& image, const ProviderContext&) override {
        const nlohmann::json req = {{"image", io::base64_encode(io::encode_png_rgb(image))}};
        const auto res = post("/v1/depth", req);
        try {
            const int w = res.at("width").get<int>();
            const int h = res.at("height").get<int>();
            if (w != image.width() || h != image.height()) throw ProtocolError("depth response has the wrong dimensions");
            DepthMap depth = io::decode_f32(io::base64_decode(res.at("depth").get<std::string>()), w, h);
            for (double d : depth) {
                if (!std::isfinite(d) || !(d > 0.0)) throw ProtocolError("depth response has non-positive values");
            }
            return depth;
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(std::string("depth response schema: ") + e.what());
        } catch (const FormatError& e) {
            throw ProtocolError(std::string("depth response payload: ") + e.what());
        }
    }

    ColorImage do_superresolve(const ColorImage& image, int scale, const ProviderContext&) override {
        const nlohmann::json req = {{"image", io::base64_encode(io::encode_png_rgb(image))}, {"scale", scale}};
        return decode_image(post("/v1/superres", req), image.width() * scale, image.height() * scale);
    }

private:
    nlohmann::json post(const std::string& path, const nlohmann::json& body) {
        const std::string payload = body.dump();
        for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
            ++attempts_;
            auto res = client_.Post(path, payload, "application/json");
            if (!res) continue;
            if (res->status != 200) {
                std::string message = "HTTP " + std::to_string(res->status);
                const auto err = nlohmann::json::parse(res->body, nullptr, false);
                if (err.is_object() && err.contains("error") && err["error"].is_string()) {
                    message += ": " + err["error"].get<std::string>();
                }
                throw ProtocolError(path + ": " + message);
            }
            auto parsed = nlohmann::json::parse(res->body, nullptr, false);
            if (parsed.is_discarded() || !parsed.is_object()) throw ProtocolError(path + ": malformed JSON response");
            return parsed;
        }
        throw TransportError(path + ": no response from " + cfg_.base_url + " after " +
                             std::to_string(cfg_.retries + 1) + " attempts");
    }

    static io::detail::DecodedPng decode_rgb8(const nlohmann::json& res, int width, int height) {
        try {
            auto png = io::decode_png_rgb8(io::base64_decode(res.at("image").get<std::string>()));
            if (png.width != width || png.height != height) throw ProtocolError("image response has the wrong dimensions");
            return png;
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(std::string("image response schema: ") + e.what());
        } catch (const FormatError& e) {
            throw ProtocolError(std::string("image response payload: ") + e.what());
        }
    }

    static ColorImage decode_image(const nlohmann::json& res, int width, int height) {
        const auto png = decode_rgb8(res, width, height);
        return io::dequantize_rgb(png.pixels, png.width, png.height);
    }

    // Known pixels must come back byte-identical to what was sent; the returned image keeps the
    // caller's exact known values and takes only unknown pixels from the response.
    ColorImage fill(const std::string& path, const std::string& prompt, const ColorImage& image,
                    const PixelMask& known, std::uint64_t seed) {
        const io::Bytes sent = io::quantize_rgb(image);
        const nlohmann::json req = {{"prompt", prompt},
                                    {"image", io::base64_encode(io::encode_png_rgb(image))},
                                    {"mask", io::base64_encode(io::encode_png_mask(known))},
                                    {"seed", seed}};
        const auto png = decode_rgb8(post(path, req), image.width(), image.height());
        ColorImage out = image;
        for (std::size_t i = 0; i < image.size(); ++i) {
            const bool same = png.pixels[3 * i] == sent[3 * i] && png.pixels[3 * i + 1] == sent[3 * i + 1] &&
                              png.pixels[3 * i + 2] == sent[3 * i + 2];
            if (known[i]) {
                if (!same) throw ContractViolation(path + ": gateway modified known pixel " + std::to_string(i));
            } else {
                out[i] = Vec3(png.pixels[3 * i], png.pixels[3 * i + 1], png.pixels[3 * i + 2]) / 255.0;
            }
        }
        return out;
    }

    RemoteConfig cfg_;
    httplib::Client client_;
    std::size_t attempts_ = 0;
};

}  // namespace gsscene::providers
