#pragma once

#include <cmath>
#include <vector>

#include "gsscene/splat/rasterizer.hpp"

namespace gsscene::optim {

struct OptimizerConfig {
    double lr_center = 1.6e-4;
    // center rate decays log-linearly to lr_center * this factor at max_iterations
    double lr_center_final_factor = 0.01;
    double lr_log_scale = 0.005;
    double lr_rotation = 0.001;
    double lr_opacity = 0.05;
    double lr_color = 2.5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-15;
    int max_iterations = 1000;

    void validate() const {
        if (!(lr_center > 0 && lr_log_scale > 0 && lr_rotation > 0 && lr_opacity > 0 && lr_color > 0)) {
            throw InvalidArgument("optimizer config: learning rates must be positive");
        }
        if (!(lr_center_final_factor > 0)) throw InvalidArgument("optimizer config: decay factor must be positive");
        if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && epsilon > 0)) {
            throw InvalidArgument("optimizer config: invalid moment parameters");
        }
        if (max_iterations < 0) throw InvalidArgument("optimizer config: max_iterations must be non-negative");
    }

    double center_rate(int iteration) const {
        if (max_iterations <= 0) return lr_center;
        const double t = std::clamp(static_cast<double>(iteration) / max_iterations, 0.0, 1.0);
        return lr_center * std::pow(lr_center_final_factor, t);
    }
};

// Parameters of one primitive flattened as center(3) log_scale(3) rotation(4) opacity(1) color(3).
using ParamVector = Eigen::Matrix<double, 14, 1>;

inline ParamVector flatten_gradient(const splat::GaussianGradients& g, std::size_t i) {
    ParamVector p;
    p << g.center[i], g.log_scale[i], g.rotation[i], g.opacity_logit[i], g.color[i];
    return p;
}

// Adam over all primitives with one rate per parameter group. Moments follow the primitives
// through densification via `remap`.
class Adam {
public:
    explicit Adam(const OptimizerConfig& cfg, std::size_t count = 0)
        : cfg_(cfg), first_(count, ParamVector::Zero()), second_(count, ParamVector::Zero()) {}

    void step(splat::GaussianCloud& cloud, const splat::GaussianGradients& grads, int iteration) {
        ++steps_;
        const double bias1 = 1.0 - std::pow(cfg_.beta1, steps_);
        const double bias2 = 1.0 - std::pow(cfg_.beta2, steps_);
        ParamVector rates;
        rates << Vec3::Constant(cfg_.center_rate(iteration)), Vec3::Constant(cfg_.lr_log_scale),
            Vec4::Constant(cfg_.lr_rotation), cfg_.lr_opacity, Vec3::Constant(cfg_.lr_color);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (!grads.touched[i]) continue;
            const ParamVector g = flatten_gradient(grads, i);
            first_[i] = cfg_.beta1 * first_[i] + (1.0 - cfg_.beta1) * g;
            second_[i] = cfg_.beta2 * second_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
            const ParamVector m_hat = first_[i] / bias1;
            const ParamVector v_hat = second_[i] / bias2;
            const ParamVector delta =
                rates.cwiseProduct(m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + cfg_.epsilon).matrix()));
            auto& prim = cloud.primitives[i];
            prim.center -= delta.segment<3>(0);
            prim.log_scale -= delta.segment<3>(3);
            prim.rotation -= delta.segment<4>(6);
            prim.opacity_logit -= delta[10];
            prim.color -= delta.segment<3>(11);
            prim.rotation /= prim.rotation.norm();
            prim.color = prim.color.cwiseMax(0.0).cwiseMin(1.0);
        }
    }

    // origin[k] = index of the primitive whose state output k inherits, or -1 for a fresh one.
    void remap(const std::vector<int>& origin) {
        std::vector<ParamVector> m(origin.size(), ParamVector::Zero());
        std::vector<ParamVector> v(origin.size(), ParamVector::Zero());
        for (std::size_t k = 0; k < origin.size(); ++k) {
            if (origin[k] >= 0) {
                m[k] = first_[static_cast<std::size_t>(origin[k])];
                v[k] = second_[static_cast<std::size_t>(origin[k])];
            }
        }
        first_ = std::move(m);
        second_ = std::move(v);
    }

    std::size_t size() const noexcept { return first_.size(); }

private:
    OptimizerConfig cfg_;
    std::vector<ParamVector> first_;
    std::vector<ParamVector> second_;
    int steps_ = 0;
};

}  // namespace gsscene::optim
