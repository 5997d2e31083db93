#include <gtest/gtest.h>

#include <cmath>

#include "gsscene/optim/train.hpp"
#include "support.hpp"

using namespace gsscene;
using namespace gsscene::optim;
using geometry::CameraPose;
using splat::logit;

namespace {

ColorImage constant_image(int w, int h, double v) { return ColorImage(w, h, Vec3::Constant(v)); }

ColorImage noise_image(Rng& rng, int w, int h) {
    ColorImage img(w, h);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    return img;
}

splat::GaussianPrimitive blob(const Vec3& c, double sigma, double opacity) {
    splat::GaussianPrimitive g;
    g.center = c;
    g.log_scale = Vec3::Constant(std::log(sigma));
    g.opacity_logit = logit(opacity);
    g.color = Vec3(0.3, 0.6, 0.9);
    return g;
}

// Reference scene, its render as target, and a perturbed starting cloud.
struct Fixture {
    splat::GaussianCloud truth;
    splat::GaussianCloud start;
    std::vector<TrainView> views;
};

Fixture make_fixture(std::uint64_t seed, int w = 48, int h = 40, int count = 40) {
    Rng rng(seed);
    Fixture f;
    f.truth = test_support::random_scene(rng, count, 1.2);
    f.start = f.truth;
    for (auto& g : f.start.primitives) {
        g.center += Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.1;
        g.color = Vec3::Constant(0.5);
        g.opacity_logit = 0.0;
    }
    const auto intr = geometry::intrinsics_from_fov(55, w, h);
    for (double yaw : {0.0, 8.0}) {
        TrainView v;
        v.pose = CameraPose::from_center(
            Eigen::AngleAxisd(yaw * std::acos(-1.0) / 180.0, Vec3::UnitY()).toRotationMatrix(), Vec3::Zero());
        v.intrinsics = intr;
        v.target = splat::rasterize(f.truth, v.pose, intr, {}).image;
        v.supervision = PixelMask(w, h, 1);
        f.views.push_back(v);
    }
    return f;
}

OptimizerConfig opt_with(int iterations) {
    OptimizerConfig o;
    o.max_iterations = iterations;
    return o;
}

}  // namespace

TEST(Ssim, IdenticalImagesGiveOne) {
    Rng rng(3);
    const auto a = noise_image(rng, 20, 17);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, ConstantZeroAgainstConstantOne) {
    const LossConfig cfg;
    const double expected = cfg.c1 / (1.0 + cfg.c1);
    EXPECT_NEAR(ssim(constant_image(16, 16, 0.0), constant_image(16, 16, 1.0)), expected, 1e-12);
    EXPECT_NEAR(expected, 9.999e-5, 1e-8);
}

TEST(Ssim, ContinuousAtIdentity) {
    Rng rng(4);
    const auto b = noise_image(rng, 24, 24);
    double prev = -1.0;
    for (double sigma : {1e-2, 1e-3, 1e-4, 1e-6}) {
        ColorImage a = b;
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += Vec3::Constant(rng.uniform(-sigma, sigma));
        const double s = ssim(a, b);
        EXPECT_GT(s, prev);
        prev = s;
    }
    EXPECT_NEAR(prev, 1.0, 1e-6);
}

TEST(Ssim, RejectsMismatchAndSmallImages) {
    EXPECT_THROW(ssim(constant_image(12, 12, 0), constant_image(12, 13, 0)), InvalidArgument);
    EXPECT_THROW(ssim(constant_image(10, 20, 0), constant_image(10, 20, 0)), InvalidArgument);
}

TEST(Ssim, GradientMatchesFiniteDifferences) {
    Rng rng(5);
    const auto a = noise_image(rng, 14, 13);
    const auto b = noise_image(rng, 14, 13);
    const auto res = ssim_with_gradient(a, b);
    EXPECT_DOUBLE_EQ(res.value, ssim(a, b));
    const double h = 1e-6;
    for (int trial = 0; trial < 40; ++trial) {
        const auto i = static_cast<std::size_t>(rng.below(a.size()));
        const int c = static_cast<int>(rng.below(3));
        ColorImage p = a, m = a;
        p[i][c] += h;
        m[i][c] -= h;
        const double fd = (ssim(p, b) - ssim(m, b)) / (2 * h);
        EXPECT_NEAR(res.gradient[i][c], fd, 1e-6 + 1e-4 * std::abs(fd));
    }
}

TEST(PhotometricLoss, Examples) {
    const auto t = constant_image(16, 16, 0.25);
    EXPECT_NEAR(photometric_loss(t, t).value, 0.0, 1e-12);

    LossConfig l1;
    l1.lambda = 1.0;
    EXPECT_DOUBLE_EQ(photometric_loss(constant_image(16, 16, 0.5), t, l1).value, 0.25);

    LossConfig dssim;
    dssim.lambda = 0.0;
    EXPECT_NEAR(photometric_loss(t, t, dssim).value, 0.0, 1e-12);

    EXPECT_THROW(photometric_loss(t, constant_image(16, 15, 0.25)), InvalidArgument);
}

TEST(PhotometricLoss, GradientMatchesFiniteDifferences) {
    Rng rng(6);
    const auto a = noise_image(rng, 13, 12);
    const auto b = noise_image(rng, 13, 12);
    const auto res = photometric_loss(a, b);
    const double h = 1e-7;
    for (int trial = 0; trial < 40; ++trial) {
        const auto i = static_cast<std::size_t>(rng.below(a.size()));
        const int c = static_cast<int>(rng.below(3));
        ColorImage p = a, m = a;
        p[i][c] += h;
        m[i][c] -= h;
        const double fd = (photometric_loss(p, b).value - photometric_loss(m, b).value) / (2 * h);
        EXPECT_NEAR(res.gradient[i][c], fd, 1e-6 + 1e-4 * std::abs(fd));
    }
}

TEST(PhotometricLoss, MaskedPixelsCarryNoGradient) {
    Rng rng(7);
    const auto render = noise_image(rng, 16, 16);
    const auto target = noise_image(rng, 16, 16);
    PixelMask sup(16, 16, 1);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 8; ++x) sup(x, y) = 0;
    auto other = target;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 8; ++x) other(x, y) = Vec3::Constant(0.9);
    const auto la = masked_photometric_loss(render, target, sup);
    const auto lb = masked_photometric_loss(render, other, sup);
    EXPECT_EQ(la.value, lb.value);
    for (std::size_t i = 0; i < render.size(); ++i) {
        EXPECT_EQ(la.gradient[i], lb.gradient[i]);
        if (!sup[i]) EXPECT_EQ(la.gradient[i], Vec3::Zero());
    }
}

TEST(Adam, FirstStepMovesEachParameterByItsRate) {
    splat::GaussianCloud cloud;
    cloud.push_back(blob(Vec3(0, 0, 4), 0.2, 0.5));
    splat::GaussianGradients g(1);
    g.touched[0] = 1;
    g.center[0] = Vec3(1, -2, 3);
    g.log_scale[0] = Vec3(-1, 1, 0.5);
    g.opacity_logit[0] = 4.0;
    g.color[0] = Vec3(-1, -1, 1);
    OptimizerConfig cfg = opt_with(10);
    Adam adam(cfg, 1);
    const auto before = cloud.primitives[0];
    adam.step(cloud, g, 1);
    const auto& after = cloud.primitives[0];
    const double rc = cfg.center_rate(1);
    EXPECT_NEAR(after.center.x(), before.center.x() - rc, 1e-12);
    EXPECT_NEAR(after.center.y(), before.center.y() + rc, 1e-12);
    EXPECT_NEAR(after.log_scale.x(), before.log_scale.x() + cfg.lr_log_scale, 1e-12);
    EXPECT_NEAR(after.opacity_logit, before.opacity_logit - cfg.lr_opacity, 1e-12);
    EXPECT_NEAR(after.color.z(), before.color.z() - cfg.lr_color, 1e-12);
    EXPECT_EQ(after.rotation, before.rotation);
}

TEST(Adam, UntouchedPrimitivesStayPut) {
    splat::GaussianCloud cloud;
    cloud.push_back(blob(Vec3(0, 0, 4), 0.2, 0.5));
    splat::GaussianGradients g(1);
    g.center[0] = Vec3(1, 1, 1);
    Adam adam(opt_with(10), 1);
    const auto before = cloud.primitives[0];
    adam.step(cloud, g, 1);
    EXPECT_EQ(cloud.primitives[0].center, before.center);
}

TEST(Adam, CenterRateDecaysToFinalFactor) {
    const auto cfg = opt_with(1000);
    EXPECT_DOUBLE_EQ(cfg.center_rate(0), 1.6e-4);
    EXPECT_NEAR(cfg.center_rate(1000), 1.6e-6, 1e-18);
    EXPECT_NEAR(cfg.center_rate(500), 1.6e-5, 1e-18);
}

TEST(PruneLowOpacity, Examples) {
    splat::GaussianCloud cloud;
    for (int i = 0; i < 4; ++i) cloud.push_back(blob(Vec3(i, 0, 4), 0.1, 0.5));
    EXPECT_EQ(prune_low_opacity(cloud, 0.005).cloud.size(), 4u);

    cloud.primitives[2].opacity_logit = logit(0.001);
    const auto pr = prune_low_opacity(cloud, 0.005);
    ASSERT_EQ(pr.cloud.size(), 3u);
    EXPECT_EQ(pr.origin, (std::vector<int>{0, 1, 3}));
    EXPECT_THROW(prune_low_opacity(cloud, 0.0), InvalidArgument);
    EXPECT_THROW(prune_low_opacity(cloud, 1.0), InvalidArgument);
}

TEST(PruneLowOpacity, FloorIsStrict) {
    // opacity equal to the floor is kept; the next representable logit below it is not
    double l = logit(0.005);
    splat::GaussianCloud cloud;
    cloud.push_back(blob(Vec3(0, 0, 4), 0.1, 0.5));
    cloud.primitives[0].opacity_logit = l;
    const double floor = cloud.primitives[0].opacity();
    EXPECT_NEAR(floor, 0.005, 1e-15);
    EXPECT_EQ(prune_low_opacity(cloud, floor).cloud.size(), 1u);
    while (cloud.primitives[0].opacity() >= floor) {
        l = std::nextafter(l, -HUGE_VAL);
        cloud.primitives[0].opacity_logit = l;
    }
    EXPECT_EQ(prune_low_opacity(cloud, floor).cloud.size(), 0u);
}

TEST(Densify, BelowThresholdLeavesCloudUnchanged) {
    splat::GaussianCloud cloud;
    for (int i = 0; i < 5; ++i) cloud.push_back(blob(Vec3(i, 0, 4), 0.01, 0.5));
    GradStats stats(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        stats.screen_grad[i] = 1e-4;
        stats.touches[i] = 1;
    }
    const auto r = densify_clone_split(cloud, stats, 100, {}, 10.0, 1);
    EXPECT_EQ(r.cloud.primitives, cloud.primitives);
    EXPECT_EQ(r.cloud.split_iteration, cloud.split_iteration);
    EXPECT_EQ(r.event.clones + r.event.splits, 0);
}

TEST(Densify, SmallTriggeredPrimitiveIsCloned) {
    splat::GaussianCloud cloud;
    cloud.push_back(blob(Vec3(0, 0, 4), 0.01, 0.5));
    cloud.push_back(blob(Vec3(1, 0, 4), 0.01, 0.5));
    GradStats stats(2);
    stats.screen_grad[0] = 3e-3;
    stats.touches[0] = 2;
    stats.center_grad[0] = Vec3(0, 0, -5);
    const double radius = 2.0;
    const auto r = densify_clone_split(cloud, stats, 300, {}, radius, 1);
    ASSERT_EQ(r.cloud.size(), 3u);
    EXPECT_EQ(r.event.clones, 1);
    EXPECT_EQ(r.cloud.split_iteration[2], 301);
    EXPECT_EQ(r.origin, (std::vector<int>{0, 1, -1}));
    const Vec3 child = r.cloud.primitives[2].center;
    EXPECT_LE((child - cloud.primitives[0].center).norm(), 0.01 * radius + 1e-12);
    // moved against the accumulated gradient
    EXPECT_GT(child.z(), 4.0);
}

TEST(Densify, LargeTriggeredPrimitiveIsSplit) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        splat::GaussianCloud cloud;
        auto g = blob(Vec3(0, 0, 4), 0.5, 0.7);
        g.log_scale = Vec3(std::log(0.5), std::log(0.1), std::log(0.2));
        cloud.push_back(g);
        GradStats stats(1);
        stats.screen_grad[0] = 1.0;
        stats.touches[0] = 1;
        const auto r = densify_clone_split(cloud, stats, 100, {}, 1.0, seed);
        ASSERT_EQ(r.cloud.size(), 2u);
        EXPECT_EQ(r.event.splits, 1);
        for (std::size_t k = 0; k < 2; ++k) {
            const auto& c = r.cloud.primitives[k];
            EXPECT_LE((c.center - g.center).norm(), 3.0 * 0.5);
            EXPECT_NEAR((c.log_scale - g.log_scale).maxCoeff(), -std::log(1.6), 1e-12);
            EXPECT_EQ(c.color, g.color);
            EXPECT_EQ(c.opacity_logit, g.opacity_logit);
            EXPECT_EQ(r.cloud.split_iteration[k], 101);
        }
    }
}

TEST(Densify, DeterministicGivenSeed) {
    splat::GaussianCloud cloud;
    cloud.push_back(blob(Vec3(0, 0, 4), 0.5, 0.7));
    GradStats stats(1);
    stats.screen_grad[0] = 1.0;
    stats.touches[0] = 1;
    const auto a = densify_clone_split(cloud, stats, 100, {}, 1.0, 9);
    const auto b = densify_clone_split(cloud, stats, 100, {}, 1.0, 9);
    const auto c = densify_clone_split(cloud, stats, 100, {}, 1.0, 10);
    EXPECT_EQ(a.cloud.primitives, b.cloud.primitives);
    EXPECT_NE(a.cloud.primitives, c.cloud.primitives);
}

TEST(Train, ZeroIterationsIsANoOp) {
    const auto f = make_fixture(11);
    const auto r = train(f.start, f.views, opt_with(0), {}, {}, 1);
    EXPECT_EQ(r.cloud.primitives, f.start.primitives);
    EXPECT_EQ(r.cloud.split_iteration, f.start.split_iteration);
    EXPECT_EQ(r.report.iterations_run, 0);
    EXPECT_TRUE(r.report.losses.empty());
    EXPECT_TRUE(r.report.densify_events.empty());
}

TEST(Train, RejectsEmptyInputs) {
    const auto f = make_fixture(12);
    EXPECT_THROW(train(f.start, {}, opt_with(5), {}, {}, 1), InvalidArgument);
    EXPECT_THROW(train(splat::GaussianCloud{}, f.views, opt_with(5), {}, {}, 1), InvalidArgument);
}

TEST(Train, LossDecreasesAndReportIsConsistent) {
    auto f = make_fixture(13);
    f.views.resize(1);
    DensifyConfig dens;
    dens.interval = 50;
    const auto r = train(f.start, f.views, opt_with(300), dens, {}, 1);
    ASSERT_EQ(r.report.losses.size(), 300u);
    EXPECT_EQ(r.report.primitive_counts.size(), 300u);
    EXPECT_EQ(r.report.iterations_run, 300);
    EXPECT_LT(r.report.losses.back(), r.report.losses.front());
    EXPECT_EQ(r.report.final_psnr.size(), 1u);
    EXPECT_EQ(r.report.primitive_counts.back(), r.cloud.size());
}

TEST(Train, QuaternionsStayNormalizedAndFieldsFinite) {
    const auto f = make_fixture(14);
    for (int cap : {1, 7, 60}) {
        const auto r = train(f.start, f.views, opt_with(cap), {}, {}, 2);
        EXPECT_LE(r.report.iterations_run, cap);
        EXPECT_NO_THROW(r.cloud.validate());
        for (const auto& g : r.cloud.primitives) EXPECT_NEAR(g.rotation.norm(), 1.0, 1e-6);
    }
}

TEST(Train, DeterministicGivenSeed) {
    const auto f = make_fixture(15);
    DensifyConfig dens;
    dens.interval = 20;
    const auto a = train(f.start, f.views, opt_with(80), dens, {}, 5);
    const auto b = train(f.start, f.views, opt_with(80), dens, {}, 5);
    EXPECT_EQ(a.cloud.primitives, b.cloud.primitives);
    EXPECT_EQ(a.cloud.split_iteration, b.cloud.split_iteration);
    EXPECT_EQ(a.report.losses, b.report.losses);
    EXPECT_EQ(a.report.primitive_counts, b.report.primitive_counts);
}

TEST(Train, MaskedOutTargetPixelsDoNotChangeTheTrajectory) {
    const auto f = make_fixture(16);
    auto va = f.views;
    auto vb = f.views;
    for (std::size_t k = 0; k < va.size(); ++k) {
        auto& sup = va[k].supervision;
        for (int y = 0; y < sup.height(); ++y)
            for (int x = 0; x < sup.width() / 3; ++x) sup(x, y) = 0;
        vb[k].supervision = sup;
        for (int y = 0; y < sup.height(); ++y)
            for (int x = 0; x < sup.width() / 3; ++x) vb[k].target(x, y) = Vec3(1, 0, 1);
    }
    DensifyConfig dens;
    dens.interval = 20;
    const auto a = train(f.start, va, opt_with(60), dens, {}, 3);
    const auto b = train(f.start, vb, opt_with(60), dens, {}, 3);
    EXPECT_EQ(a.cloud.primitives, b.cloud.primitives);
    EXPECT_EQ(a.report.losses, b.report.losses);
}

TEST(Train, DensificationIsLocal) {
    const auto f = make_fixture(17, 64, 48, 30);
    DensifyConfig dens;
    dens.interval = 25;
    const auto r = train(f.start, f.views, opt_with(200), dens, {}, 4);
    std::size_t created = 0;
    for (const auto& ev : r.report.densify_events) {
        EXPECT_LT(ev.iteration, dens.resolved_until(200));
        EXPECT_EQ(ev.iteration % dens.interval, 0);
        for (const auto& c : ev.created) {
            EXPECT_LE((c.child_center - c.parent_center).norm(), 3.0 * c.parent_max_scale);
            ++created;
        }
    }
    EXPECT_GT(created, 0u);
    for (std::size_t i = 0; i < r.cloud.size(); ++i) {
        const int t = r.cloud.split_iteration[i];
        if (t > 0) EXPECT_EQ((t - 1) % dens.interval, 0);
    }
}
