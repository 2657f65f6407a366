#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "sob/synthesis.hpp"
#include "support/synthscene.hpp"

using namespace sob;

namespace {

DisparityMap constant_map(int w, int h, int16_t d) {
    DisparityMap m;
    m.width = w;
    m.height = h;
    m.dmax = std::max<int>(1, d);
    m.disparity.assign(static_cast<size_t>(w) * h, d);
    m.stability.assign(static_cast<size_t>(w) * h, 1);
    return m;
}

} // namespace

TEST_CASE("warp identity and constant shift") {
    const Image I1 = testing::random_byte_image(3, 20, 12, 1);
    const WarpResult id = warp(I1, constant_map(20, 12, 0));
    CHECK(id.image.data() == I1.data());
    for (uint8_t o : id.occlusion) CHECK(o == 0);

    const WarpResult shifted = warp(I1, constant_map(20, 12, 3));
    for (int y = 0; y < 12; ++y) {
        for (int x = 0; x < 3; ++x) {
            CHECK(shifted.occluded(x, y)); // nothing maps into the leftmost columns
            CHECK(shifted.image.at(x, y) == 0.0f);
        }
        for (int x = 3; x < 20; ++x) {
            CHECK(!shifted.occluded(x, y));
            CHECK(shifted.image.at(x, y) == I1.at(x - 3, y));
        }
    }
}

TEST_CASE("warp two-layer scene: band geometry and z-ordering") {
    // Background d=2 everywhere, foreground strip x in [10,20) at d=8.
    const int w = 40, h = 5;
    const Image I1 = testing::random_byte_image(5, w, h, 1);
    DisparityMap d = constant_map(w, h, 2);
    for (int y = 0; y < h; ++y)
        for (int x = 10; x < 20; ++x) d.disparity[static_cast<size_t>(y) * w + x] = 8;

    const WarpResult out = warp(I1, d);
    for (int y = 0; y < h; ++y) {
        // Disocclusion band: [10+2, 10+8) = [12,18), width d_fg - d_bg = 6.
        for (int x = 12; x < 18; ++x) CHECK(out.occluded(x, y));
        // Foreground content lands on [18,28) and wins collisions there.
        for (int x = 18; x < 28; ++x) {
            CHECK(!out.occluded(x, y));
            CHECK(out.image.at(x, y) == I1.at(x - 8, y));
        }
        // Background elsewhere.
        for (int x = 2; x < 12; ++x) {
            CHECK(!out.occluded(x, y));
            CHECK(out.image.at(x, y) == I1.at(x - 2, y));
        }
        for (int x = 28; x < w; ++x) CHECK(out.image.at(x, y) == I1.at(x - 2, y));
        CHECK(out.occluded(0, y));
        CHECK(out.occluded(1, y));
    }
}

TEST_CASE("warp then un-warp recovers the mutual visible region") {
    const Image I1 = testing::random_byte_image(7, 30, 10, 1);
    const WarpResult fwd = warp(I1, constant_map(30, 10, 4));
    const WarpResult back = warp(fwd.image, constant_map(30, 10, -4));
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x + 4 < 30; ++x) {
            CHECK(!back.occluded(x, y));
            CHECK(back.image.at(x, y) == I1.at(x, y));
        }
}

TEST_CASE("inpaint") {
    const testing::SynthScene scene = [] {
        testing::SceneSpec spec;
        spec.seed = 9;
        spec.width = 64;
        spec.height = 48;
        return testing::make_scene(spec);
    }();
    const SampleSet payload = encode_grid(scene.right, 4);

    // No occlusions: identity.
    WarpResult none;
    none.image = scene.right;
    none.occlusion.assign(static_cast<size_t>(64) * 48, 0);
    CHECK(inpaint(none, payload).data() == scene.right.data());

    // Textureless occlusions fill exactly.
    const Image flat(64, 48, 1, 150.0f);
    WarpResult holes;
    holes.image = flat;
    holes.occlusion.assign(static_cast<size_t>(64) * 48, 0);
    for (int x = 20; x < 30; ++x) holes.occlusion[static_cast<size_t>(10) * 64 + x] = 1;
    const Image filled = inpaint(holes, encode_grid(flat, 4));
    for (int x = 20; x < 30; ++x) CHECK(filled.at(x, 10) == doctest::Approx(150.0).epsilon(1e-5));

    // Non-occluded pixels never change.
    const Image filled2 = inpaint(holes, payload);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x)
            if (!holes.occluded(x, y)) CHECK(filled2.at(x, y) == flat.at(x, y));
}

TEST_CASE("inpaint of a fully occluded row equals the analytic field") {
    // Linear image: grid interpolation and the low-pass both reproduce it in
    // the interior, so the filled row must match the analytic values.
    const int w = 64, h = 48;
    Image img(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<float>(2 * x + y);
    const SampleSet payload = encode_grid(img, 4);

    WarpResult holes;
    holes.image = Image(w, h, 1, 0.0f);
    holes.occlusion.assign(static_cast<size_t>(w) * h, 0);
    for (int x = 0; x < w; ++x) holes.occlusion[static_cast<size_t>(24) * w + x] = 1;
    const Image filled = inpaint(holes, payload);
    const int margin = 8; // clear of border effects in the smoothing
    for (int x = margin; x < w - margin; ++x)
        CHECK(filled.at(x, 24) == doctest::Approx(2 * x + 24).epsilon(0.02));
}

TEST_CASE("enhance") {
    const Image I1 = testing::random_byte_image(11, 48, 36, 1);
    WarpResult w;
    w.image = I1;
    w.occlusion.assign(static_cast<size_t>(48) * 36, 0);
    for (int x = 0; x < 6; ++x) w.occlusion[static_cast<size_t>(5) * 48 + x] = 1;

    // Payload equal to the warp at the sample sites: nothing changes.
    const SampleSet exact = encode_grid(I1, 4);
    const FilterParams p{12.0, 20.0, 0};
    CHECK(enhance(w, exact, p).data() == I1.data());

    // Constant +10 bias at every sample shifts the non-occluded area by +10.
    SampleSet biased = exact;
    for (PointSample& s : biased.samples)
        s.value[0] = std::min(255.0f, s.value[0] + 10.0f);
    const Image out = enhance(w, biased, p);
    size_t shifted = 0, total = 0;
    for (int y = 0; y < 36; ++y)
        for (int x = 0; x < 48; ++x) {
            if (w.occluded(x, y)) {
                CHECK(out.at(x, y) == I1.at(x, y)); // occluded pixels untouched
                continue;
            }
            ++total;
            // Saturated samples (near 255) dilute the bias; count the rest.
            if (std::fabs(out.at(x, y) - std::min(255.0f, I1.at(x, y) + 10.0f)) < 1.5f)
                ++shifted;
        }
    CHECK(static_cast<double>(shifted) / static_cast<double>(total) > 0.8);

    CHECK_THROWS_AS(enhance(w, encode_downsample(I1, 4), p), std::invalid_argument);
}

TEST_CASE("enhance is exact at sample sites as sigma_s shrinks") {
    const Image truth = testing::random_byte_image(13, 40, 30, 1);
    const Image warped = testing::random_byte_image(14, 40, 30, 1);
    WarpResult w;
    w.image = warped;
    w.occlusion.assign(static_cast<size_t>(40) * 30, 0);
    const SampleSet payload = encode_grid(truth, 5);
    const Image out = enhance(w, payload, FilterParams{0.5, 20.0, 0});
    for (const PointSample& s : payload.samples)
        CHECK(std::fabs(out.at(s.x, s.y) - s.value[0]) <= 1.0);
}

TEST_CASE("psnr") {
    const Image a = testing::random_byte_image(15, 16, 12, 1);
    CHECK(std::isinf(psnr(a, a)));

    Image b = a;
    for (float& v : b.data()) v = v < 255.0f ? v + 1.0f : v - 1.0f;
    CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(255.0 * 255.0)).epsilon(1e-6));

    std::vector<uint8_t> mask(static_cast<size_t>(16) * 12, 0);
    CHECK_THROWS_AS(psnr(a, b, &mask), std::invalid_argument);
    mask[5] = 1;
    CHECK(psnr(a, b, &mask) == doctest::Approx(48.1308).epsilon(1e-3));

    const Image wrong(10, 12, 1);
    CHECK_THROWS_AS(psnr(a, wrong), std::invalid_argument);
}
