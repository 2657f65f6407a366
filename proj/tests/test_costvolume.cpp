#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>
#include <set>

#include "sob/costvolume.hpp"
#include "support/synthscene.hpp"

using namespace sob;

TEST_CASE("dsi_full against the triple-loop oracle") {
    const Image I1 = testing::random_byte_image(5, 6, 4, 1);
    const Image I2 = testing::random_byte_image(6, 6, 4, 1);
    const CostVolume vol = dsi_full(I1, I2, 2);
    for (int d = 0; d <= 2; ++d)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 6; ++x) {
                if (x + d >= 6) {
                    CHECK(!vol.occupied(x, y, d));
                    CHECK(vol.cost(x, y, d) == 0.0f);
                } else {
                    CHECK(vol.occupied(x, y, d));
                    CHECK(vol.cost(x, y, d) ==
                          doctest::Approx(std::fabs(I1.at(x, y) - I2.at(x + d, y))));
                }
            }
}

TEST_CASE("dsi_full identical and shifted pairs") {
    const Image I1 = testing::random_byte_image(7, 12, 8, 1);
    const CostVolume same = dsi_full(I1, I1, 3);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x) {
            CHECK(same.occupied(x, y, 0));
            CHECK(same.cost(x, y, 0) == 0.0f);
        }

    // I2(x+3, y) == I1(x, y): zero cost on layer 3 in the overlap.
    Image I2(12, 8, 1, 0.0f);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x)
            if (x + 3 < 12) I2.at(x + 3, y) = I1.at(x, y);
    const CostVolume vol = dsi_full(I1, I2, 5);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x + 3 < 12; ++x) CHECK(vol.cost(x, y, 3) == 0.0f);

    const Image wrong = testing::random_byte_image(8, 10, 8, 1);
    CHECK_THROWS_AS(dsi_full(I1, wrong, 2), std::invalid_argument);
}

TEST_CASE("dsi_sparse occupancy semantics, exhaustive") {
    const Image I1 = testing::random_byte_image(9, 16, 16, 1);
    const Image I2 = testing::random_byte_image(10, 16, 16, 1);
    const SampleSet payload = encode_grid(I2, 3);
    const int dmax = 5;
    const double delta = 1e-6;
    const CostVolume vol = dsi_sparse(I1, payload, dmax, delta);

    std::set<std::tuple<int, int, int>> expect;
    for (const PointSample& s : payload.samples)
        for (int d = 0; d <= dmax; ++d)
            if (s.x - d >= 0) expect.emplace(s.x - d, s.y, d);

    size_t occupied = 0;
    for (int d = 0; d <= dmax; ++d)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                if (vol.occupied(x, y, d)) {
                    ++occupied;
                    CHECK(expect.count({x, y, d}) == 1);
                    CHECK(vol.cost(x, y, d) >= delta); // the delta floor
                } else {
                    CHECK(vol.cost(x, y, d) == 0.0f);
                }
            }
    CHECK(occupied == expect.size());
    CHECK(occupied == vol.occupied_count());
    CHECK(occupied <= payload.samples.size() * (dmax + 1));
}

TEST_CASE("dsi_sparse equals dsi_full on occupied entries") {
    const Image I1 = testing::random_byte_image(11, 24, 20, 1);
    const Image I2 = testing::random_byte_image(12, 24, 20, 1);
    const SampleSet payload = encode_grid(I2, 5);
    const CostVolume sparse = dsi_sparse(I1, payload, 4, 1e-6);
    const CostVolume full = dsi_full(I1, I2, 4);
    for (int d = 0; d <= 4; ++d)
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 24; ++x)
                if (sparse.occupied(x, y, d))
                    CHECK(std::fabs(sparse.cost(x, y, d) - full.cost(x, y, d)) <= 1e-6);
}

TEST_CASE("dsi_sparse edge cases") {
    const Image I1 = testing::random_byte_image(13, 10, 10, 1);

    SampleSet empty;
    empty.source_width = 10;
    empty.source_height = 10;
    empty.scheme = GridScheme{3};
    const CostVolume vol = dsi_sparse(I1, empty, 3, 1e-6);
    CHECK(vol.occupied_count() == 0);

    // A sample equal to I1 at its own pixel: delta, not zero.
    SampleSet one = empty;
    one.samples.push_back({4, 6, {I1.at(4, 6), 0, 0}});
    const CostVolume v1 = dsi_sparse(I1, one, 3, 1e-6);
    CHECK(v1.occupied(4, 6, 0));
    CHECK(v1.cost(4, 6, 0) == doctest::Approx(1e-6));

    const SampleSet down = encode_downsample(I1, 2);
    CHECK_THROWS_AS(dsi_sparse(I1, down, 3, 1e-6), std::invalid_argument);
}

TEST_CASE("blend") {
    const Image I1 = testing::random_byte_image(15, 8, 6, 1);
    const Image I2 = testing::random_byte_image(16, 8, 6, 1);
    const Image I3 = testing::random_byte_image(17, 8, 6, 1);
    const CostVolume a = dsi_full(I1, I2, 2);
    const CostVolume b = dsi_full(I1, I3, 2);

    const CostVolume w1 = blend(a, b, 1.0);
    for (int d = 0; d <= 2; ++d)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 8; ++x) CHECK(w1.cost(x, y, d) == a.cost(x, y, d));

    const CostVolume half_same = blend(a, a, 0.5);
    for (int d = 0; d <= 2; ++d)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 8; ++x)
                CHECK(half_same.cost(x, y, d) == doctest::Approx(a.cost(x, y, d)));

    const CostVolume mix = blend(a, b, 0.5);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x)
            if (mix.occupied(x, y, 1))
                CHECK(mix.cost(x, y, 1) ==
                      doctest::Approx(0.5f * a.cost(x, y, 1) + 0.5f * b.cost(x, y, 1)));

    // Hand-computed 2x2x1 elementwise mean.
    CostVolume ha(2, 2, 0, true), hb(2, 2, 0, true);
    const float va[4] = {1, 2, 3, 4}, vb[4] = {5, 6, 7, 8};
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            ha.set(x, y, 0, va[y * 2 + x], true);
            hb.set(x, y, 0, vb[y * 2 + x], true);
        }
    const CostVolume hm = blend(ha, hb, 0.5);
    CHECK(hm.cost(0, 0, 0) == doctest::Approx(3.0));
    CHECK(hm.cost(1, 0, 0) == doctest::Approx(4.0));
    CHECK(hm.cost(0, 1, 0) == doctest::Approx(5.0));
    CHECK(hm.cost(1, 1, 0) == doctest::Approx(6.0));

    // Entries occupied on one side only keep that side's cost.
    CostVolume pa(2, 1, 0, false), pb(2, 1, 0, false);
    pa.set(0, 0, 0, 9.0f, true);
    pb.set(1, 0, 0, 4.0f, true);
    const CostVolume pm = blend(pa, pb, 0.25);
    CHECK(pm.cost(0, 0, 0) == 9.0f);
    CHECK(pm.occupied(0, 0, 0));
    CHECK(pm.cost(1, 0, 0) == 4.0f);
    CHECK(pm.occupied(1, 0, 0));

    CostVolume small(3, 2, 0, true);
    CHECK_THROWS_AS(blend(a, small, 0.5), std::invalid_argument);
}

TEST_CASE("lower_bound_dsi") {
    const Image I1 = testing::random_byte_image(19, 20, 16, 1);
    const Image I2 = testing::random_byte_image(20, 20, 16, 1);
    const CostVolume full = dsi_full(I1, I2, 3);

    const CostVolume id = lower_bound_dsi(full, 1.0);
    for (int d = 0; d <= 3; ++d)
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 20; ++x) CHECK(id.cost(x, y, d) == full.cost(x, y, d));

    CostVolume flat(20, 16, 0, true);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 20; ++x) flat.set(x, y, 0, 7.5f, true);
    const CostVolume lb = lower_bound_dsi(flat, 0.3);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 20; ++x)
            CHECK(lb.cost(x, y, 0) == doctest::Approx(7.5).epsilon(1e-5));

    // Impulse layer: identical to composing the public resize ops.
    CostVolume impulse(20, 16, 0, true);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 20; ++x) impulse.set(x, y, 0, 0.0f, true);
    impulse.set(10, 8, 0, 100.0f, true);
    const double fraction = 0.04;
    const CostVolume spread = lower_bound_dsi(impulse, fraction);
    Image plane(20, 16, 1, 0.0f);
    plane.at(10, 8) = 100.0f;
    const int lw = static_cast<int>(std::ceil(20 * std::sqrt(fraction) - 1e-6));
    const int lh = static_cast<int>(std::ceil(16 * std::sqrt(fraction) - 1e-6));
    const Image expect = resize_to(resize_to(plane, lw, lh, ResizeMode::downsample_antialias),
                                   20, 16, ResizeMode::upsample_bilinear);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 20; ++x)
            CHECK(spread.cost(x, y, 0) == doctest::Approx(expect.at(x, y)).epsilon(1e-5));

    CHECK_THROWS_AS(lower_bound_dsi(full, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lower_bound_dsi(full, 1.5), std::invalid_argument);
}
