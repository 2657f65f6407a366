#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "sob/costvolume.hpp"
#include "sob/matcher.hpp"
#include "support/oracles.hpp"
#include "support/synthscene.hpp"

using namespace sob;

namespace {

CostVolume random_volume(uint32_t seed, int w, int h, int dmax, bool full_occupancy) {
    std::mt19937 rng(seed);
    CostVolume vol(w, h, dmax, true);
    for (int d = 0; d <= dmax; ++d)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const bool occ = full_occupancy || rng() % 4 != 0;
                vol.set(x, y, d, static_cast<float>(rng() % 256), occ);
            }
    return vol;
}

} // namespace

TEST_CASE("aggregate keeps constant layers constant") {
    const Image guide(9, 7, 1, 128.0f);
    CostVolume vol(9, 7, 0, true);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x) vol.set(x, y, 0, 5.5f, true);
    const CostVolume out = aggregate(vol, guide, 25.5);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x)
            CHECK(out.cost(x, y, 0) == doctest::Approx(5.5).epsilon(1e-6));
}

TEST_CASE("aggregate matches the hand recursion on a 1x3 path") {
    Image guide(3, 1, 1);
    guide.at(0, 0) = 10.0f;
    guide.at(1, 0) = 30.0f; // edge weights 20 and 70
    guide.at(2, 0) = 100.0f;
    CostVolume vol(3, 1, 0, true);
    vol.set(0, 0, 0, 6.0f, true);
    vol.set(1, 0, 0, 12.0f, true);
    vol.set(2, 0, 0, 30.0f, true);

    const double sigma = 25.5;
    const double s01 = std::exp(-20.0 / sigma);
    const double s12 = std::exp(-70.0 / sigma);
    const double c0 = 6.0, c1 = 12.0, c2 = 30.0;
    const double e0 = (c0 + s01 * c1 + s01 * s12 * c2) / (1 + s01 + s01 * s12);
    const double e1 = (s01 * c0 + c1 + s12 * c2) / (s01 + 1 + s12);
    const double e2 = (s01 * s12 * c0 + s12 * c1 + c2) / (s01 * s12 + s12 + 1);

    const CostVolume out = aggregate(vol, guide, sigma);
    CHECK(out.cost(0, 0, 0) == doctest::Approx(e0).epsilon(1e-6));
    CHECK(out.cost(1, 0, 0) == doctest::Approx(e1).epsilon(1e-6));
    CHECK(out.cost(2, 0, 0) == doctest::Approx(e2).epsilon(1e-6));
}

TEST_CASE("two-pass DP equals all-pairs tree-distance summation") {
    for (uint32_t seed : {31u, 32u, 33u}) {
        const int w = 4 + static_cast<int>(seed % 9); // up to 12
        const int h = 4 + static_cast<int>((seed / 3) % 9);
        const Image guide = testing::random_byte_image(seed, w, h, 1);
        const CostVolume vol = random_volume(seed + 100, w, h, 2, seed % 2 == 0);
        const double sigma = 25.5;
        const CostVolume got = aggregate(vol, guide, sigma);
        const MstEdges tree = build_guide_mst(guide);

        for (int d = 0; d <= 2; ++d) {
            std::vector<float> cost(vol.layer(d), vol.layer(d) + vol.plane_size());
            std::vector<uint8_t> occ(vol.occupancy_layer(d),
                                     vol.occupancy_layer(d) + vol.plane_size());
            const std::vector<double> expect =
                testing::brute_tree_aggregate(tree, cost, occ, sigma);
            for (size_t i = 0; i < expect.size(); ++i) {
                const double rel = std::fabs(got.layer(d)[i] - expect[i]) /
                                   std::max(1.0, std::fabs(expect[i]));
                CHECK(rel < 1e-6);
            }
        }
    }
}

TEST_CASE("MST weights match an independent Prim construction") {
    for (uint32_t seed : {41u, 42u}) {
        const Image guide = testing::random_byte_image(seed, 9, 8, 1);
        const MstEdges tree = build_guide_mst(guide);
        std::vector<int> weights;
        for (size_t i = 0; i < tree.parent.size(); ++i)
            if (tree.parent[i] >= 0) weights.push_back(tree.weight[i]);
        std::sort(weights.begin(), weights.end());
        CHECK(weights == testing::prim_mst_weights(guide));
    }
}

TEST_CASE("hard guide edges block aggregation support") {
    Image guide(12, 6, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 12; ++x) guide.at(x, y) = x < 6 ? 20.0f : 220.0f;
    // Unit mass in the left region only.
    CostVolume vol(12, 6, 0, true);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 12; ++x) vol.set(x, y, 0, x < 6 ? 100.0f : 0.0f, true);
    const double sigma = 25.5;
    const CostVolume out = aggregate(vol, guide, sigma);
    // Within-region support is ~1, cross-region support is < e^{-200/sigma}
    // per crossing edge; the right side picks up almost nothing.
    const double crossing = std::exp(-200.0 / sigma);
    CHECK(out.cost(11, 3, 0) < 100.0 * crossing * 12.0);
    CHECK(out.cost(2, 3, 0) > 90.0);
}

TEST_CASE("aggregate with tiny sigma approaches the identity") {
    // All-distinct neighbor intensities so every edge weight is >= 1.
    Image guide(6, 5, 1);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 6; ++x) guide.at(x, y) = static_cast<float>((x * 37 + y * 91) % 256);
    const CostVolume vol = random_volume(51, 6, 5, 1, true);
    const CostVolume out = aggregate(vol, guide, 1e-3);
    for (int d = 0; d <= 1; ++d)
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 6; ++x) {
                const double rel = std::fabs(out.cost(x, y, d) - vol.cost(x, y, d)) /
                                   std::max(1.0f, vol.cost(x, y, d));
                CHECK(rel < 0.01);
            }
}

TEST_CASE("aggregate rejects sparse volumes") {
    const Image guide = testing::random_byte_image(61, 6, 6, 1);
    CostVolume sparse(6, 6, 1, false);
    CHECK_THROWS_AS(aggregate(sparse, guide, 25.5), std::invalid_argument);
}

TEST_CASE("select_disparity") {
    CostVolume vol(5, 4, 3, true);
    for (int d = 0; d <= 3; ++d)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 5; ++x) vol.set(x, y, d, d == 2 ? 1.0f : 5.0f, true);
    const DisparityMap all2 = select_disparity(vol);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) {
            CHECK(all2.at(x, y) == 2);
            CHECK(all2.stable(x, y));
        }

    // Equal costs at d=1 and d=3: the tie breaks to 1.
    CostVolume tie(3, 2, 3, true);
    for (int d = 0; d <= 3; ++d)
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 3; ++x)
                tie.set(x, y, d, (d == 1 || d == 3) ? 2.0f : 9.0f, true);
    const DisparityMap picked = select_disparity(tie);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) CHECK(picked.at(x, y) == 1);

    // Random volume vs the exhaustive argmin oracle.
    const CostVolume rnd = random_volume(71, 4, 4, 2, true);
    const DisparityMap got = select_disparity(rnd);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            int best_d = 0;
            for (int d = 1; d <= 2; ++d)
                if (rnd.cost(x, y, d) < rnd.cost(x, y, best_d)) best_d = d;
            CHECK(got.at(x, y) == best_d);
        }
}

TEST_CASE("select_disparity is invariant to monotone cost rescaling") {
    const CostVolume vol = random_volume(81, 7, 6, 3, true);
    CostVolume scaled(7, 6, 3, true);
    for (int d = 0; d <= 3; ++d)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 7; ++x)
                scaled.set(x, y, d, 2.0f * vol.cost(x, y, d) + 5.0f, true);
    const DisparityMap a = select_disparity(vol);
    const DisparityMap b = select_disparity(scaled);
    CHECK(a.disparity == b.disparity);
}

TEST_CASE("lr_consistency") {
    const int w = 40, h = 6;
    // Fronto-parallel scene at d=3: right map derived exactly.
    DisparityMap left;
    left.width = w;
    left.height = h;
    left.dmax = 8;
    left.disparity.assign(static_cast<size_t>(w) * h, 3);
    left.stability.assign(static_cast<size_t>(w) * h, 1);
    DisparityMap right = left;
    const DisparityMap checked = lr_consistency(left, right, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x + 3 < w; ++x) CHECK(checked.stable(x, y));

    // A single inconsistent pixel between stable neighbors of disparity 7.
    DisparityMap l2 = left, r2 = left;
    std::fill(l2.disparity.begin(), l2.disparity.end(), static_cast<int16_t>(7));
    std::fill(r2.disparity.begin(), r2.disparity.end(), static_cast<int16_t>(7));
    l2.disparity[static_cast<size_t>(2) * w + 20] = 2; // lookup disagrees
    const DisparityMap fixed = lr_consistency(l2, r2, 1);
    CHECK(!fixed.stable(20, 2));
    CHECK(fixed.at(20, 2) == 7);

    DisparityMap small;
    small.width = 3;
    small.height = 3;
    small.disparity.assign(9, 0);
    small.stability.assign(9, 1);
    CHECK_THROWS_AS(lr_consistency(left, small, 1), std::invalid_argument);
}

TEST_CASE("lr_refine pulls unstable pixels to the stable consensus") {
    const int w = 20, h = 8;
    const Image guide(w, h, 1, 90.0f);
    DisparityMap d;
    d.width = w;
    d.height = h;
    d.dmax = 9;
    d.disparity.assign(static_cast<size_t>(w) * h, 5);
    d.stability.assign(static_cast<size_t>(w) * h, 1);
    for (int y = 3; y < 5; ++y)
        for (int x = 8; x < 12; ++x) {
            d.disparity[static_cast<size_t>(y) * w + x] = 0; // junk at unstable pixels
            d.stability[static_cast<size_t>(y) * w + x] = 0;
        }
    const DisparityMap refined = lr_refine(d, guide, 25.5);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) CHECK(refined.at(x, y) == 5);
    CHECK(refined.stability == d.stability);
    CHECK_THROWS_AS(lr_refine(d, Image(4, 4, 1), 25.5), std::invalid_argument);
}

TEST_CASE("lr_consistency occlusion band fills from the background") {
    const int w = 50, h = 4;
    // Background d=2 with a foreground strip [10,20) at d=8.
    DisparityMap left;
    left.width = w;
    left.height = h;
    left.dmax = 8;
    left.disparity.assign(static_cast<size_t>(w) * h, 2);
    left.stability.assign(static_cast<size_t>(w) * h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 10; x < 20; ++x) left.disparity[static_cast<size_t>(y) * w + x] = 8;

    // Right-reference map: the foreground occupies [18,28) in right coords.
    DisparityMap right = left;
    std::fill(right.disparity.begin(), right.disparity.end(), static_cast<int16_t>(2));
    for (int y = 0; y < h; ++y)
        for (int x = 18; x < 28; ++x) right.disparity[static_cast<size_t>(y) * w + x] = 8;

    const DisparityMap out = lr_consistency(left, right, 1);
    for (int y = 0; y < h; ++y) {
        // Background pixels whose match lands under the foreground span are
        // occluded: x+2 in [18,28) and x not in the strip -> x in [20,26).
        for (int x = 20; x < 26; ++x) {
            CHECK(!out.stable(x, y));
            CHECK(out.at(x, y) == 2); // refilled from the background side
        }
        CHECK(out.stable(5, y));
        CHECK(out.stable(15, y));
        CHECK(out.stable(30, y));
    }
}
