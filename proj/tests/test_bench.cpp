#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <fstream>

#include "sob/bench.hpp"
#include "sob/common.hpp"
#include "support/synthscene.hpp"

using namespace sob;

namespace {

std::string temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(p);
    return p.string();
}

testing::SynthScene bench_scene(uint32_t seed) {
    testing::SceneSpec spec;
    spec.seed = seed;
    spec.width = 80;
    spec.height = 60;
    spec.layer_disparities = {2, 6, 10};
    return testing::make_scene(spec);
}

} // namespace

TEST_CASE("dataset directory round trip") {
    const testing::SynthScene scene = bench_scene(1);
    const std::string root = temp_dir("sob_bench_data");
    testing::write_scene_dataset(scene, root, "roundtrip");
    const Dataset ds = load_middlebury(root, "roundtrip");
    CHECK(ds.left.data() == scene.left.data());
    CHECK(ds.right.data() == scene.right.data());
    CHECK(ds.gt.values == scene.gt);
    CHECK(ds.nonocc == scene.nonocc);
    CHECK(ds.dmax == scene.dmax);
    for (uint8_t v : ds.valid) CHECK(v == 1);
}

TEST_CASE("loader mirrors standard-convention datasets") {
    const testing::SynthScene scene = bench_scene(2);
    const std::string root = temp_dir("sob_bench_flip");
    // Write the mirrored (standard Middlebury) orientation by hand.
    namespace fs = std::filesystem;
    const fs::path base = fs::path(root) / "flipped";
    fs::create_directories(base);
    const int w = scene.left.width(), h = scene.left.height();
    Image left(w, h, 1), right(w, h, 1);
    FloatMap gt;
    gt.width = w;
    gt.height = h;
    gt.values.assign(static_cast<size_t>(w) * h, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            left.at(x, y) = scene.left.at(w - 1 - x, y);
            right.at(x, y) = scene.right.at(w - 1 - x, y);
            gt.at(x, y) = scene.gt[static_cast<size_t>(y) * w + (w - 1 - x)];
        }
    write_png((base / "left.png").string(), left);
    write_png((base / "right.png").string(), right);
    write_pfm((base / "gt.pfm").string(), gt);
    std::ofstream((base / "dataset.cfg").string())
        << "left left.png\nright right.png\ngt gt.pfm\ngt_scale 1\ndmax " << scene.dmax
        << "\nflip_horizontal 1\n";

    const Dataset ds = load_middlebury(root, "flipped");
    CHECK(ds.left.data() == scene.left.data());
    CHECK(ds.right.data() == scene.right.data());
    CHECK(ds.gt.values == scene.gt);
}

TEST_CASE("loader errors and conventions") {
    const std::string root = temp_dir("sob_bench_err");
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(root) / "nogt");
    std::ofstream((fs::path(root) / "nogt" / "dataset.cfg").string())
        << "left l.png\nright r.png\ngt_scale 1\ndmax 5\n";
    CHECK_THROWS_WITH_AS(load_middlebury(root, "nogt"),
                         doctest::Contains("ground truth required"), format_error);
    CHECK_THROWS_AS(load_middlebury(root, "missing_dir"), io_error);

    // A stored GT value of 80 with gt_scale 16 is disparity 5.
    const fs::path base = fs::path(root) / "scaled";
    fs::create_directories(base);
    Image raster(8, 6, 1, 80.0f);
    write_png((base / "gt.png").string(), raster);
    write_png((base / "left.png").string(), Image(8, 6, 1, 10.0f));
    write_png((base / "right.png").string(), Image(8, 6, 1, 10.0f));
    std::ofstream((base / "dataset.cfg").string())
        << "left left.png\nright right.png\ngt gt.png\ngt_scale 16\ndmax 6\n";
    const Dataset ds = load_middlebury(root, "scaled");
    CHECK(ds.gt.at(3, 3) == doctest::Approx(5.0));
}

TEST_CASE("evaluate against ground truth") {
    const testing::SynthScene scene = bench_scene(3);
    const Dataset ds = testing::scene_to_dataset(scene, "eval");

    DisparityMap exact;
    exact.width = ds.gt.width;
    exact.height = ds.gt.height;
    exact.dmax = ds.dmax;
    exact.disparity.resize(ds.gt.values.size());
    exact.stability.assign(ds.gt.values.size(), 1);
    for (size_t i = 0; i < ds.gt.values.size(); ++i)
        exact.disparity[i] = static_cast<int16_t>(std::lround(ds.gt.values[i]));
    const EvalReport perfect = evaluate(exact, ds);
    CHECK(perfect.all.bad_percent == 0.0);
    CHECK(perfect.all.rms <= 0.5);

    DisparityMap off = exact;
    for (int16_t& d : off.disparity) d = static_cast<int16_t>(d + 2);
    const EvalReport shifted = evaluate(off, ds);
    CHECK(shifted.all.bad_percent == 100.0);
    CHECK(shifted.all.rms == doctest::Approx(2.0));
    CHECK(shifted.nonocc.bad_percent == 100.0);

    DisparityMap wrong;
    wrong.width = 4;
    wrong.height = 4;
    wrong.disparity.assign(16, 0);
    wrong.stability.assign(16, 1);
    CHECK_THROWS_AS(evaluate(wrong, ds), std::invalid_argument);
}

TEST_CASE("bad percent over nonocc and its complement recombines exactly") {
    const testing::SynthScene scene = bench_scene(4);
    const Dataset ds = testing::scene_to_dataset(scene, "split");
    DisparityMap noisy;
    noisy.width = ds.gt.width;
    noisy.height = ds.gt.height;
    noisy.dmax = ds.dmax;
    noisy.disparity.resize(ds.gt.values.size());
    noisy.stability.assign(ds.gt.values.size(), 1);
    for (size_t i = 0; i < ds.gt.values.size(); ++i)
        noisy.disparity[i] = static_cast<int16_t>((i * 7 + 3) % (ds.dmax + 1));

    std::vector<uint8_t> complement(ds.all.size());
    for (size_t i = 0; i < ds.all.size(); ++i) complement[i] = ds.all[i] && !ds.nonocc[i];
    const RegionMetrics mn = evaluate_region(noisy, ds, ds.nonocc, 1.0);
    const RegionMetrics mc = evaluate_region(noisy, ds, complement, 1.0);
    const RegionMetrics ma = evaluate_region(noisy, ds, ds.all, 1.0);
    CHECK(mn.pixels + mc.pixels == ma.pixels);
    const double recombined =
        (mn.bad_percent * static_cast<double>(mn.pixels) +
         mc.bad_percent * static_cast<double>(mc.pixels)) /
        static_cast<double>(ma.pixels);
    CHECK(recombined == doctest::Approx(ma.bad_percent).epsilon(1e-12));
}

TEST_CASE("budget to spacing mapping") {
    CHECK(budget_to_spacing(0.111) == 3);
    CHECK(budget_to_spacing(0.04) == 5);
    CHECK(budget_to_spacing(0.0204) == 7);
    CHECK(budget_to_spacing(0.25) == 2);
    CHECK(budget_to_spacing(1.0) == 1);
    CHECK_THROWS_AS(budget_to_spacing(0.0), std::invalid_argument);

    // Grid spacings {3,5,7} land on the expected fractions of 384x288.
    const Image img = testing::random_byte_image(9, 384, 288, 1);
    CHECK(encode_grid(img, 3).fraction() == doctest::Approx(0.111).epsilon(0.01));
    CHECK(encode_grid(img, 5).fraction() == doctest::Approx(0.04).epsilon(0.02));
    CHECK(encode_grid(img, 7).fraction() == doctest::Approx(0.0204).epsilon(0.03));
}

TEST_CASE("rate_distortion_sweep emits complete rows and survives failures") {
    const testing::SynthScene scene = bench_scene(5);
    const Dataset ds = testing::scene_to_dataset(scene, "sweep");
    PipelineParams params;

    const auto rows = rate_distortion_sweep(ds, Strategy::sparse, {0.04, 0.111}, params, 1);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(!r.failed);
        CHECK(r.dataset == "sweep");
        CHECK(r.strategy == "sparse");
        CHECK(r.payload_bytes > 0);
        CHECK(r.nonocc.bad_percent >= 0.0);
        CHECK(r.psnr_warp > 5.0);
        CHECK(r.psnr_enhanced >= 0.0);
        CHECK(r.seconds >= 0.0);
    }
    CHECK(rows[0].fraction < rows[1].fraction);

    CHECK_THROWS_AS(rate_distortion_sweep(ds, Strategy::sparse, {0.111, 0.04}, params, 1),
                    std::invalid_argument);

    // A budget whose spacing exceeds the image marks the row failed and the
    // sweep continues.
    const auto mixed =
        rate_distortion_sweep(ds, Strategy::sparse, {0.0001, 0.111}, params, 1);
    REQUIRE(mixed.size() == 2);
    CHECK(mixed[0].failed);
    CHECK(!mixed[1].failed);
    CHECK(std::isnan(mixed[0].nonocc.bad_percent));
}

TEST_CASE("csv round trip") {
    const testing::SynthScene scene = bench_scene(6);
    const Dataset ds = testing::scene_to_dataset(scene, "csv");
    PipelineParams params;
    auto rows = rate_distortion_sweep(ds, Strategy::downsample, {0.04}, params, 1);
    rows.push_back(rows[0]);
    rows[1].strategy = "external";
    rows[1].failed = true;
    rows[1].nonocc.bad_percent = std::nan("");
    rows[1].psnr_warp = std::numeric_limits<double>::infinity();

    const std::string path = temp_dir("sob_bench_csv") + "/report.csv";
    write_csv(path, rows);
    const auto back = read_csv(path);
    REQUIRE(back.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].dataset == rows[i].dataset);
        CHECK(back[i].strategy == rows[i].strategy);
        CHECK(back[i].payload_bytes == rows[i].payload_bytes);
        if (std::isnan(rows[i].nonocc.bad_percent))
            CHECK(std::isnan(back[i].nonocc.bad_percent));
        else
            CHECK(back[i].nonocc.bad_percent ==
                  doctest::Approx(rows[i].nonocc.bad_percent).epsilon(1e-9));
        if (std::isinf(rows[i].psnr_warp))
            CHECK(std::isinf(back[i].psnr_warp));
        else
            CHECK(back[i].psnr_warp == doctest::Approx(rows[i].psnr_warp).epsilon(1e-9));
    }
    CHECK_THROWS_AS(read_csv(temp_dir("sob_bench_csv") + "/missing.csv"), io_error);
}

TEST_CASE("strategy names round trip") {
    for (Strategy s : {Strategy::downsample, Strategy::sparse, Strategy::hybrid,
                       Strategy::sparse_fps, Strategy::lower_bound})
        CHECK(parse_strategy(strategy_name(s)) == s);
    CHECK(!parse_strategy("nope").has_value());
}
