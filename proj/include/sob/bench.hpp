#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sob/image.hpp"
#include "sob/image_io.hpp"
#include "sob/matcher.hpp"
#include "sob/pipeline.hpp"

namespace sob {

/// One evaluation scene. Images and ground truth are stored in the library's
/// I1(x) <-> I2(x+d) convention; standard-convention datasets are mirrored
/// at load (flip_horizontal in the config).
struct Dataset {
    std::string name;
    Image left;  // I1
    Image right; // I2
    FloatMap gt; // disparities in pixels (already divided by gt_scale)
    std::vector<uint8_t> valid;   // ground truth defined
    std::vector<uint8_t> nonocc;  // valid and visible in both views
    std::vector<uint8_t> all;     // == valid
    std::vector<uint8_t> disc;    // valid and near a depth discontinuity
    int dmax = 0;
    double gt_scale = 1.0;
    std::vector<std::string> warnings;
};

/// Loads <dir>/<name>/dataset.cfg, a flat key-value file naming the rasters
/// and the dataset conventions (dmax, gt_scale, flip_horizontal, optional
/// mask files). Missing masks are derived: nonocc by cross-checking the two
/// GT maps when gt_right is present (otherwise all-valid with a warning),
/// disc from the GT gradient.
Dataset load_middlebury(const std::string& dir, const std::string& name);

struct RegionMetrics {
    double bad_percent = 0.0;
    double rms = 0.0;
    size_t pixels = 0;
};

RegionMetrics evaluate_region(const DisparityMap& d, const Dataset& ds,
                              const std::vector<uint8_t>& mask, double threshold);

/// Per-dataset metrics row; doubles as the CSV record of the sweep.
struct EvalReport {
    std::string dataset;
    std::string strategy;
    double fraction = 0.0;
    uint64_t payload_bytes = 0;
    RegionMetrics nonocc, all, disc;
    double psnr_warp = 0.0;
    double psnr_enhanced = 0.0;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

/// Disparity metrics for the three regions at the given bad-pixel threshold.
EvalReport evaluate(const DisparityMap& d, const Dataset& ds, double threshold = 1.0);

enum class Strategy { downsample, sparse, hybrid, sparse_fps, lower_bound };

std::string strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);

/// Encode -> decode -> synthesize -> evaluate, one row per budget. Failed
/// rows are marked and the sweep continues. The seed feeds FPS encoding.
std::vector<EvalReport> rate_distortion_sweep(const Dataset& ds, Strategy strategy,
                                              const std::vector<double>& budgets,
                                              const PipelineParams& params,
                                              uint64_t seed = 0,
                                              double bad_threshold = 1.0);

void write_csv(const std::string& path, const std::vector<EvalReport>& rows);
std::vector<EvalReport> read_csv(const std::string& path);

/// Budget to integer grid spacing / decimation factor: round(1/sqrt(b)).
int budget_to_spacing(double budget);

} // namespace sob
