#include "sob/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sob/common.hpp"
#include "sob/costvolume.hpp"
#include "sob/synthesis.hpp"

namespace sob {

namespace {

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;
        std::string value;
        std::getline(ss, value);
        const size_t start = value.find_first_not_of(" \t");
        value = start == std::string::npos ? "" : value.substr(start);
        const size_t end = value.find_last_not_of(" \t\r");
        if (end != std::string::npos) value.erase(end + 1);
        kv[key] = value;
    }
    return kv;
}

void flip_image(Image& img) {
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width() / 2; ++x)
            for (int c = 0; c < img.channels(); ++c)
                std::swap(img.at(x, y, c), img.at(img.width() - 1 - x, y, c));
}

void flip_map(FloatMap& m) {
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width / 2; ++x) std::swap(m.at(x, y), m.at(m.width - 1 - x, y));
}

void flip_mask(std::vector<uint8_t>& mask, int w, int h) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w / 2; ++x)
            std::swap(mask[static_cast<size_t>(y) * w + x],
                      mask[static_cast<size_t>(y) * w + (w - 1 - x)]);
}

// GT rasters come as 8-bit images (value 0 = undefined) or PFM (inf/<=0 =
// undefined); stored values are divided by gt_scale.
FloatMap load_gt(const std::string& path, double gt_scale, std::vector<uint8_t>* valid_out) {
    FloatMap gt;
    std::vector<uint8_t> valid;
    const size_t dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "pfm") {
        gt = read_pfm(path);
        valid.assign(gt.values.size(), 0);
        for (size_t i = 0; i < gt.values.size(); ++i) {
            const float v = gt.values[i];
            if (std::isfinite(v) && v > 0.0f) {
                gt.values[i] = static_cast<float>(v / gt_scale);
                valid[i] = 1;
            } else {
                gt.values[i] = 0.0f;
            }
        }
    } else {
        const Image raster = to_grayscale(read_image(path));
        gt.width = raster.width();
        gt.height = raster.height();
        gt.values.resize(static_cast<size_t>(gt.width) * gt.height);
        valid.assign(gt.values.size(), 0);
        size_t i = 0;
        for (int y = 0; y < gt.height; ++y)
            for (int x = 0; x < gt.width; ++x, ++i) {
                const float v = raster.at(x, y);
                if (v > 0.0f) {
                    gt.values[i] = static_cast<float>(v / gt_scale);
                    valid[i] = 1;
                }
            }
    }
    if (valid_out) *valid_out = std::move(valid);
    return gt;
}

std::vector<uint8_t> load_mask(const std::string& path) {
    const Image raster = to_grayscale(read_image(path));
    std::vector<uint8_t> mask(static_cast<size_t>(raster.width()) * raster.height());
    size_t i = 0;
    for (int y = 0; y < raster.height(); ++y)
        for (int x = 0; x < raster.width(); ++x, ++i) mask[i] = raster.at(x, y) > 127.0f;
    return mask;
}

// Pixels near a GT depth discontinuity: |gradient| > 1 dilated by 4.
std::vector<uint8_t> derive_disc(const FloatMap& gt, const std::vector<uint8_t>& valid) {
    const int w = gt.width, h = gt.height;
    std::vector<uint8_t> edges(static_cast<size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (!valid[i]) continue;
            const float v = gt.at(x, y);
            const bool jump =
                (x + 1 < w && valid[i + 1] && std::fabs(gt.at(x + 1, y) - v) > 1.0f) ||
                (y + 1 < h && valid[i + static_cast<size_t>(w)] &&
                 std::fabs(gt.at(x, y + 1) - v) > 1.0f);
            if (jump) edges[i] = 1;
        }
    const int r = 4;
    std::vector<uint8_t> disc(static_cast<size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (!valid[i]) continue;
            bool near = false;
            for (int dy = -r; dy <= r && !near; ++dy)
                for (int dx = -r; dx <= r && !near; ++dx) {
                    const int px = x + dx, py = y + dy;
                    if (px >= 0 && px < w && py >= 0 && py < h &&
                        edges[static_cast<size_t>(py) * w + px])
                        near = true;
                }
            disc[i] = near;
        }
    return disc;
}

} // namespace

Dataset load_middlebury(const std::string& dir, const std::string& name) {
    const std::string base = dir + "/" + name + "/";
    const auto cfg = read_config(base + "dataset.cfg");
    auto require = [&](const std::string& key) -> std::string {
        const auto it = cfg.find(key);
        if (it == cfg.end() || it->second.empty())
            throw format_error("dataset '" + name + "': missing config key '" + key + "'");
        return it->second;
    };
    auto optional_key = [&](const std::string& key) -> std::string {
        const auto it = cfg.find(key);
        return it == cfg.end() ? "" : it->second;
    };

    Dataset ds;
    ds.name = cfg.count("name") ? cfg.at("name") : name;
    ds.dmax = std::stoi(require("dmax"));
    ds.gt_scale = std::stod(require("gt_scale"));
    if (ds.dmax < 1 || ds.gt_scale <= 0.0)
        throw format_error("dataset '" + name + "': bad dmax/gt_scale");

    const std::string gt_path = optional_key("gt");
    if (gt_path.empty())
        throw format_error("dataset '" + name + "': ground truth required for evaluate");

    ds.left = read_image(base + require("left"));
    ds.right = read_image(base + require("right"));
    if (!ds.left.same_size(ds.right))
        throw format_error("dataset '" + name + "': left/right dimension mismatch");

    ds.gt = load_gt(base + gt_path, ds.gt_scale, &ds.valid);
    if (ds.gt.width != ds.left.width() || ds.gt.height != ds.left.height())
        throw format_error("dataset '" + name + "': ground truth dimension mismatch");

    FloatMap gt_right;
    std::vector<uint8_t> valid_right;
    const bool have_gt_right = !optional_key("gt_right").empty();
    if (have_gt_right) gt_right = load_gt(base + optional_key("gt_right"), ds.gt_scale, &valid_right);

    std::vector<uint8_t> nonocc, disc;
    if (!optional_key("mask_nonocc").empty()) nonocc = load_mask(base + optional_key("mask_nonocc"));
    if (!optional_key("mask_disc").empty()) disc = load_mask(base + optional_key("mask_disc"));

    const bool flip = optional_key("flip_horizontal") == "1";
    if (flip) {
        flip_image(ds.left);
        flip_image(ds.right);
        flip_map(ds.gt);
        flip_mask(ds.valid, ds.gt.width, ds.gt.height);
        if (have_gt_right) {
            flip_map(gt_right);
            flip_mask(valid_right, gt_right.width, gt_right.height);
        }
        if (!nonocc.empty()) flip_mask(nonocc, ds.gt.width, ds.gt.height);
        if (!disc.empty()) flip_mask(disc, ds.gt.width, ds.gt.height);
    }

    const int w = ds.gt.width, h = ds.gt.height;
    ds.all = ds.valid;

    if (nonocc.empty()) {
        if (have_gt_right) {
            // Cross-check the two GT maps: visible iff the right map agrees
            // at x + d.
            nonocc.assign(static_cast<size_t>(w) * h, 0);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    const size_t i = static_cast<size_t>(y) * w + x;
                    if (!ds.valid[i]) continue;
                    const int xr = x + static_cast<int>(std::lround(ds.gt.at(x, y)));
                    if (xr < 0 || xr >= w) continue;
                    const size_t ir = static_cast<size_t>(y) * w + xr;
                    if (valid_right[ir] &&
                        std::fabs(ds.gt.at(x, y) - gt_right.at(xr, y)) <= 1.0f)
                        nonocc[i] = 1;
                }
        } else {
            nonocc = ds.valid;
            ds.warnings.push_back("nonocc mask unavailable; using all valid pixels");
        }
    }
    for (size_t i = 0; i < nonocc.size(); ++i) nonocc[i] = nonocc[i] && ds.valid[i];
    ds.nonocc = std::move(nonocc);

    if (disc.empty()) disc = derive_disc(ds.gt, ds.valid);
    for (size_t i = 0; i < disc.size(); ++i) disc[i] = disc[i] && ds.valid[i];
    ds.disc = std::move(disc);

    double max_gt = 0.0;
    for (size_t i = 0; i < ds.gt.values.size(); ++i)
        if (ds.valid[i]) max_gt = std::max(max_gt, static_cast<double>(ds.gt.values[i]));
    if (max_gt > ds.dmax)
        ds.warnings.push_back("ground truth exceeds declared dmax");
    return ds;
}

RegionMetrics evaluate_region(const DisparityMap& d, const Dataset& ds,
                              const std::vector<uint8_t>& mask, double threshold) {
    RegionMetrics m;
    double sse = 0.0;
    size_t bad = 0;
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x) {
            const size_t i = static_cast<size_t>(y) * d.width + x;
            if (!mask[i]) continue;
            const double err = std::fabs(d.disparity[i] - ds.gt.values[i]);
            if (err > threshold) ++bad;
            sse += err * err;
            ++m.pixels;
        }
    if (m.pixels > 0) {
        m.bad_percent = 100.0 * static_cast<double>(bad) / static_cast<double>(m.pixels);
        m.rms = std::sqrt(sse / static_cast<double>(m.pixels));
    }
    return m;
}

EvalReport evaluate(const DisparityMap& d, const Dataset& ds, double threshold) {
    if (d.width != ds.gt.width || d.height != ds.gt.height)
        throw std::invalid_argument("evaluate: dimension mismatch");
    EvalReport r;
    r.dataset = ds.name;
    r.nonocc = evaluate_region(d, ds, ds.nonocc, threshold);
    r.all = evaluate_region(d, ds, ds.all, threshold);
    r.disc = evaluate_region(d, ds, ds.disc, threshold);
    return r;
}

std::string strategy_name(Strategy s) {
    switch (s) {
    case Strategy::downsample: return "downsample";
    case Strategy::sparse: return "sparse";
    case Strategy::hybrid: return "hybrid";
    case Strategy::sparse_fps: return "sparse_fps";
    case Strategy::lower_bound: return "lowerbound";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
    if (name == "downsample") return Strategy::downsample;
    if (name == "sparse") return Strategy::sparse;
    if (name == "hybrid") return Strategy::hybrid;
    if (name == "sparse_fps" || name == "fps") return Strategy::sparse_fps;
    if (name == "lowerbound" || name == "lower_bound") return Strategy::lower_bound;
    return std::nullopt;
}

int budget_to_spacing(double budget) {
    if (!(budget > 0.0 && budget <= 1.0))
        throw std::invalid_argument("budget must be in (0,1]");
    return std::max(1, static_cast<int>(std::lround(1.0 / std::sqrt(budget))));
}

namespace {

struct DecodeOutcome {
    SampleSet payload;
    DisparityMap map;
    bool point_scheme = false;
    uint64_t bytes = 0;
    double fraction = 0.0;
};

DecodeOutcome decode_for_budget(const Dataset& ds, Strategy strategy, double budget,
                                const PipelineParams& params, uint64_t seed) {
    DecodeOutcome out;
    PipelineParams p = params;
    p.dmax = ds.dmax;
    switch (strategy) {
    case Strategy::downsample: {
        out.payload = encode_downsample(ds.right, budget_to_spacing(budget));
        out.map = run_downsample_pipeline(ds.left, out.payload, p);
        break;
    }
    case Strategy::sparse: {
        out.payload = encode_grid(ds.right, budget_to_spacing(budget));
        out.map = run_sparse_pipeline(ds.left, out.payload, p);
        out.point_scheme = true;
        break;
    }
    case Strategy::sparse_fps: {
        const int64_t pixels = static_cast<int64_t>(ds.right.width()) * ds.right.height();
        const int count = std::max<int>(1, static_cast<int>(std::lround(budget * pixels)));
        out.payload = encode_fps(ds.right, count, seed, 0.0);
        out.map = run_sparse_pipeline(ds.left, out.payload, p);
        out.point_scheme = true;
        break;
    }
    case Strategy::hybrid: {
        out.payload = encode_grid(ds.right, budget_to_spacing(budget));
        out.map = run_hybrid_pipeline(ds.left, out.payload, p);
        out.point_scheme = true;
        break;
    }
    case Strategy::lower_bound: {
        // Oracle: the full DSI squeezed to the budget, then the same decoder
        // tail the strategies get (aggregate, select, LR both ways). Needs
        // the true right image; only the bench has it.
        const Image lc = to_grayscale(ds.left);
        const Image rc = to_grayscale(ds.right);
        CostVolume vol = lower_bound_dsi(dsi_full(lc, rc, p.dmax, p.cost_mode), budget);
        DisparityMap d_left = select_disparity(aggregate(vol, ds.left, p.sigma_tree));
        if (p.lr_check) {
            CostVolume vol_r = lower_bound_dsi(
                dsi_full_directed(rc, lc, p.dmax, -1, p.cost_mode), budget);
            const DisparityMap d_right =
                select_disparity(aggregate(vol_r, ds.right, p.sigma_tree));
            d_left = lr_consistency(d_left, d_right, p.lr_threshold);
            if (p.lr_refine) d_left = lr_refine(d_left, ds.left, p.sigma_tree);
        }
        out.map = std::move(d_left);
        out.bytes = static_cast<uint64_t>(std::llround(
            budget * static_cast<double>(ds.right.width()) * ds.right.height()));
        out.fraction = budget;
        return out;
    }
    }
    out.bytes = serialize(out.payload).size();
    out.fraction = out.payload.fraction();
    return out;
}

} // namespace

std::vector<EvalReport> rate_distortion_sweep(const Dataset& ds, Strategy strategy,
                                              const std::vector<double>& budgets,
                                              const PipelineParams& params, uint64_t seed,
                                              double bad_threshold) {
    for (size_t i = 1; i < budgets.size(); ++i)
        if (budgets[i] < budgets[i - 1])
            throw std::invalid_argument("rate_distortion_sweep: budgets must be sorted");

    std::vector<EvalReport> rows;
    for (const double budget : budgets) {
        EvalReport row;
        row.dataset = ds.name;
        row.strategy = strategy_name(strategy);
        row.fraction = budget;
        try {
            const auto t0 = std::chrono::steady_clock::now();
            DecodeOutcome dec = decode_for_budget(ds, strategy, budget, params, seed);
            const auto t1 = std::chrono::steady_clock::now();

            row = evaluate(dec.map, ds, bad_threshold);
            row.strategy = strategy_name(strategy);
            row.fraction = dec.fraction;
            row.payload_bytes = dec.bytes;
            row.seconds = std::chrono::duration<double>(t1 - t0).count();

            const WarpResult warped = warp(ds.left, dec.map);
            std::vector<uint8_t> visible(warped.occlusion.size());
            for (size_t i = 0; i < visible.size(); ++i) visible[i] = !warped.occlusion[i];
            row.psnr_warp = psnr(warped.image, ds.right, &visible);
            if (dec.point_scheme) {
                FilterParams f = params.filter;
                f.sigma_s = resolve_sigma_s(params, dec.payload);
                const Image enhanced = enhance(warped, dec.payload, f);
                row.psnr_enhanced = psnr(enhanced, ds.right, &visible);
            } else {
                row.psnr_enhanced = row.psnr_warp; // no exact samples to add
            }
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            const double nan = std::nan("");
            row.nonocc = row.all = row.disc = RegionMetrics{nan, nan, 0};
            row.psnr_warp = row.psnr_enhanced = row.seconds = nan;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream ss;
    ss.precision(10);
    ss << v;
    return ss.str();
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

} // namespace

void write_csv(const std::string& path, const std::vector<EvalReport>& rows) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot open '" + path + "'");
    f << "dataset,strategy,fraction,bytes,bad_nonocc,bad_all,bad_disc,"
         "rms_nonocc,rms_all,rms_disc,psnr_warp,psnr_enhanced,seconds\n";
    for (const EvalReport& r : rows) {
        f << r.dataset << ',' << r.strategy << ',' << fmt_double(r.fraction) << ','
          << r.payload_bytes << ',' << fmt_double(r.nonocc.bad_percent) << ','
          << fmt_double(r.all.bad_percent) << ',' << fmt_double(r.disc.bad_percent) << ','
          << fmt_double(r.nonocc.rms) << ',' << fmt_double(r.all.rms) << ','
          << fmt_double(r.disc.rms) << ',' << fmt_double(r.psnr_warp) << ','
          << fmt_double(r.psnr_enhanced) << ',' << fmt_double(r.seconds) << '\n';
    }
    if (!f) throw io_error("short write to '" + path + "'");
}

std::vector<EvalReport> read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw format_error("empty CSV '" + path + "'");

    std::vector<EvalReport> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 13)
            throw format_error("bad CSV row in '" + path + "': " + line);
        EvalReport r;
        r.dataset = cells[0];
        r.strategy = cells[1];
        r.fraction = parse_double(cells[2]);
        r.payload_bytes = static_cast<uint64_t>(std::stoull(cells[3]));
        r.nonocc.bad_percent = parse_double(cells[4]);
        r.all.bad_percent = parse_double(cells[5]);
        r.disc.bad_percent = parse_double(cells[6]);
        r.nonocc.rms = parse_double(cells[7]);
        r.all.rms = parse_double(cells[8]);
        r.disc.rms = parse_double(cells[9]);
        r.psnr_warp = parse_double(cells[10]);
        r.psnr_enhanced = parse_double(cells[11]);
        r.seconds = parse_double(cells[12]);
        r.failed = std::isnan(r.nonocc.bad_percent);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace sob
