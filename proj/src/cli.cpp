#include "sob/cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sob/bench.hpp"
#include "sob/costvolume.hpp"
#include "sob/common.hpp"
#include "sob/image_io.hpp"
#include "sob/parallel.hpp"
#include "sob/pipeline.hpp"
#include "sob/synthesis.hpp"

namespace sob {

namespace {

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open '" + path + "'");
    uint64_t hash = 1469598103934665603ull;
    char buf[1 << 14];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        const std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<uint8_t>(buf[i]);
            hash *= 1099511628211ull;
        }
        if (!f) break;
    }
    return hash;
}

// Echoed before every run; replaying these flags reproduces the outputs.
struct ConfigEcho {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value) {
        entries.emplace_back(key, value);
    }
    void add(const std::string& key, double value) {
        std::ostringstream ss;
        ss.precision(12);
        ss << value;
        entries.emplace_back(key, ss.str());
    }
    void add(const std::string& key, int64_t value) { add(key, std::to_string(value)); }

    void print(std::ostream& os) const {
        os << "# effective-config\n";
        for (const auto& [k, v] : entries) os << k << " " << v << "\n";
    }
    std::string str() const {
        std::ostringstream ss;
        print(ss);
        return ss.str();
    }
};

void write_sidecar(const std::string& raster_path, const ConfigEcho& echo,
                   const std::vector<std::string>& inputs) {
    std::ofstream f(raster_path + ".prov.txt");
    if (!f) throw io_error("cannot open '" + raster_path + ".prov.txt'");
    f << echo.str();
    for (const std::string& in : inputs) {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(in)));
        f << "input " << in << " fnv1a64:" << hex << "\n";
    }
}

Image disparity_to_image(const DisparityMap& d, int scale) {
    Image img(d.width, d.height, 1);
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
            img.at(x, y) = static_cast<float>(std::min(255, d.at(x, y) * scale));
    return img;
}

FloatMap disparity_to_map(const DisparityMap& d) {
    FloatMap m;
    m.width = d.width;
    m.height = d.height;
    m.values.resize(static_cast<size_t>(d.width) * d.height);
    for (size_t i = 0; i < m.values.size(); ++i)
        m.values[i] = static_cast<float>(d.disparity[i]);
    return m;
}

Image mask_to_image(const std::vector<uint8_t>& mask, int w, int h, bool invert = false) {
    Image img(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool on = mask[static_cast<size_t>(y) * w + x] != 0;
            img.at(x, y) = (on != invert) ? 255.0f : 0.0f;
        }
    return img;
}

struct PipelineFlags {
    PipelineParams params;
    double sigma_s_explicit = 0.0;
    bool no_lr = false;
    bool no_lr_refine = false;
    bool no_smooth_left = false;
    bool color_cost = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--hybrid-weight", params.hybrid_weight,
                        "Hybrid blend weight for the sparse route")
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--sigma-r", params.filter.sigma_r, "JBF range scale");
        cmd->add_option("--sigma-s-mult", params.sigma_s_mult,
                        "JBF spatial scale = mult * payload spacing");
        cmd->add_option("--sigma-s", sigma_s_explicit, "Explicit JBF spatial scale");
        cmd->add_option("--sigma-tree", params.sigma_tree, "Aggregation similarity scale");
        cmd->add_option("--lr-threshold", params.lr_threshold, "LR check tolerance (px)");
        cmd->add_option("--delta", params.delta, "Sparse DSI zero-cost floor");
        cmd->add_option("--antialias-scale", params.antialias_scale,
                        "Low-pass sigma = scale * decimation factor");
        cmd->add_flag("--no-lr", no_lr, "Skip the left-right consistency check");
        cmd->add_flag("--no-lr-refine", no_lr_refine,
                      "Scanline refill instead of tree refinement after the LR check");
        cmd->add_flag("--no-smooth-left", no_smooth_left,
                      "Downsample route: keep I1 unsmoothed");
        cmd->add_flag("--color-cost", color_cost,
                      "Sum per-channel absolute differences instead of luma");
    }
    PipelineParams resolve() {
        params.filter.sigma_s = sigma_s_explicit;
        params.lr_check = !no_lr;
        params.lr_refine = !no_lr_refine;
        params.smooth_left = !no_smooth_left;
        params.cost_mode = color_cost ? CostMode::channel_sum : CostMode::luma;
        return params;
    }
    void echo(ConfigEcho& e) const {
        e.add("hybrid-weight", params.hybrid_weight);
        e.add("sigma-r", params.filter.sigma_r);
        e.add("sigma-s-mult", params.sigma_s_mult);
        if (sigma_s_explicit > 0.0) e.add("sigma-s", sigma_s_explicit);
        e.add("sigma-tree", params.sigma_tree);
        e.add("lr-threshold", static_cast<int64_t>(params.lr_threshold));
        e.add("delta", params.delta);
        e.add("antialias-scale", params.antialias_scale);
        e.add("lr-check", static_cast<int64_t>(no_lr ? 0 : 1));
        e.add("lr-refine", static_cast<int64_t>(no_lr_refine ? 0 : 1));
        e.add("smooth-left", static_cast<int64_t>(no_smooth_left ? 0 : 1));
        e.add("cost-mode", color_cost ? "channel_sum" : "luma");
    }
};

std::string default_prefix(const std::string& path) {
    const size_t slash = path.find_last_of("/\\");
    const size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

int run_encode(const std::string& scheme, const std::string& input, const std::string& output,
               int spacing, int count, int factor, uint64_t seed, double adaptive_fraction,
               ConfigEcho& echo) {
    const Image img = read_image(input);
    SampleSet payload;
    if (scheme == "grid") {
        payload = encode_grid(img, spacing);
        echo.add("spacing", static_cast<int64_t>(spacing));
    } else if (scheme == "fps") {
        if (count <= 0)
            count = static_cast<int>(static_cast<int64_t>(img.width()) * img.height() /
                                     (static_cast<int64_t>(spacing) * spacing));
        payload = encode_fps(img, count, seed, adaptive_fraction);
        echo.add("count", static_cast<int64_t>(count));
        echo.add("seed", static_cast<int64_t>(seed));
        echo.add("adaptive-fraction", adaptive_fraction);
    } else { // downsample
        payload = encode_downsample(img, factor);
        echo.add("factor", static_cast<int64_t>(factor));
    }
    echo.print(std::cout);
    write_sample_set(output, payload);
    std::printf("payload %s: %zu bytes, fraction %.2f%%\n", output.c_str(),
                serialize(payload).size(), 100.0 * payload.fraction());
    return 0;
}

int run_decode(const std::string& strategy, const std::string& payload_path,
               const std::string& left_path, int dmax, std::string out_prefix,
               int dump_layer, PipelineFlags& flags, ConfigEcho& echo) {
    const Image left = read_image(left_path);
    const SampleSet payload = read_sample_set(payload_path);
    PipelineParams params = flags.resolve();
    params.dmax = dmax;

    DisparityMap map;
    if (strategy == "downsample") map = run_downsample_pipeline(left, payload, params);
    else if (strategy == "sparse") map = run_sparse_pipeline(left, payload, params);
    else map = run_hybrid_pipeline(left, payload, params);

    if (out_prefix.empty()) out_prefix = default_prefix(payload_path) + "_" + strategy;
    echo.print(std::cout);

    if (dump_layer >= 0 && payload.is_point_scheme()) {
        const CostVolume raw =
            dsi_sparse(to_grayscale(left), payload, dmax, params.delta, params.cost_mode);
        dump_layer_pfm(raw, std::min(dump_layer, dmax), out_prefix + "_dsi_layer.pfm");
    }

    const int scale = std::max(1, static_cast<int>(std::lround(255.0 / dmax)));
    const std::string pgm = out_prefix + ".pgm";
    const std::string pfm = out_prefix + ".pfm";
    const std::string stab = out_prefix + "_stability.png";
    write_pgm(pgm, disparity_to_image(map, scale));
    write_pfm(pfm, disparity_to_map(map));
    write_image(stab, mask_to_image(map.stability, map.width, map.height));
    for (const std::string& p : {pgm, pfm, stab})
        write_sidecar(p, echo, {payload_path, left_path});
    std::printf("disparity written: %s (scale %d), %s, %s\n", pgm.c_str(), scale, pfm.c_str(),
                stab.c_str());
    return 0;
}

int run_synthesize(const std::string& left_path, const std::string& disparity_path,
                   const std::string& payload_path, const std::string& truth_path,
                   std::string out_prefix, PipelineFlags& flags, ConfigEcho& echo) {
    const Image left = read_image(left_path);
    const FloatMap dm = read_pfm(disparity_path);
    if (dm.width != left.width() || dm.height != left.height())
        throw format_error("disparity dimensions do not match the left image");
    DisparityMap map;
    map.width = dm.width;
    map.height = dm.height;
    map.disparity.resize(dm.values.size());
    map.stability.assign(dm.values.size(), 1);
    for (size_t i = 0; i < dm.values.size(); ++i) {
        map.disparity[i] = static_cast<int16_t>(std::lround(dm.values[i]));
        map.dmax = std::max<int>(map.dmax, map.disparity[i]);
    }

    const SampleSet payload = read_sample_set(payload_path);
    const WarpResult warped = warp(left, map);

    Image result = warped.image;
    if (payload.is_point_scheme()) {
        FilterParams f;
        f.sigma_r = flags.params.filter.sigma_r;
        f.sigma_s = flags.sigma_s_explicit > 0.0
                        ? flags.sigma_s_explicit
                        : flags.params.sigma_s_mult * payload.equivalent_spacing();
        result = enhance(warped, payload, f);
    }
    const Image inpainted = inpaint(WarpResult{result, warped.occlusion}, payload);

    if (out_prefix.empty()) out_prefix = default_prefix(left_path) + "_synth";
    echo.print(std::cout);
    const std::string img_path = out_prefix + ".png";
    const std::string occ_path = out_prefix + "_occlusion.png";
    write_image(img_path, inpainted);
    write_image(occ_path,
                mask_to_image(warped.occlusion, warped.image.width(), warped.image.height()));
    write_sidecar(img_path, echo, {left_path, disparity_path, payload_path});
    write_sidecar(occ_path, echo, {left_path, disparity_path, payload_path});
    std::printf("synthesized view written: %s (+ %s)\n", img_path.c_str(), occ_path.c_str());

    if (!truth_path.empty()) {
        const Image truth = read_image(truth_path);
        std::vector<uint8_t> visible(warped.occlusion.size());
        for (size_t i = 0; i < visible.size(); ++i) visible[i] = !warped.occlusion[i];
        const double warp_db = psnr(warped.image, truth, &visible);
        const double final_db = psnr(result, truth, &visible);
        const double gray_db =
            psnr(to_grayscale(result), to_grayscale(truth), &visible);
        std::printf("psnr nonocc: warp %.2f dB, enhanced %.2f dB (grayscale %.2f dB)\n",
                    warp_db, final_db, gray_db);
    }
    return 0;
}

int run_bench(const std::string& data_dir, const std::vector<std::string>& sets,
              const std::vector<std::string>& strategies, std::vector<double> budgets,
              const std::string& out_path, const std::string& baseline_path, uint64_t seed,
              double bad_threshold, PipelineFlags& flags, ConfigEcho& echo) {
    PipelineParams params = flags.resolve();
    std::sort(budgets.begin(), budgets.end());
    echo.print(std::cout);

    std::vector<EvalReport> rows;
    for (const std::string& set_name : sets) {
        const Dataset ds = load_middlebury(data_dir, set_name);
        for (const std::string& w : ds.warnings)
            std::fprintf(stderr, "warning: %s: %s\n", set_name.c_str(), w.c_str());
        for (const std::string& strat_name : strategies) {
            const auto strat = parse_strategy(strat_name);
            if (!strat) throw format_error("unknown strategy '" + strat_name + "'");
            auto sweep = rate_distortion_sweep(ds, *strat, budgets, params, seed, bad_threshold);
            for (const EvalReport& r : sweep) {
                std::printf("%-12s %-11s %6.2f%% bad(nonocc/all/disc) %6.2f %6.2f %6.2f "
                            "rms %5.2f psnr %5.2f/%5.2f %6.2fs%s\n",
                            r.dataset.c_str(), r.strategy.c_str(), 100.0 * r.fraction,
                            r.nonocc.bad_percent, r.all.bad_percent, r.disc.bad_percent,
                            r.nonocc.rms, r.psnr_warp, r.psnr_enhanced, r.seconds,
                            r.failed ? (" FAILED: " + r.error).c_str() : "");
                rows.push_back(r);
            }
        }
    }
    if (!baseline_path.empty()) {
        // Externally produced curves (e.g. a JPEG2000 run) merge as-is.
        for (EvalReport& r : read_csv(baseline_path)) rows.push_back(std::move(r));
    }
    if (!out_path.empty()) {
        write_csv(out_path, rows);
        std::printf("report written: %s (%zu rows)\n", out_path.c_str(), rows.size());
    }
    return 0;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"stereo from one full left image plus a fraction of the right"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

    // encode
    auto* enc = app.add_subcommand("encode", "Sample the right image into a .sob payload");
    std::string enc_scheme = "grid";
    int enc_spacing = 5, enc_count = 0, enc_factor = 5;
    uint64_t enc_seed = 0;
    double enc_af = 0.0;
    std::string enc_in, enc_out;
    enc->add_option("--scheme", enc_scheme, "grid|fps|downsample")
        ->check(CLI::IsMember({"grid", "fps", "downsample"}));
    enc->add_option("--spacing", enc_spacing, "Grid spacing in pixels");
    enc->add_option("--count", enc_count, "FPS sample count");
    enc->add_option("--factor", enc_factor, "Downsample factor");
    enc->add_option("--seed", enc_seed, "FPS seed");
    enc->add_option("--adaptive-fraction", enc_af, "Trailing adaptive share of FPS samples")
        ->check(CLI::Range(0.0, 1.0));
    enc->add_option("input", enc_in, "Right image (pgm/ppm/png)")->required();
    enc->add_option("output", enc_out, "Payload path (.sob)")->required();

    // decode
    auto* dec = app.add_subcommand("decode", "Recover a disparity map from left + payload");
    std::string dec_strategy, dec_payload, dec_left, dec_out;
    int dec_dmax = 0;
    int dec_dump_layer = -1;
    PipelineFlags dec_flags;
    dec->add_option("--strategy", dec_strategy, "downsample|sparse|hybrid")
        ->required()
        ->check(CLI::IsMember({"downsample", "sparse", "hybrid"}));
    dec->add_option("--payload", dec_payload, "Payload (.sob)")->required();
    dec->add_option("--left", dec_left, "Left image")->required();
    dec->add_option("--dmax", dec_dmax, "Maximum disparity")->required()
        ->check(CLI::PositiveNumber);
    dec->add_option("--out", dec_out, "Output prefix");
    dec->add_option("--dump-dsi-layer", dec_dump_layer,
                    "Write one raw sparse-DSI layer as PFM for inspection");
    dec_flags.attach(dec);

    // synthesize
    auto* syn = app.add_subcommand("synthesize", "Recover the right image");
    std::string syn_left, syn_disp, syn_payload, syn_truth, syn_out;
    PipelineFlags syn_flags;
    syn->add_option("--left", syn_left, "Left image")->required();
    syn->add_option("--disparity", syn_disp, "Disparity map (.pfm)")->required();
    syn->add_option("--payload", syn_payload, "Payload (.sob)")->required();
    syn->add_option("--truth", syn_truth, "True right image (prints PSNR)");
    syn->add_option("--out", syn_out, "Output prefix");
    syn_flags.attach(syn);

    // bench
    auto* ben = app.add_subcommand("bench", "Rate-distortion sweeps over datasets");
    std::string ben_data, ben_out, ben_baseline;
    std::vector<std::string> ben_sets, ben_strategies{"sparse", "downsample", "hybrid"};
    std::vector<double> ben_budgets{0.02, 0.04, 0.111};
    uint64_t ben_seed = 0;
    double ben_threshold = 1.0;
    PipelineFlags ben_flags;
    if (const char* env = std::getenv("SOB_DATA_DIR")) ben_data = env;
    ben->add_option("--data", ben_data, "Dataset root (default $SOB_DATA_DIR)");
    ben->add_option("--sets", ben_sets, "Dataset names")->required()->delimiter(',');
    ben->add_option("--strategies", ben_strategies,
                    "downsample|sparse|hybrid|sparse_fps|lowerbound")
        ->delimiter(',');
    ben->add_option("--budgets", ben_budgets, "Fractions of the right image")->delimiter(',');
    ben->add_option("--out", ben_out, "Report CSV path");
    ben->add_option("--baseline", ben_baseline, "Merge an externally produced CSV");
    ben->add_option("--seed", ben_seed, "FPS seed");
    ben->add_option("--bad-threshold", ben_threshold, "Bad-pixel threshold (px)");
    ben_flags.attach(ben);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    set_max_threads(threads);
    try {
        ConfigEcho echo;
        echo.add("threads", static_cast<int64_t>(threads));
        if (enc->parsed()) {
            echo.add("subcommand", "encode");
            echo.add("scheme", enc_scheme);
            return run_encode(enc_scheme, enc_in, enc_out, enc_spacing, enc_count, enc_factor,
                              enc_seed, enc_af, echo);
        }
        if (dec->parsed()) {
            echo.add("subcommand", "decode");
            echo.add("strategy", dec_strategy);
            echo.add("dmax", static_cast<int64_t>(dec_dmax));
            dec_flags.echo(echo);
            return run_decode(dec_strategy, dec_payload, dec_left, dec_dmax, dec_out,
                              dec_dump_layer, dec_flags, echo);
        }
        if (syn->parsed()) {
            echo.add("subcommand", "synthesize");
            syn_flags.echo(echo);
            return run_synthesize(syn_left, syn_disp, syn_payload, syn_truth, syn_out, syn_flags,
                                  echo);
        }
        echo.add("subcommand", "bench");
        echo.add("seed", static_cast<int64_t>(ben_seed));
        echo.add("bad-threshold", ben_threshold);
        ben_flags.echo(echo);
        if (ben_data.empty())
            throw format_error("no data directory: pass --data or set SOB_DATA_DIR");
        return run_bench(ben_data, ben_sets, ben_strategies, ben_budgets, ben_out, ben_baseline,
                         ben_seed, ben_threshold, ben_flags, echo);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

} // namespace sob
