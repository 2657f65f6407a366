#include "sob/pipeline.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

namespace sob {

namespace {

void check_payload_size(const Image& I1, const SampleSet& payload, const char* who) {
    if (I1.width() != payload.source_width || I1.height() != payload.source_height)
        throw std::invalid_argument(std::string(who) + ": payload dimensions mismatch");
}

Image cost_view(const Image& img, CostMode mode) {
    return mode == CostMode::luma ? to_grayscale(img) : img;
}

// Cross-check, then either the scanline refill alone or the tree-based
// refinement on top of it.
DisparityMap apply_lr(const DisparityMap& d_left, const DisparityMap& d_right,
                      const Image& guide, const PipelineParams& p) {
    const DisparityMap checked = lr_consistency(d_left, d_right, p.lr_threshold);
    return p.lr_refine ? lr_refine(checked, guide, p.sigma_tree) : checked;
}

// Full-image matcher shared by the Downsample route and the Hybrid bottom
// route: both images are dense, so the left map can be cross-checked against
// the right-reference map.
DisparityMap match_dense_pair(const Image& left, const Image& right, const Image& guide_left,
                              const Image& guide_right, const PipelineParams& p) {
    const Image lc = cost_view(left, p.cost_mode);
    const Image rc = cost_view(right, p.cost_mode);
    CostVolume vol = aggregate(dsi_full(lc, rc, p.dmax, p.cost_mode), guide_left, p.sigma_tree);
    DisparityMap d_left = select_disparity(vol);
    if (!p.lr_check) return d_left;
    CostVolume vol_r = aggregate(dsi_full_directed(rc, lc, p.dmax, -1, p.cost_mode),
                                 guide_right, p.sigma_tree);
    return apply_lr(d_left, select_disparity(vol_r), guide_left, p);
}

} // namespace

double resolve_sigma_s(const PipelineParams& p, const SampleSet& payload) {
    if (p.filter.sigma_s > 0.0) return p.filter.sigma_s;
    return p.sigma_s_mult * payload.equivalent_spacing();
}

DisparityMap run_downsample_pipeline(const Image& I1, const SampleSet& payload,
                                     const PipelineParams& p) {
    const auto* scheme = std::get_if<DownsampleScheme>(&payload.scheme);
    if (!scheme)
        throw std::invalid_argument("run_downsample_pipeline: downsample payload required");
    check_payload_size(I1, payload, "run_downsample_pipeline");

    const Image up = resize_to(payload.lowres, payload.source_width, payload.source_height,
                               ResizeMode::upsample_bilinear);
    // Match the spectra: the payload lost everything above the decimation
    // band, so I1 must lose it too. No decimation at factor 1.
    const double sigma = scheme->factor > 1 ? p.antialias_scale * scheme->factor : 0.0;
    const Image I1s = p.smooth_left ? gaussian_smooth(I1, sigma) : I1;
    return match_dense_pair(I1s, up, I1s, up, p);
}

DisparityMap run_sparse_pipeline(const Image& I1, const SampleSet& payload,
                                 const PipelineParams& p) {
    if (!payload.is_point_scheme())
        throw std::invalid_argument("run_sparse_pipeline: point-scheme payload required");
    check_payload_size(I1, payload, "run_sparse_pipeline");

    const Image lc = cost_view(I1, p.cost_mode);
    const size_t n_pixels = static_cast<size_t>(I1.width()) * I1.height();
    CostVolume vol = dsi_sparse(lc, payload, p.dmax, p.delta, p.cost_mode);
    if (payload.samples.size() < n_pixels) {
        FilterParams f = p.filter;
        f.sigma_s = resolve_sigma_s(p, payload);
        vol = densify_dsi(vol, I1, f);
    } else {
        vol.set_values_complete(true); // a 100% payload needs no densification
    }
    return select_disparity(aggregate(vol, I1, p.sigma_tree));
}

DisparityMap run_hybrid_pipeline(const Image& I1, const SampleSet& payload,
                                 const PipelineParams& p) {
    if (!payload.is_point_scheme())
        throw std::invalid_argument("run_hybrid_pipeline: point-scheme payload required");
    check_payload_size(I1, payload, "run_hybrid_pipeline");

    const double spacing = payload.equivalent_spacing();
    const Image lc = cost_view(I1, p.cost_mode);
    const size_t n_pixels = static_cast<size_t>(I1.width()) * I1.height();

    // Top route: the Sparse estimate.
    CostVolume route_a = dsi_sparse(lc, payload, p.dmax, p.delta, p.cost_mode);
    if (payload.samples.size() < n_pixels) {
        FilterParams f = p.filter;
        f.sigma_s = resolve_sigma_s(p, payload);
        route_a = densify_dsi(route_a, I1, f);
    } else {
        route_a.set_values_complete(true);
    }

    // Bottom route: interpolate the samples, low-pass against aliasing, and
    // smooth I1 identically, as in Downsample.
    const double sigma = spacing > 1.0 ? p.antialias_scale * spacing : 0.0;
    const Image interp = gaussian_smooth(interpolate_samples(payload), sigma);
    const Image I1s = gaussian_smooth(I1, sigma);
    CostVolume route_b =
        dsi_full(cost_view(I1s, p.cost_mode), cost_view(interp, p.cost_mode), p.dmax, p.cost_mode);

    CostVolume vol = aggregate(blend(route_a, route_b, p.hybrid_weight), I1, p.sigma_tree);
    DisparityMap d_left = select_disparity(vol);
    if (!p.lr_check) return d_left;

    // The interpolated right image makes the cross-check possible again. The
    // right-reference map mirrors the hybrid construction so both maps carry
    // comparable quality: exact samples anchored at their own columns,
    // blended with the interpolated route.
    CostVolume route_a_r = dsi_sparse_right(lc, payload, p.dmax, p.delta, p.cost_mode);
    if (payload.samples.size() < n_pixels) {
        FilterParams f = p.filter;
        f.sigma_s = resolve_sigma_s(p, payload);
        route_a_r = densify_dsi(route_a_r, interp, f);
    } else {
        route_a_r.set_values_complete(true);
    }
    CostVolume route_b_r = dsi_full_directed(cost_view(interp, p.cost_mode),
                                             cost_view(I1s, p.cost_mode), p.dmax, -1,
                                             p.cost_mode);
    CostVolume vol_r =
        aggregate(blend(route_a_r, route_b_r, p.hybrid_weight), interp, p.sigma_tree);
    return apply_lr(d_left, select_disparity(vol_r), I1, p);
}

} // namespace sob
