#pragma once

#include "sob/image.hpp"
#include "sob/jbf.hpp"
#include "sob/matcher.hpp"
#include "sob/sampling.hpp"

namespace sob {

/// Decoder-side knobs. Defaults reproduce the reference settings:
/// sigma_r = 20, sigma_s = 3 * (grid spacing), delta = 1e-6, hybrid weight
/// 0.5, LR threshold 1. sigma_s == 0 means "derive from the payload spacing"
/// (non-grid schemes use sqrt(W*H/|samples|)).
struct PipelineParams {
    int dmax = 15;
    double hybrid_weight = 0.5;
    FilterParams filter{0.0, 20.0, 0};
    double sigma_s_mult = 3.0;
    double sigma_tree = 25.5;
    int lr_threshold = 1;
    double delta = 1e-6;
    bool smooth_left = true; // Downsample route: smooth I1 to match the payload
    double antialias_scale = 0.5; // sigma = scale * decimation factor
    bool lr_check = true;
    bool lr_refine = true; // tree refinement instead of the scanline refill
    CostMode cost_mode = CostMode::luma;
};

/// Resolved sigma_s for a payload under these params.
double resolve_sigma_s(const PipelineParams& p, const SampleSet& payload);

/// Decimated-payload route: upsample the low-res raster, smooth I1 to match its
/// spectrum, full DSI, aggregate, select, LR check in both directions.
DisparityMap run_downsample_pipeline(const Image& I1, const SampleSet& payload,
                                     const PipelineParams& p);

/// Sample-payload route: sparse DSI from the samples, densify each layer with a joint
/// bilateral filter guided by I1, aggregate, select. No LR check is possible.
DisparityMap run_sparse_pipeline(const Image& I1, const SampleSet& payload,
                                 const PipelineParams& p);

/// Combined route: blend the densified sparse DSI with a DSI built from the
/// low-passed interpolation of the samples, aggregate once, select, then LR
/// check against the interpolated right image.
DisparityMap run_hybrid_pipeline(const Image& I1, const SampleSet& payload,
                                 const PipelineParams& p);

} // namespace sob
