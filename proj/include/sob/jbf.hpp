#pragma once

#include <cstdint>
#include <vector>

#include "sob/costvolume.hpp"
#include "sob/image.hpp"

namespace sob {

/// Joint bilateral filter parameters. The spatial kernel is a Gaussian of
/// scale sigma_s truncated at `radius` (default ceil(3*sigma_s)); the range
/// kernel is a Gaussian of scale sigma_r on guide differences (Euclidean
/// over channels, divided by sqrt(channels) so sigma_r stays comparable
/// between gray and color guides). Guides are treated as 8-bit content:
/// channels are rounded to integers on entry, which makes the range kernel
/// an exact table lookup.
struct FilterParams {
    double sigma_s = 3.0;
    double sigma_r = 20.0;
    int radius = 0; // 0 = ceil(3*sigma_s)
};

int effective_radius(const FilterParams& p);

/// Exact windowed joint bilateral filter. The window clips at image borders
/// and the weights are normalized over the included taps, matching the
/// sparse variant at full occupancy exactly.
Image jbf_dense(const Image& target, const Image& guide, const FilterParams& p);

/// Constant-time-per-pixel approximation: shiftable trigonometric expansion
/// of the range kernel plus box-chain spatial blurs. Color guides are
/// reduced to luma. Documented tolerance: within 1 intensity level of
/// jbf_dense for sigma_r >= 10 on 8-bit content.
Image jbf_dense_fast(const Image& target, const Image& guide, const FilterParams& p);

/// One sparse plane: values are meaningful where occupancy is set.
struct SparseLayer {
    int width = 0;
    int height = 0;
    const float* values = nullptr;
    const uint8_t* occupancy = nullptr;
};

struct DensifiedLayer {
    std::vector<float> values;
    std::vector<uint8_t> resolved; // 0 where no occupied tap fell in the window
};

/// Sparse-normalized JBF (the occupancy-indicator form): output(x,y) is the
/// F-weighted mean of occupied entries in the window; pixels with no
/// occupied support are reported unresolved, not failed.
DensifiedLayer jbf_sparse_layer(const SparseLayer& layer, const Image& guide,
                                const FilterParams& p);

/// Applies jbf_sparse_layer to every disparity layer with a shared guide.
/// Unresolved entries receive the layer's maximum resolved cost (pessimistic
/// fill) and stay flagged in the occupancy planes.
CostVolume densify_dsi(const CostVolume& v, const Image& guide, const FilterParams& p);

} // namespace sob
