#pragma once

#include <cstdint>
#include <vector>

#include "sob/image.hpp"
#include "sob/jbf.hpp"
#include "sob/matcher.hpp"
#include "sob/sampling.hpp"

namespace sob {

/// Right-view synthesis plus its hole mask. Occluded pixels carry intensity
/// 0 and are excluded from PSNR accounting.
struct WarpResult {
    Image image;
    std::vector<uint8_t> occlusion; // 1 = hole

    bool occluded(int x, int y) const {
        return occlusion[static_cast<size_t>(y) * image.width() + x] != 0;
    }
};

/// Forward-warps each source pixel (x,y) to (x+d, y); collisions keep the
/// largest disparity (nearest surface), untouched targets become holes.
WarpResult warp(const Image& I1, const DisparityMap& d);

/// Fills holes from the payload: upsampled raster for downsample payloads,
/// low-passed interpolation of the samples for point payloads. Non-occluded
/// pixels are untouched.
Image inpaint(const WarpResult& w, const SampleSet& payload);

/// Sharpen the non-occluded area with the exact transmitted samples: densify
/// the sparse (payload - warp) residual with the warp as JBF guide and add
/// it back. Occluded pixels are untouched.
Image enhance(const WarpResult& w, const SampleSet& payload, const FilterParams& p);

/// 10*log10(255^2/MSE), averaged over channels, over pixels where mask (if
/// given) is nonzero. Identical inputs return +infinity. Throws when every
/// pixel is masked out.
double psnr(const Image& a, const Image& b, const std::vector<uint8_t>* mask = nullptr);

} // namespace sob
