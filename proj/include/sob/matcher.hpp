#pragma once

#include <cstdint>
#include <vector>

#include "sob/costvolume.hpp"
#include "sob/image.hpp"

namespace sob {

/// Integer disparity field plus per-pixel stability. Stability is false only
/// where a left-right check ran and failed; pipelines without a check leave
/// it all-true.
struct DisparityMap {
    int width = 0;
    int height = 0;
    int dmax = 0;
    std::vector<int16_t> disparity;
    std::vector<uint8_t> stability;

    int at(int x, int y) const { return disparity[static_cast<size_t>(y) * width + x]; }
    bool stable(int x, int y) const {
        return stability[static_cast<size_t>(y) * width + x] != 0;
    }
};

/// The spanning tree aggregate() runs on, rooted at pixel 0: parent[i] is the
/// BFS parent (-1 at the root), weight[i] the guide difference on the parent
/// edge, order the BFS visit sequence. Exposed so the two-pass recursion can
/// be checked against direct all-pairs summation.
struct MstEdges {
    std::vector<int32_t> parent;
    std::vector<uint8_t> weight;
    std::vector<int32_t> order;
};

/// Minimum spanning tree of the 4-connected pixel grid with edge weight
/// max_c |guide(p) - guide(q)|, built with counting-sort Kruskal (ties in
/// scan order: per pixel, right edge before down edge).
MstEdges build_guide_mst(const Image& guide);

/// Non-local cost aggregation on the guide's spanning tree. Each layer is
/// replaced by the similarity-weighted mean over the whole tree,
/// S(p,q) = exp(-dist_tree(p,q)/sigma_tree), normalized over the layer's
/// occupied support so constant layers are fixed points.
CostVolume aggregate(const CostVolume& v, const Image& guide, double sigma_tree);

/// Winner-take-all: per-pixel argmin over occupied disparities, ties to the
/// smallest d.
DisparityMap select_disparity(const CostVolume& v);

/// Marks (x,y) stable iff |d_left(x,y) - d_right(x + d_left(x,y), y)| <=
/// threshold under the I1(x) <-> I2(x+d) convention; unstable pixels take
/// the smaller of the two nearest stable disparities on the row (the
/// background side) and keep stability false.
DisparityMap lr_consistency(const DisparityMap& d_left, const DisparityMap& d_right,
                            int threshold);

/// Tree-based refinement of a cross-checked map: costs |d - D(p)| at stable
/// pixels are aggregated on the guide's spanning tree and re-selected, so
/// unstable pixels take a structure-weighted consensus instead of a scanline
/// fill. Stability flags pass through.
DisparityMap lr_refine(const DisparityMap& checked, const Image& guide, double sigma_tree);

} // namespace sob
