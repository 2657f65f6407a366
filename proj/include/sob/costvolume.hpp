#pragma once

#include <cstdint>
#include <vector>

#include "sob/image.hpp"
#include "sob/sampling.hpp"

namespace sob {

/// W x H x (dmax+1) matching-cost volume, layer-major (one contiguous W*H
/// plane per disparity) so per-layer filtering streams memory. Occupancy
/// tracks which entries hold data: everything in-bounds for full volumes,
/// the transmitted support for sparse ones, the resolved mask after
/// densification.
class CostVolume {
public:
    CostVolume() = default;
    CostVolume(int width, int height, int dmax, bool values_complete);

    int width() const { return width_; }
    int height() const { return height_; }
    int dmax() const { return dmax_; }
    int layers() const { return dmax_ + 1; }
    /// True when every entry carries a meaningful cost (full or densified
    /// volumes); sparse volumes only hold data where occupied.
    bool values_complete() const { return values_complete_; }
    void set_values_complete(bool v) { values_complete_ = v; }

    size_t plane_size() const { return static_cast<size_t>(width_) * height_; }
    float* layer(int d) { return costs_.data() + plane_size() * static_cast<size_t>(d); }
    const float* layer(int d) const {
        return costs_.data() + plane_size() * static_cast<size_t>(d);
    }
    uint8_t* occupancy_layer(int d) {
        return occupancy_.data() + plane_size() * static_cast<size_t>(d);
    }
    const uint8_t* occupancy_layer(int d) const {
        return occupancy_.data() + plane_size() * static_cast<size_t>(d);
    }

    float cost(int x, int y, int d) const {
        return layer(d)[static_cast<size_t>(y) * width_ + x];
    }
    bool occupied(int x, int y, int d) const {
        return occupancy_layer(d)[static_cast<size_t>(y) * width_ + x] != 0;
    }
    void set(int x, int y, int d, float cost, bool occupied) {
        const size_t i = static_cast<size_t>(y) * width_ + x;
        layer(d)[i] = cost;
        occupancy_layer(d)[i] = occupied ? 1 : 0;
    }

    size_t occupied_count() const;
    bool layer_fully_occupied(int d) const;

private:
    int width_ = 0;
    int height_ = 0;
    int dmax_ = 0;
    bool values_complete_ = false;
    std::vector<float> costs_;
    std::vector<uint8_t> occupancy_;
};

enum class CostMode {
    luma,        // |I1 - I2| on 1-channel inputs
    channel_sum, // sum of per-channel absolute differences
};

/// D(x,y,d) = |I1(x,y) - I2(x+d,y)|. Entries whose x+d falls outside I2 are
/// unoccupied (cost 0); everything else is occupied.
CostVolume dsi_full(const Image& I1, const Image& I2, int dmax,
                    CostMode mode = CostMode::luma);

/// Same cost, but the second image is probed at x + direction*d; direction
/// -1 builds the right-reference volume used for the left-right check.
CostVolume dsi_full_directed(const Image& reference, const Image& other, int dmax,
                             int direction, CostMode mode = CostMode::luma);

/// Sparse DSI: each payload sample (u,y,v) occupies (u-d, y, d) for every
/// in-bounds d with cost max(|I1(u-d,y) - v|, delta); delta keeps true zero
/// cost distinguishable from missing data.
CostVolume dsi_sparse(const Image& I1, const SampleSet& payload, int dmax, double delta,
                      CostMode mode = CostMode::luma);

/// Right-reference counterpart: the same sample matches live at the sample's
/// own column, cost(u,y,d) = max(|v - I1(u-d,y)|, delta). Used to build the
/// second map for the hybrid left-right check.
CostVolume dsi_sparse_right(const Image& I1, const SampleSet& payload, int dmax, double delta,
                            CostMode mode = CostMode::luma);

/// Elementwise w*a + (1-w)*b where both occupied; single-occupied entries are
/// copied and stay occupied. w == 1 or w == 0 returns the respective input.
CostVolume blend(const CostVolume& a, const CostVolume& b, double w);

/// Bandwidth oracle: every layer is resized down by sqrt(fraction) per axis
/// (anti-aliased) and bilinearly restored, modeling the best encoding at
/// that budget.
CostVolume lower_bound_dsi(const CostVolume& full, double fraction);

/// Debug dump of one disparity layer as PFM (unoccupied entries as -1).
void dump_layer_pfm(const CostVolume& v, int d, const std::string& path);

} // namespace sob
