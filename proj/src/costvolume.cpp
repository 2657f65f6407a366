#include "sob/costvolume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sob/image_io.hpp"
#include "sob/parallel.hpp"

namespace sob {

CostVolume::CostVolume(int width, int height, int dmax, bool values_complete) {
    if (width < 1 || height < 1) throw std::invalid_argument("CostVolume: bad dimensions");
    if (dmax < 0) throw std::invalid_argument("CostVolume: dmax must be >= 0");
    width_ = width;
    height_ = height;
    dmax_ = dmax;
    values_complete_ = values_complete;
    const size_t n = plane_size() * static_cast<size_t>(dmax + 1);
    costs_.assign(n, 0.0f);
    occupancy_.assign(n, 0);
}

size_t CostVolume::occupied_count() const {
    size_t n = 0;
    for (uint8_t o : occupancy_) n += o;
    return n;
}

bool CostVolume::layer_fully_occupied(int d) const {
    const uint8_t* occ = occupancy_layer(d);
    const size_t n = plane_size();
    for (size_t i = 0; i < n; ++i)
        if (!occ[i]) return false;
    return true;
}

namespace {

// Smallest float not below delta, so stored floor costs satisfy cost >= delta
// under double comparison.
float delta_floor(double delta) {
    float f = static_cast<float>(delta);
    if (static_cast<double>(f) < delta) f = std::nextafterf(f, std::numeric_limits<float>::max());
    return f;
}

float pixel_cost(const Image& a, int ax, int ay, const Image& b, int bx, int by,
                 CostMode mode) {
    if (mode == CostMode::luma) return std::fabs(a.at(ax, ay) - b.at(bx, by));
    float sum = 0.0f;
    for (int c = 0; c < a.channels(); ++c) sum += std::fabs(a.at(ax, ay, c) - b.at(bx, by, c));
    return sum;
}

void check_cost_inputs(const Image& a, const Image& b, CostMode mode, const char* who) {
    if (!a.same_size(b)) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
    if (mode == CostMode::luma && (a.channels() != 1 || b.channels() != 1))
        throw std::invalid_argument(std::string(who) + ": luma mode expects grayscale inputs");
    if (a.channels() != b.channels())
        throw std::invalid_argument(std::string(who) + ": channel mismatch");
}

} // namespace

CostVolume dsi_full_directed(const Image& reference, const Image& other, int dmax,
                             int direction, CostMode mode) {
    check_cost_inputs(reference, other, mode, "dsi_full");
    if (dmax < 0) throw std::invalid_argument("dsi_full: dmax must be >= 0");
    const int w = reference.width(), h = reference.height();
    CostVolume vol(w, h, dmax, true);
    parallel_for(dmax + 1, [&](int d) {
        float* cost = vol.layer(d);
        uint8_t* occ = vol.occupancy_layer(d);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int ox = x + direction * d;
                const size_t i = static_cast<size_t>(y) * w + x;
                if (ox < 0 || ox >= w) continue; // out of bounds: unoccupied
                cost[i] = pixel_cost(reference, x, y, other, ox, y, mode);
                occ[i] = 1;
            }
    });
    return vol;
}

CostVolume dsi_full(const Image& I1, const Image& I2, int dmax, CostMode mode) {
    return dsi_full_directed(I1, I2, dmax, +1, mode);
}

CostVolume dsi_sparse(const Image& I1, const SampleSet& payload, int dmax, double delta,
                      CostMode mode) {
    if (!payload.is_point_scheme())
        throw std::invalid_argument("dsi_sparse: point-scheme payload required");
    if (I1.width() != payload.source_width || I1.height() != payload.source_height)
        throw std::invalid_argument("dsi_sparse: payload dimensions mismatch");
    if (mode == CostMode::luma && I1.channels() != 1)
        throw std::invalid_argument("dsi_sparse: luma mode expects a grayscale I1");
    if (mode == CostMode::channel_sum && I1.channels() != payload.channels)
        throw std::invalid_argument("dsi_sparse: channel mismatch");
    if (dmax < 0) throw std::invalid_argument("dsi_sparse: dmax must be >= 0");

    const int w = I1.width(), h = I1.height();
    const float floor_cost = delta_floor(delta);
    CostVolume vol(w, h, dmax, false);
    parallel_for(dmax + 1, [&](int d) {
        float* cost = vol.layer(d);
        uint8_t* occ = vol.occupancy_layer(d);
        for (const PointSample& s : payload.samples) {
            const int x = s.x - d;
            if (x < 0 || x >= w) continue;
            float c;
            if (mode == CostMode::luma) {
                c = std::fabs(I1.at(x, s.y) - payload.sample_luma(s));
            } else {
                c = 0.0f;
                for (int ch = 0; ch < I1.channels(); ++ch)
                    c += std::fabs(I1.at(x, s.y, ch) - s.value[static_cast<size_t>(ch)]);
            }
            const size_t i = static_cast<size_t>(s.y) * w + x;
            cost[i] = std::max(c, floor_cost);
            occ[i] = 1;
        }
    });
    return vol;
}

CostVolume dsi_sparse_right(const Image& I1, const SampleSet& payload, int dmax, double delta,
                            CostMode mode) {
    if (!payload.is_point_scheme())
        throw std::invalid_argument("dsi_sparse_right: point-scheme payload required");
    if (I1.width() != payload.source_width || I1.height() != payload.source_height)
        throw std::invalid_argument("dsi_sparse_right: payload dimensions mismatch");
    if (mode == CostMode::luma && I1.channels() != 1)
        throw std::invalid_argument("dsi_sparse_right: luma mode expects a grayscale I1");
    if (dmax < 0) throw std::invalid_argument("dsi_sparse_right: dmax must be >= 0");

    const int w = I1.width();
    const float floor_cost = delta_floor(delta);
    CostVolume vol(w, I1.height(), dmax, false);
    parallel_for(dmax + 1, [&](int d) {
        float* cost = vol.layer(d);
        uint8_t* occ = vol.occupancy_layer(d);
        for (const PointSample& s : payload.samples) {
            const int x = s.x - d;
            if (x < 0 || x >= w) continue;
            float c;
            if (mode == CostMode::luma) {
                c = std::fabs(payload.sample_luma(s) - I1.at(x, s.y));
            } else {
                c = 0.0f;
                for (int ch = 0; ch < I1.channels(); ++ch)
                    c += std::fabs(s.value[static_cast<size_t>(ch)] - I1.at(x, s.y, ch));
            }
            const size_t i = static_cast<size_t>(s.y) * w + s.x;
            cost[i] = std::max(c, floor_cost);
            occ[i] = 1;
        }
    });
    return vol;
}

CostVolume blend(const CostVolume& a, const CostVolume& b, double w) {
    if (a.width() != b.width() || a.height() != b.height() || a.dmax() != b.dmax())
        throw std::invalid_argument("blend: dimension mismatch");
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("blend: weight must be in [0,1]");
    if (w == 1.0) return a;
    if (w == 0.0) return b;

    CostVolume out(a.width(), a.height(), a.dmax(), a.values_complete() && b.values_complete());
    const float wa = static_cast<float>(w), wb = static_cast<float>(1.0 - w);
    parallel_for(a.layers(), [&](int d) {
        const float* ca = a.layer(d);
        const float* cb = b.layer(d);
        const uint8_t* oa = a.occupancy_layer(d);
        const uint8_t* ob = b.occupancy_layer(d);
        float* co = out.layer(d);
        uint8_t* oo = out.occupancy_layer(d);
        const size_t n = a.plane_size();
        for (size_t i = 0; i < n; ++i) {
            if (oa[i] && ob[i]) {
                co[i] = wa * ca[i] + wb * cb[i];
                oo[i] = 1;
            } else if (oa[i]) {
                co[i] = ca[i];
                oo[i] = 1;
            } else if (ob[i]) {
                co[i] = cb[i];
                oo[i] = 1;
            } else if (out.values_complete()) {
                co[i] = wa * ca[i] + wb * cb[i];
            }
        }
    });
    return out;
}

CostVolume lower_bound_dsi(const CostVolume& full, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("lower_bound_dsi: fraction must be in (0,1]");
    if (!full.values_complete())
        throw std::invalid_argument("lower_bound_dsi: dense volume required");
    if (fraction == 1.0) return full;

    const int w = full.width(), h = full.height();
    const double axis_scale = std::sqrt(fraction);
    const int lw = std::max(1, static_cast<int>(std::ceil(w * axis_scale - 1e-6)));
    const int lh = std::max(1, static_cast<int>(std::ceil(h * axis_scale - 1e-6)));

    CostVolume out(w, h, full.dmax(), true);
    parallel_for(full.layers(), [&](int d) {
        // Round-trip each layer through the reduced-bandwidth size. Costs are
        // not intensities, so the resize runs on a raw plane carrier.
        Image plane(w, h, 1);
        const float* src = full.layer(d);
        std::copy(src, src + full.plane_size(), plane.data().begin());
        Image low = resize_to(plane, lw, lh, ResizeMode::downsample_antialias);
        Image up = resize_to(low, w, h, ResizeMode::upsample_bilinear);
        std::copy(up.data().begin(), up.data().end(), out.layer(d));
        std::copy(full.occupancy_layer(d), full.occupancy_layer(d) + full.plane_size(),
                  out.occupancy_layer(d));
    });
    return out;
}

void dump_layer_pfm(const CostVolume& v, int d, const std::string& path) {
    if (d < 0 || d > v.dmax()) throw std::invalid_argument("dump_layer_pfm: layer out of range");
    FloatMap map;
    map.width = v.width();
    map.height = v.height();
    map.values.resize(v.plane_size());
    const float* cost = v.layer(d);
    const uint8_t* occ = v.occupancy_layer(d);
    for (size_t i = 0; i < map.values.size(); ++i)
        map.values[i] = occ[i] ? cost[i] : -1.0f;
    write_pfm(path, map);
}

} // namespace sob
