#include "sob/jbf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "sob/parallel.hpp"

namespace sob {

namespace {

void check_params(const FilterParams& p) {
    if (!(p.sigma_s > 0.0)) throw std::invalid_argument("FilterParams: sigma_s must be > 0");
    if (!(p.sigma_r > 0.0)) throw std::invalid_argument("FilterParams: sigma_r must be > 0");
    if (p.radius < 0) throw std::invalid_argument("FilterParams: radius must be >= 0");
}

// Guide content rounded to 8 bits, planar per channel.
struct ByteGuide {
    int w = 0, h = 0, ch = 0;
    std::vector<uint8_t> planes; // ch planes of w*h

    const uint8_t* plane(int c) const {
        return planes.data() + static_cast<size_t>(c) * w * h;
    }
};

ByteGuide quantize_guide(const Image& guide) {
    ByteGuide g;
    g.w = guide.width();
    g.h = guide.height();
    g.ch = guide.channels();
    g.planes.resize(static_cast<size_t>(g.w) * g.h * g.ch);
    for (int c = 0; c < g.ch; ++c) {
        uint8_t* out = g.planes.data() + static_cast<size_t>(c) * g.w * g.h;
        size_t i = 0;
        for (int y = 0; y < g.h; ++y)
            for (int x = 0; x < g.w; ++x)
                out[i++] = static_cast<uint8_t>(
                    std::clamp(std::lround(guide.at(x, y, c)), 0L, 255L));
    }
    return g;
}

// Range weights indexed by the squared per-channel difference sum; the
// Euclidean-over-sqrt(channels) distance of the kernel definition appears as
// ssd/ch inside the exponent.
std::vector<double> range_lut(double sigma_r, int channels) {
    const size_t n = static_cast<size_t>(channels) * 255 * 255 + 1;
    std::vector<double> lut(n);
    const double inv = 1.0 / (2.0 * sigma_r * sigma_r * channels);
    for (size_t s = 0; s < n; ++s) lut[s] = std::exp(-static_cast<double>(s) * inv);
    return lut;
}

std::vector<double> spatial_lut(double sigma_s, int radius) {
    const int side = 2 * radius + 1;
    std::vector<double> lut(static_cast<size_t>(side) * side);
    const double inv = 1.0 / (2.0 * sigma_s * sigma_s);
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            lut[static_cast<size_t>(dy + radius) * side + (dx + radius)] =
                std::exp(-(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy) * inv);
    return lut;
}

int guide_ssd(const ByteGuide& g, size_t a, size_t b) {
    int ssd = 0;
    for (int c = 0; c < g.ch; ++c) {
        const uint8_t* p = g.plane(c);
        const int d = static_cast<int>(p[a]) - static_cast<int>(p[b]);
        ssd += d * d;
    }
    return ssd;
}

} // namespace

int effective_radius(const FilterParams& p) {
    check_params(p);
    return p.radius > 0 ? p.radius : static_cast<int>(std::ceil(3.0 * p.sigma_s));
}

Image jbf_dense(const Image& target, const Image& guide, const FilterParams& p) {
    if (!target.same_size(guide)) throw std::invalid_argument("jbf_dense: dimension mismatch");
    const int r = effective_radius(p);
    const int w = target.width(), h = target.height(), ch = target.channels();
    const ByteGuide g = quantize_guide(guide);
    const std::vector<double> g_lut = range_lut(p.sigma_r, g.ch);
    const std::vector<double> f_lut = spatial_lut(p.sigma_s, r);
    const int side = 2 * r + 1;

    Image out(w, h, ch);
    parallel_for(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const size_t pi = static_cast<size_t>(y) * w + x;
            double num[3] = {0.0, 0.0, 0.0};
            double den = 0.0;
            const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
            const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            for (int qy = y0; qy <= y1; ++qy)
                for (int qx = x0; qx <= x1; ++qx) {
                    const size_t qi = static_cast<size_t>(qy) * w + qx;
                    const double wgt =
                        f_lut[static_cast<size_t>(qy - y + r) * side + (qx - x + r)] *
                        g_lut[static_cast<size_t>(guide_ssd(g, pi, qi))];
                    den += wgt;
                    for (int c = 0; c < ch; ++c) num[c] += wgt * target.at(qx, qy, c);
                }
            for (int c = 0; c < ch; ++c) out.at(x, y, c) = static_cast<float>(num[c] / den);
        }
    });
    return out;
}

DensifiedLayer jbf_sparse_layer(const SparseLayer& layer, const Image& guide,
                                const FilterParams& p) {
    if (layer.width != guide.width() || layer.height != guide.height())
        throw std::invalid_argument("jbf_sparse_layer: dimension mismatch");
    const int r = effective_radius(p);
    const int w = layer.width, h = layer.height;
    const ByteGuide g = quantize_guide(guide);
    const std::vector<double> g_lut = range_lut(p.sigma_r, g.ch);
    const std::vector<double> f_lut = spatial_lut(p.sigma_s, r);
    const int side = 2 * r + 1;
    const size_t n = static_cast<size_t>(w) * h;

    // Scatter each occupied entry into its window; this is the direct
    // truncated-window sum with the loops reordered, so it stays exact while
    // costing O(|occupied| * r^2) instead of O(W*H*r^2).
    std::vector<double> num(n, 0.0), den(n, 0.0);
    for (int sy = 0; sy < h; ++sy)
        for (int sx = 0; sx < w; ++sx) {
            const size_t si = static_cast<size_t>(sy) * w + sx;
            if (!layer.occupancy[si]) continue;
            const double v = layer.values[si];
            const int y0 = std::max(0, sy - r), y1 = std::min(h - 1, sy + r);
            const int x0 = std::max(0, sx - r), x1 = std::min(w - 1, sx + r);
            for (int qy = y0; qy <= y1; ++qy) {
                const size_t row = static_cast<size_t>(qy) * w;
                const double* f_row = &f_lut[static_cast<size_t>(qy - sy + r) * side + r];
                for (int qx = x0; qx <= x1; ++qx) {
                    const size_t qi = row + qx;
                    const double wgt =
                        f_row[qx - sx] * g_lut[static_cast<size_t>(guide_ssd(g, qi, si))];
                    num[qi] += wgt * v;
                    den[qi] += wgt;
                }
            }
        }

    DensifiedLayer out;
    out.values.resize(n, 0.0f);
    out.resolved.resize(n, 0);
    for (size_t i = 0; i < n; ++i)
        if (den[i] > 0.0) {
            out.values[i] = static_cast<float>(num[i] / den[i]);
            out.resolved[i] = 1;
        }
    return out;
}

CostVolume densify_dsi(const CostVolume& v, const Image& guide, const FilterParams& p) {
    if (v.width() != guide.width() || v.height() != guide.height())
        throw std::invalid_argument("densify_dsi: dimension mismatch");
    check_params(p);

    CostVolume out(v.width(), v.height(), v.dmax(), true);
    parallel_for(v.layers(), [&](int d) {
        SparseLayer layer{v.width(), v.height(), v.layer(d), v.occupancy_layer(d)};
        DensifiedLayer dense = jbf_sparse_layer(layer, guide, p);
        float layer_max = 0.0f;
        for (size_t i = 0; i < dense.values.size(); ++i)
            if (dense.resolved[i]) layer_max = std::max(layer_max, dense.values[i]);
        float* cost = out.layer(d);
        uint8_t* occ = out.occupancy_layer(d);
        for (size_t i = 0; i < dense.values.size(); ++i) {
            cost[i] = dense.resolved[i] ? std::max(dense.values[i], 0.0f) : layer_max;
            occ[i] = dense.resolved[i];
        }
    });
    return out;
}

namespace {

// Separable truncated-Gaussian blur with zero padding. Zero padding matters:
// numerator and denominator are blurred the same way, so their ratio
// normalizes over in-image taps exactly as the windowed filters do.
void gaussian_blur_plane(std::vector<double>& plane, int w, int h, double sigma, int radius) {
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    for (int i = -radius; i <= radius; ++i)
        kernel[static_cast<size_t>(i + radius)] =
            std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));

    std::vector<double> tmp(plane.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        const double* row = &plane[static_cast<size_t>(y) * w];
        double* out = &tmp[static_cast<size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            const int lo = std::max(-radius, -x), hi = std::min(radius, w - 1 - x);
            for (int i = lo; i <= hi; ++i)
                acc += kernel[static_cast<size_t>(i + radius)] * row[x + i];
            out[x] = acc;
        }
    }
    for (int x = 0; x < w; ++x)
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            const int lo = std::max(-radius, -y), hi = std::min(radius, h - 1 - y);
            for (int i = lo; i <= hi; ++i)
                acc += kernel[static_cast<size_t>(i + radius)] *
                       tmp[static_cast<size_t>(y + i) * w + x];
            plane[static_cast<size_t>(y) * w + x] = acc;
        }
}

} // namespace

Image jbf_dense_fast(const Image& target, const Image& guide, const FilterParams& p) {
    if (!target.same_size(guide))
        throw std::invalid_argument("jbf_dense_fast: dimension mismatch");
    check_params(p);
    const int w = target.width(), h = target.height(), ch = target.channels();
    const int radius = effective_radius(p);
    const size_t n = static_cast<size_t>(w) * h;

    // Scalar guide: luma for color inputs.
    const Image guide_gray = to_grayscale(guide);
    std::vector<double> u(n);
    {
        size_t i = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                u[i++] = std::clamp(std::lround(guide_gray.at(x, y)), 0L, 255L);
    }

    // Fourier-cosine expansion of the Gaussian range kernel over period 512:
    // g(t) ~= sum_k a_k cos(k*omega*t). Terms beyond the spectral decay are
    // dropped; K grows as sigma_r shrinks.
    const double omega = M_PI / 256.0;
    const int K = std::clamp(static_cast<int>(std::ceil(4.0 * 256.0 / (M_PI * p.sigma_r))), 1, 64);
    std::vector<double> coeff(static_cast<size_t>(K) + 1, 0.0);
    for (int t = -256; t < 256; ++t) {
        const double gval = std::exp(-(static_cast<double>(t) * t) /
                                     (2.0 * p.sigma_r * p.sigma_r));
        coeff[0] += gval / 512.0;
        for (int k = 1; k <= K; ++k) coeff[static_cast<size_t>(k)] += gval * std::cos(k * omega * t) / 256.0;
    }

    Image out(w, h, ch);
    std::vector<double> numacc(n * static_cast<size_t>(ch), 0.0), denacc(n, 0.0);
    std::vector<double> cosU(n), sinU(n), blurred(n), modulated(n);
    for (int k = 0; k <= K; ++k) {
        const double a = coeff[static_cast<size_t>(k)];
        for (size_t i = 0; i < n; ++i) {
            cosU[i] = std::cos(k * omega * u[i]);
            sinU[i] = std::sin(k * omega * u[i]);
        }
        // cos branch: a_k * cos(w u_p) * blur(t * cos(w u_q)), then sin.
        for (int branch = 0; branch < (k == 0 ? 1 : 2); ++branch) {
            const std::vector<double>& mod = branch == 0 ? cosU : sinU;
            blurred = mod;
            gaussian_blur_plane(blurred, w, h, p.sigma_s, radius);
            for (size_t i = 0; i < n; ++i) denacc[i] += a * mod[i] * blurred[i];
            for (int c = 0; c < ch; ++c) {
                size_t i = 0;
                for (int y = 0; y < h; ++y)
                    for (int x = 0; x < w; ++x, ++i) modulated[i] = target.at(x, y, c) * mod[i];
                gaussian_blur_plane(modulated, w, h, p.sigma_s, radius);
                for (size_t i2 = 0; i2 < n; ++i2)
                    numacc[static_cast<size_t>(c) * n + i2] += a * mod[i2] * modulated[i2];
            }
        }
    }
    for (int c = 0; c < ch; ++c) {
        size_t i = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x, ++i) {
                const double den = std::max(denacc[i], 1e-12);
                out.at(x, y, c) = static_cast<float>(numacc[static_cast<size_t>(c) * n + i] / den);
            }
    }
    return out;
}

} // namespace sob
