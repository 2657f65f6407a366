#include "sob/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

namespace sob {

WarpResult warp(const Image& I1, const DisparityMap& d) {
    if (I1.width() != d.width || I1.height() != d.height)
        throw std::invalid_argument("warp: dimension mismatch");
    const int w = I1.width(), h = I1.height(), ch = I1.channels();

    WarpResult out;
    out.image = Image(w, h, ch, 0.0f);
    out.occlusion.assign(static_cast<size_t>(w) * h, 1);
    std::vector<int32_t> zbuf(static_cast<size_t>(w) * h,
                              std::numeric_limits<int32_t>::min());

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int16_t disp = d.disparity[static_cast<size_t>(y) * w + x];
            const int tx = x + disp;
            if (tx < 0 || tx >= w) continue;
            const size_t ti = static_cast<size_t>(y) * w + tx;
            if (disp <= zbuf[ti]) continue; // nearer surface already wrote here
            zbuf[ti] = disp;
            out.occlusion[ti] = 0;
            for (int c = 0; c < ch; ++c) out.image.at(tx, y, c) = I1.at(x, y, c);
        }
    return out;
}

Image inpaint(const WarpResult& w, const SampleSet& payload) {
    const Image& img = w.image;
    if (img.width() != payload.source_width || img.height() != payload.source_height)
        throw std::invalid_argument("inpaint: payload dimensions mismatch");

    Image fill;
    if (const auto* ds = std::get_if<DownsampleScheme>(&payload.scheme)) {
        (void)ds;
        fill = resize_to(payload.lowres, img.width(), img.height(),
                         ResizeMode::upsample_bilinear);
    } else {
        const double spacing = payload.equivalent_spacing();
        fill = gaussian_smooth(interpolate_samples(payload),
                               spacing > 1.0 ? 0.5 * spacing : 0.0);
    }

    Image out = img;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            if (!w.occluded(x, y)) continue;
            for (int c = 0; c < img.channels(); ++c) {
                // A grayscale payload fills all channels with its luma.
                const float v = fill.channels() == img.channels() ? fill.at(x, y, c)
                                                                  : fill.at(x, y, 0);
                out.at(x, y, c) = std::clamp(v, 0.0f, 255.0f);
            }
        }
    return out;
}

Image enhance(const WarpResult& w, const SampleSet& payload, const FilterParams& p) {
    if (!payload.is_point_scheme())
        throw std::invalid_argument("enhance: point-scheme payload required");
    const Image& img = w.image;
    if (img.width() != payload.source_width || img.height() != payload.source_height)
        throw std::invalid_argument("enhance: payload dimensions mismatch");
    const int ch = img.channels();
    const size_t n = static_cast<size_t>(img.width()) * img.height();

    Image out = img;
    std::vector<float> residual(n);
    std::vector<uint8_t> occupied(n);
    for (int c = 0; c < ch; ++c) {
        std::fill(residual.begin(), residual.end(), 0.0f);
        std::fill(occupied.begin(), occupied.end(), 0);
        for (const PointSample& s : payload.samples) {
            if (w.occluded(s.x, s.y)) continue; // no warp estimate to correct
            const size_t i = static_cast<size_t>(s.y) * img.width() + s.x;
            const float v = payload.channels == ch ? s.value[static_cast<size_t>(c)]
                                                   : payload.sample_luma(s);
            residual[i] = v - img.at(s.x, s.y, c);
            occupied[i] = 1;
        }
        const SparseLayer layer{img.width(), img.height(), residual.data(), occupied.data()};
        const DensifiedLayer dense = jbf_sparse_layer(layer, img, p);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x) {
                const size_t i = static_cast<size_t>(y) * img.width() + x;
                if (w.occluded(x, y) || !dense.resolved[i]) continue;
                out.at(x, y, c) =
                    std::clamp(img.at(x, y, c) + dense.values[i], 0.0f, 255.0f);
            }
    }
    return out;
}

double psnr(const Image& a, const Image& b, const std::vector<uint8_t>* mask) {
    if (!a.same_size(b) || a.channels() != b.channels())
        throw std::invalid_argument("psnr: dimension mismatch");
    double sse = 0.0;
    size_t count = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            if (mask && !(*mask)[static_cast<size_t>(y) * a.width() + x]) continue;
            for (int c = 0; c < a.channels(); ++c) {
                const double d = a.at(x, y, c) - b.at(x, y, c);
                sse += d * d;
            }
            ++count;
        }
    if (count == 0) throw std::invalid_argument("psnr: every pixel is masked out");
    const double mse = sse / (static_cast<double>(count) * a.channels());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

} // namespace sob
