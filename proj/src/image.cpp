#include "sob/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sob {

Image::Image(int width, int height, int channels, float fill) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("Image: dimensions must be positive");
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("Image: channels must be 1 or 3");
    width_ = width;
    height_ = height;
    channels_ = channels;
    data_.assign(static_cast<size_t>(width) * height * channels,
                 std::clamp(fill, 0.0f, 255.0f));
}

float Image::at_clamped(int x, int y, int c) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y, c);
}

double Image::min_value() const {
    return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

double Image::max_value() const {
    return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

double Image::mean() const {
    if (data_.empty()) return 0.0;
    double sum = 0.0;
    for (float v : data_) sum += v;
    return sum / static_cast<double>(data_.size());
}

Image to_grayscale(const Image& img) {
    if (img.channels() == 1) return img;
    Image out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out.at(x, y) = 0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) +
                           0.114f * img.at(x, y, 2);
    return out;
}

namespace {

std::vector<double> gaussian_kernel(double sigma, int radius) {
    std::vector<double> k(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

} // namespace

Image gaussian_smooth(const Image& img, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_smooth: sigma must be >= 0");
    if (sigma == 0.0 || img.empty()) return img;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const std::vector<double> kernel = gaussian_kernel(sigma, radius);
    const int w = img.width(), h = img.height(), ch = img.channels();

    // Separable passes with replicate border.
    Image tmp(w, h, ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[static_cast<size_t>(i + radius)] * img.at_clamped(x + i, y, c);
                tmp.at(x, y, c) = static_cast<float>(acc);
            }
    Image out(w, h, ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[static_cast<size_t>(i + radius)] * tmp.at_clamped(x, y + i, c);
                out.at(x, y, c) = static_cast<float>(acc);
            }
    return out;
}

namespace {

// Center-aligned bilinear resampling. In the outer half-pixel the weights
// are left unclamped so the interpolant extrapolates linearly; plain
// replication there cannot recover a gradient across a decimate/interpolate
// round trip.
Image sample_bilinear(const Image& img, int out_w, int out_h) {
    Image out(out_w, out_h, img.channels());
    const double sx = static_cast<double>(img.width()) / out_w;
    const double sy = static_cast<double>(img.height()) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        y0 = std::clamp(y0, 0, std::max(0, img.height() - 2));
        const double wy = img.height() == 1 ? 0.0 : fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            x0 = std::clamp(x0, 0, std::max(0, img.width() - 2));
            const double wx = img.width() == 1 ? 0.0 : fx - x0;
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const int y1 = std::min(y0 + 1, img.height() - 1);
            for (int c = 0; c < img.channels(); ++c) {
                const double v00 = img.at(x0, y0, c);
                const double v10 = img.at(x1, y0, c);
                const double v01 = img.at(x0, y1, c);
                const double v11 = img.at(x1, y1, c);
                const double v = (1 - wy) * ((1 - wx) * v00 + wx * v10) +
                                 wy * ((1 - wx) * v01 + wx * v11);
                out.at(x, y, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

Image sample_nearest(const Image& img, int out_w, int out_h) {
    Image out(out_w, out_h, img.channels());
    const double sx = static_cast<double>(img.width()) / out_w;
    const double sy = static_cast<double>(img.height()) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const int yi = std::min(img.height() - 1,
                                static_cast<int>(std::floor((y + 0.5) * sy)));
        for (int x = 0; x < out_w; ++x) {
            const int xi = std::min(img.width() - 1,
                                    static_cast<int>(std::floor((x + 0.5) * sx)));
            for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(xi, yi, c);
        }
    }
    return out;
}

} // namespace

Image resize_to(const Image& img, int out_width, int out_height, ResizeMode mode) {
    if (out_width < 1 || out_height < 1)
        throw std::invalid_argument("resize_to: output dimensions must be positive");
    if (out_width == img.width() && out_height == img.height()) return img;
    switch (mode) {
    case ResizeMode::upsample_nearest:
        return sample_nearest(img, out_width, out_height);
    case ResizeMode::downsample_antialias: {
        const double shrink =
            0.5 * (static_cast<double>(img.width()) / out_width +
                   static_cast<double>(img.height()) / out_height);
        const Image smoothed = shrink > 1.0 ? gaussian_smooth(img, 0.5 * shrink) : img;
        return sample_bilinear(smoothed, out_width, out_height);
    }
    case ResizeMode::upsample_bilinear:
    default:
        return sample_bilinear(img, out_width, out_height);
    }
}

Image resize(const Image& img, double factor, ResizeMode mode) {
    if (!(factor > 0.0)) throw std::invalid_argument("resize: factor must be positive");
    if (factor == 1.0) return img;
    const int out_w = static_cast<int>(std::ceil(img.width() * factor));
    const int out_h = static_cast<int>(std::ceil(img.height() * factor));
    return resize_to(img, std::max(1, out_w), std::max(1, out_h), mode);
}

std::vector<uint8_t> quantize_channel(const Image& img, int channel) {
    std::vector<uint8_t> out(static_cast<size_t>(img.width()) * img.height());
    size_t i = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out[i++] = static_cast<uint8_t>(
                std::clamp(std::lround(img.at(x, y, channel)), 0L, 255L));
    return out;
}

} // namespace sob
