#pragma once

#include <cstdint>
#include <vector>

namespace sob {

/// Raster with 1 or 3 interleaved channels. Pixel content is 8-bit at rest
/// (files, payloads); in memory values are kept real-valued in [0,255] so
/// filter arithmetic stays exact, and quantization happens at I/O boundaries.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.0f);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }
    bool same_size(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    float& at(int x, int y, int c = 0) {
        return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
    }
    float at(int x, int y, int c = 0) const {
        return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
    }
    // Clamp-to-edge access, the border policy used throughout.
    float at_clamped(int x, int y, int c = 0) const;

    std::vector<float>& data() { return data_; }
    const std::vector<float>& data() const { return data_; }

    double min_value() const;
    double max_value() const;
    double mean() const;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

/// Fixed luma weights 0.299/0.587/0.114; 1-channel input is returned as is.
Image to_grayscale(const Image& img);

/// Normalized truncated Gaussian (radius ceil(3*sigma), replicate border),
/// applied per channel. sigma == 0 returns the input unchanged.
Image gaussian_smooth(const Image& img, double sigma);

enum class ResizeMode {
    downsample_antialias, // low-pass with sigma = 0.5 * (1/factor), then decimate
    upsample_bilinear,
    upsample_nearest,
};

/// Scales to ceil(W*factor) x ceil(H*factor). factor == 1 is the identity.
Image resize(const Image& img, double factor, ResizeMode mode);

/// Interpolates to an exact target size (bilinear or nearest); used where a
/// payload must come back to the source dimensions bit-for-bit in shape.
Image resize_to(const Image& img, int out_width, int out_height, ResizeMode mode);

/// Rounds one channel to 8-bit content. Values are clamped to [0,255].
std::vector<uint8_t> quantize_channel(const Image& img, int channel);

} // namespace sob
