#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "sob/image.hpp"

namespace sob {

struct GridScheme {
    int spacing = 1; // grid origin is (spacing/2, spacing/2)
};

struct FpsScheme {
    int count = 1;
    uint64_t seed = 0;
    double adaptive_fraction = 0.0; // trailing fraction of detail-weighted picks
};

struct DownsampleScheme {
    int factor = 1;
};

using SamplingScheme = std::variant<GridScheme, FpsScheme, DownsampleScheme>;

/// One transmitted pixel. `value` holds one 8-bit intensity per source
/// channel (unused entries stay 0).
struct PointSample {
    int x = 0;
    int y = 0;
    std::array<float, 3> value{0.0f, 0.0f, 0.0f};
};

/// The wire payload: what the right camera actually sends. Point schemes
/// carry (x, y, value) samples; the downsample scheme carries a low-res
/// raster. Values are quantized to 8 bits at encode time so the in-memory
/// object round-trips the serialized form exactly.
struct SampleSet {
    int source_width = 0;
    int source_height = 0;
    int channels = 1;
    SamplingScheme scheme;
    std::vector<PointSample> samples; // point schemes only
    Image lowres;                     // downsample scheme only

    bool is_point_scheme() const { return !std::holds_alternative<DownsampleScheme>(scheme); }
    /// Declared sample fraction: |samples| / (W*H), or 1/f^2 for downsample.
    double fraction() const;
    /// Grid spacing, or the equivalent spacing sqrt(W*H/n) for other schemes.
    double equivalent_spacing() const;
    /// Luma of a sample's value (identity for 1-channel payloads).
    float sample_luma(const PointSample& s) const;
};

/// Samples every spacing-th pixel starting at (spacing/2, spacing/2). Only
/// the sampled pixels are read.
SampleSet encode_grid(const Image& img, int spacing);

/// Same contract, but pixels are fetched through `read`; used to instrument
/// how much of the source the encoder touches.
SampleSet encode_grid_with_reader(
    int width, int height, int channels, int spacing,
    const std::function<std::array<float, 3>(int x, int y)>& read);

/// Farthest-point sampling. The first pixel comes from the seeded RNG; the
/// uniform phase repeatedly takes the pixel farthest from all chosen ones
/// (ties to smallest (y,x)); the trailing adaptive_fraction of picks weight
/// distance by the intensity spread of the nearest chosen samples.
/// Deterministic in (img, count, seed, adaptive_fraction).
SampleSet encode_fps(const Image& img, int count, uint64_t seed, double adaptive_fraction);

/// Carries resize(img, 1/factor, downsample_antialias), quantized to 8 bits.
SampleSet encode_downsample(const Image& img, int factor);

/// Bit-exact wire form ("SOB1"). Grid and FPS payloads carry no coordinates:
/// grid positions are implicit, FPS positions are re-derived from the seed
/// and the value stream.
std::vector<uint8_t> serialize(const SampleSet& s);
SampleSet deserialize(const std::vector<uint8_t>& bytes);

void write_sample_set(const std::string& path, const SampleSet& s);
SampleSet read_sample_set(const std::string& path);

/// Dense image from a point payload: per-cell bilinear for grids (clamped at
/// borders), inverse-distance weighting over the 4 nearest samples for
/// irregular schemes. Exact at sample sites.
Image interpolate_samples(const SampleSet& s);

} // namespace sob
