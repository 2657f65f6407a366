#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sob/bench.hpp"
#include "sob/image.hpp"

namespace sob::testing {

/// Deterministic rendered stereo pair in the library's I1(x) <-> I2(x+d)
/// convention: textured fronto-parallel layers with exact integer ground
/// truth, genuine occlusion bands, and mild radiometric noise between the
/// views.
struct SynthScene {
    Image left;
    Image right;
    std::vector<float> gt;       // per-pixel disparity of the left view
    std::vector<uint8_t> nonocc; // visible in both views
    int dmax = 0;
};

struct SceneSpec {
    uint32_t seed = 1;
    int width = 288;
    int height = 224;
    std::vector<int> layer_disparities = {2, 5, 9, 13}; // background first
    double noise_sigma = 1.5;
    double right_gain = 1.01;
    double right_offset = 0.5;
    int texture_cell = 6; // value-noise lattice pitch
};

SynthScene make_scene(const SceneSpec& spec);

/// Wraps a scene as a bench Dataset (all pixels valid, disc derived from gt).
Dataset scene_to_dataset(const SynthScene& scene, const std::string& name);

/// Writes the scene as a loadable dataset directory (left.png, right.png,
/// gt.pfm, mask_nonocc.png, dataset.cfg).
void write_scene_dataset(const SynthScene& scene, const std::string& dir,
                         const std::string& name);

/// Integer-valued random test image (uniform bytes), the content class the
/// filters declare.
Image random_byte_image(uint32_t seed, int w, int h, int channels = 1);

/// Smooth random texture in [0,255] with integer values.
Image value_noise_texture(std::mt19937& rng, int w, int h, int cell, int channels);

} // namespace sob::testing
