#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sob/bench.hpp"
#include "sob/parallel.hpp"
#include "sob/pipeline.hpp"
#include "sob/synthesis.hpp"

namespace py = pybind11;
using namespace sob;

namespace {

// numpy <-> Image: (h, w) or (h, w, 3) float32/float64/uint8 arrays.
Image image_from_array(const py::array& arr) {
    const py::buffer_info info = py::array::ensure(arr).request();
    if (info.ndim != 2 && info.ndim != 3)
        throw py::value_error("expected a (h,w) or (h,w,3) array");
    const int h = static_cast<int>(info.shape[0]);
    const int w = static_cast<int>(info.shape[1]);
    const int ch = info.ndim == 3 ? static_cast<int>(info.shape[2]) : 1;
    if (ch != 1 && ch != 3) throw py::value_error("channel count must be 1 or 3");

    const py::array_t<float> floats = py::array_t<float, py::array::c_style |
                                                             py::array::forcecast>(arr);
    const float* src = floats.data();
    Image img(w, h, ch);
    std::copy(src, src + static_cast<size_t>(w) * h * ch, img.data().begin());
    return img;
}

py::array_t<float> image_to_array(const Image& img) {
    const std::vector<py::ssize_t> shape =
        img.channels() == 1
            ? std::vector<py::ssize_t>{img.height(), img.width()}
            : std::vector<py::ssize_t>{img.height(), img.width(), img.channels()};
    py::array_t<float> arr(shape);
    std::copy(img.data().begin(), img.data().end(), arr.mutable_data());
    return arr;
}

py::array_t<int16_t> disparity_to_array(const DisparityMap& d) {
    py::array_t<int16_t> arr({static_cast<py::ssize_t>(d.height),
                              static_cast<py::ssize_t>(d.width)});
    std::copy(d.disparity.begin(), d.disparity.end(), arr.mutable_data());
    return arr;
}

py::array_t<uint8_t> mask_to_array(const std::vector<uint8_t>& m, int w, int h) {
    py::array_t<uint8_t> arr({static_cast<py::ssize_t>(h), static_cast<py::ssize_t>(w)});
    std::copy(m.begin(), m.end(), arr.mutable_data());
    return arr;
}

PipelineParams params_from_kwargs(int dmax, double hybrid_weight, double sigma_r,
                                  double sigma_s, double sigma_s_mult, double sigma_tree,
                                  int lr_threshold, double delta, bool lr_check,
                                  bool smooth_left) {
    PipelineParams p;
    p.dmax = dmax;
    p.hybrid_weight = hybrid_weight;
    p.filter.sigma_r = sigma_r;
    p.filter.sigma_s = sigma_s;
    p.sigma_s_mult = sigma_s_mult;
    p.sigma_tree = sigma_tree;
    p.lr_threshold = lr_threshold;
    p.delta = delta;
    p.lr_check = lr_check;
    p.smooth_left = smooth_left;
    return p;
}

} // namespace

PYBIND11_MODULE(_sob, m) {
    m.doc() = "stereo matching from one full image plus a sparse fraction of the other";

    py::class_<SampleSet>(m, "SampleSet")
        .def_property_readonly("source_width", [](const SampleSet& s) { return s.source_width; })
        .def_property_readonly("source_height",
                               [](const SampleSet& s) { return s.source_height; })
        .def_property_readonly("channels", [](const SampleSet& s) { return s.channels; })
        .def_property_readonly("num_samples", [](const SampleSet& s) { return s.samples.size(); })
        .def("fraction", &SampleSet::fraction)
        .def("equivalent_spacing", &SampleSet::equivalent_spacing)
        .def("samples", [](const SampleSet& s) {
            py::list out;
            for (const PointSample& p : s.samples) {
                py::list value;
                for (int c = 0; c < s.channels; ++c) value.append(p.value[static_cast<size_t>(c)]);
                out.append(py::make_tuple(p.x, p.y, value));
            }
            return out;
        });

    m.def("set_max_threads", &set_max_threads, py::arg("n"));

    m.def("to_grayscale",
          [](const py::array& img) { return image_to_array(to_grayscale(image_from_array(img))); });
    m.def("gaussian_smooth", [](const py::array& img, double sigma) {
        return image_to_array(gaussian_smooth(image_from_array(img), sigma));
    });
    m.def(
        "resize",
        [](const py::array& img, double factor, const std::string& mode) {
            ResizeMode rm = ResizeMode::upsample_bilinear;
            if (mode == "downsample_antialias") rm = ResizeMode::downsample_antialias;
            else if (mode == "upsample_nearest") rm = ResizeMode::upsample_nearest;
            else if (mode != "upsample_bilinear") throw py::value_error("unknown resize mode");
            return image_to_array(resize(image_from_array(img), factor, rm));
        },
        py::arg("img"), py::arg("factor"), py::arg("mode") = "upsample_bilinear");

    m.def("encode_grid", [](const py::array& img, int spacing) {
        return encode_grid(image_from_array(img), spacing);
    });
    m.def(
        "encode_fps",
        [](const py::array& img, int count, uint64_t seed, double adaptive_fraction) {
            return encode_fps(image_from_array(img), count, seed, adaptive_fraction);
        },
        py::arg("img"), py::arg("count"), py::arg("seed") = 0,
        py::arg("adaptive_fraction") = 0.0);
    m.def("encode_downsample", [](const py::array& img, int factor) {
        return encode_downsample(image_from_array(img), factor);
    });
    m.def("serialize", [](const SampleSet& s) { return py::bytes(
        reinterpret_cast<const char*>(serialize(s).data()), serialize(s).size()); });
    m.def("deserialize", [](const py::bytes& b) {
        const std::string raw = b;
        return deserialize(std::vector<uint8_t>(raw.begin(), raw.end()));
    });
    m.def("interpolate_samples",
          [](const SampleSet& s) { return image_to_array(interpolate_samples(s)); });

#define SOB_PIPELINE_ARGS                                                                   \
    py::arg("left"), py::arg("payload"), py::arg("dmax"), py::arg("hybrid_weight") = 0.5,   \
    py::arg("sigma_r") = 20.0, py::arg("sigma_s") = 0.0, py::arg("sigma_s_mult") = 3.0,     \
    py::arg("sigma_tree") = 25.5, py::arg("lr_threshold") = 1, py::arg("delta") = 1e-6,     \
    py::arg("lr_check") = true, py::arg("smooth_left") = true

    m.def(
        "decode_sparse",
        [](const py::array& left, const SampleSet& payload, int dmax, double hw, double sr,
           double ss, double ssm, double st, int lrt, double delta, bool lr, bool sl) {
            const auto p = params_from_kwargs(dmax, hw, sr, ss, ssm, st, lrt, delta, lr, sl);
            const DisparityMap d = run_sparse_pipeline(image_from_array(left), payload, p);
            return py::make_tuple(disparity_to_array(d),
                                  mask_to_array(d.stability, d.width, d.height));
        },
        SOB_PIPELINE_ARGS);
    m.def(
        "decode_downsample",
        [](const py::array& left, const SampleSet& payload, int dmax, double hw, double sr,
           double ss, double ssm, double st, int lrt, double delta, bool lr, bool sl) {
            const auto p = params_from_kwargs(dmax, hw, sr, ss, ssm, st, lrt, delta, lr, sl);
            const DisparityMap d = run_downsample_pipeline(image_from_array(left), payload, p);
            return py::make_tuple(disparity_to_array(d),
                                  mask_to_array(d.stability, d.width, d.height));
        },
        SOB_PIPELINE_ARGS);
    m.def(
        "decode_hybrid",
        [](const py::array& left, const SampleSet& payload, int dmax, double hw, double sr,
           double ss, double ssm, double st, int lrt, double delta, bool lr, bool sl) {
            const auto p = params_from_kwargs(dmax, hw, sr, ss, ssm, st, lrt, delta, lr, sl);
            const DisparityMap d = run_hybrid_pipeline(image_from_array(left), payload, p);
            return py::make_tuple(disparity_to_array(d),
                                  mask_to_array(d.stability, d.width, d.height));
        },
        SOB_PIPELINE_ARGS);
#undef SOB_PIPELINE_ARGS

    m.def(
        "warp",
        [](const py::array& left, const py::array& disparity) {
            const Image I1 = image_from_array(left);
            const py::array_t<int16_t> d16 =
                py::array_t<int16_t, py::array::c_style | py::array::forcecast>(disparity);
            DisparityMap d;
            d.width = I1.width();
            d.height = I1.height();
            if (d16.ndim() != 2 || d16.shape(0) != d.height || d16.shape(1) != d.width)
                throw py::value_error("disparity shape must match the image");
            d.disparity.assign(d16.data(), d16.data() + d16.size());
            d.stability.assign(d.disparity.size(), 1);
            for (int16_t v : d.disparity) d.dmax = std::max<int>(d.dmax, v);
            const WarpResult w = warp(I1, d);
            return py::make_tuple(image_to_array(w.image),
                                  mask_to_array(w.occlusion, w.image.width(), w.image.height()));
        },
        py::arg("left"), py::arg("disparity"));

    m.def(
        "psnr",
        [](const py::array& a, const py::array& b, py::object mask) {
            if (mask.is_none()) return psnr(image_from_array(a), image_from_array(b));
            const py::array_t<uint8_t> m8 =
                py::array_t<uint8_t, py::array::c_style | py::array::forcecast>(mask);
            std::vector<uint8_t> m(m8.data(), m8.data() + m8.size());
            return psnr(image_from_array(a), image_from_array(b), &m);
        },
        py::arg("a"), py::arg("b"), py::arg("mask") = py::none());

    m.attr("__version__") = "0.1.0";
}
