#include "sob/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "sob/common.hpp"

namespace sob {

namespace {

constexpr char kMagic[4] = {'S', 'O', 'B', '1'};
constexpr uint8_t kTagGrid = 1;
constexpr uint8_t kTagFps = 2;
constexpr uint8_t kTagDownsample = 3;
constexpr int64_t kMaxPixels = int64_t{1} << 26;

float luma(const std::array<float, 3>& v, int channels) {
    if (channels == 1) return v[0];
    return 0.299f * v[0] + 0.587f * v[1] + 0.114f * v[2];
}

uint8_t quantize(float v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::array<float, 3> read_pixel(const Image& img, int x, int y) {
    std::array<float, 3> v{0.0f, 0.0f, 0.0f};
    for (int c = 0; c < img.channels(); ++c) v[static_cast<size_t>(c)] = img.at(x, y, c);
    return v;
}

int grid_points_along(int extent, int spacing) {
    const int origin = spacing / 2;
    return (extent - 1 - origin) / spacing + 1;
}

int downsampled_extent(int extent, int factor) {
    return (extent + factor - 1) / factor;
}

// Farthest-point selection shared by the encoder and the wire decoder: the
// decoder replays it against the streamed values, so positions depend only
// on (w, h, count, seed, adaptive_fraction) and the values of already
// selected samples.
void fps_positions(int w, int h, int count, uint64_t seed, double adaptive_fraction,
                   const std::function<double(int)>& sample_luma_of,
                   const std::function<void(int, int, int)>& on_pick) {
    const int64_t n_pixels = static_cast<int64_t>(w) * h;
    const int n_uniform =
        std::max(1, static_cast<int>(std::ceil((1.0 - adaptive_fraction) * count)));

    std::vector<int64_t> dist2(static_cast<size_t>(n_pixels),
                               std::numeric_limits<int64_t>::max());
    std::vector<int> sample_x, sample_y;
    sample_x.reserve(static_cast<size_t>(count));
    sample_y.reserve(static_cast<size_t>(count));

    // Bucket grid over chosen samples for the adaptive phase's neighbor lookups.
    const int cell = std::max(1, static_cast<int>(std::sqrt(
                                      static_cast<double>(n_pixels) / count)));
    const int bw = (w + cell - 1) / cell;
    const int bh = (h + cell - 1) / cell;
    std::vector<std::vector<int>> buckets(static_cast<size_t>(bw) * bh);

    auto add_sample = [&](int k, int x, int y) {
        sample_x.push_back(x);
        sample_y.push_back(y);
        buckets[static_cast<size_t>(y / cell) * bw + x / cell].push_back(k);
        on_pick(k, x, y);
        // Incremental nearest-sample distance field update.
        size_t i = 0;
        for (int py = 0; py < h; ++py) {
            const int64_t dy = py - y;
            for (int px = 0; px < w; ++px, ++i) {
                const int64_t dx = px - x;
                const int64_t d2 = dx * dx + dy * dy;
                if (d2 < dist2[i]) dist2[i] = d2;
            }
        }
    };

    // Spread (max - min) of the values of the <= 4 nearest chosen samples.
    auto detail_spread = [&](int px, int py) -> double {
        const int bx = px / cell, by = py / cell;
        std::vector<std::pair<int64_t, int>> cand; // (dist2, sample index)
        for (int ring = 0; ring < std::max(bw, bh); ++ring) {
            for (int cy = std::max(0, by - ring); cy <= std::min(bh - 1, by + ring); ++cy)
                for (int cx = std::max(0, bx - ring); cx <= std::min(bw - 1, bx + ring); ++cx) {
                    if (std::max(std::abs(cx - bx), std::abs(cy - by)) != ring) continue;
                    for (int k : buckets[static_cast<size_t>(cy) * bw + cx]) {
                        const int64_t dx = sample_x[static_cast<size_t>(k)] - px;
                        const int64_t dy = sample_y[static_cast<size_t>(k)] - py;
                        cand.emplace_back(dx * dx + dy * dy, k);
                    }
                }
            if (cand.size() >= 4 && ring >= 1) break;
        }
        const size_t take = std::min<size_t>(4, cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(take), cand.end());
        double lo = 255.0, hi = 0.0;
        for (size_t i = 0; i < take; ++i) {
            const double v = sample_luma_of(cand[i].second);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return take == 0 ? 0.0 : hi - lo;
    };

    // First pick comes from the seeded generator.
    std::mt19937_64 rng(seed);
    const int64_t first = static_cast<int64_t>(rng() % static_cast<uint64_t>(n_pixels));
    add_sample(0, static_cast<int>(first % w), static_cast<int>(first / w));

    for (int k = 1; k < count; ++k) {
        int best = 0;
        if (k < n_uniform) {
            int64_t best_d2 = -1;
            for (size_t i = 0; i < dist2.size(); ++i)
                if (dist2[i] > best_d2) {
                    best_d2 = dist2[i];
                    best = static_cast<int>(i);
                }
        } else {
            double best_score = -1.0;
            size_t i = 0;
            for (int py = 0; py < h; ++py)
                for (int px = 0; px < w; ++px, ++i) {
                    if (dist2[i] == 0) continue; // already a sample
                    const double score = std::sqrt(static_cast<double>(dist2[i])) *
                                         (1.0 + detail_spread(px, py));
                    if (score > best_score) {
                        best_score = score;
                        best = static_cast<int>(i);
                    }
                }
        }
        add_sample(k, best % w, best / w);
    }
}

} // namespace

double SampleSet::fraction() const {
    if (const auto* d = std::get_if<DownsampleScheme>(&scheme))
        return 1.0 / (static_cast<double>(d->factor) * d->factor);
    return static_cast<double>(samples.size()) /
           (static_cast<double>(source_width) * source_height);
}

double SampleSet::equivalent_spacing() const {
    if (const auto* g = std::get_if<GridScheme>(&scheme)) return g->spacing;
    if (const auto* d = std::get_if<DownsampleScheme>(&scheme)) return d->factor;
    const double n = std::max<double>(1.0, static_cast<double>(samples.size()));
    return std::sqrt(static_cast<double>(source_width) * source_height / n);
}

float SampleSet::sample_luma(const PointSample& s) const {
    return luma(s.value, channels);
}

SampleSet encode_grid_with_reader(
    int width, int height, int channels, int spacing,
    const std::function<std::array<float, 3>(int x, int y)>& read) {
    if (spacing < 1) throw std::invalid_argument("encode_grid: spacing must be >= 1");
    if (spacing > std::min(width, height))
        throw std::invalid_argument("encode_grid: spacing exceeds image dimensions");

    SampleSet out;
    out.source_width = width;
    out.source_height = height;
    out.channels = channels;
    out.scheme = GridScheme{spacing};
    const int origin = spacing / 2;
    for (int y = origin; y < height; y += spacing)
        for (int x = origin; x < width; x += spacing) {
            PointSample s;
            s.x = x;
            s.y = y;
            const std::array<float, 3> v = read(x, y);
            for (int c = 0; c < channels; ++c)
                s.value[static_cast<size_t>(c)] = static_cast<float>(quantize(v[static_cast<size_t>(c)]));
            out.samples.push_back(s);
        }
    return out;
}

SampleSet encode_grid(const Image& img, int spacing) {
    return encode_grid_with_reader(img.width(), img.height(), img.channels(), spacing,
                                   [&img](int x, int y) { return read_pixel(img, x, y); });
}

SampleSet encode_fps(const Image& img, int count, uint64_t seed, double adaptive_fraction) {
    const int64_t n_pixels = static_cast<int64_t>(img.width()) * img.height();
    if (count < 1 || count > n_pixels)
        throw std::invalid_argument("encode_fps: count out of range");
    if (!(adaptive_fraction >= 0.0 && adaptive_fraction <= 1.0))
        throw std::invalid_argument("encode_fps: adaptive_fraction must be in [0,1]");

    SampleSet out;
    out.source_width = img.width();
    out.source_height = img.height();
    out.channels = img.channels();
    out.scheme = FpsScheme{count, seed, adaptive_fraction};
    out.samples.resize(static_cast<size_t>(count));

    fps_positions(
        img.width(), img.height(), count, seed, adaptive_fraction,
        [&out](int k) { return static_cast<double>(out.sample_luma(out.samples[static_cast<size_t>(k)])); },
        [&](int k, int x, int y) {
            PointSample& s = out.samples[static_cast<size_t>(k)];
            s.x = x;
            s.y = y;
            const std::array<float, 3> v = read_pixel(img, x, y);
            for (int c = 0; c < img.channels(); ++c)
                s.value[static_cast<size_t>(c)] = static_cast<float>(quantize(v[static_cast<size_t>(c)]));
        });
    return out;
}

SampleSet encode_downsample(const Image& img, int factor) {
    if (factor < 1) throw std::invalid_argument("encode_downsample: factor must be >= 1");
    if (factor > std::min(img.width(), img.height()))
        throw std::invalid_argument("encode_downsample: factor exceeds image dimensions");

    SampleSet out;
    out.source_width = img.width();
    out.source_height = img.height();
    out.channels = img.channels();
    out.scheme = DownsampleScheme{factor};
    const int lw = downsampled_extent(img.width(), factor);
    const int lh = downsampled_extent(img.height(), factor);
    Image low = factor == 1 ? img
                            : resize_to(img, lw, lh, ResizeMode::downsample_antialias);
    // Quantize to the 8-bit wire content.
    for (float& v : low.data()) v = static_cast<float>(quantize(v));
    out.lowres = std::move(low);
    return out;
}

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    put_u32(out, static_cast<uint32_t>(v));
    put_u32(out, static_cast<uint32_t>(v >> 32));
}

struct Reader {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;

    void need(size_t n, const char* what) const {
        if (pos + n > buf.size())
            throw format_error(std::string("truncated ") + what);
    }
    uint8_t u8(const char* what) {
        need(1, what);
        return buf[pos++];
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos++]) << (8 * i);
        return v;
    }
    uint64_t u64(const char* what) {
        const uint64_t lo = u32(what);
        const uint64_t hi = u32(what);
        return lo | (hi << 32);
    }
    size_t remaining() const { return buf.size() - pos; }
};

} // namespace

std::vector<uint8_t> serialize(const SampleSet& s) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);

    uint8_t tag = kTagGrid;
    if (std::holds_alternative<FpsScheme>(s.scheme)) tag = kTagFps;
    else if (std::holds_alternative<DownsampleScheme>(s.scheme)) tag = kTagDownsample;
    out.push_back(tag);
    out.push_back(static_cast<uint8_t>(s.channels));
    put_u32(out, static_cast<uint32_t>(s.source_width));
    put_u32(out, static_cast<uint32_t>(s.source_height));

    if (const auto* g = std::get_if<GridScheme>(&s.scheme)) {
        put_u32(out, static_cast<uint32_t>(g->spacing));
    } else if (const auto* f = std::get_if<FpsScheme>(&s.scheme)) {
        put_u32(out, static_cast<uint32_t>(f->count));
        put_u64(out, f->seed);
        uint64_t af_bits;
        static_assert(sizeof(double) == 8);
        std::memcpy(&af_bits, &f->adaptive_fraction, 8);
        put_u64(out, af_bits);
    } else {
        put_u32(out, static_cast<uint32_t>(std::get<DownsampleScheme>(s.scheme).factor));
    }

    if (s.is_point_scheme()) {
        for (const PointSample& p : s.samples)
            for (int c = 0; c < s.channels; ++c)
                out.push_back(quantize(p.value[static_cast<size_t>(c)]));
    } else {
        const Image& low = s.lowres;
        for (int y = 0; y < low.height(); ++y)
            for (int x = 0; x < low.width(); ++x)
                for (int c = 0; c < low.channels(); ++c) out.push_back(quantize(low.at(x, y, c)));
    }
    return out;
}

SampleSet deserialize(const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4, "header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw format_error("bad magic");
    r.pos = 4;

    const uint8_t tag = r.u8("header");
    const uint8_t channels = r.u8("header");
    if (channels != 1 && channels != 3) throw format_error("bad channel count");
    const uint32_t w = r.u32("header");
    const uint32_t h = r.u32("header");
    if (w < 1 || h < 1) throw format_error("bad dimensions");
    const int64_t n_pixels = static_cast<int64_t>(w) * h;
    if (n_pixels > kMaxPixels) throw format_error("payload pixel count too large");

    SampleSet out;
    out.source_width = static_cast<int>(w);
    out.source_height = static_cast<int>(h);
    out.channels = channels;

    if (tag == kTagGrid) {
        const uint32_t spacing = r.u32("grid params");
        if (spacing < 1 || spacing > std::min(w, h)) throw format_error("bad grid spacing");
        out.scheme = GridScheme{static_cast<int>(spacing)};
        const int nx = grid_points_along(static_cast<int>(w), static_cast<int>(spacing));
        const int ny = grid_points_along(static_cast<int>(h), static_cast<int>(spacing));
        const size_t expect = static_cast<size_t>(nx) * ny * channels;
        if (r.remaining() < expect) throw format_error("truncated grid values");
        if (r.remaining() > expect) throw format_error("trailing bytes after grid values");
        const int origin = static_cast<int>(spacing) / 2;
        out.samples.reserve(static_cast<size_t>(nx) * ny);
        for (int y = origin; y < static_cast<int>(h); y += static_cast<int>(spacing))
            for (int x = origin; x < static_cast<int>(w); x += static_cast<int>(spacing)) {
                PointSample s;
                s.x = x;
                s.y = y;
                for (int c = 0; c < channels; ++c)
                    s.value[static_cast<size_t>(c)] = static_cast<float>(bytes[r.pos++]);
                out.samples.push_back(s);
            }
    } else if (tag == kTagFps) {
        const uint32_t count = r.u32("fps params");
        const uint64_t seed = r.u64("fps params");
        const uint64_t af_bits = r.u64("fps params");
        double af;
        std::memcpy(&af, &af_bits, 8);
        if (count < 1 || static_cast<int64_t>(count) > n_pixels)
            throw format_error("bad fps count");
        if (!(af >= 0.0 && af <= 1.0)) throw format_error("bad fps adaptive fraction");
        const size_t expect = static_cast<size_t>(count) * channels;
        if (r.remaining() < expect) throw format_error("truncated fps values");
        if (r.remaining() > expect) throw format_error("trailing bytes after fps values");
        out.scheme = FpsScheme{static_cast<int>(count), seed, af};
        out.samples.resize(count);
        // Values were streamed in selection order; replay the selection to
        // recover the coordinates.
        const size_t value_base = r.pos;
        for (uint32_t k = 0; k < count; ++k)
            for (int c = 0; c < channels; ++c)
                out.samples[k].value[static_cast<size_t>(c)] =
                    static_cast<float>(bytes[value_base + static_cast<size_t>(k) * channels +
                                             static_cast<size_t>(c)]);
        fps_positions(
            static_cast<int>(w), static_cast<int>(h), static_cast<int>(count), seed, af,
            [&out](int k) {
                return static_cast<double>(out.sample_luma(out.samples[static_cast<size_t>(k)]));
            },
            [&out](int k, int x, int y) {
                out.samples[static_cast<size_t>(k)].x = x;
                out.samples[static_cast<size_t>(k)].y = y;
            });
    } else if (tag == kTagDownsample) {
        const uint32_t factor = r.u32("downsample params");
        if (factor < 1 || factor > std::min(w, h)) throw format_error("bad downsample factor");
        out.scheme = DownsampleScheme{static_cast<int>(factor)};
        const int lw = downsampled_extent(static_cast<int>(w), static_cast<int>(factor));
        const int lh = downsampled_extent(static_cast<int>(h), static_cast<int>(factor));
        const size_t expect = static_cast<size_t>(lw) * lh * channels;
        if (r.remaining() < expect) throw format_error("truncated downsample raster");
        if (r.remaining() > expect) throw format_error("trailing bytes after raster");
        out.lowres = Image(lw, lh, channels);
        for (int y = 0; y < lh; ++y)
            for (int x = 0; x < lw; ++x)
                for (int c = 0; c < channels; ++c)
                    out.lowres.at(x, y, c) = static_cast<float>(bytes[r.pos++]);
    } else {
        throw format_error("unknown scheme tag");
    }
    return out;
}

void write_sample_set(const std::string& path, const SampleSet& s) {
    const std::vector<uint8_t> bytes = serialize(s);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open '" + path + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw io_error("short write to '" + path + "'");
}

SampleSet read_sample_set(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

namespace {

Image interpolate_grid(const SampleSet& s, const GridScheme& g) {
    const int w = s.source_width, h = s.source_height, ch = s.channels;
    const int origin = g.spacing / 2;
    const int nx = grid_points_along(w, g.spacing);
    const int ny = grid_points_along(h, g.spacing);
    Image out(w, h, ch);
    for (int y = 0; y < h; ++y) {
        double gy = (static_cast<double>(y) - origin) / g.spacing;
        int j0 = static_cast<int>(std::floor(gy));
        j0 = std::clamp(j0, 0, std::max(0, ny - 2));
        const double ty = ny == 1 ? 0.0 : std::clamp(gy - j0, 0.0, 1.0);
        for (int x = 0; x < w; ++x) {
            double gx = (static_cast<double>(x) - origin) / g.spacing;
            int i0 = static_cast<int>(std::floor(gx));
            i0 = std::clamp(i0, 0, std::max(0, nx - 2));
            const double tx = nx == 1 ? 0.0 : std::clamp(gx - i0, 0.0, 1.0);
            const int i1 = std::min(i0 + 1, nx - 1);
            const int j1 = std::min(j0 + 1, ny - 1);
            for (int c = 0; c < ch; ++c) {
                auto node = [&](int i, int j) {
                    return static_cast<double>(
                        s.samples[static_cast<size_t>(j) * nx + i].value[static_cast<size_t>(c)]);
                };
                const double v = (1 - ty) * ((1 - tx) * node(i0, j0) + tx * node(i1, j0)) +
                                 ty * ((1 - tx) * node(i0, j1) + tx * node(i1, j1));
                out.at(x, y, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

Image interpolate_scattered(const SampleSet& s) {
    const int w = s.source_width, h = s.source_height, ch = s.channels;
    const int cell = std::max(1, static_cast<int>(std::lround(s.equivalent_spacing())));
    const int bw = (w + cell - 1) / cell;
    const int bh = (h + cell - 1) / cell;
    std::vector<std::vector<int>> buckets(static_cast<size_t>(bw) * bh);
    for (size_t k = 0; k < s.samples.size(); ++k)
        buckets[static_cast<size_t>(s.samples[k].y / cell) * bw + s.samples[k].x / cell]
            .push_back(static_cast<int>(k));

    Image out(w, h, ch);
    std::vector<std::pair<double, int>> cand;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            cand.clear();
            const int bx = x / cell, by = y / cell;
            for (int ring = 0; ring < std::max(bw, bh); ++ring) {
                for (int cy = std::max(0, by - ring); cy <= std::min(bh - 1, by + ring); ++cy)
                    for (int cx = std::max(0, bx - ring); cx <= std::min(bw - 1, bx + ring);
                         ++cx) {
                        if (std::max(std::abs(cx - bx), std::abs(cy - by)) != ring) continue;
                        for (int k : buckets[static_cast<size_t>(cy) * bw + cx]) {
                            const double dx = s.samples[static_cast<size_t>(k)].x - x;
                            const double dy = s.samples[static_cast<size_t>(k)].y - y;
                            cand.emplace_back(dx * dx + dy * dy, k);
                        }
                    }
                // One spare ring so the 4 nearest cannot hide in an unvisited cell.
                if (cand.size() >= 4 && ring >= 1) break;
            }
            const size_t take = std::min<size_t>(4, cand.size());
            std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(take), cand.end());
            for (int c = 0; c < ch; ++c) {
                if (!cand.empty() && cand[0].first < 0.25) {
                    out.at(x, y, c) =
                        s.samples[static_cast<size_t>(cand[0].second)].value[static_cast<size_t>(c)];
                    continue;
                }
                double num = 0.0, den = 0.0;
                for (size_t i = 0; i < take; ++i) {
                    const double wgt = 1.0 / (cand[i].first + 1e-9);
                    num += wgt * s.samples[static_cast<size_t>(cand[i].second)]
                                     .value[static_cast<size_t>(c)];
                    den += wgt;
                }
                out.at(x, y, c) = den > 0.0 ? static_cast<float>(num / den) : 0.0f;
            }
        }
    return out;
}

} // namespace

Image interpolate_samples(const SampleSet& s) {
    if (!s.is_point_scheme())
        throw std::invalid_argument("interpolate_samples: point-scheme payload required");
    if (s.samples.empty())
        throw std::invalid_argument("interpolate_samples: payload has no samples");
    if (const auto* g = std::get_if<GridScheme>(&s.scheme)) return interpolate_grid(s, *g);
    return interpolate_scattered(s);
}

} // namespace sob
