#include "sob/matcher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sob/parallel.hpp"

namespace sob {

namespace {

struct TreeEdge {
    int32_t a;
    int32_t b;
    uint8_t weight;
};

// MstEdges plus the per-edge similarity exp(-w/sigma).
struct SpanningTree {
    std::vector<int32_t> order;
    std::vector<int32_t> parent;
    std::vector<float> parent_sim;
};

int find_root(std::vector<int32_t>& uf, int i) {
    while (uf[static_cast<size_t>(i)] != i) {
        uf[static_cast<size_t>(i)] = uf[static_cast<size_t>(uf[static_cast<size_t>(i)])];
        i = uf[static_cast<size_t>(i)];
    }
    return i;
}

uint8_t edge_weight(const Image& guide, int x0, int y0, int x1, int y1) {
    int w = 0;
    for (int c = 0; c < guide.channels(); ++c) {
        const int d = std::abs(static_cast<int>(std::lround(guide.at(x0, y0, c))) -
                               static_cast<int>(std::lround(guide.at(x1, y1, c))));
        w = std::max(w, d);
    }
    return static_cast<uint8_t>(std::min(w, 255));
}

} // namespace

MstEdges build_guide_mst(const Image& guide) {
    const int w = guide.width(), h = guide.height();
    const int n = w * h;

    // Counting-sort Kruskal: bucket the grid edges by 8-bit weight, keeping
    // scan order (per pixel: right edge, then down edge) for determinism.
    std::vector<std::vector<TreeEdge>> buckets(256);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int32_t p = y * w + x;
            if (x + 1 < w) {
                const uint8_t wt = edge_weight(guide, x, y, x + 1, y);
                buckets[wt].push_back({p, p + 1, wt});
            }
            if (y + 1 < h) {
                const uint8_t wt = edge_weight(guide, x, y, x, y + 1);
                buckets[wt].push_back({p, p + w, wt});
            }
        }

    std::vector<int32_t> uf(static_cast<size_t>(n));
    std::iota(uf.begin(), uf.end(), 0);
    std::vector<int32_t> head(static_cast<size_t>(n), -1);
    std::vector<int32_t> next_edge;
    std::vector<int32_t> to_node;
    std::vector<uint8_t> wt_of;
    next_edge.reserve(2 * static_cast<size_t>(n));
    to_node.reserve(2 * static_cast<size_t>(n));
    wt_of.reserve(2 * static_cast<size_t>(n));

    auto add_adj = [&](int32_t from, int32_t to, uint8_t wt) {
        to_node.push_back(to);
        wt_of.push_back(wt);
        next_edge.push_back(head[static_cast<size_t>(from)]);
        head[static_cast<size_t>(from)] = static_cast<int32_t>(to_node.size()) - 1;
    };

    int accepted = 0;
    for (int wgt = 0; wgt < 256 && accepted < n - 1; ++wgt)
        for (const TreeEdge& e : buckets[static_cast<size_t>(wgt)]) {
            const int ra = find_root(uf, e.a);
            const int rb = find_root(uf, e.b);
            if (ra == rb) continue;
            uf[static_cast<size_t>(ra)] = rb;
            add_adj(e.a, e.b, e.weight);
            add_adj(e.b, e.a, e.weight);
            ++accepted;
        }

    // Root at node 0, BFS.
    MstEdges tree;
    tree.order.resize(static_cast<size_t>(n));
    tree.parent.assign(static_cast<size_t>(n), -1);
    tree.weight.assign(static_cast<size_t>(n), 0);

    std::vector<uint8_t> seen(static_cast<size_t>(n), 0);
    int head_i = 0, tail = 0;
    tree.order[static_cast<size_t>(tail++)] = 0;
    seen[0] = 1;
    while (head_i < tail) {
        const int32_t p = tree.order[static_cast<size_t>(head_i++)];
        for (int32_t ei = head[static_cast<size_t>(p)]; ei != -1;
             ei = next_edge[static_cast<size_t>(ei)]) {
            const int32_t q = to_node[static_cast<size_t>(ei)];
            if (seen[static_cast<size_t>(q)]) continue;
            seen[static_cast<size_t>(q)] = 1;
            tree.parent[static_cast<size_t>(q)] = p;
            tree.weight[static_cast<size_t>(q)] = wt_of[static_cast<size_t>(ei)];
            tree.order[static_cast<size_t>(tail++)] = q;
        }
    }
    return tree;
}

namespace {

SpanningTree with_similarity(const MstEdges& edges, double sigma_tree) {
    std::array<float, 256> sim_of_weight;
    for (int i = 0; i < 256; ++i)
        sim_of_weight[static_cast<size_t>(i)] =
            static_cast<float>(std::exp(-static_cast<double>(i) / sigma_tree));
    SpanningTree tree;
    tree.order = edges.order;
    tree.parent = edges.parent;
    tree.parent_sim.resize(edges.weight.size());
    for (size_t i = 0; i < edges.weight.size(); ++i)
        tree.parent_sim[i] = edges.parent[i] < 0 ? 0.0f : sim_of_weight[edges.weight[i]];
    return tree;
}

// Two-pass tree DP: after it, acc[p] = sum_q S(p,q) * value[q].
void tree_filter(const SpanningTree& tree, std::vector<double>& acc) {
    const size_t n = acc.size();
    // Leaf-to-root.
    for (size_t i = n; i-- > 1;) {
        const int32_t p = tree.order[i];
        acc[static_cast<size_t>(tree.parent[static_cast<size_t>(p)])] +=
            tree.parent_sim[static_cast<size_t>(p)] * acc[static_cast<size_t>(p)];
    }
    // Root-to-leaf.
    for (size_t i = 1; i < n; ++i) {
        const int32_t p = tree.order[i];
        const double s = tree.parent_sim[static_cast<size_t>(p)];
        acc[static_cast<size_t>(p)] =
            s * acc[static_cast<size_t>(tree.parent[static_cast<size_t>(p)])] +
            (1.0 - s * s) * acc[static_cast<size_t>(p)];
    }
}

} // namespace

CostVolume aggregate(const CostVolume& v, const Image& guide, double sigma_tree) {
    if (v.width() != guide.width() || v.height() != guide.height())
        throw std::invalid_argument("aggregate: dimension mismatch");
    if (!v.values_complete())
        throw std::invalid_argument("aggregate: sparse volume, densify first");
    if (!(sigma_tree > 0.0)) throw std::invalid_argument("aggregate: sigma_tree must be > 0");

    const SpanningTree tree = with_similarity(build_guide_mst(guide), sigma_tree);
    const size_t n = v.plane_size();

    // Shared normalizer for fully occupied layers.
    std::vector<double> full_norm(n, 1.0);
    tree_filter(tree, full_norm);

    CostVolume out(v.width(), v.height(), v.dmax(), true);
    parallel_for(v.layers(), [&](int d) {
        const float* cost = v.layer(d);
        const uint8_t* occ = v.occupancy_layer(d);
        std::vector<double> num(n);
        bool full = true;
        for (size_t i = 0; i < n; ++i) {
            num[i] = occ[i] ? static_cast<double>(cost[i]) : 0.0;
            full = full && occ[i];
        }
        tree_filter(tree, num);

        float* out_cost = out.layer(d);
        uint8_t* out_occ = out.occupancy_layer(d);
        if (full) {
            for (size_t i = 0; i < n; ++i) {
                out_cost[i] = static_cast<float>(num[i] / full_norm[i]);
                out_occ[i] = 1;
            }
        } else {
            std::vector<double> den(n);
            for (size_t i = 0; i < n; ++i) den[i] = occ[i] ? 1.0 : 0.0;
            tree_filter(tree, den);
            for (size_t i = 0; i < n; ++i) {
                out_cost[i] = den[i] > 0.0 ? static_cast<float>(num[i] / den[i]) : 0.0f;
                out_occ[i] = occ[i];
            }
        }
    });
    return out;
}

DisparityMap select_disparity(const CostVolume& v) {
    if (!v.values_complete())
        throw std::invalid_argument("select_disparity: dense volume required");
    const size_t n = v.plane_size();
    DisparityMap map;
    map.width = v.width();
    map.height = v.height();
    map.dmax = v.dmax();
    map.disparity.assign(n, 0);
    map.stability.assign(n, 1);

    parallel_for(v.height(), [&](int y) {
        for (int x = 0; x < v.width(); ++x) {
            const size_t i = static_cast<size_t>(y) * v.width() + x;
            float best = 0.0f;
            int best_d = -1;
            for (int d = 0; d <= v.dmax(); ++d) {
                if (!v.occupancy_layer(d)[i]) continue;
                const float c = v.layer(d)[i];
                if (best_d < 0 || c < best) {
                    best = c;
                    best_d = d;
                }
            }
            map.disparity[i] = static_cast<int16_t>(best_d < 0 ? 0 : best_d);
        }
    });
    return map;
}

DisparityMap lr_consistency(const DisparityMap& d_left, const DisparityMap& d_right,
                            int threshold) {
    if (d_left.width != d_right.width || d_left.height != d_right.height)
        throw std::invalid_argument("lr_consistency: size mismatch");
    const int w = d_left.width, h = d_left.height;

    DisparityMap out = d_left;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const int d = d_left.disparity[i];
            const int xr = x + d;
            const bool ok = xr >= 0 && xr < w &&
                            std::abs(d - d_right.at(xr, y)) <= threshold;
            out.stability[i] = ok ? 1 : 0;
        }

    // Refill from the nearest stable pixel on each side of the row; where
    // both exist the smaller disparity wins (holes open up over the
    // background). Rows with no stable pixel fall back to 0. Refilled pixels
    // stay flagged unstable.
    std::vector<int16_t> filled(out.disparity);
    for (int y = 0; y < h; ++y) {
        const size_t row = static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            if (out.stability[row + x]) continue;
            int16_t left_fill = -1, right_fill = -1;
            for (int l = x - 1; l >= 0; --l)
                if (out.stability[row + l]) {
                    left_fill = out.disparity[row + l];
                    break;
                }
            for (int r = x + 1; r < w; ++r)
                if (out.stability[row + r]) {
                    right_fill = out.disparity[row + r];
                    break;
                }
            if (left_fill >= 0 && right_fill >= 0)
                filled[row + x] = std::min(left_fill, right_fill);
            else if (left_fill >= 0)
                filled[row + x] = left_fill;
            else
                filled[row + x] = std::max<int16_t>(right_fill, 0);
        }
    }
    out.disparity = std::move(filled);
    return out;
}

DisparityMap lr_refine(const DisparityMap& checked, const Image& guide, double sigma_tree) {
    if (checked.width != guide.width() || checked.height != guide.height())
        throw std::invalid_argument("lr_refine: dimension mismatch");
    const int dmax = checked.dmax;
    CostVolume vol(checked.width, checked.height, dmax, true);
    for (int d = 0; d <= dmax; ++d) {
        float* cost = vol.layer(d);
        uint8_t* occ = vol.occupancy_layer(d);
        for (size_t i = 0; i < vol.plane_size(); ++i) {
            if (checked.stability[i]) {
                cost[i] = static_cast<float>(std::abs(d - checked.disparity[i]));
                occ[i] = 1;
            }
        }
    }
    CostVolume agg = aggregate(vol, guide, sigma_tree);
    // The aggregated estimates exist everywhere; let selection use them at
    // unstable pixels too.
    for (int d = 0; d <= dmax; ++d)
        std::fill(agg.occupancy_layer(d), agg.occupancy_layer(d) + agg.plane_size(),
                  static_cast<uint8_t>(1));
    DisparityMap refined = select_disparity(agg);
    refined.dmax = dmax;
    refined.stability = checked.stability;
    return refined;
}

} // namespace sob
