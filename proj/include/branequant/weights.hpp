#pragma once

#include "branequant/angles.hpp"
#include "branequant/graphs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace branequant {

/// Numerically integrated weight. Reproducible: the same
/// (graph, scheme, samples, seed) yields a bit-identical value.
struct WeightResult {
    double value = 0;
    double stderr_ = 0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::HalfPlane;
};

struct WeightOptions {
    /// Position of the dilation-fixing boundary point (or circle radius for
    /// radius-constrained points). Any positive value is an admissible gauge;
    /// 1.0 is the reference slice used for cached weights.
    double gauge_scale = 1.0;
};

namespace detail {

enum class PointParam : std::uint8_t {
    FreeHalfPlane,   // 2 params, x in R, y > 0
    FreeQuadrant,    // 2 params, x > 0, y > 0
    CircleHalf,      // 1 param, theta in (0, pi), |z| = scale
    CircleQuarter,   // 1 param, theta in (0, pi/2), |z| = scale
    Fixed,           // 0 params, pinned position
};

struct PointSpec {
    PointParam param = PointParam::FreeHalfPlane;
    Vec2 fixed_pos{};   // used when nparams() == 0
    int first_param = -1;
    int nparams() const {
        switch (param) {
            case PointParam::FreeHalfPlane:
            case PointParam::FreeQuadrant: return 2;
            case PointParam::CircleHalf:
            case PointParam::CircleQuarter: return 1;
            default: return 0;
        }
    }
};

} // namespace detail

/// Gauge-fixed parametrization of the configuration space of a graph under
/// an integration scheme. The slice conventions are:
///   HalfPlane, 2 boundary points   B1=0, B2=scale; aerial points free.
///   HalfPlane, 1 boundary point    B1=0; the last aerial vertex on the
///                                  upper semicircle of radius scale.
///   HalfPlane, 0 boundary points   the last aerial vertex pinned at
///                                  i*scale; remaining points free.
///   QuadrantW0                     B1 at the corner, B2=scale on the real
///                                  axis; aerial points free in the quadrant.
///   QuadrantW1                     B1=i*scale on the imaginary axis, B2 at
///                                  the corner.
///   QuadrantCorner                 B1 at the corner; the last aerial vertex
///                                  on the quarter circle of radius scale.
/// Columns are ordered point by point in vertex order (x then y, or theta);
/// rows are ordered by (vertex, edge slot).
struct GaugeLayout {
    std::vector<detail::PointSpec> points;  // one per aerial vertex
    std::array<Vec2, 2> boundary_pos{};
    int moduli_dim = 0;
    double scale = 1.0;
};

inline GaugeLayout make_layout(const AdmGraph& g, Scheme scheme, const WeightOptions& opt = {}) {
    if (scheme_kind_set(scheme) != g.kinds)
        throw std::invalid_argument("make_layout: scheme does not match graph kind set");
    using detail::PointParam;
    GaugeLayout lo;
    lo.scale = opt.gauge_scale;
    lo.points.resize(g.aerial);
    auto free_kind = scheme == Scheme::HalfPlane ? PointParam::FreeHalfPlane
                                                 : PointParam::FreeQuadrant;
    for (auto& p : lo.points) p.param = free_kind;

    switch (scheme) {
        case Scheme::HalfPlane:
            if (g.nBoundary == 2) {
                lo.boundary_pos = {Vec2{0, 0}, Vec2{lo.scale, 0}};
            } else if (g.nBoundary == 1) {
                lo.boundary_pos = {Vec2{0, 0}, Vec2{}};
                if (g.aerial < 1) throw std::invalid_argument("make_layout: no aerial point to constrain");
                lo.points.back().param = PointParam::CircleHalf;
            } else {
                if (g.aerial < 1) throw std::invalid_argument("make_layout: no aerial point to pin");
                lo.points.back().param = PointParam::Fixed;
                lo.points.back().fixed_pos = Vec2{0, lo.scale};
            }
            break;
        case Scheme::QuadrantW0:
            if (g.nBoundary != 2) throw std::invalid_argument("make_layout: QuadrantW0 needs 2 boundary points");
            lo.boundary_pos = {Vec2{0, 0}, Vec2{lo.scale, 0}};
            break;
        case Scheme::QuadrantW1:
            if (g.nBoundary != 2) throw std::invalid_argument("make_layout: QuadrantW1 needs 2 boundary points");
            lo.boundary_pos = {Vec2{0, lo.scale}, Vec2{0, 0}};
            break;
        case Scheme::QuadrantCorner:
            if (g.nBoundary != 1) throw std::invalid_argument("make_layout: QuadrantCorner needs 1 boundary point");
            lo.boundary_pos = {Vec2{0, 0}, Vec2{}};
            if (g.aerial < 1) throw std::invalid_argument("make_layout: no aerial point to constrain");
            lo.points.back().param = PointParam::CircleQuarter;
            break;
    }
    int c = 0;
    for (auto& p : lo.points) { p.first_param = c; c += p.nparams(); }
    lo.moduli_dim = c;
    return lo;
}

namespace detail {

constexpr double kPi = std::numbers::pi;

struct PointState {
    Vec2 pos{};
    // tangent vectors of the position with respect to the point's own params
    Vec2 dparam[2]{};
    int first_param = -1;
    int nparams = 0;
};

/// Evaluate positions and parametrization tangents at a unit-cube point u.
inline void eval_points(const GaugeLayout& lo, const double* u, std::vector<PointState>& out) {
    out.resize(lo.points.size());
    for (size_t i = 0; i < lo.points.size(); ++i) {
        const auto& spec = lo.points[i];
        PointState st;
        st.first_param = spec.first_param;
        st.nparams = spec.nparams();
        switch (spec.param) {
            case PointParam::FreeHalfPlane: {
                double a = u[spec.first_param], b = u[spec.first_param + 1];
                double x = std::tan(kPi * (a - 0.5));
                double y = std::tan(kPi * b * 0.5);
                st.pos = {x, y};
                st.dparam[0] = {kPi * (1 + x * x), 0};
                st.dparam[1] = {0, kPi * 0.5 * (1 + y * y)};
                break;
            }
            case PointParam::FreeQuadrant: {
                double a = u[spec.first_param], b = u[spec.first_param + 1];
                double x = std::tan(kPi * a * 0.5);
                double y = std::tan(kPi * b * 0.5);
                st.pos = {x, y};
                st.dparam[0] = {kPi * 0.5 * (1 + x * x), 0};
                st.dparam[1] = {0, kPi * 0.5 * (1 + y * y)};
                break;
            }
            case PointParam::CircleHalf: {
                double th = kPi * u[spec.first_param];
                st.pos = {lo.scale * std::cos(th), lo.scale * std::sin(th)};
                st.dparam[0] = {-kPi * lo.scale * std::sin(th), kPi * lo.scale * std::cos(th)};
                break;
            }
            case PointParam::CircleQuarter: {
                double th = kPi * 0.5 * u[spec.first_param];
                st.pos = {lo.scale * std::cos(th), lo.scale * std::sin(th)};
                st.dparam[0] = {-kPi * 0.5 * lo.scale * std::sin(th),
                                kPi * 0.5 * lo.scale * std::cos(th)};
                break;
            }
            default:
                st.pos = spec.fixed_pos;
                break;
        }
        out[i] = st;
    }
}

/// Determinant by Gaussian elimination with partial pivoting; m is row-major n x n.
inline double det_inplace(std::vector<double>& m, int n) {
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(m[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::abs(m[r * n + col]);
            if (v > best) { best = v; piv = r; }
        }
        if (best == 0.0) return 0.0;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(m[piv * n + c], m[col * n + c]);
            det = -det;
        }
        double d = m[col * n + col];
        det *= d;
        for (int r = col + 1; r < n; ++r) {
            double f = m[r * n + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
        }
    }
    return det;
}

inline double halton(std::uint64_t i, int base) {
    double f = 1.0, r = 0.0;
    while (i) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr int kHaltonBases[8] = {2, 3, 5, 7, 11, 13, 17, 19};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

} // namespace detail

/// Integrand of the weight integral at a unit-cube point: the determinant of
/// the E x E matrix whose row r holds the derivatives of the r-th edge angle
/// with respect to the gauge-slice parameters (chain rule through the
/// compactifying parametrization, so the unit-cube measure is the pulled-back
/// moduli measure). Requires moduli_dim == edge count.
inline double weight_integrand(const AdmGraph& g, const GaugeLayout& lo, const double* u) {
    const int E = g.edge_count();
    if (lo.moduli_dim != E)
        throw std::invalid_argument("weight_integrand: moduli dimension != edge count");
    thread_local std::vector<detail::PointState> pts;
    detail::eval_points(lo, u, pts);

    auto pos_of = [&](int v) -> Vec2 {
        return g.is_boundary(v) ? lo.boundary_pos[g.boundary_slot(v)] : pts[v].pos;
    };

    // reject near-coincident configurations (integrable singularity)
    constexpr double kMinSep2 = 1e-24;
    for (int v = 0; v < g.vertex_count(); ++v)
        for (int w = v + 1; w < g.vertex_count(); ++w)
            if ((pos_of(v) - pos_of(w)).norm2() < kMinSep2) return 0.0;

    thread_local std::vector<double> mat;
    mat.assign(static_cast<size_t>(E) * E, 0.0);

    int row = 0;
    for (int v = 0; v < g.aerial; ++v) {
        for (const auto& e : g.edges[v]) {
            // the form's (z, w) arguments: straight/class edges use (src, tgt),
            // wavy edges swap the propagator arguments
            int zi = v, wi = e.target;
            if (e.kind == EdgeKind::Wavy) std::swap(zi, wi);
            Vec2 zp = pos_of(zi), wp = pos_of(wi);
            Vec2 dz, dw;
            if (g.kinds == KindSet::SingleBrane) {
                dz = angle_halfplane_dz(zp, wp);
                dw = angle_halfplane_dw(zp, wp);
            } else {
                auto [sigma, tau] = class_signs(e.kind);
                dz = angle_quadrant_dz(sigma, tau, zp, wp);
                dw = angle_quadrant_dw(sigma, tau, zp, wp);
            }
            auto accumulate = [&](int vertex, Vec2 grad) {
                if (g.is_boundary(vertex)) return;
                const auto& st = pts[vertex];
                for (int p = 0; p < st.nparams; ++p)
                    mat[static_cast<size_t>(row) * E + st.first_param + p] +=
                        grad.x * st.dparam[p].x + grad.y * st.dparam[p].y;
            };
            accumulate(zi, dz);
            accumulate(wi, dw);
            ++row;
        }
    }
    double d = detail::det_inplace(mat, E);
    return std::isfinite(d) ? d : 0.0;
}

/// Whether the scheme's moduli dimension matches the graph's form degree;
/// when it does not, the weight is zero by degree counting.
inline bool moduli_dimension_matches(const AdmGraph& g, Scheme scheme) {
    return make_layout(g, scheme).moduli_dim == g.edge_count();
}

/// Monte Carlo weight estimate: (2pi)^{-E} times the integral of the edge-form
/// wedge over the gauge slice. Batched randomized quasi-Monte Carlo: every
/// batch evaluates the same low-discrepancy point set under an independent
/// per-batch toroidal shift derived from (seed, batch), so batch means are
/// i.i.d., estimates are unbiased, and parallel and serial runs agree exactly.
inline WeightResult weight_mc(const AdmGraph& g, Scheme scheme, std::int64_t samples,
                              std::uint64_t seed, const WeightOptions& opt = {}) {
    g.validate();
    WeightResult res;
    res.scheme = scheme;
    res.seed = seed;
    const int E = g.edge_count();
    if (E == 0) {  // empty product: normalized weight is exactly 1
        res.value = 1.0;
        res.stderr_ = 0.0;
        res.samples = 0;
        return res;
    }
    GaugeLayout lo = make_layout(g, scheme, opt);
    if (lo.moduli_dim != E) {  // zero by form-degree counting
        res.value = 0.0;
        res.stderr_ = 0.0;
        res.samples = 0;
        return res;
    }
    const int dim = lo.moduli_dim;
    if (dim > 8) throw std::invalid_argument("weight_mc: moduli dimension too large");
    if (samples < 1) throw std::invalid_argument("weight_mc: samples < 1");

    const int nb = samples >= 6400 ? 64 : std::max<int>(4, static_cast<int>(samples / 100));
    const std::int64_t bs = (samples + nb - 1) / nb;

    std::vector<double> batch_mean(nb, 0.0);
    auto run_batch = [&](int b) {
        double shift[8];
        for (int d = 0; d < dim; ++d)
            shift[d] = detail::unit_double(
                detail::splitmix64(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(b) * 8 + d));
        double u[8];
        double acc = 0.0;
        for (std::int64_t j = 1; j <= bs; ++j) {
            for (int d = 0; d < dim; ++d) {
                double x = detail::halton(static_cast<std::uint64_t>(j), detail::kHaltonBases[d]) +
                           shift[d];
                u[d] = x - std::floor(x);
            }
            acc += weight_integrand(g, lo, u);
        }
        batch_mean[b] = acc / static_cast<double>(bs);
    };

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    int nthreads = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(nb)));
    if (nthreads <= 1) {
        for (int b = 0; b < nb; ++b) run_batch(b);
    } else {
        std::vector<std::future<void>> fs;
        for (int t = 0; t < nthreads; ++t)
            fs.push_back(std::async(std::launch::async, [&, t] {
                for (int b = t; b < nb; b += nthreads) run_batch(b);
            }));
        for (auto& f : fs) f.get();
    }

    double mean = 0.0;
    for (double m : batch_mean) mean += m;
    mean /= nb;
    double var = 0.0;
    for (double m : batch_mean) var += (m - mean) * (m - mean);
    var /= (nb - 1);

    const double norm = std::pow(2.0 * detail::kPi, -E);
    res.value = mean * norm;
    res.stderr_ = std::sqrt(var / nb) * norm;
    res.samples = static_cast<std::int64_t>(nb) * bs;
    return res;
}

} // namespace branequant
