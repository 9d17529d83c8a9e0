#pragma once

#include "branequant/poisson.hpp"

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace branequant {

/// Edge kinds. Straight/Wavy belong to single-brane graphs and sum over the
/// tangential/conormal index ranges of the brane. The four class kinds
/// belong to two-brane graphs; slot 0 of the class says whether the edge
/// index lies in I0 ('+') or its complement, slot 1 the same for I1.
enum class EdgeKind : std::uint8_t { Straight, Wavy, PP, PM, MP, MM };

enum class KindSet : std::uint8_t { SingleBrane, TwoBrane };

inline bool kind_in_set(EdgeKind k, KindSet s) {
    bool single = (k == EdgeKind::Straight || k == EdgeKind::Wavy);
    return (s == KindSet::SingleBrane) == single;
}

inline const char* kind_symbol(EdgeKind k) {
    switch (k) {
        case EdgeKind::Straight: return "s";
        case EdgeKind::Wavy: return "w";
        case EdgeKind::PP: return "pp";
        case EdgeKind::PM: return "pm";
        case EdgeKind::MP: return "mp";
        case EdgeKind::MM: return "mm";
    }
    throw std::logic_error("kind_symbol: bad kind");
}

inline std::optional<EdgeKind> parse_kind(const std::string& s) {
    if (s == "s") return EdgeKind::Straight;
    if (s == "w") return EdgeKind::Wavy;
    if (s == "pp") return EdgeKind::PP;
    if (s == "pm") return EdgeKind::PM;
    if (s == "mp") return EdgeKind::MP;
    if (s == "mm") return EdgeKind::MM;
    return std::nullopt;
}

inline std::vector<EdgeKind> kinds_of(KindSet s) {
    if (s == KindSet::SingleBrane) return {EdgeKind::Straight, EdgeKind::Wavy};
    return {EdgeKind::PP, EdgeKind::PM, EdgeKind::MP, EdgeKind::MM};
}

/// Decorated labeled admissible graph. Aerial vertices are 0..aerial-1;
/// the trailing nXi of them are field vertices (one outgoing edge, carrying
/// a vector field); the others emit an ordered pair of edges. Boundary
/// vertices are aerial..aerial+nBoundary-1 and emit nothing. No edge may
/// target its own source.
struct AdmGraph {
    struct Edge {
        int target = 0;
        EdgeKind kind = EdgeKind::Straight;
        bool operator==(const Edge&) const = default;
    };

    int aerial = 0;
    int nXi = 0;
    int nBoundary = 0;
    KindSet kinds = KindSet::SingleBrane;
    std::vector<std::vector<Edge>> edges;  // per aerial vertex, slot-ordered

    int vertex_count() const { return aerial + nBoundary; }
    bool is_field_vertex(int v) const { return v >= aerial - nXi && v < aerial; }
    bool is_boundary(int v) const { return v >= aerial; }
    int boundary_slot(int v) const { return v - aerial; }  // 0 -> B1, 1 -> B2
    int out_degree(int v) const { return is_field_vertex(v) ? 1 : 2; }

    int edge_count() const { return 2 * (aerial - nXi) + nXi; }

    bool operator==(const AdmGraph&) const = default;

    void validate() const {
        if (nXi < 0 || nXi > 2 || nXi > aerial) throw std::invalid_argument("AdmGraph: bad nXi");
        if (nBoundary < 0 || nBoundary > 2) throw std::invalid_argument("AdmGraph: bad nBoundary");
        if (static_cast<int>(edges.size()) != aerial)
            throw std::invalid_argument("AdmGraph: edge list size != aerial count");
        for (int v = 0; v < aerial; ++v) {
            if (static_cast<int>(edges[v].size()) != out_degree(v))
                throw std::invalid_argument("AdmGraph: wrong out-degree");
            for (const Edge& e : edges[v]) {
                if (e.target == v) throw std::invalid_argument("AdmGraph: self-loop");
                if (e.target < 0 || e.target >= vertex_count())
                    throw std::invalid_argument("AdmGraph: target out of range");
                if (!kind_in_set(e.kind, kinds))
                    throw std::invalid_argument("AdmGraph: kind not in kind set");
            }
        }
    }
};

constexpr int kEnumerationCap = 3;

/// Number of labeled admissible graphs: every edge independently picks a
/// target (any vertex but its source) and a kind.
inline std::uint64_t enumeration_count(int aerial, int nXi, int nBoundary, KindSet ks) {
    std::uint64_t per_edge =
        static_cast<std::uint64_t>(aerial - 1 + nBoundary) * kinds_of(ks).size();
    std::uint64_t total = 1;
    for (int v = 0; v < aerial; ++v) {
        int deg = (v >= aerial - nXi) ? 1 : 2;
        for (int d = 0; d < deg; ++d) total *= per_edge;
    }
    return total;
}

/// All labeled admissible graphs with `aerial` first-type vertices, of which
/// the trailing nXi carry vector fields. Deterministic order.
inline std::vector<AdmGraph> enumerate_graphs(int aerial, int nXi, int nBoundary, KindSet ks,
                                              int cap = kEnumerationCap) {
    if (nXi < 0 || nXi > 2 || aerial < nXi) throw std::invalid_argument("enumerate: bad nXi");
    if (nBoundary < 0 || nBoundary > 2) throw std::invalid_argument("enumerate: bad nBoundary");
    if (aerial - nXi > cap) throw std::invalid_argument("enumerate: enumeration cap exceeded");

    AdmGraph proto;
    proto.aerial = aerial;
    proto.nXi = nXi;
    proto.nBoundary = nBoundary;
    proto.kinds = ks;
    proto.edges.assign(aerial, {});
    for (int v = 0; v < aerial; ++v) proto.edges[v].resize(proto.out_degree(v));

    // flat list of edge slots in (vertex, slot) order
    std::vector<std::pair<int, int>> slots;
    for (int v = 0; v < aerial; ++v)
        for (int s = 0; s < proto.out_degree(v); ++s) slots.emplace_back(v, s);

    auto kinds = kinds_of(ks);
    std::vector<AdmGraph> out;
    std::vector<AdmGraph::Edge> choice(slots.size());

    auto rec = [&](auto&& self, size_t si) -> void {
        if (si == slots.size()) {
            AdmGraph g = proto;
            for (size_t i = 0; i < slots.size(); ++i)
                g.edges[slots[i].first][slots[i].second] = choice[i];
            out.push_back(std::move(g));
            return;
        }
        int src = slots[si].first;
        for (int t = 0; t < proto.vertex_count(); ++t) {
            if (t == src) continue;
            for (EdgeKind k : kinds) {
                choice[si] = {t, k};
                self(self, si + 1);
            }
        }
    };
    rec(rec, 0);
    return out;
}

/// Where a boundary vertex sits for weight purposes and which index classes
/// may point at it. Mirrors the integration schemes of the weights module:
///   HalfPlane      B1, B2 on the real axis of the upper half-plane
///   QuadrantW0     B1 at the corner, B2 on the positive real axis
///   QuadrantW1     B1 on the positive imaginary axis, B2 at the corner
///   QuadrantCorner B1 at the corner
enum class Scheme : std::uint8_t { HalfPlane, QuadrantW0, QuadrantW1, QuadrantCorner };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::HalfPlane: return "HalfPlane";
        case Scheme::QuadrantW0: return "QuadrantW0";
        case Scheme::QuadrantW1: return "QuadrantW1";
        case Scheme::QuadrantCorner: return "QuadrantCorner";
    }
    throw std::logic_error("scheme_name: bad scheme");
}

inline std::optional<Scheme> parse_scheme(const std::string& s) {
    if (s == "HalfPlane") return Scheme::HalfPlane;
    if (s == "QuadrantW0") return Scheme::QuadrantW0;
    if (s == "QuadrantW1") return Scheme::QuadrantW1;
    if (s == "QuadrantCorner") return Scheme::QuadrantCorner;
    return std::nullopt;
}

inline KindSet scheme_kind_set(Scheme s) {
    return s == Scheme::HalfPlane ? KindSet::SingleBrane : KindSet::TwoBrane;
}

/// Reflection signs of a two-brane kind: sigma for class slot 0 (I0),
/// tau for slot 1 (I1). The induced one-form vanishes identically in its
/// target at a real-axis point iff sigma = -1, at an imaginary-axis point
/// iff tau = -1, and at the corner unless sigma = tau = +1.
inline std::pair<int, int> class_signs(EdgeKind k) {
    switch (k) {
        case EdgeKind::PP: return {+1, +1};
        case EdgeKind::PM: return {+1, -1};
        case EdgeKind::MP: return {-1, +1};
        case EdgeKind::MM: return {-1, -1};
        default: throw std::invalid_argument("class_signs: not a two-brane kind");
    }
}

/// Summation range of an edge kind given the brane data (single-brane:
/// one brane; two-brane: C0, C1).
inline std::vector<int> kind_index_range(EdgeKind k, std::span<const Brane> branes) {
    if (k == EdgeKind::Straight || k == EdgeKind::Wavy) {
        if (branes.size() != 1) throw std::invalid_argument("kind_index_range: need one brane");
        return k == EdgeKind::Straight ? branes[0].tangent : branes[0].conormal();
    }
    if (branes.size() != 2) throw std::invalid_argument("kind_index_range: need two branes");
    auto [sigma, tau] = class_signs(k);
    return index_intersection(sigma > 0 ? branes[0].tangent : branes[0].conormal(),
                              tau > 0 ? branes[1].tangent : branes[1].conormal());
}

/// Tangential index set of boundary vertex `slot` (0-based) under `scheme`;
/// an edge pointing at the vertex must sum inside this set, otherwise its
/// one-form vanishes identically at the pinned boundary position.
inline std::vector<int> boundary_tangent_set(Scheme scheme, int slot,
                                             std::span<const Brane> branes) {
    switch (scheme) {
        case Scheme::HalfPlane:
            return branes[0].tangent;
        case Scheme::QuadrantW0:  // B1 corner, B2 real axis
            return slot == 0 ? index_intersection(branes[0].tangent, branes[1].tangent)
                             : branes[0].tangent;
        case Scheme::QuadrantW1:  // B1 imaginary axis, B2 corner
            return slot == 0 ? branes[1].tangent
                             : index_intersection(branes[0].tangent, branes[1].tangent);
        case Scheme::QuadrantCorner:
            return index_intersection(branes[0].tangent, branes[1].tangent);
    }
    throw std::logic_error("boundary_tangent_set: bad scheme");
}

enum class PruneReason : std::uint8_t {
    Kept,
    WavyIntoBoundary,    // single-brane: form vanishes at the pinned point
    ClassIntoBoundary,   // two-brane analogue of the above
    EmptyIndexRange,     // operator is zero; weight need not vanish
    IdenticalDouble,     // repeated one-form, wedge vanishes
};

inline PruneReason classify_graph(const AdmGraph& g, Scheme scheme,
                                  std::span<const Brane> branes) {
    if (scheme_kind_set(scheme) != g.kinds)
        throw std::invalid_argument("classify_graph: scheme does not match kind set");
    for (int v = 0; v < g.aerial; ++v) {
        const auto& es = g.edges[v];
        for (size_t a = 0; a < es.size(); ++a)
            for (size_t b = a + 1; b < es.size(); ++b)
                if (es[a] == es[b]) return PruneReason::IdenticalDouble;
        for (const auto& e : es) {
            if (g.is_boundary(e.target)) {
                if (e.kind == EdgeKind::Wavy) return PruneReason::WavyIntoBoundary;
                if (g.kinds == KindSet::TwoBrane) {
                    auto range = kind_index_range(e.kind, branes);
                    auto allowed = boundary_tangent_set(scheme, g.boundary_slot(e.target), branes);
                    if (index_intersection(range, allowed) != range)
                        return PruneReason::ClassIntoBoundary;
                }
            }
            if (kind_index_range(e.kind, branes).empty()) return PruneReason::EmptyIndexRange;
        }
    }
    return PruneReason::Kept;
}

/// True when the prune reason certifies that the weight integrand vanishes
/// pointwise (as opposed to the operator being zero).
inline bool prune_reason_kills_weight(PruneReason r) {
    return r == PruneReason::WavyIntoBoundary || r == PruneReason::ClassIntoBoundary ||
           r == PruneReason::IdenticalDouble;
}

/// Removes graphs that contribute nothing: vanishing boundary one-forms,
/// vanishing wedges of identical one-forms, empty summation ranges.
inline std::vector<AdmGraph> prune_structural(const std::vector<AdmGraph>& graphs, Scheme scheme,
                                              std::span<const Brane> branes,
                                              std::vector<std::pair<AdmGraph, PruneReason>>* removed = nullptr) {
    std::vector<AdmGraph> kept;
    for (const auto& g : graphs) {
        PruneReason r = classify_graph(g, scheme, branes);
        if (r == PruneReason::Kept) kept.push_back(g);
        else if (removed) removed->emplace_back(g, r);
    }
    return kept;
}

/// Deterministic text encoding, bijective with the graph structure:
///   "k;nXi;nB;S;v1:(t,kind),(t,kind);v2:..."
/// with S = H (single-brane) or Q (two-brane), aerial targets printed
/// 1-based and boundary targets as B1/B2.
inline std::string canonical_key(const AdmGraph& g) {
    std::ostringstream os;
    os << g.aerial << ";" << g.nXi << ";" << g.nBoundary << ";"
       << (g.kinds == KindSet::SingleBrane ? "H" : "Q") << ";";
    for (int v = 0; v < g.aerial; ++v) {
        if (v) os << ";";
        os << "v" << (v + 1) << ":";
        for (size_t s = 0; s < g.edges[v].size(); ++s) {
            if (s) os << ",";
            const auto& e = g.edges[v][s];
            os << "(";
            if (g.is_boundary(e.target)) os << "B" << (g.boundary_slot(e.target) + 1);
            else os << (e.target + 1);
            os << "," << kind_symbol(e.kind) << ")";
        }
    }
    return os.str();
}

/// Inverse of canonical_key.
inline AdmGraph parse_key(const std::string& key) {
    auto fail = [&]() -> void { throw std::invalid_argument("parse_key: bad key '" + key + "'"); };
    std::vector<std::string> parts;
    {
        std::string cur;
        for (char c : key) {
            if (c == ';') { parts.push_back(cur); cur.clear(); }
            else cur += c;
        }
        parts.push_back(cur);
    }
    if (parts.size() < 5) fail();
    AdmGraph g;
    g.aerial = std::stoi(parts[0]);
    g.nXi = std::stoi(parts[1]);
    g.nBoundary = std::stoi(parts[2]);
    if (parts[3] == "H") g.kinds = KindSet::SingleBrane;
    else if (parts[3] == "Q") g.kinds = KindSet::TwoBrane;
    else fail();
    g.edges.assign(g.aerial, {});
    if (static_cast<int>(parts.size()) != 4 + std::max(g.aerial, 1)) fail();
    if (g.aerial == 0 && !parts[4].empty()) fail();
    for (int v = 0; v < g.aerial; ++v) {
        const std::string& blk = parts[4 + v];
        std::string head = "v" + std::to_string(v + 1) + ":";
        if (blk.rfind(head, 0) != 0) fail();
        std::string body = blk.substr(head.size());
        size_t pos = 0;
        while (pos < body.size()) {
            if (body[pos] == ',') ++pos;
            if (body[pos] != '(') fail();
            size_t close = body.find(')', pos);
            if (close == std::string::npos) fail();
            std::string inner = body.substr(pos + 1, close - pos - 1);
            size_t comma = inner.find(',');
            if (comma == std::string::npos) fail();
            std::string tgt = inner.substr(0, comma);
            auto kind = parse_kind(inner.substr(comma + 1));
            if (!kind) fail();
            AdmGraph::Edge e;
            e.kind = *kind;
            if (!tgt.empty() && tgt[0] == 'B') e.target = g.aerial + std::stoi(tgt.substr(1)) - 1;
            else e.target = std::stoi(tgt) - 1;
            g.edges[v].push_back(e);
            pos = close + 1;
        }
    }
    g.validate();
    return g;
}

} // namespace branequant
