#pragma once

#include "branequant/graphs.hpp"
#include "branequant/poisson.hpp"
#include "branequant/series.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

namespace branequant {

using nlohmann::json;

class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---- polynomials ----------------------------------------------------------

inline json poly_to_json(const PolyQ& p) {
    json terms = json::array();
    for (const auto& [e, c] : p.terms())
        terms.push_back({{"coeff", format_rational(c)}, {"exps", e}});
    return {{"dim", p.dim()}, {"terms", terms}};
}

inline json poly_to_json(const PolyD& p) {
    json terms = json::array();
    for (const auto& [e, c] : p.terms()) terms.push_back({{"coeff", c}, {"exps", e}});
    return {{"dim", p.dim()}, {"terms", terms}};
}

inline PolyQ poly_from_json(const json& j) {
    try {
        PolyQ p(j.at("dim").get<int>());
        for (const auto& t : j.at("terms")) {
            Rat c;
            const auto& cj = t.at("coeff");
            if (cj.is_string()) c = parse_rational(cj.get<std::string>());
            else if (cj.is_number_integer()) c = Rat(cj.get<long long>());
            else throw ParseError("polynomial coefficient must be a fraction string or integer");
            p.add_term(t.at("exps").get<std::vector<int>>(), c);
        }
        return p;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad polynomial JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("bad polynomial JSON: ") + e.what());
    }
}

// ---- Poisson structures and branes ----------------------------------------

inline json poisson_to_json(const PoissonStructure& pi) {
    json entries = json::array();
    for (const auto& [ij, p] : pi.upper)
        entries.push_back({{"i", ij.first}, {"j", ij.second}, {"poly", poly_to_json(p)}});
    return {{"dim", pi.dim}, {"entries", entries}};
}

inline PoissonStructure poisson_from_json(const json& j) {
    try {
        PoissonStructure pi(j.at("dim").get<int>());
        for (const auto& e : j.at("entries"))
            pi.set(e.at("i").get<int>(), e.at("j").get<int>(), poly_from_json(e.at("poly")));
        return pi;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad Poisson JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("bad Poisson JSON: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ParseError(std::string("bad Poisson JSON: ") + e.what());
    }
}

inline json brane_to_json(const Brane& b) { return {{"tangent", b.tangent}}; }

inline Brane brane_from_json(const json& j, int dim) {
    try {
        return Brane(dim, j.at("tangent").get<std::vector<int>>());
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad brane JSON: ") + e.what());
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad brane JSON: ") + e.what());
    }
}

// ---- series ----------------------------------------------------------------

template <typename R>
json series_to_json(const EpsSeries<R>& s) {
    json coeffs = json::array();
    for (const auto& c : s.coeffs) coeffs.push_back(poly_to_json(c));
    return {{"order", s.order}, {"coeffs", coeffs}, {"stderr", s.errs}};
}

inline EpsSeries<Rat> series_from_json(const json& j) {
    try {
        int K = j.at("order").get<int>();
        const auto& cj = j.at("coeffs");
        if (static_cast<int>(cj.size()) != K + 1) throw ParseError("coeff count != order+1");
        EpsSeries<Rat> s(poly_from_json(cj.at(0)).dim(), K);
        for (int k = 0; k <= K; ++k) s.coeffs[k] = poly_from_json(cj.at(k));
        if (j.contains("stderr")) s.errs = j.at("stderr").get<std::vector<double>>();
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad series JSON: ") + e.what());
    }
}

// ---- graphs -----------------------------------------------------------------

inline json graph_to_json(const AdmGraph& g) {
    json edges = json::array();
    for (int v = 0; v < g.aerial; ++v)
        for (const auto& e : g.edges[v]) {
            std::string tgt = g.is_boundary(e.target)
                                  ? "B" + std::to_string(g.boundary_slot(e.target) + 1)
                                  : std::to_string(e.target + 1);
            edges.push_back({{"from", v + 1}, {"to", tgt}, {"kind", kind_symbol(e.kind)}});
        }
    return {{"key", canonical_key(g)}, {"k", g.aerial}, {"edges", edges}};
}

// ---- files ------------------------------------------------------------------

inline json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError("parse error in " + path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << j.dump(2) << "\n";
}

} // namespace branequant
