#pragma once

// Scenario files: one JSON document describing a verification run.  The
// schema is deliberately small:
//
// {
//   "name":   "example_r2",
//   "kind":   "fitting_suite" | "numeric_ribet" | "dvr_recursion" |
//             "distinguishable" | "formal_context" | "koszul" | "end_to_end",
//   "seed":   1,
//   "budgets": { "spairs": 200000, "degree_bound": 6, "group": 30000,
//                "samples": 100 },
//   "payload": { ...kind-specific... }
// }
//
// Ring specs inside payloads:  {"kind":"truncated_dvr","p":2,"n":4},
// {"kind":"integers_mod","N":8}, {"kind":"prime_field","p":3},
// {"kind":"integers"}, {"kind":"rationals"},
// {"kind":"product","factors":[...]},
// {"kind":"fiber_product","left":{...},"right":{...},"m":2}.

#include <json.hpp>

#include <fstream>
#include <string>

#include "ribet/formal.hpp"
#include "ribet/numeric.hpp"
#include "ribet/rings.hpp"

namespace ribet::scenario {

using nlohmann::json;
using nlohmann::ordered_json;

enum class Kind { FittingSuite, NumericRibet, DvrRecursion, Distinguishable, FormalContext, Koszul, EndToEnd };

inline Kind kind_from_string(const std::string& s) {
    if (s == "fitting_suite") return Kind::FittingSuite;
    if (s == "numeric_ribet") return Kind::NumericRibet;
    if (s == "dvr_recursion") return Kind::DvrRecursion;
    if (s == "distinguishable") return Kind::Distinguishable;
    if (s == "formal_context") return Kind::FormalContext;
    if (s == "koszul") return Kind::Koszul;
    if (s == "end_to_end") return Kind::EndToEnd;
    throw std::invalid_argument("scenario: unknown kind '" + s + "'");
}

inline const char* kind_to_string(Kind k) {
    switch (k) {
        case Kind::FittingSuite: return "fitting_suite";
        case Kind::NumericRibet: return "numeric_ribet";
        case Kind::DvrRecursion: return "dvr_recursion";
        case Kind::Distinguishable: return "distinguishable";
        case Kind::FormalContext: return "formal_context";
        case Kind::Koszul: return "koszul";
        case Kind::EndToEnd: return "end_to_end";
    }
    return "?";
}

struct Budgets {
    long spairs = 200000;
    int degree_bound = 6;
    long group = 30000;
    long samples = 100;
};

struct Scenario {
    std::string name;
    Kind kind = Kind::FormalContext;
    std::uint64_t seed = 0;
    Budgets budgets;
    ordered_json payload;
    ordered_json raw;  // the full document, echoed into reports
};

inline Scenario parse_scenario(const ordered_json& doc) {
    Scenario s;
    if (!doc.is_object()) throw std::invalid_argument("scenario: document must be a JSON object");
    if (!doc.contains("name") || !doc["name"].is_string())
        throw std::invalid_argument("scenario: missing string field 'name'");
    if (!doc.contains("kind") || !doc["kind"].is_string())
        throw std::invalid_argument("scenario: missing string field 'kind'");
    s.name = doc["name"].get<std::string>();
    s.kind = kind_from_string(doc["kind"].get<std::string>());
    s.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("budgets")) {
        const auto& b = doc["budgets"];
        s.budgets.spairs = b.value("spairs", s.budgets.spairs);
        s.budgets.degree_bound = b.value("degree_bound", s.budgets.degree_bound);
        s.budgets.group = b.value("group", s.budgets.group);
        s.budgets.samples = b.value("samples", s.budgets.samples);
    }
    if (!doc.contains("payload") || !doc["payload"].is_object())
        throw std::invalid_argument("scenario: missing object field 'payload'");
    s.payload = doc["payload"];
    s.raw = doc;
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scenario: cannot open " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::invalid_argument("scenario: JSON parse failure in " + path + ": " + e.what());
    }
    return parse_scenario(doc);
}

// ---- payload helpers ----------------------------------------------------------

inline rings::RingSpec ring_spec_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("ring spec: object with 'kind' required");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "integers") return rings::RingSpec::integers();
    if (kind == "rationals") return rings::RingSpec::rationals();
    if (kind == "prime_field") return rings::RingSpec::prime_field(Int(j.at("p").get<long>()));
    if (kind == "integers_mod") return rings::RingSpec::integers_mod(Int(j.at("N").get<long>()));
    if (kind == "truncated_dvr")
        return rings::RingSpec::truncated_dvr(Int(j.at("p").get<long>()), j.at("n").get<unsigned>());
    if (kind == "product") {
        std::vector<rings::RingSpec> factors;
        for (const auto& f : j.at("factors")) factors.push_back(ring_spec_from_json(f));
        return rings::RingSpec::product(std::move(factors));
    }
    if (kind == "fiber_product")
        return rings::RingSpec::fiber_product(ring_spec_from_json(j.at("left")), ring_spec_from_json(j.at("right")),
                                              Int(j.at("m").get<long>()));
    throw std::invalid_argument("ring spec: unknown kind '" + kind + "'");
}

inline ordered_json ring_spec_to_json(const rings::RingSpec& s) {
    ordered_json j;
    switch (s.kind) {
        case rings::RingKind::Integers: j["kind"] = "integers"; break;
        case rings::RingKind::Rationals: j["kind"] = "rationals"; break;
        case rings::RingKind::PrimeField:
            j["kind"] = "prime_field";
            j["p"] = s.p.get_si();
            break;
        case rings::RingKind::IntegersModN:
            j["kind"] = "integers_mod";
            j["N"] = s.N.get_si();
            break;
        case rings::RingKind::TruncatedDVR:
            j["kind"] = "truncated_dvr";
            j["p"] = s.p.get_si();
            j["n"] = s.n;
            break;
        case rings::RingKind::Product: {
            j["kind"] = "product";
            j["factors"] = ordered_json::array();
            for (const auto& f : s.factors) j["factors"].push_back(ring_spec_to_json(f));
            break;
        }
        case rings::RingKind::FiberProduct:
            j["kind"] = "fiber_product";
            j["left"] = ring_spec_to_json(s.factors[0]);
            j["right"] = ring_spec_to_json(s.factors[1]);
            j["m"] = s.conductor.get_si();
            break;
    }
    return j;
}

/// Parses a numeric representation payload: ring + 2x2 generator matrices
/// (row-major nested arrays) + optional character value lists + ideal
/// generators.  `precision_override`, when positive, replaces the n of a
/// truncated-DVR ring.
inline numeric::FiniteRepresentation rep_from_json(const ordered_json& payload, int precision_override = 0) {
    auto spec = ring_spec_from_json(payload.at("ring"));
    if (precision_override > 0 && spec.kind == rings::RingKind::TruncatedDVR)
        spec.n = static_cast<unsigned>(precision_override);
    numeric::FiniteRepresentation rep;
    rep.T = rings::Ring::make(spec);
    if (!payload.contains("generators") || !payload["generators"].is_array())
        throw std::invalid_argument("payload: 'generators' array required");
    for (const auto& g : payload["generators"]) {
        if (!g.is_array() || g.size() != 2 || !g[0].is_array() || g[0].size() != 2 || g[1].size() != 2)
            throw std::invalid_argument("payload: generators must be 2x2 nested arrays");
        rep.gens.push_back(numeric::RMat2(rep.T->from_int(Int(g[0][0].get<long>())),
                                          rep.T->from_int(Int(g[0][1].get<long>())),
                                          rep.T->from_int(Int(g[1][0].get<long>())),
                                          rep.T->from_int(Int(g[1][1].get<long>()))));
    }
    auto parse_chi = [&](const char* key, std::vector<rings::RingElem>& out) {
        if (!payload.contains(key)) return;
        for (const auto& v : payload[key]) out.push_back(rep.T->from_int(Int(v.get<long>())));
        if (out.size() != rep.gens.size())
            throw std::invalid_argument(std::string("payload: '") + key + "' must list one value per generator");
    };
    parse_chi("chi1", rep.chi1);
    parse_chi("chi2", rep.chi2);
    if (payload.contains("ideal"))
        for (const auto& v : payload["ideal"]) rep.ideal_gens.push_back(rep.T->from_int(Int(v.get<long>())));
    return rep;
}

inline std::vector<formal::RowSpec> rows_from_json(const ordered_json& rows) {
    std::vector<formal::RowSpec> out;
    for (const auto& r : rows) {
        if (!r.is_array() || r.empty()) throw std::invalid_argument("payload: row specs are arrays");
        std::string kind = r[0].get<std::string>();
        if (kind == "eps") {
            out.push_back(formal::RowSpec::eps());
        } else if (kind == "delta") {
            if (r.size() != 3) throw std::invalid_argument("payload: delta rows are [\"delta\", i, j]");
            out.push_back(formal::RowSpec::delta(r[1].get<int>(), r[2].get<int>()));
        } else {
            throw std::invalid_argument("payload: unknown row kind '" + kind + "'");
        }
    }
    return out;
}

}  // namespace ribet::scenario
