#pragma once

// Finitely presented modules and 0th Fitting ideals over Z, Z/N, Z/p^n and
// finite products; presentation rows are relations, columns are generators.
// Fitt(M) is the ideal of all (#generators)-sized minors, zero when there are
// fewer relations than generators.  A Smith-form route (product of elementary
// divisors) provides the independent oracle for the minor computation.

#include <optional>
#include <string>
#include <vector>

#include "ribet/matrix.hpp"
#include "ribet/normal_forms.hpp"
#include "ribet/rings.hpp"

namespace ribet::fitting {

using rings::LocalIdeal;
using rings::RingElem;
using rings::RingKind;
using rings::RingPtr;
using rings::Value;

struct PresentedModule {
    RingPtr ring;
    size_t generators = 0;                         // m: rank of the target free module
    std::vector<std::vector<RingElem>> relations;  // n rows of length m

    static PresentedModule from_int_rows(const RingPtr& ring, size_t generators,
                                         const std::vector<std::vector<Int>>& rows) {
        PresentedModule M;
        M.ring = ring;
        M.generators = generators;
        for (const auto& r : rows) {
            if (r.size() != generators) throw std::invalid_argument("presentation row length mismatch");
            std::vector<RingElem> row;
            row.reserve(r.size());
            for (const auto& z : r) row.push_back(ring->from_int(z));
            M.relations.push_back(std::move(row));
        }
        return M;
    }
};

namespace detail {

inline void check_supported(const RingPtr& ring) {
    switch (ring->kind()) {
        case RingKind::Integers:
        case RingKind::IntegersModN:
        case RingKind::PrimeField:
        case RingKind::TruncatedDVR: return;
        case RingKind::Product:
            for (size_t i = 0; i < ring->spec().factors.size(); ++i) check_supported(ring->factor_ring(i));
            return;
        default:
            throw std::invalid_argument("fitting: unsupported ring kind " + ring->spec().to_string());
    }
}

inline void subsets_rec(size_t n, size_t k, size_t start, std::vector<size_t>& cur,
                        std::vector<std::vector<size_t>>& out) {
    if (cur.size() == k) {
        out.push_back(cur);
        return;
    }
    for (size_t i = start; i + (k - cur.size()) <= n; ++i) {
        cur.push_back(i);
        subsets_rec(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<size_t>> subsets(size_t n, size_t k) {
    std::vector<std::vector<size_t>> out;
    std::vector<size_t> cur;
    subsets_rec(n, k, 0, cur, out);
    return out;
}

}  // namespace detail

/// Ideal of all m x m minors; zero ideal when relations < generators.
inline LocalIdeal fitting_ideal(const PresentedModule& M) {
    detail::check_supported(M.ring);
    const size_t m = M.generators, n = M.relations.size();
    if (m == 0) return LocalIdeal::unit(M.ring);  // the zero module
    if (n < m) return LocalIdeal::zero(M.ring);
    std::vector<RingElem> minors;
    for (const auto& rows : detail::subsets(n, m)) {
        std::vector<std::vector<RingElem>> sub;
        for (size_t i : rows) sub.push_back(M.relations[i]);
        minors.push_back(matrices::det_n(matrices::Matrix<RingElem>::from_rows(sub)));
    }
    return LocalIdeal::from_gens(M.ring, minors);
}

// ---- Smith-route oracle -----------------------------------------------------

namespace detail {
inline nf::IMat lift_rows(const PresentedModule& M, size_t component /* SIZE_MAX = leaf */) {
    nf::IMat A(M.relations.size(), M.generators, Int(0));
    for (size_t i = 0; i < M.relations.size(); ++i)
        for (size_t j = 0; j < M.generators; ++j) {
            const Value& v = M.relations[i][j].value();
            A.at(i, j) = component == SIZE_MAX ? v.z() : v.tuple()[component].z();
        }
    return A;
}
}  // namespace detail

/// Fitting ideal through the Smith normal form: over Z the product of
/// elementary divisors (zero if the rank is deficient); over Z/N the same
/// computation on the lifted lattice [rows; N I].  Independent of the minor
/// enumeration; products are handled componentwise.
inline LocalIdeal fitting_ideal_via_smith(const PresentedModule& M) {
    detail::check_supported(M.ring);
    const size_t m = M.generators;
    if (m == 0) return LocalIdeal::unit(M.ring);
    switch (M.ring->kind()) {
        case RingKind::Integers: {
            auto s = nf::smith_form(detail::lift_rows(M, SIZE_MAX));
            if (s.rank < m) return LocalIdeal::zero(M.ring);
            Int prod = 1;
            for (const auto& d : s.divisors) prod *= d;
            return LocalIdeal::from_gens(M.ring, {M.ring->from_int(prod)});
        }
        case RingKind::IntegersModN:
        case RingKind::PrimeField:
        case RingKind::TruncatedDVR: {
            const Int& N = M.ring->modulus();
            auto divs = nf::cokernel_invariants_mod(detail::lift_rows(M, SIZE_MAX), N);
            Int prod = 1;
            for (const auto& d : divs) prod *= d;
            return LocalIdeal::from_gens(M.ring, {M.ring->from_int(prod)});
        }
        case RingKind::Product: {
            // componentwise: ideal generated by the per-factor canonical tuples
            std::vector<Value> parts;
            for (size_t c = 0; c < M.ring->spec().factors.size(); ++c) {
                PresentedModule Mc;
                Mc.ring = M.ring->factor_ring(c);
                Mc.generators = M.generators;
                for (const auto& row : M.relations) {
                    std::vector<RingElem> r;
                    for (const auto& x : row) r.push_back(Mc.ring->element(x.value().tuple()[c]));
                    Mc.relations.push_back(std::move(r));
                }
                parts.push_back(fitting_ideal_via_smith(Mc).generator().value());
            }
            return LocalIdeal::from_gens(M.ring, {M.ring->element(Value(parts))});
        }
        default: throw std::invalid_argument("fitting_ideal_via_smith: unsupported ring");
    }
}

// ---- normal forms of presentation matrices ----------------------------------

struct NormalFormOutput {
    enum class Kind { Smith, Howell } kind;
    nf::SmithResult smith;    // kind == Smith
    nf::HowellResult howell;  // kind == Howell
    Int modulus = 0;          // kind == Howell
};

/// Smith form over Z, Howell-style echelon (unit pivots times p-power /
/// divisor pivots, invertible transform) over residue rings.
inline NormalFormOutput smith_or_howell_form(const RingPtr& ring, const nf::IMat& A) {
    NormalFormOutput out;
    switch (ring->kind()) {
        case RingKind::Integers:
            out.kind = NormalFormOutput::Kind::Smith;
            out.smith = nf::smith_form(A);
            return out;
        case RingKind::IntegersModN:
        case RingKind::PrimeField:
        case RingKind::TruncatedDVR:
            out.kind = NormalFormOutput::Kind::Howell;
            out.modulus = ring->modulus();
            out.howell = nf::howell_form(A, out.modulus);
            return out;
        default:
            throw std::invalid_argument("smith_or_howell_form: unsupported ring kind " + ring->spec().to_string());
    }
}

// ---- the property suite -----------------------------------------------------

enum class FittingProperty {
    PresentationIndependence,
    QuotientByIdeal,
    AnnihilatorContainment,
    IntegerOrder,
    SurjectionMonotonicity,
    BaseChange,
};

inline const char* property_name(FittingProperty p) {
    switch (p) {
        case FittingProperty::PresentationIndependence: return "presentation_independence";
        case FittingProperty::QuotientByIdeal: return "quotient_by_ideal";
        case FittingProperty::AnnihilatorContainment: return "annihilator_containment";
        case FittingProperty::IntegerOrder: return "integer_order";
        case FittingProperty::SurjectionMonotonicity: return "surjection_monotonicity";
        case FittingProperty::BaseChange: return "base_change";
    }
    return "?";
}

namespace detail {

inline std::vector<std::vector<Int>> random_int_rows(Rng& rng, size_t n, size_t m, long bound) {
    std::vector<std::vector<Int>> rows(n, std::vector<Int>(m));
    for (auto& r : rows)
        for (auto& x : r) x = rng.range(-bound, bound);
    return rows;
}

inline nf::IMat to_imat(const std::vector<std::vector<Int>>& rows, size_t m) {
    if (rows.empty()) return nf::IMat(0, m, Int(0));
    return nf::IMat::from_rows(rows);
}

}  // namespace detail

/// One randomized instance of the named Fitting-ideal property; true on
/// success.  Instance shapes stay within the desk-scale budget (<= 4x4,
/// entries |.| <= 9).
inline bool check_fitting_property(FittingProperty which, Rng& rng, std::string* note = nullptr) {
    using detail::random_int_rows;
    auto Z = rings::Ring::make(rings::RingSpec::integers());
    const size_t n = static_cast<size_t>(rng.range(1, 4));
    const size_t m = static_cast<size_t>(rng.range(1, 4));

    switch (which) {
        case FittingProperty::PresentationIndependence: {
            auto rows = random_int_rows(rng, n, m, 9);
            auto M = PresentedModule::from_int_rows(Z, m, rows);
            // redundant relation: a random combination of existing rows
            std::vector<Int> extra(m, 0);
            for (const auto& r : rows) {
                Int c = rng.range(-2, 2);
                for (size_t j = 0; j < m; ++j) extra[j] += c * r[j];
            }
            auto rows2 = rows;
            rows2.push_back(extra);
            // unimodular row mix
            if (rows2.size() >= 2) {
                size_t i = static_cast<size_t>(rng.below(static_cast<long>(rows2.size())));
                size_t k = static_cast<size_t>(rng.below(static_cast<long>(rows2.size())));
                if (i != k) {
                    Int c = rng.range(-3, 3);
                    for (size_t j = 0; j < m; ++j) rows2[i][j] += c * rows2[k][j];
                }
            }
            // generator basis change: col_j += c * col_k
            {
                size_t j = static_cast<size_t>(rng.below(static_cast<long>(m)));
                size_t k = static_cast<size_t>(rng.below(static_cast<long>(m)));
                if (j != k) {
                    Int c = rng.range(-3, 3);
                    for (auto& r : rows2) r[j] += c * r[k];
                }
            }
            // extra generator killed by a unit relation
            for (auto& r : rows2) r.push_back(0);
            std::vector<Int> unit_row(m + 1, 0);
            unit_row[m] = 1;
            rows2.push_back(unit_row);
            auto M2 = PresentedModule::from_int_rows(Z, m + 1, rows2);
            return fitting_ideal(M) == fitting_ideal(M2);
        }

        case FittingProperty::QuotientByIdeal: {
            // Fitt_R(R/I) = I over Z and over Z/N
            RingPtr R = rng.coin() ? Z : rings::Ring::make(rings::RingSpec::integers_mod(rng.range(2, 64)));
            std::vector<RingElem> gens;
            std::vector<std::vector<Int>> rel_rows;
            long count = rng.range(1, 3);
            for (long i = 0; i < count; ++i) {
                Int g = rng.range(0, 20);
                gens.push_back(R->from_int(g));
                rel_rows.push_back({g});
            }
            auto M = PresentedModule::from_int_rows(R, 1, rel_rows);
            return fitting_ideal(M) == rings::ideal_in_ring(R, gens);
        }

        case FittingProperty::AnnihilatorContainment: {
            // every Fitting generator annihilates the cokernel: g*e_j lies in
            // the relation lattice for each generator e_j
            bool modular = rng.coin();
            if (modular) {
                Int N = rng.range(2, 64);
                auto R = rings::Ring::make(rings::RingSpec::integers_mod(N));
                auto rows = random_int_rows(rng, n + m, m, 9);  // enough rows to keep coker finite-ish
                auto M = PresentedModule::from_int_rows(R, m, rows);
                auto g = fitting_ideal(M).generator().value().z();
                auto A = detail::to_imat(rows, m);
                for (size_t j = 0; j < m; ++j) {
                    std::vector<Int> target(m, 0);
                    target[j] = g;
                    if (!nf::in_span_mod(A, target, N)) return false;
                }
                return true;
            }
            auto rows = random_int_rows(rng, n, m, 9);
            auto M = PresentedModule::from_int_rows(Z, m, rows);
            auto g = fitting_ideal(M).generator().value().z();
            auto A = detail::to_imat(rows, m);
            nf::IMat At(m, A.rows(), Int(0));
            for (size_t i = 0; i < A.rows(); ++i)
                for (size_t j = 0; j < m; ++j) At.at(j, i) = A.at(i, j);
            for (size_t j = 0; j < m; ++j) {
                std::vector<Int> target(m, 0);
                target[j] = g;
                if (!nf::integer_solve(At, target).has_value()) return false;
            }
            return true;
        }

        case FittingProperty::IntegerOrder: {
            auto rows = random_int_rows(rng, n, m, 9);
            auto M = PresentedModule::from_int_rows(Z, m, rows);
            auto fit = fitting_ideal(M);
            auto s = nf::smith_form(detail::to_imat(rows, m));
            if (s.rank < m) {
                if (note) *note = "infinite cokernel";
                return fit.is_zero();
            }
            Int size = 1;
            for (const auto& d : s.divisors) size *= d;
            return fit == rings::ideal_in_ring(Z, {Z->from_int(size)});
        }

        case FittingProperty::SurjectionMonotonicity: {
            auto rows = random_int_rows(rng, n, m, 9);
            auto extra = random_int_rows(rng, static_cast<size_t>(rng.range(1, 2)), m, 9);
            auto rows2 = rows;
            for (auto& r : extra) rows2.push_back(r);
            auto M = PresentedModule::from_int_rows(Z, m, rows);    // M
            auto Mq = PresentedModule::from_int_rows(Z, m, rows2);  // quotient of M
            // Fitt(M') contains Fitt(M)
            return fitting_ideal(Mq).contains(fitting_ideal(M));
        }

        case FittingProperty::BaseChange: {
            auto rows = random_int_rows(rng, n, m, 9);
            auto M = PresentedModule::from_int_rows(Z, m, rows);
            Int g = fitting_ideal(M).generator().value().z();
            if (rng.coin()) {
                Int N = rng.range(2, 120);
                auto S = rings::Ring::make(rings::RingSpec::integers_mod(N));
                auto MS = PresentedModule::from_int_rows(S, m, rows);
                return fitting_ideal(MS) == rings::ideal_in_ring(S, {S->from_int(g)});
            }
            auto S = rings::Ring::make(rings::RingSpec::product(
                {rings::RingSpec::integers_mod(rng.range(2, 30)), rings::RingSpec::integers_mod(rng.range(2, 30))}));
            auto MS = PresentedModule::from_int_rows(S, m, rows);
            return fitting_ideal(MS) == rings::ideal_in_ring(S, {S->from_int(g)});
        }
    }
    return false;
}

/// Minor-route vs Smith-route agreement on one random instance (over Z or a
/// random modular ring); the oracle-equivalence leg of the property suite.
inline bool check_minor_smith_agreement(Rng& rng) {
    const size_t n = static_cast<size_t>(rng.range(1, 4));
    const size_t m = static_cast<size_t>(rng.range(1, 4));
    RingPtr R;
    switch (rng.below(3)) {
        case 0: R = rings::Ring::make(rings::RingSpec::integers()); break;
        case 1: R = rings::Ring::make(rings::RingSpec::integers_mod(rng.range(2, 64))); break;
        default: R = rings::Ring::make(rings::RingSpec::truncated_dvr(2, static_cast<unsigned>(rng.range(1, 5))));
    }
    auto rows = detail::random_int_rows(rng, n, m, 9);
    auto M = PresentedModule::from_int_rows(R, m, rows);
    return fitting_ideal(M) == fitting_ideal_via_smith(M);
}

/// Faithful cyclic submodule corollary over a fiber product T: for B = T.beta
/// with beta a regular element and I a sampled ideal, Fitt_T(B/IB), computed
/// as the colon relation set (IB : beta) by enumeration, is contained in I.
inline bool check_fitting_corollary_fiber(const RingPtr& T, const RingElem& beta,
                                          const std::vector<RingElem>& ideal_gens) {
    if (!T->finite()) throw std::invalid_argument("corollary check needs a finite ring");
    auto I_set = rings::enumerate_ideal(T, ideal_gens);
    auto in_set = [](const std::vector<Value>& set, const Value& v) {
        return std::binary_search(set.begin(), set.end(), v);
    };
    // IB as a set
    std::vector<RingElem> ib_gens;
    for (const auto& g : ideal_gens) ib_gens.push_back(g * beta);
    auto IB_set = rings::enumerate_ideal(T, ib_gens);
    // relations of the 1-generator presentation of B/IB
    std::vector<RingElem> rels;
    for (const auto& t : T->enumerate()) {
        RingElem te = T->element(t);
        if (in_set(IB_set, (te * beta).value())) rels.push_back(te);
    }
    // Fitt = ideal generated by the 1x1 minors = the relation set itself
    auto fitt_set = rings::enumerate_ideal(T, rels);
    for (const auto& v : fitt_set)
        if (!in_set(I_set, v)) return false;
    return true;
}

}  // namespace ribet::fitting
