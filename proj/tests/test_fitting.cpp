#include <catch2/catch_amalgamated.hpp>

#include "ribet/fitting.hpp"

using namespace ribet;
using namespace ribet::fitting;
using rings::Ring;
using rings::RingSpec;

namespace {
rings::RingPtr Z() { return Ring::make(RingSpec::integers()); }
}  // namespace

TEST_CASE("fitting ideal from minors") {
    SECTION("Fitt(Z/6) = (6)") {
        auto M = PresentedModule::from_int_rows(Z(), 1, {{6}});
        CHECK(fitting_ideal(M).generator().value().z() == 6);
    }
    SECTION("Fitt(Z/2 + Z/4) = (8), the group order") {
        auto M = PresentedModule::from_int_rows(Z(), 2, {{2, 0}, {0, 4}});
        CHECK(fitting_ideal(M).generator().value().z() == 8);
    }
    SECTION("fewer relations than generators gives the zero ideal") {
        auto M = PresentedModule::from_int_rows(Z(), 2, {{3, 5}});
        CHECK(fitting_ideal(M).is_zero());
    }
    SECTION("zero generators presents the zero module: unit ideal") {
        auto M = PresentedModule::from_int_rows(Z(), 0, {});
        CHECK(fitting_ideal(M).is_unit());
    }
    SECTION("unsupported rings are rejected") {
        auto Q = Ring::make(RingSpec::rationals());
        PresentedModule M{Q, 1, {{Q->from_int(2)}}};
        CHECK_THROWS_AS(fitting_ideal(M), std::invalid_argument);
    }
}

TEST_CASE("smith and howell forms") {
    SECTION("diag(2,4) is already Smith") {
        auto out = smith_or_howell_form(Z(), nf::IMat::from_rows({{Int(2), Int(0)}, {Int(0), Int(4)}}));
        REQUIRE(out.kind == NormalFormOutput::Kind::Smith);
        CHECK(out.smith.divisors == std::vector<Int>{2, 4});
    }
    SECTION("[[2,2],[2,6]] has Smith form diag(2,4)") {
        auto A = nf::IMat::from_rows({{Int(2), Int(2)}, {Int(2), Int(6)}});
        auto s = nf::smith_form(A);
        CHECK(s.divisors == std::vector<Int>{2, 4});
        // transforms are unimodular and U A V = D
        CHECK((nf::smith_form(s.U).divisors == std::vector<Int>{1, 1}));
        CHECK((nf::smith_form(s.V).divisors == std::vector<Int>{1, 1}));
        auto prod = s.U * A * s.V;
        CHECK(prod == s.D);
    }
    SECTION("[[2]] over Z/8: pivot 2, cokernel Z/2") {
        auto R = Ring::make(RingSpec::truncated_dvr(2, 3));
        auto out = smith_or_howell_form(R, nf::IMat::from_rows({{Int(2)}}));
        REQUIRE(out.kind == NormalFormOutput::Kind::Howell);
        REQUIRE(out.howell.nrows == 1);
        CHECK(out.howell.H.at(0, 0) == 2);
        auto divs = nf::cokernel_invariants_mod(nf::IMat::from_rows({{Int(2)}}), 8);
        Int order = 1;
        for (auto& d : divs) order *= d;
        CHECK(order == 2);
    }
    SECTION("howell transform is invertible and reproduces H") {
        Rng rng(15);
        for (int t = 0; t < 25; ++t) {
            Int N = rng.range(2, 32);
            size_t n = static_cast<size_t>(rng.range(1, 3)), m = static_cast<size_t>(rng.range(1, 4));
            nf::IMat A(n, m, Int(0));
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < m; ++j) A.at(i, j) = rng.range(-9, 9);
            auto H = nf::howell_form(A, N);
            // padded A
            nf::IMat Ap(H.padded, m, Int(0));
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < m; ++j) Ap.at(i, j) = A.at(i, j);
            auto UA = H.U * Ap;
            for (size_t i = 0; i < H.padded; ++i)
                for (size_t j = 0; j < m; ++j) {
                    Int diff = UA.at(i, j) - H.H.at(i, j);
                    CHECK(diff % N == 0);
                }
            // invertibility: det(U) a unit mod N
            Int d = matrices::det_n(H.U), g;
            mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), N.get_mpz_t());
            CHECK(g == 1);
            // rows beyond nrows are zero mod N
            for (size_t i = H.nrows; i < H.padded; ++i)
                for (size_t j = 0; j < m; ++j) CHECK(H.H.at(i, j) % N == 0);
        }
    }
    SECTION("howell form is a canonical invariant of the row span") {
        // same span, different generating rows
        Int N = 12;
        auto H1 = nf::howell_form(nf::IMat::from_rows({{Int(2), Int(1)}, {Int(0), Int(6)}}), N);
        auto H2 = nf::howell_form(nf::IMat::from_rows({{Int(2), Int(7)}, {Int(2), Int(1)}, {Int(4), Int(2)}}), N);
        REQUIRE(H1.nrows == H2.nrows);
        for (size_t i = 0; i < H1.nrows; ++i)
            for (size_t j = 0; j < 2; ++j) CHECK(H1.H.at(i, j) == H2.H.at(i, j));
    }
    SECTION("randomized span invariance: regenerating rows leaves the form fixed") {
        Rng rng(123);
        for (int trial = 0; trial < 40; ++trial) {
            Int N = rng.range(2, 36);
            size_t n = static_cast<size_t>(rng.range(1, 3)), m = static_cast<size_t>(rng.range(1, 3));
            nf::IMat A(n, m, Int(0));
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < m; ++j) A.at(i, j) = rng.range(0, 20);
            // a second generating set: random Z/N-combinations of the rows
            // plus the rows themselves shuffled in
            std::vector<std::vector<Int>> rows2;
            for (int extra = 0; extra < 3; ++extra) {
                std::vector<Int> r(m, 0);
                for (size_t i = 0; i < n; ++i) {
                    Int coeff = rng.range(0, 12);
                    for (size_t j = 0; j < m; ++j) r[j] = (r[j] + coeff * A.at(i, j)) % N;
                }
                rows2.push_back(r);
            }
            for (size_t i = 0; i < n; ++i) rows2.push_back(A.row(i));
            auto H1 = nf::howell_form(A, N);
            auto H2 = nf::howell_form(nf::IMat::from_rows(rows2), N);
            REQUIRE(H1.nrows == H2.nrows);
            for (size_t i = 0; i < H1.nrows; ++i)
                for (size_t j = 0; j < m; ++j) CHECK(H1.H.at(i, j) == H2.H.at(i, j));
        }
    }
}

TEST_CASE("linear algebra over Z and Z/N") {
    SECTION("integer kernel and solve") {
        auto A = nf::IMat::from_rows({{Int(2), Int(4), Int(6)}});
        auto K = nf::integer_kernel(A);
        REQUIRE(K.size() == 2);
        for (const auto& v : K) CHECK(2 * v[0] + 4 * v[1] + 6 * v[2] == 0);
        auto sol = nf::integer_solve(A, {Int(10)});
        REQUIRE(sol.has_value());
        CHECK(2 * (*sol)[0] + 4 * (*sol)[1] + 6 * (*sol)[2] == 10);
        CHECK_FALSE(nf::integer_solve(A, {Int(3)}).has_value());
    }
    SECTION("solutions mod N exist exactly when they should") {
        auto A = nf::IMat::from_rows({{Int(2)}});
        CHECK(nf::solve_mod(A, {Int(6)}, 8).has_value());
        CHECK_FALSE(nf::solve_mod(A, {Int(3)}, 8).has_value());
        auto sol = nf::solve_mod(A, {Int(6)}, 8);
        CHECK((2 * (*sol)[0] - 6) % 8 == 0);
    }
    SECTION("kernel mod N catches torsion relations") {
        // kernel of (2): x with 2x = 0 mod 8 is generated by 4
        auto K = nf::kernel_mod(nf::IMat::from_rows({{Int(2)}}), 8);
        REQUIRE(K.size() == 1);
        CHECK(K[0][0] == 4);
    }
}

TEST_CASE("the six Fitting properties hold on randomized instances") {
    using P = FittingProperty;
    for (P prop : {P::PresentationIndependence, P::QuotientByIdeal, P::AnnihilatorContainment, P::IntegerOrder,
                   P::SurjectionMonotonicity, P::BaseChange}) {
        Rng rng(1000 + static_cast<unsigned>(prop));
        for (int t = 0; t < 60; ++t) {
            INFO(property_name(prop));
            CHECK(check_fitting_property(prop, rng));
        }
    }
}

TEST_CASE("worked property instances") {
    SECTION("base change Z -> Z/8 of Fitt(Z/6) = (6) is (2)") {
        auto R8 = Ring::make(RingSpec::truncated_dvr(2, 3));
        auto M8 = PresentedModule::from_int_rows(R8, 1, {{6}});
        CHECK(fitting_ideal(M8) == rings::ideal_in_ring(R8, {R8->from_int(6)}));
        CHECK(fitting_ideal(M8).generator().value().z() == 2);
    }
    SECTION("surjection Z/4 + Z/2 ->> Z/4 gives (8) inside (4)") {
        auto M = PresentedModule::from_int_rows(Z(), 2, {{4, 0}, {0, 2}});
        auto Mq = PresentedModule::from_int_rows(Z(), 1, {{4}});
        CHECK(fitting_ideal(M).generator().value().z() == 8);
        CHECK(fitting_ideal(Mq).contains(fitting_ideal(M)));
    }
    SECTION("two presentations of Z/6 agree") {
        auto A = PresentedModule::from_int_rows(Z(), 1, {{6}});
        auto B = PresentedModule::from_int_rows(Z(), 2, {{6, 0}, {0, 1}});
        CHECK(fitting_ideal(A) == fitting_ideal(B));
    }
}

TEST_CASE("minor route matches the Smith route") {
    Rng rng(77);
    for (int t = 0; t < 120; ++t) CHECK(check_minor_smith_agreement(rng));
}

TEST_CASE("annihilator containment via explicit cokernel enumeration over Z/N") {
    // small modules: check g * x = 0 for every element x of the cokernel
    Rng rng(55);
    for (int t = 0; t < 12; ++t) {
        Int N = 2 + rng.below(10);
        auto R = Ring::make(RingSpec::integers_mod(N));
        size_t m = 1 + static_cast<size_t>(rng.below(2));
        std::vector<std::vector<Int>> rows;
        for (size_t i = 0; i < m + 1; ++i) {
            std::vector<Int> row;
            for (size_t j = 0; j < m; ++j) row.push_back(rng.range(0, 9));
            rows.push_back(row);
        }
        auto M = PresentedModule::from_int_rows(R, m, rows);
        Int g = fitting_ideal(M).generator().value().z();
        // enumerate the cokernel: all residue vectors modulo the row span
        nf::IMat A(rows.size(), m, Int(0));
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t j = 0; j < m; ++j) A.at(i, j) = rows[i][j];
        long Nl = static_cast<long>(N.get_si());
        std::vector<std::vector<Int>> elements;
        std::vector<Int> cur(m, 0);
        std::function<void(size_t)> gen = [&](size_t pos) {
            if (pos == m) {
                elements.push_back(cur);
                return;
            }
            for (long v = 0; v < Nl; ++v) {
                cur[pos] = v;
                gen(pos + 1);
            }
        };
        gen(0);
        for (const auto& x : elements) {
            std::vector<Int> gx(m);
            for (size_t j = 0; j < m; ++j) gx[j] = g * x[j];
            CHECK(nf::in_span_mod(A, gx, N));  // g*x = 0 in the cokernel
        }
    }
}

TEST_CASE("faithful cyclic corollary over the fiber product") {
    auto T = Ring::make(RingSpec::fiber_product(RingSpec::truncated_dvr(2, 3), RingSpec::truncated_dvr(2, 3), 2));
    auto beta = T->element(rings::Value(std::vector<rings::Value>{rings::Value(Int(1)), rings::Value(Int(3))}));
    SECTION("sampled ideals") {
        Rng rng(91);
        for (int t = 0; t < 10; ++t) {
            std::vector<rings::RingElem> gens{T->from_int(rng.below(8))};
            if (rng.coin()) gens.push_back(T->from_int(rng.below(8)));
            CHECK(check_fitting_corollary_fiber(T, beta, gens));
        }
    }
    SECTION("a concrete diagonal-style ideal") {
        auto g = T->element(rings::Value(std::vector<rings::Value>{rings::Value(Int(2)), rings::Value(Int(4))}));
        CHECK(check_fitting_corollary_fiber(T, beta, {g}));
    }
}
