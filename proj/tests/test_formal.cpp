#include <catch2/catch_amalgamated.hpp>

#include "ribet/formal.hpp"
#include "ribet/numeric.hpp"

using namespace ribet;
using namespace ribet::formal;
using mpoly::parse_poly;
using mpoly::to_rational;

namespace {
FormalContext swap_ctx() { return build_context(2, {RowSpec::delta(1, 2), RowSpec::delta(2, 1)}); }
}  // namespace

TEST_CASE("context construction") {
    SECTION("the r=2 swap context matches the worked example") {
        auto ctx = swap_ctx();
        CHECK(ctx.table->size() == 12);
        auto P = [&](const char* s) { return parse_poly(ctx.table, ctx.order, s); };
        CHECK(ctx.D.at(0, 0) == P("delta121"));
        CHECK(ctx.D.at(0, 1) == P("delta122"));
        CHECK(ctx.D.at(1, 0) == P("delta211"));
        CHECK(ctx.D.at(1, 1) == P("delta212"));
        CHECK(ctx.Dprime.at(0, 0) == P("delta121 - d2"));
        CHECK(ctx.Dprime.at(0, 1) == P("delta122 - a1"));
        CHECK(ctx.Dprime.at(1, 0) == P("delta211 - a2"));
        CHECK(ctx.Dprime.at(1, 1) == P("delta212 - d1"));
    }
    SECTION("r=1 eps context has D = D' = (eps1) and e = 0") {
        auto ctx = build_context(1, {RowSpec::eps()});
        CHECK(ctx.D.at(0, 0) == parse_poly(ctx.table, ctx.order, "eps1"));
        CHECK(ctx.Dprime == ctx.D);
        CHECK(ctx.e.is_zero());
    }
    SECTION("mixed context generator counts: 8 in J, 2 in J'") {
        auto ctx = build_context(2, {RowSpec::eps(), RowSpec::delta(1, 1)});
        CHECK(ctx.J.size() == 8);
        CHECK(ctx.Jprime.size() == 2);
    }
    SECTION("a repeated delta row gets its own variable family") {
        auto ctx = build_context(2, {RowSpec::delta(1, 2), RowSpec::delta(1, 2)});
        CHECK(ctx.table->index_of("delta121_r1") >= 0);
        CHECK(ctx.table->index_of("delta121_r2") >= 0);
        CHECK(ctx.table->index_of("delta121") < 0);
    }
    SECTION("diagonal delta rows subtract the full trace at the shared slot") {
        auto ctx = build_context(1, {RowSpec::delta(1, 1)});
        CHECK(ctx.Dprime.at(0, 0) == parse_poly(ctx.table, ctx.order, "delta111 - a1 - d1"));
    }
    SECTION("bad inputs are rejected") {
        CHECK_THROWS_AS(build_context(5, std::vector<RowSpec>(5, RowSpec::eps())), std::invalid_argument);
        CHECK_THROWS_AS(build_context(2, {RowSpec::eps()}), std::invalid_argument);
        CHECK_THROWS_AS(build_context(2, {RowSpec::delta(1, 3), RowSpec::eps()}), std::invalid_argument);
    }
}

TEST_CASE("e lies in the acted-variable ideal") {
    SECTION("swap context") { CHECK(check_e_in_IR(swap_ctx())); }
    SECTION("zero e vacuously") { CHECK(check_e_in_IR(build_context(1, {RowSpec::eps()}))); }
    SECTION("negative control: a bare entry variable is not in I_R") {
        auto ctx = swap_ctx();
        CHECK_FALSE(poly_in_IR(ctx.var(ctx.table->index_of("delta121"))));
    }
    SECTION("exhaustive over row multisets for r <= 3") {
        long contexts = 0;
        for (int r = 1; r <= 3; ++r)
            for (const auto& rows : all_row_multisets(r)) {
                ++contexts;
                CHECK(check_e_in_IR(build_context(r, rows)));
            }
        CHECK(contexts == 2 + 15 + 220);
    }
}

TEST_CASE("the altered matrix kills the b-column against J'") {
    SECTION("swap context: components are the J' generators up to sign") { CHECK(check_Dprime_w(swap_ctx())); }
    SECTION("eps rows produce the generator exactly") {
        CHECK(check_Dprime_w(build_context(1, {RowSpec::eps()})));
        auto ctx = build_context(2, {RowSpec::eps(), RowSpec::delta(1, 2)});
        CHECK(check_Dprime_w(ctx));
        // the eps component is literally sum eps_k b_k
        auto lhs = ctx.Dprime.at(0, 0) * ctx.abcd(mpoly::VarClass::B, 1) +
                   ctx.Dprime.at(0, 1) * ctx.abcd(mpoly::VarClass::B, 2);
        CHECK(lhs == parse_poly(ctx.table, ctx.order, "eps1*b1 + eps2*b2"));
        CHECK(lhs == ctx.Jprime[0]);
    }
    SECTION("r=1 delta(1,1): a1 b1 + b1 d1 - delta111 b1 matches the generator") {
        auto ctx = build_context(1, {RowSpec::delta(1, 1)});
        CHECK(ctx.Jprime[0] == parse_poly(ctx.table, ctx.order, "a1*b1 + b1*d1 - delta111*b1"));
        CHECK(check_Dprime_w(ctx));
    }
    SECTION("exhaustive over row multisets for r <= 3") {
        for (int r = 1; r <= 3; ++r)
            for (const auto& rows : all_row_multisets(r)) CHECK(check_Dprime_w(build_context(r, rows)));
    }
}

TEST_CASE("J' sits inside J") {
    auto ctx = swap_ctx();
    auto eng = make_engines(ctx);
    groebner::groebner_basis(eng.J, eng.budget);
    for (const auto& g : ctx.Jprime) CHECK(eng.J.engine->contains(to_rational(g)));
}

TEST_CASE("Borel stability") {
    auto ctx = swap_ctx();
    auto eng = make_engines(ctx);
    CHECK(check_B_stability(ctx, eng, WhichIdeal::J));
    CHECK(check_B_stability(ctx, eng, WhichIdeal::Jprime));
    SECTION("every generator is weight-homogeneous with the expected weight") {
        for (size_t l = 0; l < ctx.rows.size(); ++l) {
            int w = 99;
            CHECK(mpoly::weight_homogeneous(ctx.row_coeffs[l][0], &w));
            CHECK(w == 0);  // a-coefficient
            CHECK(mpoly::weight_homogeneous(ctx.row_coeffs[l][1], &w));
            CHECK(w == 1);  // b-coefficient
            CHECK(mpoly::weight_homogeneous(ctx.row_coeffs[l][2], &w));
            CHECK(w == -1);  // c-coefficient
            CHECK(mpoly::weight_homogeneous(ctx.row_coeffs[l][3], &w));
            CHECK(w == 0);  // d-coefficient
        }
    }
    SECTION("the non-stable control ideal <a1> fails") {
        auto eng2 = make_engines(ctx);
        eng2.Jprime = groebner::PolyIdeal<Rat>::from_gens({to_rational(ctx.abcd(mpoly::VarClass::A, 1))}, ctx.table,
                                                          ctx.order);
        eng2.budget.degree_cap = -1;
        CHECK_FALSE(check_B_stability(ctx, eng2, WhichIdeal::Jprime));
    }
}

TEST_CASE("Borel invariance of e modulo J'") {
    SECTION("swap context") {
        auto ctx = swap_ctx();
        auto eng = make_engines(ctx);
        CHECK(check_ebar_invariance(ctx, eng));
        CHECK(ebar_rowop_certificate(ctx));
    }
    SECTION("r=1 eps: e = 0") {
        auto ctx = build_context(1, {RowSpec::eps()});
        auto eng = make_engines(ctx);
        CHECK(check_ebar_invariance(ctx, eng));
        CHECK(ebar_rowop_certificate(ctx));
    }
    SECTION("r=3 all-delta: Groebner verdict and row-operation certificate agree") {
        auto ctx = build_context(3, {RowSpec::delta(1, 2), RowSpec::delta(2, 3), RowSpec::delta(3, 1)});
        auto eng = make_engines(ctx);
        CHECK(check_ebar_invariance(ctx, eng));
        std::string note;
        CHECK(ebar_rowop_certificate(ctx, &note));
        CHECK(note.empty());
    }
    SECTION("generalized sweep: weight-0 and unipotent-fixed mod J' for r <= 2 multisets") {
        for (int r = 1; r <= 2; ++r)
            for (const auto& rows : all_row_multisets(r)) {
                auto ctx = build_context(r, rows);
                auto eng = make_engines(ctx);
                CHECK(check_ebar_invariance(ctx, eng));
            }
    }
}

TEST_CASE("trace/determinant generator enumeration") {
    SECTION("r=1, L=1") {
        auto ctx = build_context(1, {RowSpec::delta(1, 1)});
        auto gens = enumerate_A_generators(ctx, 1);
        REQUIRE(gens.size() == 2);
        CHECK(gens[0].flavor == TraceDetGenerator::Flavor::Trace);
        CHECK(gens[0].expansion == parse_poly(ctx.table, ctx.order, "a1 + d1"));
        CHECK(gens[1].flavor == TraceDetGenerator::Flavor::Det);
        CHECK(gens[1].expansion == parse_poly(ctx.table, ctx.order, "a1*d1 - b1*c1"));
    }
    SECTION("r=2, L=2 contains tr(rho1 rho2) once (cyclic dedup)") {
        auto ctx = swap_ctx();
        auto gens = enumerate_A_generators(ctx, 2);
        auto t12 = parse_poly(ctx.table, ctx.order, "a1*a2 + b1*c2 + c1*b2 + d1*d2");
        int count = 0;
        for (const auto& g : gens)
            if (g.flavor == TraceDetGenerator::Flavor::Trace && g.expansion == t12) ++count;
        CHECK(count == 1);
        // tr words of length <= 2 at r = 2: {1}, {2}, {11}, {12}~{21}, {22}
        int traces = 0;
        for (const auto& g : gens)
            if (g.flavor == TraceDetGenerator::Flavor::Trace) ++traces;
        CHECK(traces == 5);
    }
}

TEST_CASE("membership certificates") {
    SECTION("swap context reproduces the trace identity") {
        auto ctx = swap_ctx();
        auto cert = solve_membership_A_plus_J(ctx, ctx.e);
        REQUIRE(cert.has_value());
        CHECK(cert->verify_exact(ctx));
        CHECK(check_air_structure(ctx, *cert));
        CHECK(cert->denominator == 1);
        // the trace-identity certificate: NF_J(e - (t1 d211 + t2 d122 - t12)) = 0
        auto eng = make_engines(ctx);
        groebner::groebner_basis(eng.J, eng.budget);
        auto a = ctx.rho[0].trace() * ctx.var(ctx.table->index_of("delta211")) +
                 ctx.rho[1].trace() * ctx.var(ctx.table->index_of("delta122")) -
                 (ctx.rho[0] * ctx.rho[1]).trace();
        CHECK(eng.J.engine->normal_form(to_rational(ctx.e - a)).is_zero());
        // and the solver's own a-part is congruent to that identity mod J
        CHECK(eng.J.engine->normal_form(cert->a_part(ctx) - to_rational(a)).is_zero());
    }
    SECTION("r=1 eps: the zero certificate") {
        auto ctx = build_context(1, {RowSpec::eps()});
        auto cert = solve_membership_A_plus_J(ctx, ctx.e);
        REQUIRE(cert.has_value());
        CHECK(cert->a_terms.empty());
        CHECK(cert->verify_exact(ctx));
        CHECK(check_air_structure(ctx, *cert));
    }
    SECTION("mixed context [eps, delta(1,2)] within degree bound 3") {
        auto ctx = build_context(2, {RowSpec::eps(), RowSpec::delta(1, 2)});
        MembershipOptions opt;
        opt.degree_bound = 3;
        auto cert = solve_membership_A_plus_J(ctx, ctx.e, opt);
        REQUIRE(cert.has_value());
        CHECK(cert->verify_exact(ctx));
        CHECK(check_air_structure(ctx, *cert));
    }
    SECTION("degree bound too small reports not-found") {
        auto ctx = swap_ctx();
        MembershipOptions opt;
        opt.degree_bound = 1;
        CHECK_FALSE(solve_membership_A_plus_J(ctx, ctx.e, opt).has_value());
    }
    SECTION("air-structure controls") {
        auto ctx = swap_ctx();
        auto cert = solve_membership_A_plus_J(ctx, ctx.e);
        REQUIRE(cert.has_value());
        SECTION("an injected constant R0-term breaks the structure check") {
            auto bad = *cert;
            CertTerm t;
            t.coeff = Rat(1);
            t.r0_mono = mpoly::Monomial::one(ctx.table->size());
            t.gen_indices = {};  // empty product: a bare R0 term
            bad.a_terms.push_back(t);
            CHECK_FALSE(check_air_structure(ctx, bad));
        }
    }
}

TEST_CASE("numeric bridge: specializing the formal identities") {
    // congruence-kernel instance over Z/4 (r = 3)
    auto T = rings::Ring::make(rings::RingSpec::truncated_dvr(2, 2));
    numeric::FiniteRepresentation rep;
    rep.T = T;
    auto e = [&](long a, long b, long c, long d) {
        return numeric::RMat2(T->from_int(a), T->from_int(b), T->from_int(c), T->from_int(d));
    };
    rep.gens = {e(1, 2, 0, 1), e(1, 0, 2, 1), e(3, 0, 0, -1)};
    rep.ideal_gens = {T->from_int(2)};
    auto grp = numeric::enumerate_group(rep, 1000);
    auto data = numeric::span_delta(rep, grp);
    REQUIRE(data.span.size() == 3);
    auto rows = numeric::relation_rows(data);

    // take the first three delta rows as a relation matrix
    std::vector<RowSpec> specs;
    std::vector<std::vector<rings::RingElem>> entries;
    for (const auto& row : rows) {
        if (row.kind != numeric::RelationRow::Kind::Delta) continue;
        specs.push_back(RowSpec::delta(row.i, row.j));
        entries.push_back(row.entries);
        if (specs.size() == 3) break;
    }
    auto ctx = build_context(3, specs);
    auto point = make_assignment(ctx, T, data.span, entries);
    SECTION("every J generator specializes to zero") {
        for (const auto& g : ctx.J) CHECK(eval_poly(g, point, T).is_zero());
    }
    SECTION("e specializes to the numeric determinant difference") {
        auto D = matrices::Matrix<rings::RingElem>::from_rows(entries);
        auto Dp = D;
        for (size_t l = 0; l < specs.size(); ++l) {
            Dp.at(l, static_cast<size_t>(specs[l].j - 1)) =
                Dp.at(l, static_cast<size_t>(specs[l].j - 1)) - data.span[static_cast<size_t>(specs[l].i - 1)].a;
            Dp.at(l, static_cast<size_t>(specs[l].i - 1)) =
                Dp.at(l, static_cast<size_t>(specs[l].i - 1)) - data.span[static_cast<size_t>(specs[l].j - 1)].d;
        }
        auto numeric_e = matrices::det_n(Dp) - matrices::det_n(D);
        CHECK(eval_poly(ctx.e, point, T) == numeric_e);
    }
    SECTION("certificate pushes forward: pi(e) = pi(a) lies in I") {
        auto cert = solve_membership_A_plus_J(ctx, ctx.e);
        REQUIRE(cert.has_value());
        Int g;
        mpz_gcd(g.get_mpz_t(), cert->denominator.get_mpz_t(), Int(2).get_mpz_t());
        REQUIRE(g == 1);
        auto scaled = cert->a_part(ctx).map_coeffs<Int>([&](const Rat& q) {
            Rat s = q * cert->denominator;
            return Int(s.get_num());
        });
        auto inv = T->from_int(cert->denominator).try_invert();
        REQUIRE(inv.has_value());
        auto pa = eval_poly(scaled, point, T) * *inv;
        CHECK(pa == eval_poly(ctx.e, point, T));
        CHECK(rings::ideal_in_ring(T, rep.ideal_gens).contains(pa));
    }
}
