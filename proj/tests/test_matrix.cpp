#include <catch2/catch_amalgamated.hpp>

#include "ribet/matrix.hpp"
#include "ribet/poly.hpp"
#include "ribet/rings.hpp"

using namespace ribet;
using namespace ribet::matrices;
using ribet::rings::Ring;
using ribet::rings::RingElem;
using ribet::rings::RingSpec;

namespace {

// independent oracle: determinant as the signed permutation sum
template <class T>
T det_permutation_sum(const Matrix<T>& m) {
    size_t n = m.rows();
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    T acc = RingOps<T>::zero(m.at(0, 0));
    do {
        int sign = 1;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (perm[i] > perm[j]) sign = -sign;
        T prod = RingOps<T>::one(m.at(0, 0));
        for (size_t i = 0; i < n; ++i) prod = prod * m.at(i, perm[i]);
        if (sign > 0) {
            acc = acc + prod;
        } else {
            acc = acc - prod;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc;
}

rings::RingPtr z8() { return Ring::make(RingSpec::truncated_dvr(2, 3)); }

Matrix<RingElem> random_matrix(const rings::RingPtr& R, Rng& rng, size_t n) {
    Matrix<RingElem> m(n, n, R->zero());
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) m.at(i, j) = R->from_int(rng.range(-9, 9));
    return m;
}

}  // namespace

TEST_CASE("charpoly of a 2x2 matrix") {
    auto R = z8();
    SECTION("diagonal matrices have (x - l1)(x - l2)") {
        Mat2<RingElem> m(R->from_int(3), R->zero(), R->zero(), R->from_int(5));
        auto cp = charpoly2(m);
        // (x-3)(x-5) = x^2 - 8x + 15 = x^2 + 0x + 7 over Z/8
        CHECK(cp[0] == R->from_int(15));
        CHECK(cp[1] == R->from_int(-8));
        CHECK(cp[2] == R->one());
    }
    SECTION("trace of a formal product expands to the t12 shorthand") {
        auto tab = mpoly::VarTable::standard_abcd(2);
        auto ord = mpoly::MonomialOrder::blocked(tab);
        auto v = [&](const char* n) { return mpoly::Poly<Int>::variable(tab, ord, tab->index_of(n), Int(1)); };
        Mat2<mpoly::Poly<Int>> r1(v("a1"), v("b1"), v("c1"), v("d1"));
        Mat2<mpoly::Poly<Int>> r2(v("a2"), v("b2"), v("c2"), v("d2"));
        CHECK((r1 * r2).trace() == mpoly::parse_poly(tab, ord, "a1*a2 + b1*c2 + c1*b2 + d1*d2"));
    }
    SECTION("det is multiplicative on randomized 2x2 over Z/8") {
        auto R8 = z8();
        Rng rng(5);
        for (int t = 0; t < 50; ++t) {
            Mat2<RingElem> m(R8->from_int(rng.range(-9, 9)), R8->from_int(rng.range(-9, 9)),
                             R8->from_int(rng.range(-9, 9)), R8->from_int(rng.range(-9, 9)));
            Mat2<RingElem> n(R8->from_int(rng.range(-9, 9)), R8->from_int(rng.range(-9, 9)),
                             R8->from_int(rng.range(-9, 9)), R8->from_int(rng.range(-9, 9)));
            CHECK((m * n).det() == m.det() * n.det());
        }
    }
}

TEST_CASE("simultaneous conjugation") {
    auto R = z8();
    Mat2<RingElem> m(R->from_int(1), R->from_int(2), R->from_int(2), R->from_int(3));
    SECTION("identity conjugator changes nothing") {
        auto id = Mat2<RingElem>::identity_like(R->zero());
        auto out = conjugate_simultaneous(id, {m});
        CHECK(out[0] == m);
    }
    SECTION("non-unit determinant is rejected") {
        Mat2<RingElem> g(R->from_int(1), R->zero(), R->zero(), R->from_int(2));
        CHECK_THROWS_AS(conjugate_simultaneous(g, {m}), std::invalid_argument);
    }
    SECTION("charpoly coefficients are conjugation invariants (randomized)") {
        Rng rng(31);
        for (int t = 0; t < 40; ++t) {
            Mat2<RingElem> g(R->from_int(rng.range(-9, 9)), R->from_int(rng.range(-9, 9)),
                             R->from_int(rng.range(-9, 9)), R->from_int(rng.range(-9, 9)));
            if (!g.det().is_unit()) continue;
            Mat2<RingElem> a(R->from_int(rng.range(-9, 9)), R->from_int(rng.range(-9, 9)),
                             R->from_int(rng.range(-9, 9)), R->from_int(rng.range(-9, 9)));
            auto conj = conjugate_simultaneous(g, {a})[0];
            CHECK(conj.trace() == a.trace());
            CHECK(conj.det() == a.det());
        }
    }
}

TEST_CASE("determinants: routes agree") {
    auto R = z8();
    SECTION("upper triangular = product of the diagonal") {
        Matrix<RingElem> m(3, 3, R->zero());
        m.at(0, 0) = R->from_int(2);
        m.at(1, 1) = R->from_int(3);
        m.at(2, 2) = R->from_int(5);
        m.at(0, 1) = R->from_int(7);
        m.at(0, 2) = R->from_int(1);
        m.at(1, 2) = R->from_int(4);
        CHECK(det_n(m) == R->from_int(30));
    }
    SECTION("a zero column forces det 0") {
        Matrix<RingElem> m(3, 3, R->zero());
        for (size_t i = 0; i < 3; ++i)
            for (size_t j = 1; j < 3; ++j) m.at(i, j) = R->from_int(static_cast<long>(i + 2 * j));
        CHECK(det_n(m).is_zero());
    }
    SECTION("permutation-sum oracle on randomized residue matrices, n <= 5") {
        Rng rng(17);
        for (size_t n = 1; n <= 5; ++n)
            for (int t = 0; t < 10; ++t) {
                auto m = random_matrix(R, rng, n);
                CHECK(det_n(m) == det_permutation_sum(m));
                CHECK(det_laplace(m) == det_permutation_sum(m));
            }
    }
    SECTION("Bareiss and permutation sum agree over Z") {
        Rng rng(23);
        for (size_t n = 2; n <= 5; ++n)
            for (int t = 0; t < 10; ++t) {
                Matrix<Int> m(n, n, Int(0));
                for (size_t i = 0; i < n; ++i)
                    for (size_t j = 0; j < n; ++j) m.at(i, j) = rng.range(-9, 9);
                CHECK(det_n(m) == det_permutation_sum(m));
            }
    }
    SECTION("polynomial matrices: memoized cofactors vs permutation sum") {
        auto tab = mpoly::VarTable::standard_abcd(3);
        auto ord = mpoly::MonomialOrder::blocked(tab);
        Rng rng(41);
        for (int t = 0; t < 5; ++t) {
            Matrix<mpoly::Poly<Int>> m(3, 3, mpoly::Poly<Int>::zero(tab, ord));
            for (size_t i = 0; i < 3; ++i)
                for (size_t j = 0; j < 3; ++j) {
                    mpoly::Monomial mono = mpoly::Monomial::one(tab->size());
                    ++mono.e[static_cast<size_t>(rng.below(static_cast<long>(tab->size())))];
                    mpoly::Poly<Int> p(tab, ord);
                    p.mutable_terms().push_back({mono, Int(rng.range(-3, 3))});
                    if (!p.terms().empty() && p.terms().front().second == 0) p = mpoly::Poly<Int>::zero(tab, ord);
                    m.at(i, j) = p;
                }
            CHECK(det_n(m) == det_permutation_sum(m));
        }
    }
}

TEST_CASE("multilinearity expansion") {
    auto R = z8();
    SECTION("M' = M gives the empty list") {
        Rng rng(2);
        auto m = random_matrix(R, rng, 3);
        CHECK(multilinearity_expand(m, m).empty());
    }
    SECTION("n = 1 sanity: det(M') - det(M) = M'_11 - M_11") {
        Matrix<RingElem> m(1, 1, R->from_int(3)), mp(1, 1, R->from_int(7));
        auto terms = multilinearity_expand(m, mp);
        REQUIRE(terms.size() == 1);
        CHECK(terms[0].sign == -1);
        CHECK(terms[0].mat.at(0, 0) == R->from_int(-4));  // M - M'
        auto total = R->zero();
        for (auto& [sign, mat] : terms) {
            auto d = det_n(mat);
            total = sign > 0 ? total + d : total - d;
        }
        CHECK(total == mp.at(0, 0) - m.at(0, 0));
    }
    SECTION("signed determinants sum to det(M') - det(M), randomized n <= 4") {
        Rng rng(19);
        for (size_t n = 2; n <= 4; ++n)
            for (int t = 0; t < 15; ++t) {
                auto m = random_matrix(R, rng, n);
                auto mp = random_matrix(R, rng, n);
                auto terms = multilinearity_expand(m, mp);
                CHECK(terms.size() == (1u << n) - 1);
                auto total = R->zero();
                for (auto& [sign, mat] : terms) {
                    auto d = det_n(mat);
                    total = sign > 0 ? total + d : total - d;
                }
                CHECK(total == det_n(mp) - det_n(m));
            }
    }
    SECTION("subset order is by size: signs (-, -, +) at n = 2") {
        Rng rng(3);
        auto m = random_matrix(R, rng, 2);
        auto mp = random_matrix(R, rng, 2);
        auto terms = multilinearity_expand(m, mp);
        REQUIRE(terms.size() == 3);
        CHECK(terms[0].sign == -1);
        CHECK(terms[1].sign == -1);
        CHECK(terms[2].sign == 1);
    }
}
