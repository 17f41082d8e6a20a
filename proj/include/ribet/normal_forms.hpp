#pragma once

// Integer and residue-ring matrix normal forms: Smith form over Z with
// unimodular transforms, Howell-style echelon over Z/N with an invertible
// row transform, plus the kernel/solve helpers built on them.  Kernels and
// particular solutions over Z/N are computed through the integer lattice
// [A | N I], which keeps one exact code path for both.

#include <optional>
#include <vector>

#include "ribet/coeffs.hpp"
#include "ribet/matrix.hpp"

namespace ribet::nf {

using IMat = matrices::Matrix<Int>;

inline IMat identity(size_t n) {
    IMat m(n, n, Int(0));
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

struct SmithResult {
    IMat D;  // U * A * V = D, diagonal with d1 | d2 | ...
    IMat U;  // unimodular, rows
    IMat V;  // unimodular, columns
    size_t rank = 0;
    std::vector<Int> divisors;  // the nonzero diagonal entries
};

inline SmithResult smith_form(IMat A) {
    const size_t n = A.rows(), m = A.cols();
    IMat U = identity(n), V = identity(m);

    auto finish = [](IMat& D, IMat& Uo, IMat& Vo, size_t rank) {
        SmithResult res;
        res.rank = rank;
        res.D = std::move(D);
        res.U = std::move(Uo);
        res.V = std::move(Vo);
        for (size_t i = 0; i < rank; ++i) res.divisors.push_back(res.D.at(i, i));
        return res;
    };

    auto row_sub = [&](IMat& M, size_t i, size_t t, const Int& q) {
        for (size_t j = 0; j < M.cols(); ++j) M.at(i, j) -= q * M.at(t, j);
    };
    auto col_sub = [&](IMat& M, size_t j, size_t t, const Int& q) {
        for (size_t i = 0; i < M.rows(); ++i) M.at(i, j) -= q * M.at(i, t);
    };
    auto row_swap = [&](IMat& M, size_t i, size_t t) {
        for (size_t j = 0; j < M.cols(); ++j) std::swap(M.at(i, j), M.at(t, j));
    };
    auto col_swap = [&](IMat& M, size_t j, size_t t) {
        for (size_t i = 0; i < M.rows(); ++i) std::swap(M.at(i, j), M.at(i, t));
    };

    size_t t = 0;
    while (t < n && t < m) {
        bool done_step = false;
        while (!done_step) {
            // re-select the minimal |nonzero| entry of the trailing block as
            // the pivot each round; entries stay small this way
            size_t pi = t, pj = t;
            bool found = false;
            for (size_t i = t; i < n; ++i)
                for (size_t j = t; j < m; ++j) {
                    if (A.at(i, j) == 0) continue;
                    if (!found || cmp(abs(A.at(i, j)), abs(A.at(pi, pj))) < 0) {
                        pi = i;
                        pj = j;
                        found = true;
                    }
                }
            if (!found) return finish(A, U, V, t);
            if (pi != t) {
                row_swap(A, pi, t);
                row_swap(U, pi, t);
            }
            if (pj != t) {
                col_swap(A, pj, t);
                col_swap(V, pj, t);
            }
            // one reduction pass; if any remainder survives, loop and
            // re-select the (now strictly smaller) pivot
            bool dirty = false;
            for (size_t i = t + 1; i < n; ++i) {
                if (A.at(i, t) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), A.at(i, t).get_mpz_t(), A.at(t, t).get_mpz_t());
                row_sub(A, i, t, q);
                row_sub(U, i, t, q);
                if (A.at(i, t) != 0) dirty = true;
            }
            for (size_t j = t + 1; j < m; ++j) {
                if (A.at(t, j) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), A.at(t, j).get_mpz_t(), A.at(t, t).get_mpz_t());
                col_sub(A, j, t, q);
                col_sub(V, j, t, q);
                if (A.at(t, j) != 0) dirty = true;
            }
            if (dirty) continue;
            // divisibility chain: fold one non-multiple row in and redo
            bool folded = false;
            for (size_t i = t + 1; i < n && !folded; ++i)
                for (size_t j = t + 1; j < m && !folded; ++j)
                    if (A.at(i, j) % A.at(t, t) != 0) {
                        for (size_t jj = 0; jj < m; ++jj) A.at(t, jj) += A.at(i, jj);
                        for (size_t jj = 0; jj < n; ++jj) U.at(t, jj) += U.at(i, jj);
                        folded = true;
                    }
            if (!folded) done_step = true;
        }
        if (A.at(t, t) < 0) {
            for (size_t j = 0; j < m; ++j) A.at(t, j) = -A.at(t, j);
            for (size_t j = 0; j < n; ++j) U.at(t, j) = -U.at(t, j);
        }
        ++t;
    }
    return finish(A, U, V, t);
}

/// Basis vectors (length = cols) of {x : A x = 0} over Z.
inline std::vector<std::vector<Int>> integer_kernel(const IMat& A) {
    SmithResult s = smith_form(A);
    std::vector<std::vector<Int>> out;
    for (size_t j = s.rank; j < A.cols(); ++j) {
        std::vector<Int> v;
        for (size_t i = 0; i < A.cols(); ++i) v.push_back(s.V.at(i, j));
        out.push_back(std::move(v));
    }
    return out;
}

/// Deterministic particular solution of A x = b over Z (free coordinates 0).
inline std::optional<std::vector<Int>> integer_solve(const IMat& A, const std::vector<Int>& b) {
    if (b.size() != A.rows()) throw std::invalid_argument("integer_solve: rhs length mismatch");
    SmithResult s = smith_form(A);
    std::vector<Int> y(A.rows(), 0);
    for (size_t i = 0; i < A.rows(); ++i)
        for (size_t j = 0; j < A.rows(); ++j) y[i] += s.U.at(i, j) * b[j];
    std::vector<Int> w(A.cols(), 0);
    for (size_t i = 0; i < A.rows(); ++i) {
        if (i < s.rank) {
            if (y[i] % s.D.at(i, i) != 0) return std::nullopt;
            w[i] = y[i] / s.D.at(i, i);
        } else if (y[i] != 0) {
            return std::nullopt;
        }
    }
    std::vector<Int> x(A.cols(), 0);
    for (size_t i = 0; i < A.cols(); ++i)
        for (size_t j = 0; j < A.cols(); ++j) x[i] += s.V.at(i, j) * w[j];
    return x;
}

namespace detail {
inline IMat augment_mod(const IMat& A, const Int& N) {
    IMat B(A.rows(), A.cols() + A.rows(), Int(0));
    for (size_t i = 0; i < A.rows(); ++i) {
        for (size_t j = 0; j < A.cols(); ++j) B.at(i, j) = A.at(i, j);
        B.at(i, A.cols() + i) = N;
    }
    return B;
}
inline Int mod(const Int& a, const Int& N) {
    Int r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), N.get_mpz_t());
    return r;
}
}  // namespace detail

/// Deterministic solution of A x = b over Z/N, if any.
inline std::optional<std::vector<Int>> solve_mod(const IMat& A, const std::vector<Int>& b, const Int& N) {
    auto sol = integer_solve(detail::augment_mod(A, N), b);
    if (!sol) return std::nullopt;
    std::vector<Int> x(A.cols());
    for (size_t j = 0; j < A.cols(); ++j) x[j] = detail::mod((*sol)[j], N);
    return x;
}

// ---- Howell form over Z/N --------------------------------------------------

struct HowellResult {
    IMat H;        // canonical rows (nonzero rows first), entries in [0, N)
    IMat U;        // invertible over Z/N; H_padded = U * A_padded mod N
    size_t nrows;  // number of nonzero rows of H
    size_t padded; // rows of the padded matrix (original + cols spares)
};

/// Howell-style echelon form with unit pivot normalization: pivots divide N,
/// entries above a pivot are reduced modulo it, and the row span is closed
/// under partial annihilators, so two matrices have equal row span over Z/N
/// iff their Howell forms coincide.
inline HowellResult howell_form(const IMat& A_in, const Int& N) {
    if (N < 2) throw std::invalid_argument("howell_form: modulus must be >= 2");
    const size_t n0 = A_in.rows(), m = A_in.cols();
    const size_t n = n0 + m;  // spare zero rows hold annihilator rows
    IMat H(n, m, Int(0));
    for (size_t i = 0; i < n0; ++i)
        for (size_t j = 0; j < m; ++j) H.at(i, j) = detail::mod(A_in.at(i, j), N);
    IMat U = identity(n);
    size_t next_spare = n0;

    auto reduce_row = [&](IMat& M, size_t i) {
        for (size_t j = 0; j < M.cols(); ++j) M.at(i, j) = detail::mod(M.at(i, j), N);
    };
    auto combine = [&](size_t r, size_t i, size_t col) {
        // 2x2 unimodular transform making (H[r][col], H[i][col]) = (g, 0)
        Int a = H.at(r, col), b = H.at(i, col);
        Int g, s, t;
        mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        Int am = a / g, bm = b / g;
        for (IMat* M : {&H, &U}) {
            for (size_t j = 0; j < M->cols(); ++j) {
                Int x = M->at(r, j), y = M->at(i, j);
                M->at(r, j) = s * x + t * y;
                M->at(i, j) = -bm * x + am * y;
            }
            reduce_row(*M, r);
            reduce_row(*M, i);
        }
    };

    size_t r = 0;
    for (size_t col = 0; col < m && r < n; ++col) {
        for (size_t i = r + 1; i < n; ++i) {
            if (H.at(i, col) == 0) continue;
            combine(r, i, col);
        }
        if (H.at(r, col) == 0) continue;
        // normalize pivot to the canonical divisor d = gcd(pivot, N)
        Int a = H.at(r, col);
        Int d;
        mpz_gcd(d.get_mpz_t(), a.get_mpz_t(), N.get_mpz_t());
        Int ap = a / d, Nd = N / d;
        Int u;
        if (mpz_invert(u.get_mpz_t(), ap.get_mpz_t(), Nd.get_mpz_t()) == 0) u = 1;  // Nd == 1
        Int g;
        mpz_gcd(g.get_mpz_t(), u.get_mpz_t(), N.get_mpz_t());
        while (g != 1) {
            u += Nd;
            mpz_gcd(g.get_mpz_t(), u.get_mpz_t(), N.get_mpz_t());
        }
        for (IMat* M : {&H, &U}) {
            for (size_t j = 0; j < M->cols(); ++j) M->at(r, j) = detail::mod(M->at(r, j) * u, N);
        }
        // stash the partial annihilator (N/d) * row in a spare slot
        Int q = Nd;
        bool nonzero = false;
        for (size_t j = 0; j < m; ++j)
            if (detail::mod(H.at(r, j) * q, N) != 0) nonzero = true;
        if (nonzero && next_spare < n) {
            size_t sp = next_spare++;
            for (size_t j = 0; j < m; ++j) H.at(sp, j) = detail::mod(H.at(sp, j) + q * H.at(r, j), N);
            for (size_t j = 0; j < n; ++j) U.at(sp, j) = detail::mod(U.at(sp, j) + q * U.at(r, j), N);
        }
        // reduce entries above the pivot modulo it
        for (size_t i = 0; i < r; ++i) {
            Int qq;
            mpz_fdiv_q(qq.get_mpz_t(), H.at(i, col).get_mpz_t(), d.get_mpz_t());
            if (qq == 0) continue;
            for (size_t j = 0; j < m; ++j) H.at(i, j) = detail::mod(H.at(i, j) - qq * H.at(r, j), N);
            for (size_t j = 0; j < n; ++j) U.at(i, j) = detail::mod(U.at(i, j) - qq * U.at(r, j), N);
        }
        ++r;
    }

    HowellResult res;
    res.nrows = r;
    res.padded = n;
    res.H = std::move(H);
    res.U = std::move(U);
    return res;
}

/// Canonical generating rows of {x in (Z/N)^cols : A x = 0  (x as column)}.
inline std::vector<std::vector<Int>> kernel_mod(const IMat& A, const Int& N) {
    auto K = integer_kernel(detail::augment_mod(A, N));
    std::vector<std::vector<Int>> rows;
    for (const auto& v : K) {
        std::vector<Int> x(A.cols());
        bool nonzero = false;
        for (size_t j = 0; j < A.cols(); ++j) {
            x[j] = detail::mod(v[j], N);
            if (x[j] != 0) nonzero = true;
        }
        if (nonzero) rows.push_back(std::move(x));
    }
    if (rows.empty()) return rows;
    auto H = howell_form(IMat::from_rows(rows), N);
    std::vector<std::vector<Int>> out;
    for (size_t i = 0; i < H.nrows; ++i) out.push_back(H.H.row(i));
    return out;
}

/// Elementary divisors of Z^m / (rowspan(rows) + N Z^m); the cokernel of the
/// presentation over Z/N is the direct sum of Z/d_i.
inline std::vector<Int> cokernel_invariants_mod(const IMat& rows, const Int& N) {
    const size_t m = rows.cols();
    IMat stacked(rows.rows() + m, m, Int(0));
    for (size_t i = 0; i < rows.rows(); ++i)
        for (size_t j = 0; j < m; ++j) stacked.at(i, j) = rows.at(i, j);
    for (size_t j = 0; j < m; ++j) stacked.at(rows.rows() + j, j) = N;
    auto s = smith_form(stacked);
    return s.divisors;  // always m of them (N I has full column rank)
}

/// |rowspan| inside (Z/N)^m.
inline Int span_size_mod(const IMat& rows, const Int& N) {
    Int total = 1;
    const size_t m = rows.cols();
    for (size_t j = 0; j < m; ++j) total *= N;
    Int coker = 1;
    for (const auto& d : cokernel_invariants_mod(rows, N)) coker *= d;
    return total / coker;
}

/// Is v in the Z/N-row span of `rows`?
inline bool in_span_mod(const IMat& rows, const std::vector<Int>& v, const Int& N) {
    // x * rows = v  <=>  rows^T x^T = v^T
    IMat At(rows.cols(), rows.rows(), Int(0));
    for (size_t i = 0; i < rows.rows(); ++i)
        for (size_t j = 0; j < rows.cols(); ++j) At.at(j, i) = rows.at(i, j);
    return solve_mod(At, v, N).has_value();
}

}  // namespace ribet::nf
