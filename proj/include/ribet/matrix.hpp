#pragma once

// Exact matrices over any coefficient or polynomial ring: 2x2 algebra
// (trace, determinant, characteristic polynomial, simultaneous conjugation)
// and n x n determinants of relation matrices.  Determinants of polynomial
// or residue-ring matrices use cofactor expansion with memoized minors
// (Bareiss division is unavailable over non-domains); integer and rational
// matrices go through fraction-free Bareiss.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ribet/coeffs.hpp"

namespace ribet::matrices {

template <class T>
struct Mat2 {
    T a, b, c, d;

    Mat2() = default;
    Mat2(T a_, T b_, T c_, T d_) : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {}

    static Mat2 identity_like(const T& like) {
        return Mat2(RingOps<T>::one(like), RingOps<T>::zero(like), RingOps<T>::zero(like), RingOps<T>::one(like));
    }
    static Mat2 zero_like(const T& like) {
        auto z = RingOps<T>::zero(like);
        return Mat2(z, z, z, z);
    }

    Mat2 operator+(const Mat2& o) const { return Mat2(a + o.a, b + o.b, c + o.c, d + o.d); }
    Mat2 operator-(const Mat2& o) const { return Mat2(a - o.a, b - o.b, c - o.c, d - o.d); }
    Mat2 operator*(const Mat2& o) const {
        return Mat2(a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d);
    }
    Mat2 scaled(const T& s) const { return Mat2(s * a, s * b, s * c, s * d); }
    Mat2 operator-() const { return Mat2(-a, -b, -c, -d); }
    bool operator==(const Mat2& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
    bool operator!=(const Mat2& o) const { return !(*this == o); }

    T trace() const { return a + d; }
    T det() const { return a * d - b * c; }
    bool is_zero() const {
        return RingOps<T>::is_zero(a) && RingOps<T>::is_zero(b) && RingOps<T>::is_zero(c) && RingOps<T>::is_zero(d);
    }

    /// Adjugate inverse; defined iff det is a unit.
    std::optional<Mat2> inverse() const {
        auto di = RingOps<T>::try_invert(det());
        if (!di) return std::nullopt;
        return Mat2(d * *di, (-b) * *di, (-c) * *di, a * *di);
    }
};

/// char(M) = x^2 - tr(M) x + det(M), returned as {c0, c1, c2} with
/// c0 + c1 x + c2 x^2.
template <class T>
std::array<T, 3> charpoly2(const Mat2<T>& m) {
    return {m.det(), -m.trace(), RingOps<T>::one(m.a)};
}

/// g^-1 M g for each M; g must have unit determinant.  Traces and
/// determinants of all words are preserved.
template <class T>
std::vector<Mat2<T>> conjugate_simultaneous(const Mat2<T>& g, const std::vector<Mat2<T>>& ms) {
    auto gi = g.inverse();
    if (!gi) throw std::invalid_argument("conjugate_simultaneous: non-unit determinant");
    std::vector<Mat2<T>> out;
    out.reserve(ms.size());
    for (const auto& m : ms) out.push_back((*gi * m) * g);
    return out;
}

template <class T>
class Matrix {
  public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, const T& fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    static Matrix from_rows(std::vector<std::vector<T>> rows) {
        if (rows.empty()) return Matrix();
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows[0].size();
        for (auto& r : rows) {
            if (r.size() != m.cols_) throw std::invalid_argument("ragged matrix rows");
            for (auto& x : r) m.data_.push_back(std::move(x));
        }
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    T& at(size_t i, size_t j) { return data_[i * cols_ + j]; }
    const T& at(size_t i, size_t j) const { return data_[i * cols_ + j]; }

    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("matrix shape mismatch in product");
        if (data_.empty() || o.data_.empty()) return Matrix();
        Matrix r(rows_, o.cols_, RingOps<T>::zero(data_[0]));
        for (size_t i = 0; i < rows_; ++i)
            for (size_t k = 0; k < cols_; ++k) {
                const T& x = at(i, k);
                if (RingOps<T>::is_zero(x)) continue;
                for (size_t j = 0; j < o.cols_; ++j) r.at(i, j) = r.at(i, j) + x * o.at(k, j);
            }
        return r;
    }
    Matrix operator-(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
        Matrix r = *this;
        for (size_t i = 0; i < data_.size(); ++i) r.data_[i] = r.data_[i] - o.data_[i];
        return r;
    }
    bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }

    bool is_zero() const {
        for (const auto& x : data_)
            if (!RingOps<T>::is_zero(x)) return false;
        return true;
    }

    std::vector<T> row(size_t i) const {
        std::vector<T> r;
        for (size_t j = 0; j < cols_; ++j) r.push_back(at(i, j));
        return r;
    }

  private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

namespace detail {

// Cofactor expansion along the top remaining row, memoized on the column
// mask.  Exact over any commutative coefficient type.
template <class T>
class LaplaceDet {
  public:
    explicit LaplaceDet(const Matrix<T>& m) : m_(m), n_(m.rows()) {}

    T run() {
        if (n_ == 0) throw std::invalid_argument("det of empty matrix");
        return minor_det((1u << n_) - 1, 0);
    }

  private:
    T minor_det(std::uint32_t colmask, size_t row) {
        if (row == n_ - 1) {
            // single remaining column
            for (size_t j = 0; j < n_; ++j)
                if (colmask & (1u << j)) return m_.at(row, j);
        }
        auto it = memo_.find(colmask);
        if (it != memo_.end()) return it->second;
        T acc = RingOps<T>::zero(m_.at(0, 0));
        int sign = 1;
        for (size_t j = 0; j < n_; ++j) {
            if (!(colmask & (1u << j))) continue;
            const T& entry = m_.at(row, j);
            if (!RingOps<T>::is_zero(entry)) {
                T sub = minor_det(colmask & ~(1u << j), row + 1);
                if (sign > 0) {
                    acc = acc + entry * sub;
                } else {
                    acc = acc - entry * sub;
                }
            }
            sign = -sign;
        }
        memo_.emplace(colmask, acc);
        return acc;
    }

    const Matrix<T>& m_;
    size_t n_;
    std::unordered_map<std::uint32_t, T> memo_;
};

inline Int exact_div(const Int& a, const Int& b) {
    Int q;
    mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

// Fraction-free Bareiss over Z.
inline Int bareiss_det(Matrix<Int> m) {
    size_t n = m.rows();
    Int sign = 1, prev = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (m.at(k, k) == 0) {
            size_t piv = k + 1;
            while (piv < n && m.at(piv, k) == 0) ++piv;
            if (piv == n) return Int(0);
            for (size_t j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(piv, j));
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j)
                m.at(i, j) = exact_div(m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j), prev);
        prev = m.at(k, k);
    }
    return sign * m.at(n - 1, n - 1);
}

template <class T>
struct DetDispatch {
    static T run(const Matrix<T>& m) { return LaplaceDet<T>(m).run(); }
};
template <>
struct DetDispatch<Int> {
    static Int run(const Matrix<Int>& m) { return m.rows() <= 2 ? LaplaceDet<Int>(m).run() : bareiss_det(m); }
};

}  // namespace detail

/// Exact determinant of a square matrix.  Integer matrices use Bareiss;
/// everything else (polynomial and residue-ring entries) uses memoized
/// cofactor expansion.
template <class T>
T det_n(const Matrix<T>& m) {
    if (!m.square()) throw std::invalid_argument("det_n: matrix not square");
    if (m.rows() > 30) throw std::invalid_argument("det_n: dimension too large");
    return detail::DetDispatch<T>::run(m);
}

/// Memoized cofactor route regardless of coefficient type (kept callable so
/// tests can cross two routes against each other).
template <class T>
T det_laplace(const Matrix<T>& m) {
    if (!m.square()) throw std::invalid_argument("det_laplace: matrix not square");
    return detail::LaplaceDet<T>(m).run();
}

/// Multilinearity expansion of det(M') - det(M): one signed matrix per
/// nonempty row subset S, rows of (M - M') on S and rows of M elsewhere,
/// with sign (-1)^|S|.  The signed determinants sum to det(M') - det(M).
template <class T>
struct SignedMatrix {
    int sign;
    Matrix<T> mat;
};

template <class T>
std::vector<SignedMatrix<T>> multilinearity_expand(const Matrix<T>& m, const Matrix<T>& mp) {
    if (m.rows() != mp.rows() || m.cols() != mp.cols() || !m.square())
        throw std::invalid_argument("multilinearity_expand: shape mismatch");
    size_t n = m.rows();
    Matrix<T> diff = m - mp;  // rows printed in the expansion
    std::vector<SignedMatrix<T>> out;
    if (diff.is_zero()) return out;
    // subsets ordered by size, then lexicographically
    std::vector<std::uint32_t> subsets;
    for (std::uint32_t s = 1; s < (1u << n); ++s) subsets.push_back(s);
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](std::uint32_t x, std::uint32_t y) { return __builtin_popcount(x) < __builtin_popcount(y); });
    for (std::uint32_t s : subsets) {
        Matrix<T> cand = m;
        for (size_t i = 0; i < n; ++i) {
            if (!(s & (1u << i))) continue;
            for (size_t j = 0; j < n; ++j) cand.at(i, j) = diff.at(i, j);
        }
        out.push_back({__builtin_popcount(s) % 2 == 0 ? 1 : -1, std::move(cand)});
    }
    return out;
}

}  // namespace ribet::matrices
