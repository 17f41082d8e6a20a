#pragma once

// Sparse multivariate polynomials over an exact coefficient type, with
// monomial orders, substitution, the weight grading by
// (degree in b-variables) - (degree in c-variables), and the lower-unipotent
// conjugation substitution used for Borel-stability checks.
//
// Exponent vectors are dense small-integer arrays sharing one variable
// table; terms are kept sorted descending under the polynomial's order, with
// no zero coefficients stored.

#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ribet/coeffs.hpp"

namespace ribet::mpoly {

using ribet::Int;
using ribet::Rat;

// ---- prime-field scalars --------------------------------------------------

/// Scalar of F_p for word-size p.  Carries its modulus; mixing moduli throws.
struct GFp {
    long v = 0;
    long p = 0;

    GFp() = default;
    GFp(long val, long prime) : p(prime) {
        if (prime < 2) throw std::invalid_argument("GFp: modulus must be >= 2");
        v = val % prime;
        if (v < 0) v += prime;
    }

    GFp operator+(const GFp& o) const { return GFp(v + check(o), p); }
    GFp operator-(const GFp& o) const { return GFp(v - check(o), p); }
    GFp operator*(const GFp& o) const { return GFp(v * check(o), p); }
    GFp operator-() const { return GFp(-v, p); }
    bool operator==(const GFp& o) const { return v == check(o); }
    bool operator!=(const GFp& o) const { return !(*this == o); }

    long check(const GFp& o) const {
        if (p != o.p) throw std::invalid_argument("GFp: modulus mismatch");
        return o.v;
    }
};

}  // namespace ribet::mpoly

namespace ribet {
template <>
struct RingOps<mpoly::GFp> {
    static mpoly::GFp zero(const mpoly::GFp& like) { return mpoly::GFp(0, like.p); }
    static mpoly::GFp one(const mpoly::GFp& like) { return mpoly::GFp(1, like.p); }
    static mpoly::GFp from_int(const mpoly::GFp& like, const Int& z) {
        Int r = z % like.p;
        return mpoly::GFp(static_cast<long>(r.get_si()), like.p);
    }
    static bool is_zero(const mpoly::GFp& x) { return x.v == 0; }
    static std::optional<mpoly::GFp> try_invert(const mpoly::GFp& x) {
        if (x.v == 0) return std::nullopt;
        // Fermat; p is prime throughout this codebase.
        long result = 1, base = x.v, e = x.p - 2;
        while (e > 0) {
            if (e & 1) result = (result * base) % x.p;
            base = (base * base) % x.p;
            e >>= 1;
        }
        return mpoly::GFp(result, x.p);
    }
    static std::string str(const mpoly::GFp& x) { return std::to_string(x.v); }
};
}  // namespace ribet

namespace ribet::mpoly {

// ---- variables -------------------------------------------------------------

enum class VarClass { A, B, C, D, Eps, Delta, Aux, Plain };

struct VarInfo {
    std::string name;
    VarClass cls = VarClass::Plain;
    int i = 0, j = 0, k = 0;  // class indices (1-based where used)
    int row = 0;              // owning row of a formal context, 0 if n/a
};

class VarTable;
using VarTablePtr = std::shared_ptr<const VarTable>;

class VarTable {
  public:
    static VarTablePtr plain(const std::vector<std::string>& names) {
        std::vector<VarInfo> v;
        for (const auto& n : names) v.push_back(VarInfo{n, VarClass::Plain, 0, 0, 0, 0});
        return finish(std::move(v));
    }

    /// a_1..a_r, b_1..b_r, c_1..c_r, d_1..d_r
    static VarTablePtr standard_abcd(int r) {
        std::vector<VarInfo> v;
        const char* cls_names = "abcd";
        VarClass classes[4] = {VarClass::A, VarClass::B, VarClass::C, VarClass::D};
        for (int c = 0; c < 4; ++c)
            for (int i = 1; i <= r; ++i)
                v.push_back(VarInfo{std::string(1, cls_names[c]) + std::to_string(i), classes[c], i, 0, 0, 0});
        return finish(std::move(v));
    }

    static VarTablePtr from_infos(std::vector<VarInfo> infos) { return finish(std::move(infos)); }

    size_t size() const { return vars_.size(); }
    const VarInfo& info(size_t i) const { return vars_.at(i); }
    const std::vector<VarInfo>& infos() const { return vars_; }

    int index_of(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? -1 : static_cast<int>(it->second);
    }
    /// Index of the class-(i) variable, e.g. (A, 2) -> a2.  -1 if absent.
    int index_of(VarClass cls, int i) const {
        for (size_t t = 0; t < vars_.size(); ++t)
            if (vars_[t].cls == cls && vars_[t].i == i) return static_cast<int>(t);
        return -1;
    }

    /// Structural equality (same names in same order).
    bool same(const VarTable& o) const {
        if (vars_.size() != o.vars_.size()) return false;
        for (size_t t = 0; t < vars_.size(); ++t)
            if (vars_[t].name != o.vars_[t].name) return false;
        return true;
    }

    /// Appends variables; existing indices stay valid in the extension.
    VarTablePtr extended_with(const std::vector<VarInfo>& extra) const {
        std::vector<VarInfo> v = vars_;
        v.insert(v.end(), extra.begin(), extra.end());
        return finish(std::move(v));
    }
    /// True if `o` is a prefix of this table.
    bool extends(const VarTable& o) const {
        if (o.size() > size()) return false;
        for (size_t t = 0; t < o.size(); ++t)
            if (vars_[t].name != o.vars_[t].name) return false;
        return true;
    }

  private:
    static VarTablePtr finish(std::vector<VarInfo> v) {
        auto tab = std::make_shared<VarTable>();
        tab->vars_ = std::move(v);
        for (size_t t = 0; t < tab->vars_.size(); ++t) {
            if (!tab->by_name_.emplace(tab->vars_[t].name, t).second)
                throw std::invalid_argument("duplicate variable name: " + tab->vars_[t].name);
        }
        return tab;
    }

    std::vector<VarInfo> vars_;
    std::map<std::string, size_t> by_name_;

  public:
    VarTable() = default;  // for make_shared only
};

// ---- monomials and orders ---------------------------------------------------

struct Monomial {
    std::vector<std::uint16_t> e;

    static Monomial one(size_t nvars) {
        Monomial m;
        m.e.assign(nvars, 0);
        return m;
    }
    int deg() const {
        int d = 0;
        for (auto x : e) d += x;
        return d;
    }
    Monomial operator*(const Monomial& o) const {
        Monomial r = *this;
        for (size_t t = 0; t < e.size(); ++t) r.e[t] = static_cast<std::uint16_t>(r.e[t] + o.e[t]);
        return r;
    }
    bool divides(const Monomial& o) const {
        for (size_t t = 0; t < e.size(); ++t)
            if (e[t] > o.e[t]) return false;
        return true;
    }
    /// o / this (requires divides)
    Monomial divide_into(const Monomial& o) const {
        Monomial r = o;
        for (size_t t = 0; t < e.size(); ++t) r.e[t] = static_cast<std::uint16_t>(r.e[t] - e[t]);
        return r;
    }
    Monomial lcm_with(const Monomial& o) const {
        Monomial r = *this;
        for (size_t t = 0; t < e.size(); ++t) r.e[t] = std::max(r.e[t], o.e[t]);
        return r;
    }
    bool coprime_with(const Monomial& o) const {
        for (size_t t = 0; t < e.size(); ++t)
            if (e[t] && o.e[t]) return false;
        return true;
    }
    bool is_one() const {
        for (auto x : e)
            if (x) return false;
        return true;
    }
    bool operator==(const Monomial& o) const { return e == o.e; }
    bool operator!=(const Monomial& o) const { return !(*this == o); }
};

/// Total, multiplicative, well-founded orders: lex, degrevlex, and block
/// products of those (aux block first for elimination-style canonical forms,
/// conjugation-acted a/b/c/d block before the R0 block).
class MonomialOrder {
  public:
    enum class BKind { Lex, DegRevLex };

    static std::shared_ptr<const MonomialOrder> lex(const VarTablePtr& tab) {
        return single(tab, BKind::Lex);
    }
    static std::shared_ptr<const MonomialOrder> degrevlex(const VarTablePtr& tab) {
        return single(tab, BKind::DegRevLex);
    }
    /// Class-aware default: [aux:lex] > [a/b/c/d:degrevlex] > [eps/delta + plain:degrevlex]
    static std::shared_ptr<const MonomialOrder> blocked(const VarTablePtr& tab) {
        std::vector<int> aux, acted, rest;
        for (size_t t = 0; t < tab->size(); ++t) {
            switch (tab->info(t).cls) {
                case VarClass::Aux: aux.push_back(static_cast<int>(t)); break;
                case VarClass::A:
                case VarClass::B:
                case VarClass::C:
                case VarClass::D: acted.push_back(static_cast<int>(t)); break;
                default: rest.push_back(static_cast<int>(t)); break;
            }
        }
        auto ord = std::make_shared<MonomialOrder>();
        if (!aux.empty()) ord->blocks_.push_back({BKind::Lex, aux});
        if (!acted.empty()) ord->blocks_.push_back({BKind::DegRevLex, acted});
        if (!rest.empty()) ord->blocks_.push_back({BKind::DegRevLex, rest});
        if (ord->blocks_.empty()) ord->blocks_.push_back({BKind::Lex, {}});
        return ord;
    }

    /// -1 if a < b, 0 if equal, +1 if a > b.
    int cmp(const Monomial& a, const Monomial& b) const {
        for (const auto& [kind, idx] : blocks_) {
            int c = kind == BKind::Lex ? cmp_lex(a, b, idx) : cmp_drl(a, b, idx);
            if (c != 0) return c;
        }
        return 0;
    }
    bool less(const Monomial& a, const Monomial& b) const { return cmp(a, b) < 0; }

    bool operator==(const MonomialOrder& o) const { return blocks_ == o.blocks_; }
    bool operator!=(const MonomialOrder& o) const { return !(*this == o); }

    MonomialOrder() = default;

  private:
    static std::shared_ptr<const MonomialOrder> single(const VarTablePtr& tab, BKind k) {
        auto ord = std::make_shared<MonomialOrder>();
        std::vector<int> all(tab->size());
        for (size_t t = 0; t < tab->size(); ++t) all[t] = static_cast<int>(t);
        ord->blocks_.push_back({k, all});
        return ord;
    }
    static int cmp_lex(const Monomial& a, const Monomial& b, const std::vector<int>& idx) {
        for (int t : idx) {
            if (a.e[t] != b.e[t]) return a.e[t] < b.e[t] ? -1 : 1;
        }
        return 0;
    }
    static int cmp_drl(const Monomial& a, const Monomial& b, const std::vector<int>& idx) {
        int da = 0, db = 0;
        for (int t : idx) {
            da += a.e[t];
            db += b.e[t];
        }
        if (da != db) return da < db ? -1 : 1;
        for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
            if (a.e[*it] != b.e[*it]) return a.e[*it] > b.e[*it] ? -1 : 1;
        }
        return 0;
    }

    std::vector<std::pair<BKind, std::vector<int>>> blocks_;
};

using OrderPtr = std::shared_ptr<const MonomialOrder>;

// ---- polynomials ------------------------------------------------------------

template <class C>
class Poly {
  public:
    using Term = std::pair<Monomial, C>;

    Poly() = default;
    Poly(VarTablePtr tab, OrderPtr ord) : tab_(std::move(tab)), ord_(std::move(ord)) {}

    static Poly zero(VarTablePtr tab, OrderPtr ord) { return Poly(std::move(tab), std::move(ord)); }
    static Poly constant(VarTablePtr tab, OrderPtr ord, C c) {
        Poly p(std::move(tab), std::move(ord));
        if (!RingOps<C>::is_zero(c)) p.t_.push_back({Monomial::one(p.tab_->size()), std::move(c)});
        return p;
    }
    static Poly variable(VarTablePtr tab, OrderPtr ord, int index, const C& one) {
        Poly p(std::move(tab), std::move(ord));
        Monomial m = Monomial::one(p.tab_->size());
        m.e.at(index) = 1;
        p.t_.push_back({std::move(m), one});
        return p;
    }

    const VarTablePtr& table() const { return tab_; }
    const OrderPtr& order() const { return ord_; }
    const std::vector<Term>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    size_t nterms() const { return t_.size(); }
    int degree() const {
        int d = -1;
        for (const auto& [m, c] : t_) d = std::max(d, m.deg());
        return d;  // -1 for the zero polynomial
    }
    bool homogeneous() const {
        for (const auto& [m, c] : t_)
            if (m.deg() != t_.front().first.deg()) return false;
        return true;
    }

    const Monomial& lm() const { return lt().first; }
    const C& lc() const { return lt().second; }
    const Term& lt() const {
        if (t_.empty()) throw std::invalid_argument("leading term of zero polynomial");
        return t_.front();
    }

    Poly operator+(const Poly& o) const { return merged(o, false); }
    Poly operator-(const Poly& o) const { return merged(o, true); }
    Poly operator-() const {
        Poly r = *this;
        for (auto& [m, c] : r.t_) c = -c;
        return r;
    }

    Poly operator*(const Poly& o) const {
        check_compat(o);
        Poly r(tab_, ord_);
        if (t_.empty() || o.t_.empty()) return r;
        auto cmp = [this](const Monomial& x, const Monomial& y) { return ord_->cmp(x, y) > 0; };
        std::map<Monomial, C, decltype(cmp)> acc(cmp);
        for (const auto& [ma, ca] : t_)
            for (const auto& [mb, cb] : o.t_) {
                Monomial m = ma * mb;
                C prod = ca * cb;
                auto it = acc.find(m);
                if (it == acc.end()) {
                    if (!RingOps<C>::is_zero(prod)) acc.emplace(std::move(m), std::move(prod));
                } else {
                    it->second = it->second + prod;
                    if (RingOps<C>::is_zero(it->second)) acc.erase(it);
                }
            }
        r.t_.reserve(acc.size());
        for (auto& [m, c] : acc) r.t_.push_back({m, c});
        return r;
    }

    Poly scaled(const C& s) const {
        Poly r(tab_, ord_);
        if (RingOps<C>::is_zero(s)) return r;
        r.t_.reserve(t_.size());
        for (const auto& [m, c] : t_) {
            C sc = c * s;
            if (!RingOps<C>::is_zero(sc)) r.t_.push_back({m, sc});
        }
        return r;
    }

    /// this += coeff * mono * g   (merge-based; the inner loop of division)
    void axpy(const C& coeff, const Monomial& mono, const Poly& g) {
        check_compat(g);
        std::vector<Term> shifted;
        shifted.reserve(g.t_.size());
        for (const auto& [m, c] : g.t_) {
            C sc = c * coeff;
            if (!RingOps<C>::is_zero(sc)) shifted.push_back({m * mono, std::move(sc)});
        }
        std::vector<Term> out;
        out.reserve(t_.size() + shifted.size());
        size_t i = 0, j = 0;
        while (i < t_.size() && j < shifted.size()) {
            int c = ord_->cmp(t_[i].first, shifted[j].first);
            if (c > 0) {
                out.push_back(std::move(t_[i++]));
            } else if (c < 0) {
                out.push_back(std::move(shifted[j++]));
            } else {
                C sum = t_[i].second + shifted[j].second;
                if (!RingOps<C>::is_zero(sum)) out.push_back({t_[i].first, std::move(sum)});
                ++i;
                ++j;
            }
        }
        while (i < t_.size()) out.push_back(std::move(t_[i++]));
        while (j < shifted.size()) out.push_back(std::move(shifted[j++]));
        t_ = std::move(out);
    }

    Poly pow(unsigned k) const {
        Poly acc = constant(tab_, ord_, one_coeff());
        Poly base = *this;
        while (k) {
            if (k & 1) acc = acc * base;
            base = k > 1 ? base * base : base;
            k >>= 1;
        }
        return acc;
    }

    bool operator==(const Poly& o) const {
        check_compat(o);
        return t_ == o.t_;
    }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    /// Rebuild under another order (same table).
    Poly with_order(OrderPtr ord) const {
        Poly r(tab_, ord);
        r.t_ = t_;
        std::sort(r.t_.begin(), r.t_.end(),
                  [&](const Term& x, const Term& y) { return ord->cmp(x.first, y.first) > 0; });
        return r;
    }

    /// Reinterpret over an extension of the table (appended variables).
    Poly lift_to(const VarTablePtr& ext, const OrderPtr& ext_ord) const {
        if (!ext->extends(*tab_)) throw std::invalid_argument("lift_to: target does not extend source table");
        Poly r(ext, ext_ord);
        r.t_.reserve(t_.size());
        for (const auto& [m, c] : t_) {
            Monomial me = Monomial::one(ext->size());
            std::copy(m.e.begin(), m.e.end(), me.e.begin());
            r.t_.push_back({std::move(me), c});
        }
        std::sort(r.t_.begin(), r.t_.end(),
                  [&](const Term& x, const Term& y) { return ext_ord->cmp(x.first, y.first) > 0; });
        return r;
    }

    /// Project to a prefix table; all exponents of dropped variables must be 0.
    Poly project_to(const VarTablePtr& base, const OrderPtr& base_ord) const {
        if (!tab_->extends(*base)) throw std::invalid_argument("project_to: source does not extend target table");
        Poly r(base, base_ord);
        for (const auto& [m, c] : t_) {
            for (size_t t = base->size(); t < tab_->size(); ++t)
                if (m.e[t] != 0) throw std::invalid_argument("project_to: extension variable present");
            Monomial mb = Monomial::one(base->size());
            std::copy(m.e.begin(), m.e.begin() + static_cast<long>(base->size()), mb.e.begin());
            r.t_.push_back({std::move(mb), c});
        }
        std::sort(r.t_.begin(), r.t_.end(),
                  [&](const Term& x, const Term& y) { return base_ord->cmp(x.first, y.first) > 0; });
        return r;
    }

    template <class D, class Fn>
    Poly<D> map_coeffs(Fn fn) const {
        Poly<D> r(tab_, ord_);
        for (const auto& [m, c] : t_) {
            D d = fn(c);
            if (!RingOps<D>::is_zero(d)) r.mutable_terms().push_back({m, std::move(d)});
        }
        return r;
    }

    std::vector<Term>& mutable_terms() { return t_; }

    /// Ring-homomorphic substitution: variables in `images` are replaced by
    /// the given polynomials (over the same table/order), others are fixed.
    Poly substitute(const std::map<int, Poly>& images) const {
        Poly acc = zero(tab_, ord_);
        for (const auto& [m, c] : t_) {
            Poly term = constant(tab_, ord_, c);
            Monomial fixed = Monomial::one(tab_->size());
            for (size_t v = 0; v < tab_->size(); ++v) {
                if (!m.e[v]) continue;
                auto it = images.find(static_cast<int>(v));
                if (it == images.end()) {
                    fixed.e[v] = m.e[v];
                } else {
                    term = term * it->second.pow(m.e[v]);
                }
            }
            Poly fix(tab_, ord_);
            fix.t_.push_back({fixed, one_coeff()});
            acc = acc + term * fix;
        }
        return acc;
    }

    /// Full evaluation at coefficient-domain points (one value per variable).
    template <class T>
    T evaluate(const std::vector<T>& point, const T& like) const {
        if (point.size() != tab_->size()) throw std::invalid_argument("evaluate: wrong point arity");
        T acc = RingOps<T>::zero(like);
        for (const auto& [m, c] : t_) {
            T term = coeff_to<T>(c, like);
            for (size_t v = 0; v < tab_->size(); ++v)
                for (int e = 0; e < m.e[v]; ++e) term = term * point[v];
            acc = acc + term;
        }
        return acc;
    }

    /// Exponent-of-variable decomposition: f = sum_k var^k * out[k] where the
    /// returned polynomials do not involve `var`.
    std::map<int, Poly> coefficients_in(int var) const {
        std::map<int, Poly> out;
        for (const auto& [m, c] : t_) {
            int k = m.e[var];
            Monomial rest = m;
            rest.e[var] = 0;
            auto [it, fresh] = out.try_emplace(k, tab_, ord_);
            it->second.t_.push_back({std::move(rest), c});
        }
        for (auto& [k, p] : out)
            std::sort(p.t_.begin(), p.t_.end(),
                      [&](const Term& x, const Term& y) { return ord_->cmp(x.first, y.first) > 0; });
        return out;
    }

    std::string render() const {
        if (t_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : t_) {
            std::string cs = RingOps<C>::str(c);
            bool neg = !cs.empty() && cs[0] == '-';
            if (first) {
                os << (neg ? "-" : "");
                first = false;
            } else {
                os << (neg ? " - " : " + ");
            }
            if (neg) cs = cs.substr(1);
            std::string mono = render_monomial(m);
            if (mono.empty()) {
                os << cs;
            } else if (cs == "1") {
                os << mono;
            } else {
                os << cs << "*" << mono;
            }
        }
        return os.str();
    }

    C one_coeff() const {
        if (!t_.empty()) return RingOps<C>::one(t_.front().second);
        return RingOps<C>::one(C{});
    }

  private:
    template <class T>
    static T coeff_to(const C& c, const T& like);

    std::string render_monomial(const Monomial& m) const {
        std::ostringstream os;
        bool first = true;
        for (size_t v = 0; v < tab_->size(); ++v) {
            if (!m.e[v]) continue;
            if (!first) os << "*";
            first = false;
            os << tab_->info(v).name;
            if (m.e[v] > 1) os << "^" << m.e[v];
        }
        return os.str();
    }

    void check_compat(const Poly& o) const {
        if (tab_.get() == o.tab_.get() || (tab_ && o.tab_ && tab_->same(*o.tab_))) {
            if (ord_.get() == o.ord_.get() || (ord_ && o.ord_ && *ord_ == *o.ord_)) return;
            throw std::invalid_argument("polynomial order mismatch");
        }
        throw std::invalid_argument("polynomial variable-table mismatch");
    }

    Poly merged(const Poly& o, bool subtract) const {
        check_compat(o);
        Poly r(tab_, ord_);
        r.t_.reserve(t_.size() + o.t_.size());
        size_t i = 0, j = 0;
        while (i < t_.size() && j < o.t_.size()) {
            int c = ord_->cmp(t_[i].first, o.t_[j].first);
            if (c > 0) {
                r.t_.push_back(t_[i++]);
            } else if (c < 0) {
                auto term = o.t_[j++];
                if (subtract) term.second = -term.second;
                r.t_.push_back(std::move(term));
            } else {
                C sum = subtract ? C(t_[i].second - o.t_[j].second) : C(t_[i].second + o.t_[j].second);
                if (!RingOps<C>::is_zero(sum)) r.t_.push_back({t_[i].first, std::move(sum)});
                ++i;
                ++j;
            }
        }
        while (i < t_.size()) r.t_.push_back(t_[i++]);
        while (j < o.t_.size()) {
            auto term = o.t_[j++];
            if (subtract) term.second = -term.second;
            r.t_.push_back(std::move(term));
        }
        return r;
    }

    VarTablePtr tab_;
    OrderPtr ord_;
    std::vector<Term> t_;
};

// coefficient embeddings used by evaluate()
template <class C>
template <class T>
T Poly<C>::coeff_to(const C& c, const T& like) {
    if constexpr (std::is_same_v<C, T>) {
        (void)like;
        return c;
    } else if constexpr (std::is_same_v<C, Int>) {
        return RingOps<T>::from_int(like, c);
    } else {
        static_assert(std::is_same_v<C, Int> || std::is_same_v<C, T>, "evaluate: unsupported coefficient embedding");
    }
}

// ---- conversions ------------------------------------------------------------

inline Poly<Rat> to_rational(const Poly<Int>& f) {
    return f.map_coeffs<Rat>([](const Int& z) { return Rat(z); });
}
inline Poly<GFp> to_prime_field(const Poly<Int>& f, long p) {
    return f.map_coeffs<GFp>([p](const Int& z) {
        Int r = z % p;
        return GFp(static_cast<long>(r.get_si()), p);
    });
}
/// Clears denominators and divides by content; fails if a coefficient is
/// non-integral after scaling (cannot happen for lcm-scaled input).
inline Poly<Int> clear_denominators(const Poly<Rat>& f, Int* scale_out = nullptr) {
    Int lcm = 1;
    for (const auto& [m, c] : f.terms()) {
        Int den = c.get_den();
        Int g;
        mpz_gcd(g.get_mpz_t(), lcm.get_mpz_t(), den.get_mpz_t());
        lcm = lcm / g * den;
    }
    if (scale_out) *scale_out = lcm;
    return f.map_coeffs<Int>([&](const Rat& q) {
        Rat s = q * lcm;
        return Int(s.get_num());
    });
}

// ---- weight grading and Borel substitutions --------------------------------

/// Weight of a monomial: (total degree in b-class vars) - (degree in c-class).
inline int monomial_weight(const VarTable& tab, const Monomial& m) {
    int w = 0;
    for (size_t v = 0; v < tab.size(); ++v) {
        if (tab.info(v).cls == VarClass::B) w += m.e[v];
        if (tab.info(v).cls == VarClass::C) w -= m.e[v];
    }
    return w;
}

/// f = sum_k f_k with f_k weight-homogeneous of weight k; the diagonal torus
/// scales f_k by (y/x)^k.
template <class C>
std::map<int, Poly<C>> weight_decompose(const Poly<C>& f) {
    std::map<int, Poly<C>> out;
    for (const auto& [m, c] : f.terms()) {
        int w = monomial_weight(*f.table(), m);
        auto [it, fresh] = out.try_emplace(w, Poly<C>::zero(f.table(), f.order()));
        Poly<C> term(f.table(), f.order());
        term.mutable_terms().push_back({m, c});
        it->second = it->second + term;
    }
    return out;
}

template <class C>
bool weight_homogeneous(const Poly<C>& f, int* weight_out = nullptr) {
    auto parts = weight_decompose(f);
    if (parts.size() > 1) return false;
    if (weight_out) *weight_out = parts.empty() ? 0 : parts.begin()->first;
    return true;
}

/// (extended table, aux index): appends one aux variable.
inline std::pair<VarTablePtr, int> extend_with_aux(const VarTablePtr& tab, const std::string& name = "x") {
    auto ext = tab->extended_with({VarInfo{name, VarClass::Aux, 0, 0, 0, 0}});
    return {ext, static_cast<int>(tab->size())};
}

namespace detail {
inline void monomials_rec(const std::vector<int>& vars, size_t pos, int remaining, Monomial& cur,
                          std::vector<Monomial>& out) {
    if (pos == vars.size()) {
        if (remaining == 0) out.push_back(cur);
        return;
    }
    if (pos + 1 == vars.size()) {
        cur.e[static_cast<size_t>(vars[pos])] = static_cast<std::uint16_t>(remaining);
        out.push_back(cur);
        cur.e[static_cast<size_t>(vars[pos])] = 0;
        return;
    }
    for (int take = 0; take <= remaining; ++take) {
        cur.e[static_cast<size_t>(vars[pos])] = static_cast<std::uint16_t>(take);
        monomials_rec(vars, pos + 1, remaining - take, cur, out);
    }
    cur.e[static_cast<size_t>(vars[pos])] = 0;
}
}  // namespace detail

/// All monomials of exact total degree d in the given variables,
/// deterministically ordered.
inline std::vector<Monomial> monomials_of_degree(const VarTablePtr& tab, const std::vector<int>& vars, int d) {
    std::vector<Monomial> out;
    if (d < 0) return out;
    Monomial cur = Monomial::one(tab->size());
    if (vars.empty()) {
        if (d == 0) out.push_back(cur);
        return out;
    }
    detail::monomials_rec(vars, 0, d, cur, out);
    return out;
}

/// Every variable index of the table.
inline std::vector<int> all_variables(const VarTablePtr& tab) {
    std::vector<int> vars(tab->size());
    for (size_t v = 0; v < tab->size(); ++v) vars[v] = static_cast<int>(v);
    return vars;
}

/// Simultaneous lower-unipotent conjugation substitution
///   a_i -> a_i + b_i t,  b_i -> b_i,
///   c_i -> c_i + (d_i - a_i) t - b_i t^2,  d_i -> d_i - b_i t
/// for every index i, where t is the given parameter polynomial (typically a
/// fresh aux variable).  The result lives over the parameter's table, which
/// must extend f's table.
template <class C>
Poly<C> apply_unipotent(const Poly<C>& f, const Poly<C>& param) {
    const VarTablePtr& ext = param.table();
    const OrderPtr& ord = param.order();
    if (f.is_zero()) return Poly<C>::zero(ext, ord);
    Poly<C> lifted = f.table()->same(*ext) ? f.with_order(ord) : f.lift_to(ext, ord);
    C one = RingOps<C>::one(lifted.terms().front().second);
    std::map<int, Poly<C>> images;
    const Poly<C> t2 = param * param;
    for (size_t v = 0; v < ext->size(); ++v) {
        const VarInfo& vi = ext->info(v);
        if (vi.cls != VarClass::A && vi.cls != VarClass::C && vi.cls != VarClass::D) continue;
        int ia = ext->index_of(VarClass::A, vi.i);
        int ib = ext->index_of(VarClass::B, vi.i);
        int ic = ext->index_of(VarClass::C, vi.i);
        int id = ext->index_of(VarClass::D, vi.i);
        if (ia < 0 || ib < 0 || ic < 0 || id < 0)
            throw std::invalid_argument("apply_unipotent: incomplete a/b/c/d family for index " +
                                        std::to_string(vi.i));
        auto var = [&](int idx) { return Poly<C>::variable(ext, ord, idx, one); };
        if (vi.cls == VarClass::A) images.emplace(static_cast<int>(v), var(ia) + var(ib) * param);
        if (vi.cls == VarClass::C)
            images.emplace(static_cast<int>(v), var(ic) + (var(id) - var(ia)) * param - var(ib) * t2);
        if (vi.cls == VarClass::D) images.emplace(static_cast<int>(v), var(id) - var(ib) * param);
    }
    return lifted.substitute(images);
}

/// Convenience: extend f's table by an aux variable and conjugate by it.
/// Returns the transformed polynomial together with the aux index.
template <class C>
std::pair<Poly<C>, int> apply_unipotent_aux(const Poly<C>& f, const std::string& aux_name = "x") {
    auto [ext, xi] = extend_with_aux(f.table(), aux_name);
    auto ord = MonomialOrder::blocked(ext);
    if (f.is_zero()) return {Poly<C>::zero(ext, ord), xi};
    Poly<C> x = Poly<C>::variable(ext, ord, xi, RingOps<C>::one(f.terms().front().second));
    return {apply_unipotent(f, x), xi};
}

// ---- parsing ---------------------------------------------------------------

/// Infix parser for integer-coefficient polynomials:
///   expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
///   factor := base ('^' uint)?; base := uint | name | '(' expr ')' | '-' factor
template <class C = Int>
class PolyParser {
  public:
    PolyParser(VarTablePtr tab, OrderPtr ord, std::string src)
        : tab_(std::move(tab)), ord_(std::move(ord)), s_(std::move(src)) {}

    Poly<Int> parse() {
        Poly<Int> p = expr();
        skip();
        if (pos_ != s_.size()) fail("trailing input");
        return p;
    }

  private:
    Poly<Int> expr() {
        Poly<Int> acc = term();
        while (true) {
            skip();
            if (peek() == '+') {
                ++pos_;
                acc = acc + term();
            } else if (peek() == '-') {
                ++pos_;
                acc = acc - term();
            } else {
                return acc;
            }
        }
    }
    Poly<Int> term() {
        Poly<Int> acc = factor();
        while (true) {
            skip();
            if (peek() == '*') {
                ++pos_;
                acc = acc * factor();
            } else {
                return acc;
            }
        }
    }
    Poly<Int> factor() {
        Poly<Int> b = base();
        skip();
        if (peek() == '^') {
            ++pos_;
            skip();
            if (!std::isdigit(peek())) fail("exponent expected");
            unsigned e = 0;
            while (std::isdigit(peek())) e = e * 10 + static_cast<unsigned>(s_[pos_++] - '0');
            if (e > 64) fail("exponent too large");
            return b.pow(e);
        }
        return b;
    }
    Poly<Int> base() {
        skip();
        char c = peek();
        if (c == '(') {
            ++pos_;
            Poly<Int> p = expr();
            skip();
            if (peek() != ')') fail("')' expected");
            ++pos_;
            return p;
        }
        if (c == '-') {
            ++pos_;
            return -factor();
        }
        if (std::isdigit(c)) {
            std::string num;
            while (std::isdigit(peek())) num += s_[pos_++];
            return Poly<Int>::constant(tab_, ord_, Int(num));
        }
        if (std::isalpha(c) || c == '_') {
            std::string name;
            while (std::isalnum(peek()) || peek() == '_') name += s_[pos_++];
            int idx = tab_->index_of(name);
            if (idx < 0) fail("unknown variable '" + name + "'");
            return Poly<Int>::variable(tab_, ord_, idx, Int(1));
        }
        fail("unexpected character");
        return Poly<Int>::zero(tab_, ord_);  // unreachable
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("polynomial parse error at position " + std::to_string(pos_) + ": " + msg);
    }

    VarTablePtr tab_;
    OrderPtr ord_;
    std::string s_;
    size_t pos_ = 0;
};

inline Poly<Int> parse_poly(const VarTablePtr& tab, const OrderPtr& ord, const std::string& src) {
    return PolyParser<>(tab, ord, src).parse();
}

}  // namespace ribet::mpoly

namespace ribet {
template <class C>
struct RingOps<mpoly::Poly<C>> {
    using P = mpoly::Poly<C>;
    static P zero(const P& like) { return P::zero(like.table(), like.order()); }
    static P one(const P& like) { return P::constant(like.table(), like.order(), like.one_coeff()); }
    static P from_int(const P& like, const Int& z) {
        return P::constant(like.table(), like.order(), RingOps<C>::from_int(like.one_coeff(), z));
    }
    static bool is_zero(const P& x) { return x.is_zero(); }
    static std::optional<P> try_invert(const P& x) {
        // only constant unit polynomials invert
        if (x.nterms() != 1 || !x.terms().front().first.is_one()) return std::nullopt;
        auto ci = RingOps<C>::try_invert(x.terms().front().second);
        if (!ci) return std::nullopt;
        return P::constant(x.table(), x.order(), *ci);
    }
    static std::string str(const P& x) { return x.render(); }
};
}  // namespace ribet
