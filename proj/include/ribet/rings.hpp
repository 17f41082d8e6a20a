#pragma once

// Exact coefficient rings: Z, Q, F_p, Z/N, truncated DVRs Z/p^n, finite
// products, and fiber-product subrings {(a,b) : a = b mod m}.  Everything
// downstream (polynomials, matrices, module presentations) is generic over
// these.  Values are immutable and in canonical form: residues in
// [0, modulus), fractions reduced, fiber congruences verified at build time.

#include <gmpxx.h>

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

#include "ribet/coeffs.hpp"

namespace ribet::rings {

using Int = mpz_class;
using Rat = mpq_class;

enum class RingKind { Integers, Rationals, PrimeField, IntegersModN, TruncatedDVR, Product, FiberProduct };

struct RingSpec {
    RingKind kind = RingKind::Integers;
    Int p = 0;           // PrimeField / TruncatedDVR
    unsigned n = 0;      // TruncatedDVR precision
    Int N = 0;           // IntegersModN
    Int conductor = 0;   // FiberProduct congruence modulus
    std::vector<RingSpec> factors;  // Product factors; FiberProduct {left, right}

    static RingSpec integers() { return RingSpec{}; }
    static RingSpec rationals() {
        RingSpec s;
        s.kind = RingKind::Rationals;
        return s;
    }
    static RingSpec prime_field(Int p) {
        RingSpec s;
        s.kind = RingKind::PrimeField;
        s.p = std::move(p);
        return s;
    }
    static RingSpec integers_mod(Int N) {
        RingSpec s;
        s.kind = RingKind::IntegersModN;
        s.N = std::move(N);
        return s;
    }
    static RingSpec truncated_dvr(Int p, unsigned n) {
        RingSpec s;
        s.kind = RingKind::TruncatedDVR;
        s.p = std::move(p);
        s.n = n;
        return s;
    }
    static RingSpec product(std::vector<RingSpec> f) {
        RingSpec s;
        s.kind = RingKind::Product;
        s.factors = std::move(f);
        return s;
    }
    static RingSpec fiber_product(RingSpec left, RingSpec right, Int m) {
        RingSpec s;
        s.kind = RingKind::FiberProduct;
        s.factors = {std::move(left), std::move(right)};
        s.conductor = std::move(m);
        return s;
    }

    bool operator==(const RingSpec& o) const {
        if (kind != o.kind) return false;
        switch (kind) {
            case RingKind::Integers:
            case RingKind::Rationals: return true;
            case RingKind::PrimeField: return p == o.p;
            case RingKind::IntegersModN: return N == o.N;
            case RingKind::TruncatedDVR: return p == o.p && n == o.n;
            case RingKind::Product: return factors == o.factors;
            case RingKind::FiberProduct: return conductor == o.conductor && factors == o.factors;
        }
        return false;
    }
    bool operator!=(const RingSpec& o) const { return !(*this == o); }

    std::string to_string() const {
        std::ostringstream os;
        switch (kind) {
            case RingKind::Integers: os << "Z"; break;
            case RingKind::Rationals: os << "Q"; break;
            case RingKind::PrimeField: os << "F_" << p; break;
            case RingKind::IntegersModN: os << "Z/" << N; break;
            case RingKind::TruncatedDVR: os << "Z/" << p << "^" << n; break;
            case RingKind::Product: {
                os << "(";
                for (size_t i = 0; i < factors.size(); ++i) os << (i ? " x " : "") << factors[i].to_string();
                os << ")";
                break;
            }
            case RingKind::FiberProduct:
                os << "{(a,b) in " << factors[0].to_string() << " x " << factors[1].to_string() << " : a=b mod "
                   << conductor << "}";
                break;
        }
        return os.str();
    }
};

/// Tree-structured element value: integer residue/rational leaf or tuple.
struct Value {
    std::variant<Int, Rat, std::vector<Value>> v;

    Value() : v(Int(0)) {}
    Value(Int z) : v(std::move(z)) {}  // NOLINT: implicit by design
    Value(Rat q) : v(std::move(q)) {}  // NOLINT
    Value(std::vector<Value> t) : v(std::move(t)) {}  // NOLINT

    const Int& z() const { return std::get<Int>(v); }
    const Rat& q() const { return std::get<Rat>(v); }
    const std::vector<Value>& tuple() const { return std::get<std::vector<Value>>(v); }

    bool operator==(const Value& o) const { return v == o.v; }
    bool operator!=(const Value& o) const { return !(*this == o); }

    // Total order for canonical sets and deterministic enumeration.
    bool operator<(const Value& o) const {
        if (v.index() != o.v.index()) return v.index() < o.v.index();
        if (std::holds_alternative<Int>(v)) return z() < o.z();
        if (std::holds_alternative<Rat>(v)) return q() < o.q();
        return tuple() < o.tuple();
    }

    std::string to_string() const {
        if (std::holds_alternative<Int>(v)) return z().get_str();
        if (std::holds_alternative<Rat>(v)) return q().get_str();
        std::string s = "(";
        const auto& t = tuple();
        for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + t[i].to_string();
        return s + ")";
    }
};

class Ring;
using RingPtr = std::shared_ptr<const Ring>;

class RingElem {
  public:
    RingElem() = default;
    RingElem(RingPtr ring, Value val) : ring_(std::move(ring)), val_(std::move(val)) {}

    const RingPtr& ring() const { return ring_; }
    const Value& value() const { return val_; }

    inline RingElem operator+(const RingElem& o) const;
    inline RingElem operator-(const RingElem& o) const;
    inline RingElem operator*(const RingElem& o) const;
    inline RingElem operator-() const;
    inline RingElem& operator+=(const RingElem& o) { return *this = *this + o; }
    inline RingElem& operator-=(const RingElem& o) { return *this = *this - o; }
    inline RingElem& operator*=(const RingElem& o) { return *this = *this * o; }
    inline bool operator==(const RingElem& o) const;
    bool operator!=(const RingElem& o) const { return !(*this == o); }

    inline bool is_zero() const;
    inline bool is_unit() const;
    inline std::optional<RingElem> try_invert() const;
    std::string to_string() const { return val_.to_string(); }

  private:
    RingPtr ring_;
    Value val_;
};

namespace detail {
inline bool is_probable_prime(const Int& p) { return mpz_probab_prime_p(p.get_mpz_t(), 30) != 0; }
}  // namespace detail

class Ring : public std::enable_shared_from_this<Ring> {
  public:
    /// Validates the ring spec and returns a ring handle.  Throws
    /// std::invalid_argument on malformed specs (composite p, N < 2,
    /// fiber conductor not dividing both sides, ...).
    static RingPtr make(RingSpec spec) {
        validate(spec);
        return std::shared_ptr<const Ring>(new Ring(std::move(spec)));
    }

    const RingSpec& spec() const { return spec_; }
    RingKind kind() const { return spec_.kind; }

    // ---- element construction -------------------------------------------

    RingElem zero() const { return RingElem(shared_from_this(), from_int_value(0)); }
    RingElem one() const { return RingElem(shared_from_this(), from_int_value(1)); }
    RingElem from_int(const Int& z) const { return RingElem(shared_from_this(), from_int_value(z)); }

    /// Canonicalizes and validates an explicitly given value (tuple shapes,
    /// fiber congruence).  Throws std::invalid_argument if the value does not
    /// belong to the ring.
    RingElem element(Value v) const { return RingElem(shared_from_this(), canonical(std::move(v))); }

    Value from_int_value(const Int& z) const {
        switch (spec_.kind) {
            case RingKind::Integers: return Value(z);
            case RingKind::Rationals: return Value(Rat(z));
            case RingKind::PrimeField:
            case RingKind::IntegersModN:
            case RingKind::TruncatedDVR: return Value(mod_reduce(z));
            case RingKind::Product: {
                std::vector<Value> t;
                t.reserve(spec_.factors.size());
                for (const auto& f : spec_.factors) t.push_back(sub(f)->from_int_value(z));
                return Value(std::move(t));
            }
            case RingKind::FiberProduct: {
                std::vector<Value> t{sub(spec_.factors[0])->from_int_value(z), sub(spec_.factors[1])->from_int_value(z)};
                return Value(std::move(t));
            }
        }
        throw std::logic_error("unreachable");
    }

    // ---- arithmetic on values -------------------------------------------

    Value add(const Value& a, const Value& b) const { return zip(a, b, [](const Int& x, const Int& y) { return Int(x + y); }, [](const Rat& x, const Rat& y) { return Rat(x + y); }, &Ring::add); }
    Value sub(const Value& a, const Value& b) const { return zip(a, b, [](const Int& x, const Int& y) { return Int(x - y); }, [](const Rat& x, const Rat& y) { return Rat(x - y); }, &Ring::sub); }
    Value mul(const Value& a, const Value& b) const { return zip(a, b, [](const Int& x, const Int& y) { return Int(x * y); }, [](const Rat& x, const Rat& y) { return Rat(x * y); }, &Ring::mul); }
    Value neg(const Value& a) const { return sub(from_int_value(0), a); }

    bool is_zero(const Value& a) const { return eq(a, from_int_value(0)); }
    bool eq(const Value& a, const Value& b) const { return a == b; }

    bool is_unit(const Value& a) const { return invert(a).has_value(); }

    std::optional<Value> invert(const Value& a) const {
        switch (spec_.kind) {
            case RingKind::Integers: {
                if (a.z() == 1 || a.z() == -1) return a;
                return std::nullopt;
            }
            case RingKind::Rationals: {
                if (a.q() == 0) return std::nullopt;
                return Value(Rat(1 / a.q()));
            }
            case RingKind::PrimeField:
            case RingKind::IntegersModN:
            case RingKind::TruncatedDVR: {
                Int inv;
                if (mpz_invert(inv.get_mpz_t(), a.z().get_mpz_t(), modulus().get_mpz_t()) == 0) return std::nullopt;
                return Value(inv);
            }
            case RingKind::Product:
            case RingKind::FiberProduct: {
                std::vector<Value> t;
                const auto& parts = a.tuple();
                for (size_t i = 0; i < parts.size(); ++i) {
                    auto inv = factor_ring(i)->invert(parts[i]);
                    if (!inv) return std::nullopt;
                    t.push_back(std::move(*inv));
                }
                // Componentwise inverses of a congruent pair stay congruent,
                // so no fiber re-check is needed; canonical() asserts anyway.
                return canonical(Value(std::move(t)));
            }
        }
        throw std::logic_error("unreachable");
    }

    // ---- structure -------------------------------------------------------

    bool finite() const {
        switch (spec_.kind) {
            case RingKind::Integers:
            case RingKind::Rationals: return false;
            case RingKind::PrimeField:
            case RingKind::IntegersModN:
            case RingKind::TruncatedDVR: return true;
            case RingKind::Product:
            case RingKind::FiberProduct:
                for (size_t i = 0; i < spec_.factors.size(); ++i)
                    if (!factor_ring(i)->finite()) return false;
                return true;
        }
        return false;
    }

    /// All elements, deterministically ordered.  Finite rings only.
    std::vector<Value> enumerate() const {
        if (!finite()) throw std::invalid_argument("enumerate: ring is not finite: " + spec_.to_string());
        switch (spec_.kind) {
            case RingKind::PrimeField:
            case RingKind::IntegersModN:
            case RingKind::TruncatedDVR: {
                std::vector<Value> out;
                for (Int i = 0; i < modulus(); ++i) out.emplace_back(i);
                return out;
            }
            case RingKind::Product:
            case RingKind::FiberProduct: {
                std::vector<std::vector<Value>> parts;
                for (size_t i = 0; i < spec_.factors.size(); ++i) parts.push_back(factor_ring(i)->enumerate());
                std::vector<Value> out;
                std::vector<size_t> idx(parts.size(), 0);
                while (true) {
                    std::vector<Value> t;
                    for (size_t i = 0; i < parts.size(); ++i) t.push_back(parts[i][idx[i]]);
                    Value cand(std::move(t));
                    if (spec_.kind != RingKind::FiberProduct || fiber_ok(cand)) out.push_back(std::move(cand));
                    size_t k = parts.size();
                    while (k > 0) {
                        if (++idx[k - 1] < parts[k - 1].size()) break;
                        idx[k - 1] = 0;
                        --k;
                    }
                    if (k == 0) break;
                }
                return out;
            }
            default: break;
        }
        throw std::logic_error("unreachable");
    }

    // ---- modular / DVR helpers ------------------------------------------

    const Int& modulus() const {
        switch (spec_.kind) {
            case RingKind::PrimeField: return spec_.p;
            case RingKind::IntegersModN: return spec_.N;
            case RingKind::TruncatedDVR: return dvr_modulus_;
            default: throw std::invalid_argument("modulus: not a modular ring: " + spec_.to_string());
        }
    }

    /// TruncatedDVR valuation: x = unit * p^k with k in [0, n); zero maps
    /// to n.  The unit part is canonical in [0, p^(n-k)).
    int valuation(const Value& a) const {
        require(spec_.kind == RingKind::TruncatedDVR, "valuation: TruncatedDVR only");
        if (a.z() == 0) return static_cast<int>(spec_.n);
        Int rest;
        auto k = mpz_remove(rest.get_mpz_t(), a.z().get_mpz_t(), spec_.p.get_mpz_t());
        return static_cast<int>(k);
    }

    Value unit_part(const Value& a) const {
        require(spec_.kind == RingKind::TruncatedDVR, "unit_part: TruncatedDVR only");
        if (a.z() == 0) throw std::invalid_argument("unit_part of zero");
        Int rest;
        mpz_remove(rest.get_mpz_t(), a.z().get_mpz_t(), spec_.p.get_mpz_t());
        return Value(mod_reduce(rest));
    }

    /// Z/p^n -> Z/p^(n-1).  Division by the uniformizer lands here.
    RingPtr lowered() const {
        require(spec_.kind == RingKind::TruncatedDVR, "lowered: TruncatedDVR only");
        require(spec_.n >= 2, "lowered: precision already 1");
        return Ring::make(RingSpec::truncated_dvr(spec_.p, spec_.n - 1));
    }

    /// Exact division by p; the quotient is well-defined one precision lower.
    /// Requires p | a.
    RingElem divide_by_uniformizer(const Value& a) const {
        require(spec_.kind == RingKind::TruncatedDVR, "divide_by_uniformizer: TruncatedDVR only");
        if (a.z() % spec_.p != 0) throw std::invalid_argument("divide_by_uniformizer: value not divisible by p");
        return lowered()->from_int(a.z() / spec_.p);
    }

    /// Canonical reduction of an element of `this` into `target` where a
    /// canonical projection exists (Z -> Z/N, precision drop, product /
    /// fiber component maps, fiber -> Z/m).
    static RingElem reduce(const RingElem& x, const RingPtr& target);

    std::string to_string() const { return spec_.to_string(); }

    // canonicalize (+validate) a raw value for this ring
    Value canonical(Value v) const {
        switch (spec_.kind) {
            case RingKind::Integers:
                require_holds<Int>(v);
                return v;
            case RingKind::Rationals: {
                if (std::holds_alternative<Int>(v.v)) return Value(Rat(v.z()));
                require_holds<Rat>(v);
                Rat q = v.q();
                q.canonicalize();
                return Value(q);
            }
            case RingKind::PrimeField:
            case RingKind::IntegersModN:
            case RingKind::TruncatedDVR:
                require_holds<Int>(v);
                return Value(mod_reduce(v.z()));
            case RingKind::Product:
            case RingKind::FiberProduct: {
                require_holds<std::vector<Value>>(v);
                const auto& t = v.tuple();
                require(t.size() == spec_.factors.size(), "tuple arity mismatch");
                std::vector<Value> out;
                for (size_t i = 0; i < t.size(); ++i) out.push_back(factor_ring(i)->canonical(t[i]));
                Value res(std::move(out));
                if (spec_.kind == RingKind::FiberProduct && !fiber_ok(res))
                    throw std::invalid_argument("fiber product congruence violated: " + res.to_string() +
                                                " mod " + spec_.conductor.get_str());
                return res;
            }
        }
        throw std::logic_error("unreachable");
    }

    RingPtr factor_ring(size_t i) const {
        require(spec_.kind == RingKind::Product || spec_.kind == RingKind::FiberProduct, "factor_ring: not a product");
        return sub(spec_.factors.at(i));
    }

  private:
    explicit Ring(RingSpec spec) : spec_(std::move(spec)) {
        if (spec_.kind == RingKind::TruncatedDVR) {
            mpz_pow_ui(dvr_modulus_.get_mpz_t(), spec_.p.get_mpz_t(), spec_.n);
        }
        if (spec_.kind == RingKind::Product || spec_.kind == RingKind::FiberProduct) {
            for (const auto& f : spec_.factors) subs_.push_back(Ring::make(f));
        }
    }

    static void validate(const RingSpec& s) {
        switch (s.kind) {
            case RingKind::Integers:
            case RingKind::Rationals: return;
            case RingKind::PrimeField:
                if (s.p < 2 || !detail::is_probable_prime(s.p))
                    throw std::invalid_argument("PrimeField: p must be prime, got " + s.p.get_str());
                return;
            case RingKind::IntegersModN:
                if (s.N < 2) throw std::invalid_argument("IntegersModN: N >= 2 required, got " + s.N.get_str());
                return;
            case RingKind::TruncatedDVR:
                if (s.p < 2 || !detail::is_probable_prime(s.p))
                    throw std::invalid_argument("TruncatedDVR: p must be prime, got " + s.p.get_str());
                if (s.n < 1) throw std::invalid_argument("TruncatedDVR: n >= 1 required");
                return;
            case RingKind::Product:
                if (s.factors.empty()) throw std::invalid_argument("Product: empty factor list");
                for (const auto& f : s.factors) validate(f);
                return;
            case RingKind::FiberProduct: {
                if (s.factors.size() != 2) throw std::invalid_argument("FiberProduct: needs two factors");
                for (const auto& f : s.factors) validate(f);
                if (s.conductor < 2) throw std::invalid_argument("FiberProduct: conductor >= 2 required");
                for (const auto& f : s.factors) {
                    // Each side must admit the canonical projection onto Z/m.
                    if (f.kind == RingKind::Integers) continue;
                    if (f.kind == RingKind::IntegersModN && f.N % s.conductor == 0) continue;
                    if (f.kind == RingKind::PrimeField && f.p % s.conductor == 0) continue;
                    if (f.kind == RingKind::TruncatedDVR) {
                        Int m;
                        mpz_pow_ui(m.get_mpz_t(), f.p.get_mpz_t(), f.n);
                        if (m % s.conductor == 0) continue;
                    }
                    throw std::invalid_argument("FiberProduct: factor " + f.to_string() +
                                                " has no reduction mod " + s.conductor.get_str());
                }
                return;
            }
        }
    }

    template <class T>
    static void require_holds(const Value& v) {
        if (!std::holds_alternative<T>(v.v)) throw std::invalid_argument("value shape mismatch for ring");
    }
    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    }

    Int mod_reduce(const Int& z) const {
        Int r;
        mpz_mod(r.get_mpz_t(), z.get_mpz_t(), modulus().get_mpz_t());
        return r;
    }

    bool fiber_ok(const Value& v) const {
        const auto& t = v.tuple();
        Int a = leaf_int(t[0]), b = leaf_int(t[1]);
        return (a - b) % spec_.conductor == 0;
    }
    static Int leaf_int(const Value& v) {
        if (!std::holds_alternative<Int>(v.v))
            throw std::invalid_argument("fiber product factors must have integer-residue elements");
        return v.z();
    }

    RingPtr sub(const RingSpec& s) const {
        for (const auto& r : subs_)
            if (r->spec_ == s) return r;
        return Ring::make(s);
    }

    template <class FZ, class FQ>
    Value zip(const Value& a, const Value& b, FZ fz, FQ fq, Value (Ring::*rec)(const Value&, const Value&) const) const {
        switch (spec_.kind) {
            case RingKind::Integers: return Value(fz(a.z(), b.z()));
            case RingKind::Rationals: return Value(fq(a.q(), b.q()));
            case RingKind::PrimeField:
            case RingKind::IntegersModN:
            case RingKind::TruncatedDVR: return Value(mod_reduce(fz(a.z(), b.z())));
            case RingKind::Product:
            case RingKind::FiberProduct: {
                const auto& ta = a.tuple();
                const auto& tb = b.tuple();
                std::vector<Value> out;
                for (size_t i = 0; i < ta.size(); ++i) out.push_back(((*factor_ring(i)).*rec)(ta[i], tb[i]));
                return Value(std::move(out));
            }
        }
        throw std::logic_error("unreachable");
    }

    RingSpec spec_;
    Int dvr_modulus_ = 0;
    std::vector<RingPtr> subs_;
};

inline RingElem Ring::reduce(const RingElem& x, const RingPtr& target) {
    const RingSpec& from = x.ring()->spec();
    const RingSpec& to = target->spec();
    if (from == to) return RingElem(target, x.value());
    if (from.kind == RingKind::Integers) return target->from_int(x.value().z());
    auto leaf_mod = [&](const RingSpec& s) -> Int {
        if (s.kind == RingKind::IntegersModN) return s.N;
        if (s.kind == RingKind::PrimeField) return s.p;
        if (s.kind == RingKind::TruncatedDVR) {
            Int m;
            mpz_pow_ui(m.get_mpz_t(), s.p.get_mpz_t(), s.n);
            return m;
        }
        return Int(0);
    };
    Int mf = leaf_mod(from), mt = leaf_mod(to);
    if (mf != 0 && mt != 0) {
        if (mf % mt != 0)
            throw std::invalid_argument("reduce: no canonical map " + from.to_string() + " -> " + to.to_string());
        return target->from_int(x.value().z());
    }
    if ((from.kind == RingKind::Product || from.kind == RingKind::FiberProduct) && mt != 0) {
        // Project through the first component (fiber components agree mod the
        // conductor, and any leaf that reduces works when the map exists).
        for (size_t i = 0; i < from.factors.size(); ++i) {
            Int mi = leaf_mod(from.factors[i]);
            if (mi != 0 && mi % mt == 0) return target->from_int(x.value().tuple()[i].z());
        }
        throw std::invalid_argument("reduce: no component of " + from.to_string() + " maps onto " + to.to_string());
    }
    throw std::invalid_argument("reduce: unsupported reduction " + from.to_string() + " -> " + to.to_string());
}

// ---- RingElem operator bodies ------------------------------------------

namespace detail {
inline void check_same_ring(const RingElem& a, const RingElem& b) {
    if (a.ring().get() == b.ring().get()) return;
    if (!a.ring() || !b.ring() || a.ring()->spec() != b.ring()->spec())
        throw std::invalid_argument("ring mismatch in element arithmetic");
}
}  // namespace detail

inline RingElem RingElem::operator+(const RingElem& o) const {
    detail::check_same_ring(*this, o);
    return RingElem(ring_, ring_->add(val_, o.val_));
}
inline RingElem RingElem::operator-(const RingElem& o) const {
    detail::check_same_ring(*this, o);
    return RingElem(ring_, ring_->sub(val_, o.val_));
}
inline RingElem RingElem::operator*(const RingElem& o) const {
    detail::check_same_ring(*this, o);
    return RingElem(ring_, ring_->mul(val_, o.val_));
}
inline RingElem RingElem::operator-() const { return RingElem(ring_, ring_->neg(val_)); }
inline bool RingElem::operator==(const RingElem& o) const {
    detail::check_same_ring(*this, o);
    return ring_->eq(val_, o.val_);
}
inline bool RingElem::is_zero() const { return ring_->is_zero(val_); }
inline bool RingElem::is_unit() const { return ring_->is_unit(val_); }
inline std::optional<RingElem> RingElem::try_invert() const {
    auto v = ring_->invert(val_);
    if (!v) return std::nullopt;
    return RingElem(ring_, std::move(*v));
}

/// x^-1 iff x is a unit; absence is a value, not an error.
inline std::optional<RingElem> try_invert(const RingElem& x) { return x.try_invert(); }

// ---- LocalIdeal ----------------------------------------------------------

/// Finitely generated ideal with a canonical (gcd-based, per-factor)
/// generator.  Supported over Z, Z/N, Z/p^n and finite products of those;
/// equality and containment are decided on canonical generators.
class LocalIdeal {
  public:
    static LocalIdeal from_gens(const RingPtr& ring, const std::vector<RingElem>& gens) {
        std::vector<Value> vals;
        vals.reserve(gens.size());
        for (const auto& g : gens) {
            if (g.ring()->spec() != ring->spec()) throw std::invalid_argument("ideal generator from wrong ring");
            vals.push_back(g.value());
        }
        return LocalIdeal(ring, canonical_gen(*ring, vals));
    }
    static LocalIdeal zero(const RingPtr& ring) { return from_gens(ring, {}); }
    static LocalIdeal unit(const RingPtr& ring) { return from_gens(ring, {ring->one()}); }

    const RingPtr& ring() const { return ring_; }
    RingElem generator() const { return RingElem(ring_, gen_); }
    bool is_zero() const { return ring_->is_zero(gen_); }
    bool is_unit() const {
        // Unit ideal iff the canonical generator is a unit (gcd 1 per factor).
        return ring_->is_unit(gen_);
    }

    bool contains(const RingElem& x) const {
        if (x.ring()->spec() != ring_->spec()) throw std::invalid_argument("membership test from wrong ring");
        return value_divides(*ring_, gen_, x.value());
    }
    /// other subseteq this
    bool contains(const LocalIdeal& other) const { return value_divides(*ring_, gen_, other.gen_); }
    bool operator==(const LocalIdeal& o) const { return ring_->spec() == o.ring_->spec() && gen_ == o.gen_; }
    bool operator!=(const LocalIdeal& o) const { return !(*this == o); }

    std::string to_string() const { return "(" + gen_.to_string() + ")"; }

  private:
    LocalIdeal(RingPtr ring, Value gen) : ring_(std::move(ring)), gen_(std::move(gen)) {}

    static Value canonical_gen(const Ring& R, const std::vector<Value>& gens) {
        switch (R.kind()) {
            case RingKind::Integers: {
                Int g = 0;
                for (const auto& v : gens) { Int t; mpz_gcd(t.get_mpz_t(), g.get_mpz_t(), v.z().get_mpz_t()); g = t; }
                return Value(g);
            }
            case RingKind::PrimeField:
            case RingKind::IntegersModN:
            case RingKind::TruncatedDVR: {
                // gcd with the modulus: canonical divisor generator in [0, N).
                Int g = R.modulus();
                for (const auto& v : gens) { Int t; mpz_gcd(t.get_mpz_t(), g.get_mpz_t(), v.z().get_mpz_t()); g = t; }
                if (g == R.modulus()) g = 0;
                return Value(g);
            }
            case RingKind::Product: {
                std::vector<Value> out;
                for (size_t i = 0; i < R.spec().factors.size(); ++i) {
                    std::vector<Value> comp;
                    for (const auto& v : gens) comp.push_back(v.tuple()[i]);
                    out.push_back(canonical_gen(*R.factor_ring(i), comp));
                }
                return Value(std::move(out));
            }
            default:
                throw std::invalid_argument("ideal_in_ring: unsupported ring kind " + R.spec().to_string());
        }
    }

    // does (g) contain x, i.e. g | x (componentwise over products)?
    static bool value_divides(const Ring& R, const Value& g, const Value& x) {
        switch (R.kind()) {
            case RingKind::Integers: {
                if (g.z() == 0) return x.z() == 0;
                return x.z() % g.z() == 0;
            }
            case RingKind::PrimeField:
            case RingKind::IntegersModN:
            case RingKind::TruncatedDVR: {
                const Int& N = R.modulus();
                Int ge = g.z() == 0 ? N : gcd(g.z(), N);
                Int xe = x.z() == 0 ? N : gcd(x.z(), N);
                return xe % ge == 0;
            }
            case RingKind::Product: {
                for (size_t i = 0; i < g.tuple().size(); ++i)
                    if (!value_divides(*R.factor_ring(i), g.tuple()[i], x.tuple()[i])) return false;
                return true;
            }
            default: throw std::invalid_argument("ideal arithmetic unsupported on " + R.spec().to_string());
        }
    }
    static Int gcd(const Int& a, const Int& b) {
        Int g;
        mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        return g;
    }

    RingPtr ring_;
    Value gen_;
};

inline RingPtr make_ring(RingSpec spec) { return Ring::make(std::move(spec)); }

inline LocalIdeal ideal_in_ring(const RingPtr& ring, const std::vector<RingElem>& gens) {
    return LocalIdeal::from_gens(ring, gens);
}

/// Explicit ideal closure as an element set; finite rings only.  This is the
/// enumeration fallback for rings without canonical generators (fiber
/// products).
inline std::vector<Value> enumerate_ideal(const RingPtr& ring, const std::vector<RingElem>& gens) {
    if (!ring->finite()) throw std::invalid_argument("enumerate_ideal: ring not finite");
    std::vector<Value> all = ring->enumerate();
    std::set<Value> members{ring->zero().value()};
    // T-multiples of the generators, then additive closure.
    std::vector<Value> multiples;
    for (const auto& g : gens)
        for (const auto& r : all) multiples.push_back(ring->mul(g.value(), r));
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Value> snapshot(members.begin(), members.end());
        for (const auto& s : snapshot)
            for (const auto& m : multiples)
                if (members.insert(ring->add(s, m)).second) grew = true;
    }
    return std::vector<Value>(members.begin(), members.end());
}

}  // namespace ribet::rings

namespace ribet {
template <>
struct RingOps<rings::RingElem> {
    static rings::RingElem zero(const rings::RingElem& like) { return like.ring()->zero(); }
    static rings::RingElem one(const rings::RingElem& like) { return like.ring()->one(); }
    static rings::RingElem from_int(const rings::RingElem& like, const Int& z) { return like.ring()->from_int(z); }
    static bool is_zero(const rings::RingElem& x) { return x.is_zero(); }
    static std::optional<rings::RingElem> try_invert(const rings::RingElem& x) { return x.try_invert(); }
    static std::string str(const rings::RingElem& x) { return x.to_string(); }
};
}  // namespace ribet
