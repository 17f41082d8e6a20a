#pragma once

#include <gmpxx.h>

#include <optional>

#include "ribet/base.hpp"

namespace ribet {

using Int = mpz_class;
using Rat = mpq_class;

template <>
struct RingOps<Int> {
    static Int zero(const Int&) { return Int(0); }
    static Int one(const Int&) { return Int(1); }
    static Int from_int(const Int&, const Int& z) { return z; }
    static bool is_zero(const Int& x) { return x == 0; }
    static std::optional<Int> try_invert(const Int& x) {
        if (x == 1 || x == -1) return x;
        return std::nullopt;
    }
    static std::string str(const Int& x) { return x.get_str(); }
};

template <>
struct RingOps<Rat> {
    static Rat zero(const Rat&) { return Rat(0); }
    static Rat one(const Rat&) { return Rat(1); }
    static Rat from_int(const Rat&, const Int& z) { return Rat(z); }
    static bool is_zero(const Rat& x) { return x == 0; }
    static std::optional<Rat> try_invert(const Rat& x) {
        if (x == 0) return std::nullopt;
        return Rat(1 / x);
    }
    static std::string str(const Rat& x) { return x.get_str(); }
};

}  // namespace ribet
