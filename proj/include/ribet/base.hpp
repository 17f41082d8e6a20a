#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ribet {

/// Thrown when a configurable resource cap (S-pair count, group closure
/// budget, ansatz search bound) is exceeded.  Distinct from logic errors:
/// callers may retry with a larger budget.
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Customization point for coefficient-like types used by the generic
/// matrix/polynomial templates.  Specialized per type (big integers,
/// rationals, prime-field scalars, ring elements, polynomials).
template <class T>
struct RingOps;

/// FNV-1a over bytes; used for the deterministic inputs-hash carried by
/// report verdicts.
inline std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

/// Deterministic RNG wrapper.  Avoids std::uniform_int_distribution, whose
/// output is implementation-defined; reports must be byte-identical for a
/// fixed seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t u64() { return eng_(); }

    /// Uniform-ish value in [0, n).  n must be positive.
    long below(long n) { return static_cast<long>(u64() % static_cast<std::uint64_t>(n)); }

    /// Value in [lo, hi] inclusive.
    long range(long lo, long hi) { return lo + below(hi - lo + 1); }

    bool coin() { return (u64() & 1) != 0; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace ribet
