#pragma once

// Basic vocabulary shared by every noke module: parameters, derived
// constants, exact integers and the error hierarchy.

#include <boost/multiprecision/cpp_int.hpp>

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace noke {

using Integer = boost::multiprecision::cpp_int;

/// Set of members of {1..n} encoded as bit (member - 1).
using MemberSet = std::uint32_t;

inline constexpr int kMaxSupportedN = 31;
inline constexpr int kDefaultNCap = 20;

/// A caller handed an operation input that violates its precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InvalidParameters : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The straightening system turned out inconsistent with the claimed basis.
/// Never recoverable: it means a relation or sign convention is wrong.
class InconsistentSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Parameters {
    int d = 2;
    int k = 3;
    int n = 4;

    friend bool operator==(const Parameters&, const Parameters&) = default;
    friend auto operator<=>(const Parameters&, const Parameters&) = default;

    /// Throws InvalidParameters naming the first violated standing hypothesis.
    void validate() const
    {
        if (d < 2)
            throw InvalidParameters("requires d >= 2 (got d=" + std::to_string(d) + ")");
        if (k < 3)
            throw InvalidParameters("requires k >= 3 (got k=" + std::to_string(k) + ")");
        if (n <= k)
            throw InvalidParameters("requires n > k (got n=" + std::to_string(n) +
                                    ", k=" + std::to_string(k) + ")");
    }

    /// Validation for operations that materialize forests on {1..n}.
    void validate_enumerable(int cap = kDefaultNCap) const
    {
        validate();
        const int limit = cap < kMaxSupportedN ? cap : kMaxSupportedN;
        if (n > limit)
            throw InvalidParameters("requires n <= " + std::to_string(limit) +
                                    " for forest computations (got n=" + std::to_string(n) + ")");
    }

    [[nodiscard]] std::string to_string() const
    {
        return "(d=" + std::to_string(d) + ",k=" + std::to_string(k) + ",n=" + std::to_string(n) + ")";
    }
};

struct DerivedConstants {
    int m = 0;              ///< floor(n/k)
    int b = 0;              ///< n - m k
    int a = 0;              ///< bottom degree d(k-1)-1
    int square_degree = 0;  ///< d(k-2)
    int edge_degree = 0;    ///< d-1

    static DerivedConstants of(const Parameters& p)
    {
        DerivedConstants c;
        c.m = p.n / p.k;
        c.b = p.n - c.m * p.k;
        c.a = p.d * (p.k - 1) - 1;
        c.square_degree = p.d * (p.k - 2);
        c.edge_degree = p.d - 1;
        return c;
    }

    /// Top nonzero degree m a + (d-1)(m+b-1).
    [[nodiscard]] int top_degree(const Parameters& p) const { return m * a + (p.d - 1) * (m + b - 1); }
};

inline MemberSet member_bit(int member) { return MemberSet{1} << (member - 1); }

inline int lowest_member(MemberSet s) { return std::countr_zero(s) + 1; }

inline int highest_member(MemberSet s) { return 32 - std::countl_zero(s); }

inline int member_count(MemberSet s) { return std::popcount(s); }

inline MemberSet full_set(int n) { return n >= 32 ? ~MemberSet{0} : (MemberSet{1} << n) - 1; }

inline std::vector<int> members_of(MemberSet s)
{
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(std::popcount(s)));
    while (s) {
        out.push_back(lowest_member(s));
        s &= s - 1;
    }
    return out;
}

inline MemberSet set_of(const std::vector<int>& members)
{
    MemberSet s = 0;
    for (int v : members) s |= member_bit(v);
    return s;
}

inline int sign_power(int exponent) { return (exponent % 2 == 0) ? 1 : -1; }

/// Binomial coefficient with overflow check.
inline std::uint64_t binomial(int n, int r)
{
    if (r < 0 || r > n) return 0;
    if (r > n - r) r = n - r;
    std::uint64_t acc = 1;
    for (int i = 1; i <= r; ++i) {
        std::uint64_t next;
        if (__builtin_mul_overflow(acc, static_cast<std::uint64_t>(n - r + i), &next))
            throw std::overflow_error("binomial overflow");
        acc = next / static_cast<std::uint64_t>(i);
    }
    return acc;
}

}  // namespace noke
