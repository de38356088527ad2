#pragma once

#include "noke/ring.hpp"

#include <set>

namespace noke {

// ---------------------------------------------------------------------------
// Betti numbers and degree bounds

using BettiTable = std::map<int, std::size_t>;

/// Rank per degree, read off the basic basis. Degrees with rank 0 are omitted.
inline BettiTable betti(const Parameters& p)
{
    p.validate_enumerable();
    return basic_counts_by_degree(p);
}

/// Rank per degree computed as (#all forests) - rank(relations), over Z via
/// Smith form or directly mod 2. Independent of the basic-forest criterion.
inline BettiTable betti_from_relations(const Parameters& p, CoefficientRing ring = CoefficientRing::integers)
{
    p.validate_enumerable();
    const auto c = DerivedConstants::of(p);
    BettiTable out;
    const int top = c.top_degree(p);
    for (int deg = 0; deg <= top; ++deg) {
        const auto m = relation_space(p, deg);
        if (m.columns.empty()) continue;
        const std::size_t rank = ring == CoefficientRing::integers ? smith_summary(m.columns.size(), m.rows).rank
                                                                   : rank_mod2(m.columns.size(), m.rows);
        if (m.columns.size() > rank) out[deg] = m.columns.size() - rank;
    }
    return out;
}

/// Connectivity plus one: the bottom positive degree d(k-1)-1.
inline int conn_plus_one(const Parameters& p)
{
    p.validate();
    return DerivedConstants::of(p).a;
}

/// Homotopy dimension ma + (d-1)(m+b-1).
inline int hdim(const Parameters& p)
{
    p.validate();
    return DerivedConstants::of(p).top_degree(p);
}

// ---------------------------------------------------------------------------
// Generators

/// The elementary forest with one square and one attached round, all other
/// members isolated, with coefficient +1 in canonical orientation. When the
/// round is smaller than some square member the forest is not basic and the
/// class is straightened.
inline CohomologyClass elementary_generator(const std::vector<int>& square, int round, const Parameters& p,
                                            CoefficientRing ring = CoefficientRing::integers)
{
    p.validate_enumerable();
    if (static_cast<int>(square.size()) != p.k - 1)
        throw ContractViolation("elementary_generator: square needs k-1=" + std::to_string(p.k - 1) + " members");
    const MemberSet sq = set_of(square);
    if (member_count(sq) != p.k - 1) throw ContractViolation("elementary_generator: repeated square member");
    if (sq & ~full_set(p.n)) throw ContractViolation("elementary_generator: square member outside {1..n}");
    if (round < 1 || round > p.n) throw ContractViolation("elementary_generator: round outside {1..n}");
    if (sq & member_bit(round)) throw ContractViolation("elementary_generator: round lies in the square");
    const std::vector<MemberSet> squares{sq};
    const std::vector<MemberSet> attached{member_bit(round)};
    const auto f = CanonicalForest::from_structure(p.n, squares, attached, {});
    if (is_basic(f)) return CohomologyClass::basic(f, p, ring);
    FormalSum s(p, ring);
    s.add(f, 1);
    return straighten(s, p);
}

/// x_i: square {i-k+1, ..., i-1}, round i.
inline CohomologyClass x_generator(int i, const Parameters& p, CoefficientRing ring = CoefficientRing::integers)
{
    std::vector<int> sq;
    for (int v = i - p.k + 1; v < i; ++v) sq.push_back(v);
    return elementary_generator(sq, i, p, ring);
}

/// x~_i: square {1, i-k+2, ..., i-1}, round i.
inline CohomologyClass x_tilde_generator(int i, const Parameters& p, CoefficientRing ring = CoefficientRing::integers)
{
    std::vector<int> sq{1};
    for (int v = i - p.k + 2; v < i; ++v) sq.push_back(v);
    return elementary_generator(sq, i, p, ring);
}

// ---------------------------------------------------------------------------
// s-fold tensor powers

/// Element of the s-fold tensor power of the cohomology ring, stored as a
/// map from s-tuples of basic forests to coefficients.
class TensorElement {
public:
    using Key = std::vector<CanonicalForest>;

    TensorElement() = default;
    TensorElement(Parameters p, int s, CoefficientRing ring = CoefficientRing::integers)
        : params_(p), s_(s), ring_(ring)
    {
        if (s < 1) throw ContractViolation("tensor power needs s >= 1");
    }

    static TensorElement unit(const Parameters& p, int s, CoefficientRing ring = CoefficientRing::integers)
    {
        TensorElement t(p, s, ring);
        t.add(Key(static_cast<std::size_t>(s), CanonicalForest::unit(p.n)), 1);
        return t;
    }

    /// 1 (x) ... (x) c (x) ... (x) 1 with c at `position` (0-based).
    static TensorElement embed(const CohomologyClass& c, int position, int s)
    {
        if (position < 0 || position >= s) throw ContractViolation("tensor position out of range");
        TensorElement t(c.params(), s, c.ring());
        Key key(static_cast<std::size_t>(s), CanonicalForest::unit(c.params().n));
        for (const auto& [f, v] : c.terms()) {
            key[static_cast<std::size_t>(position)] = f;
            t.add(key, v);
        }
        return t;
    }

    void add(const Key& key, const Integer& coeff)
    {
        const Integer c = detail::normalize_coefficient(coeff, ring_);
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(key, c);
        if (!inserted) {
            it->second = detail::normalize_coefficient(it->second + c, ring_);
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    [[nodiscard]] const Parameters& params() const { return params_; }
    [[nodiscard]] int s() const { return s_; }
    [[nodiscard]] CoefficientRing ring() const { return ring_; }
    [[nodiscard]] const std::map<Key, Integer>& terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }

    /// Total degree when homogeneous.
    [[nodiscard]] std::optional<int> degree() const
    {
        std::optional<int> deg;
        for (const auto& [key, c] : terms_) {
            int total = 0;
            for (const auto& f : key) total += f.degree(params_);
            if (deg && *deg != total) return std::nullopt;
            deg = total;
        }
        return deg;
    }

    TensorElement& operator+=(const TensorElement& o)
    {
        require_compatible(o);
        for (const auto& [key, c] : o.terms_) add(key, c);
        return *this;
    }

    TensorElement& operator-=(const TensorElement& o)
    {
        require_compatible(o);
        for (const auto& [key, c] : o.terms_) add(key, -c);
        return *this;
    }

    friend TensorElement operator+(TensorElement a, const TensorElement& b) { return a += b; }
    friend TensorElement operator-(TensorElement a, const TensorElement& b) { return a -= b; }

    friend bool operator==(const TensorElement& a, const TensorElement& b)
    {
        return a.params_ == b.params_ && a.s_ == b.s_ && a.ring_ == b.ring_ && a.terms_ == b.terms_;
    }

    void require_compatible(const TensorElement& o) const
    {
        if (!(params_ == o.params_) || s_ != o.s_ || ring_ != o.ring_)
            throw ContractViolation("tensor elements over different parameters, powers or rings");
    }

private:
    Parameters params_;
    int s_ = 1;
    CoefficientRing ring_ = CoefficientRing::integers;
    std::map<Key, Integer> terms_;
};

/// Componentwise product with the Koszul sign prod_{i>j} (-1)^{|u_i||v_j|}.
inline TensorElement multiply(const TensorElement& a, const TensorElement& b)
{
    a.require_compatible(b);
    const Parameters& p = a.params();
    const auto s = static_cast<std::size_t>(a.s());
    TensorElement out(p, a.s(), a.ring());
    for (const auto& [u, cu] : a.terms()) {
        std::vector<int> du(s);
        for (std::size_t i = 0; i < s; ++i) du[i] = u[i].degree(p);
        for (const auto& [v, cv] : b.terms()) {
            int parity = 0;
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t j = 0; j < i; ++j) parity += du[i] * v[j].degree(p);
            std::vector<CohomologyClass> parts;
            parts.reserve(s);
            bool zero = false;
            for (std::size_t i = 0; i < s && !zero; ++i) {
                parts.push_back(multiply(CohomologyClass::basic(u[i], p), CohomologyClass::basic(v[i], p), p));
                zero = parts.back().is_zero();
            }
            if (zero) continue;
            // expand the tensor product of the componentwise sums
            TensorElement::Key key(s, CanonicalForest::unit(p.n));
            std::function<void(std::size_t, Integer)> rec = [&](std::size_t i, Integer c) {
                if (i == s) {
                    out.add(key, c);
                    return;
                }
                for (const auto& [f, v2] : parts[i].terms()) {
                    key[i] = f;
                    rec(i + 1, c * v2);
                }
            };
            rec(0, cu * cv * sign_power(parity));
        }
    }
    return out;
}

/// The zero-divisor (c at position j) - (c at position 0).
inline TensorElement zero_divisor(const CohomologyClass& c, int j, int s)
{
    if (j < 1 || j >= s) throw ContractViolation("zero_divisor: position must be in 1..s-1");
    return TensorElement::embed(c, j, s) - TensorElement::embed(c, 0, s);
}

// ---------------------------------------------------------------------------
// cup-length and zero-divisor cup-length

enum class SearchMode { witness, exhaustive };

inline constexpr std::size_t kDefaultExhaustiveCap = 500;

struct WitnessCertificate {
    std::vector<TensorElement> factors;  ///< s = 1 for ordinary cup products
    TensorElement product;
    int product_degree = 0;
    bool verified = false;
};

struct LengthReport {
    int value = 0;
    SearchMode mode = SearchMode::witness;
    WitnessCertificate witness;
    std::string upper_bound_argument;
    /// Exhaustive mode: number of nonzero products found per length.
    std::vector<std::size_t> nonzero_per_length;
};

namespace detail {

inline WitnessCertificate certify(std::vector<TensorElement> factors, const Parameters& p, int s,
                                  CoefficientRing ring)
{
    TensorElement prod = TensorElement::unit(p, s, ring);
    for (const auto& f : factors) prod = multiply(prod, f);
    WitnessCertificate cert{std::move(factors), prod, prod.degree().value_or(-1), !prod.is_zero()};
    return cert;
}

/// Leveled search for the longest nonzero product of generators. Products
/// are graded-commutative up to sign, so only nondecreasing index sequences
/// are explored. Returns the number of nonzero products per length and one
/// longest nonzero product (as generator indices).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> longest_nonzero_product(
    const std::vector<TensorElement>& gens, const std::vector<int>& gen_degree, int max_total_degree)
{
    struct Node {
        std::vector<std::size_t> indices;
        TensorElement value;
        int degree;
    };
    std::vector<Node> level;
    for (std::size_t g = 0; g < gens.size(); ++g)
        if (!gens[g].is_zero()) level.push_back({{g}, gens[g], gen_degree[g]});
    std::vector<std::size_t> counts;
    std::vector<std::size_t> best;
    while (!level.empty()) {
        counts.push_back(level.size());
        best = level.front().indices;
        std::vector<Node> next;
        for (const Node& node : level) {
            for (std::size_t g = node.indices.back(); g < gens.size(); ++g) {
                if (node.degree + gen_degree[g] > max_total_degree) continue;
                TensorElement v = multiply(node.value, gens[g]);
                if (v.is_zero()) continue;
                auto idx = node.indices;
                idx.push_back(g);
                next.push_back({std::move(idx), std::move(v), node.degree + gen_degree[g]});
            }
        }
        level = std::move(next);
    }
    return {counts, best};
}

inline std::vector<CanonicalForest> positive_basis(const Parameters& p, std::size_t cap)
{
    std::vector<CanonicalForest> out;
    for_each_basic(p, std::numeric_limits<int>::max(), [&](const CanonicalForest& f) {
        if (f.square_count() > 0) out.push_back(f);
    });
    if (out.size() > cap)
        throw CapExceeded("exhaustive search refused: " + std::to_string(out.size()) +
                          " positive-degree basis elements exceed the cap of " + std::to_string(cap));
    std::sort(out.begin(), out.end());
    return out;
}

inline int max_betti_degree(const Parameters& p)
{
    const auto b = betti(p);
    return b.rbegin()->first;
}

}  // namespace detail

/// Cup-length over the given ring. Witness mode multiplies x_k x_{2k} ... x_{mk}
/// and the companion product x_{k+1} ... x_{(m-1)k+1} x~_{mk}; the upper bound
/// is structural. Exhaustive mode searches products of positive-degree basis
/// elements.
inline LengthReport cup_length(const Parameters& p, SearchMode mode = SearchMode::witness,
                               CoefficientRing ring = CoefficientRing::integers,
                               std::size_t cap = kDefaultExhaustiveCap)
{
    p.validate_enumerable();
    const auto c = DerivedConstants::of(p);
    LengthReport r;
    r.mode = mode;
    if (mode == SearchMode::witness) {
        std::vector<TensorElement> factors;
        for (int i = 1; i <= c.m; ++i) factors.push_back(TensorElement::embed(x_generator(i * p.k, p, ring), 0, 1));
        r.witness = detail::certify(std::move(factors), p, 1, ring);
        if (!r.witness.verified) throw InconsistentSystem("cup-length witness product vanished");
        if (c.m > 1) {
            std::vector<TensorElement> other;
            for (int i = 1; i < c.m; ++i)
                other.push_back(TensorElement::embed(x_generator(i * p.k + 1, p, ring), 0, 1));
            other.push_back(TensorElement::embed(x_tilde_generator(c.m * p.k, p, ring), 0, 1));
            if (detail::certify(std::move(other), p, 1, ring).product.is_zero())
                throw InconsistentSystem("companion cup-length product vanished");
        }
        if ((c.m + 1) * p.k <= p.n) throw InconsistentSystem("structural bound failed: m+1 squares would fit");
        r.value = c.m;
        r.upper_bound_argument = "a product of " + std::to_string(c.m + 1) + " positive-degree classes needs " +
                                 std::to_string(c.m + 1) + " squares, i.e. at least " +
                                 std::to_string((c.m + 1) * p.k) + " > n=" + std::to_string(p.n) + " members";
        return r;
    }

    const auto basis = detail::positive_basis(p, cap);
    std::vector<TensorElement> gens;
    std::vector<int> degs;
    for (const auto& f : basis) {
        gens.push_back(TensorElement::embed(CohomologyClass::basic(f, p, ring), 0, 1));
        degs.push_back(f.degree(p));
    }
    const auto [counts, best] = detail::longest_nonzero_product(gens, degs, detail::max_betti_degree(p));
    std::vector<TensorElement> factors;
    for (std::size_t g : best) factors.push_back(gens[g]);
    r.witness = detail::certify(std::move(factors), p, 1, ring);
    r.value = static_cast<int>(counts.size());
    r.nonzero_per_length = counts;
    r.upper_bound_argument = "every product of " + std::to_string(r.value + 1) +
                             " positive-degree basis elements vanishes (searched)";
    return r;
}

/// The zero-divisors z_{i,j} (i = 1..m, j = 1..s) whose product certifies
/// zcl_s >= s*m. Position j of the tensor power is j-1 here.
inline std::vector<TensorElement> zcl_witness_factors(const Parameters& p, int s,
                                                      CoefficientRing ring = CoefficientRing::integers)
{
    const auto c = DerivedConstants::of(p);
    std::vector<TensorElement> out;
    for (int i = 1; i <= c.m; ++i) {
        CohomologyClass first = i < c.m    ? x_generator(i * p.k + 1, p, ring)
                                : c.m == 1 ? x_generator(p.k + 1, p, ring)
                                           : x_tilde_generator(c.m * p.k, p, ring);
        out.push_back(zero_divisor(first, 1, s));
        const auto xik = x_generator(i * p.k, p, ring);
        for (int j = 2; j <= s; ++j) out.push_back(zero_divisor(xik, j - 1, s));
    }
    return out;
}

/// s-th zero-divisor cup-length.
inline LengthReport zcl(const Parameters& p, int s, SearchMode mode = SearchMode::witness,
                        CoefficientRing ring = CoefficientRing::integers, std::size_t cap = kDefaultExhaustiveCap)
{
    p.validate_enumerable();
    if (s < 2) throw InvalidParameters("zcl requires s >= 2 (got s=" + std::to_string(s) + ")");
    const auto c = DerivedConstants::of(p);
    LengthReport r;
    r.mode = mode;
    if (mode == SearchMode::witness) {
        r.witness = detail::certify(zcl_witness_factors(p, s, ring), p, s, ring);
        if (!r.witness.verified) throw InconsistentSystem("zcl witness product vanished");
        r.value = s * c.m;
        r.upper_bound_argument = "in a product of " + std::to_string(s * c.m + 1) +
                                 " positive-degree basic tensors some coordinate carries at least " +
                                 std::to_string(c.m + 1) + " factors, and cup-length is " + std::to_string(c.m);
        return r;
    }

    // Zero-divisors (b at j) - (b at 0) over the positive basis generate the
    // kernel of multiplication as an ideal.
    const auto basis = detail::positive_basis(p, cap);
    std::vector<TensorElement> gens;
    std::vector<int> degs;
    for (const auto& f : basis)
        for (int j = 1; j < s; ++j) {
            gens.push_back(zero_divisor(CohomologyClass::basic(f, p, ring), j, s));
            degs.push_back(f.degree(p));
        }
    const auto [counts, best] = detail::longest_nonzero_product(gens, degs, s * detail::max_betti_degree(p));
    std::vector<TensorElement> factors;
    for (std::size_t g : best) factors.push_back(gens[g]);
    r.witness = detail::certify(std::move(factors), p, s, ring);
    r.value = static_cast<int>(counts.size());
    r.nonzero_per_length = counts;
    r.upper_bound_argument = "every product of " + std::to_string(r.value + 1) +
                             " basic zero-divisor generators vanishes (searched)";
    return r;
}

// ---------------------------------------------------------------------------
// TC_s bounds and predicates

struct TcBoundsReport {
    int s = 1;
    int lower = 0;
    int upper_plain = 0;
    int upper_improved = 0;
    bool determined = false;
    std::string source;
    std::optional<int> value;  ///< set when determined
};

/// Upper-bound correction: x/a - 1 when a divides x and x >= a, else floor(x/a).
inline int improved_floor(int x, int a)
{
    if (a <= 0 || x < 0) throw ContractViolation("improved_floor: needs a > 0 and x >= 0");
    if (x >= a && x % a == 0) return x / a - 1;
    return x / a;
}

inline TcBoundsReport tc_bounds(const Parameters& p, int s)
{
    p.validate();
    if (s < 1) throw InvalidParameters("tc requires s >= 1 (got s=" + std::to_string(s) + ")");
    const auto c = DerivedConstants::of(p);
    const int x = (c.m + c.b - 1) * (p.d - 1);
    if (x <= 0) throw ContractViolation("tc_bounds: (m+b-1)(d-1) must be positive");
    TcBoundsReport r;
    r.s = s;
    r.lower = s * c.m;
    r.upper_plain = s * (c.m + x / c.a);
    r.upper_improved = s * (c.m + improved_floor(x, c.a));
    r.determined = (c.m + c.b) * (p.d - 1) <= p.d * p.k - 2;
    if (r.determined != (r.lower == r.upper_improved))
        throw InconsistentSystem("tc_bounds: determination criterion disagrees with the bounds");
    r.source = r.upper_improved < r.upper_plain ? "obstruction-improved" : "dimension-connectivity";
    if (r.determined) r.value = r.lower;
    return r;
}

struct DeterminationPredicates {
    bool omnibus = false;
    std::optional<bool> miller_formality;  ///< only defined for d = 2
};

inline DeterminationPredicates determination_predicates(const Parameters& p)
{
    p.validate();
    const auto c = DerivedConstants::of(p);
    DeterminationPredicates out;
    out.omnibus = (p.n - (p.k - 1) * c.m) * (p.d - 1) <= p.d * p.k - 2;
    if (p.d == 2) out.miller_formality = p.n + c.m * (p.k - 2) < 6 * p.k - 9;
    return out;
}

}  // namespace noke
