#pragma once

#include "noke/enumerate.hpp"
#include "noke/linalg.hpp"

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <shared_mutex>
#include <variant>

namespace noke {

enum class CoefficientRing { integers, mod2 };

inline const char* ring_name(CoefficientRing r) { return r == CoefficientRing::integers ? "Z" : "Z2"; }

namespace detail {

inline Integer normalize_coefficient(const Integer& c, CoefficientRing r)
{
    if (r == CoefficientRing::integers) return c;
    Integer v = c % 2;
    if (v < 0) v += 2;
    return v;
}

inline void check_forest_params(const CanonicalForest& f, const Parameters& p)
{
    if (f.n() != p.n)
        throw ContractViolation("forest on n=" + std::to_string(f.n()) + " used with parameters " + p.to_string());
    if (!f.squares().empty() && member_count(f.squares().front()) != p.k - 1)
        throw ContractViolation("forest squares do not have k-1 members for parameters " + p.to_string());
}

}  // namespace detail

/// Finite linear combination of canonical forests (not necessarily basic).
class FormalSum {
public:
    using Terms = std::map<CanonicalForest, Integer>;

    FormalSum(Parameters p, CoefficientRing ring = CoefficientRing::integers) : params_(p), ring_(ring) {}

    void add(const CanonicalForest& f, const Integer& coeff)
    {
        const Integer c = detail::normalize_coefficient(coeff, ring_);
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(f, c);
        if (!inserted) {
            it->second = detail::normalize_coefficient(it->second + c, ring_);
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    void add(const FormalSum& other, const Integer& factor = 1)
    {
        for (const auto& [f, c] : other.terms_) add(f, c * factor);
    }

    [[nodiscard]] const Parameters& params() const { return params_; }
    [[nodiscard]] CoefficientRing ring() const { return ring_; }
    [[nodiscard]] const Terms& terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }

    /// Common degree of all terms; nullopt when empty or mixed.
    [[nodiscard]] std::optional<int> degree() const
    {
        std::optional<int> deg;
        for (const auto& [f, c] : terms_) {
            const int fd = f.degree(params_);
            if (deg && *deg != fd) return std::nullopt;
            deg = fd;
        }
        return deg;
    }

    friend bool operator==(const FormalSum& a, const FormalSum& b)
    {
        return a.params_ == b.params_ && a.ring_ == b.ring_ && a.terms_ == b.terms_;
    }

private:
    Parameters params_;
    CoefficientRing ring_;
    Terms terms_;
};

/// A cohomology class: a combination of basic canonical forests.
class CohomologyClass {
public:
    using Terms = std::map<CanonicalForest, Integer>;

    CohomologyClass(Parameters p, CoefficientRing ring = CoefficientRing::integers) : params_(p), ring_(ring) {}

    static CohomologyClass unit(const Parameters& p, CoefficientRing ring = CoefficientRing::integers)
    {
        CohomologyClass c(p, ring);
        c.add_basic(CanonicalForest::unit(p.n), 1);
        return c;
    }

    /// Single basic forest with coefficient `coeff`.
    static CohomologyClass basic(const CanonicalForest& f, const Parameters& p,
                                 CoefficientRing ring = CoefficientRing::integers, const Integer& coeff = 1)
    {
        CohomologyClass c(p, ring);
        c.add_basic(f, coeff);
        return c;
    }

    /// Adds coeff * f; f must be basic.
    void add_basic(const CanonicalForest& f, const Integer& coeff)
    {
        detail::check_forest_params(f, params_);
        if (!is_basic(f)) throw ContractViolation("cohomology class terms must be basic forests");
        const Integer c = detail::normalize_coefficient(coeff, ring_);
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(f, c);
        if (!inserted) {
            it->second = detail::normalize_coefficient(it->second + c, ring_);
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    [[nodiscard]] const Parameters& params() const { return params_; }
    [[nodiscard]] CoefficientRing ring() const { return ring_; }
    [[nodiscard]] const Terms& terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }

    [[nodiscard]] Integer coefficient(const CanonicalForest& f) const
    {
        auto it = terms_.find(f);
        return it == terms_.end() ? Integer(0) : it->second;
    }

    [[nodiscard]] std::optional<int> degree() const
    {
        std::optional<int> deg;
        for (const auto& [f, c] : terms_) {
            const int fd = f.degree(params_);
            if (deg && *deg != fd) return std::nullopt;
            deg = fd;
        }
        return deg;
    }

    [[nodiscard]] FormalSum as_formal_sum() const
    {
        FormalSum s(params_, ring_);
        for (const auto& [f, c] : terms_) s.add(f, c);
        return s;
    }

    CohomologyClass& operator+=(const CohomologyClass& o)
    {
        require_compatible(o);
        for (const auto& [f, c] : o.terms_) add_trusted(f, c);
        return *this;
    }

    CohomologyClass& operator-=(const CohomologyClass& o)
    {
        require_compatible(o);
        for (const auto& [f, c] : o.terms_) add_trusted(f, -c);
        return *this;
    }

    friend CohomologyClass operator+(CohomologyClass a, const CohomologyClass& b) { return a += b; }
    friend CohomologyClass operator-(CohomologyClass a, const CohomologyClass& b) { return a -= b; }

    friend CohomologyClass operator*(const Integer& s, const CohomologyClass& a)
    {
        CohomologyClass out(a.params_, a.ring_);
        for (const auto& [f, c] : a.terms_) out.add_trusted(f, s * c);
        return out;
    }

    CohomologyClass operator-() const { return Integer(-1) * *this; }

    friend bool operator==(const CohomologyClass& a, const CohomologyClass& b)
    {
        return a.params_ == b.params_ && a.ring_ == b.ring_ && a.terms_ == b.terms_;
    }

    void require_compatible(const CohomologyClass& o) const
    {
        if (!(params_ == o.params_))
            throw ContractViolation("parameter mismatch: " + params_.to_string() + " vs " + o.params_.to_string());
        if (ring_ != o.ring_) throw ContractViolation("coefficient ring mismatch");
    }

    /// Adds a term already known to be basic.
    void add_trusted(const CanonicalForest& f, const Integer& coeff)
    {
        const Integer c = detail::normalize_coefficient(coeff, ring_);
        if (c.is_zero()) return;
        auto [it, inserted] = terms_.try_emplace(f, c);
        if (!inserted) {
            it->second = detail::normalize_coefficient(it->second + c, ring_);
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

private:
    Parameters params_;
    CoefficientRing ring_;
    Terms terms_;
};

// ---------------------------------------------------------------------------
// Superposition and relation (R)

enum class ZeroReason { square_overlap, unoriented_cycle, bare_square };

inline const char* zero_reason_name(ZeroReason r)
{
    switch (r) {
    case ZeroReason::square_overlap: return "SquareOverlap";
    case ZeroReason::unoriented_cycle: return "UnorientedCycle";
    case ZeroReason::bare_square: return "BareSquare";
    }
    return "?";
}

struct SuperpositionOutcome {
    std::optional<ZeroReason> zero;
    OrientedForest graph;  ///< meaningful only when `zero` is empty

    [[nodiscard]] bool is_zero() const { return zero.has_value(); }
};

namespace detail {

/// Graph with round endpoints named by member; finalized into an
/// OrientedForest with rounds listed by increasing member.
struct MemberGraph {
    struct End {
        bool square;
        std::size_t value;  ///< square index, or round member
    };
    std::vector<std::vector<int>> squares;
    std::vector<std::pair<End, End>> edges;  ///< in orientation order after squares

    static End sq(std::size_t i) { return {true, i}; }
    static End rd(int member) { return {false, static_cast<std::size_t>(member)}; }

    [[nodiscard]] OrientedForest finalize(int n) const
    {
        OrientedForest f;
        f.squares = squares;
        MemberSet used = 0;
        for (const auto& s : squares) used |= set_of(s);
        std::vector<std::size_t> index(static_cast<std::size_t>(n) + 1, 0);
        for (int v = 1; v <= n; ++v) {
            if (used & member_bit(v)) continue;
            index[static_cast<std::size_t>(v)] = f.rounds.size();
            f.rounds.push_back(v);
        }
        auto ref = [&](const End& e) {
            return e.square ? VertexRef::square(e.value) : VertexRef::round(index[e.value]);
        };
        for (const auto& [a, b] : edges) f.edges.push_back({ref(a), ref(b)});
        for (std::size_t i = 0; i < f.squares.size(); ++i) f.orientation.push_back(OrientationItem::square(i));
        for (std::size_t t = 0; t < f.edges.size(); ++t) f.orientation.push_back(OrientationItem::edge(t));
        return f;
    }

    /// Canonical edge list of a canonical forest.
    static MemberGraph of(const CanonicalForest& f)
    {
        MemberGraph g;
        for (auto s : f.squares()) g.squares.push_back(members_of(s));
        std::vector<std::vector<std::size_t>> children(f.square_count());
        for (std::size_t c = 0; c < f.square_count(); ++c)
            if (f.parents()[c] >= 0) children[static_cast<std::size_t>(f.parents()[c])].push_back(c);
        for (std::size_t c = 0; c < f.square_count(); ++c) {
            for (int r : members_of(f.attached()[c])) g.edges.emplace_back(sq(c), rd(r));
            for (std::size_t ch : children[c]) g.edges.emplace_back(sq(c), sq(ch));
        }
        return g;
    }
};

}  // namespace detail

/// Superposes two oriented forests on the same parameters. The orientation
/// set of the result is that of `t1` followed by that of `t2`.
inline SuperpositionOutcome superpose(const OrientedForest& t1, const OrientedForest& t2, const Parameters& p)
{
    require_valid(t1, p, "superpose");
    require_valid(t2, p, "superpose");

    std::vector<int> sq1(static_cast<std::size_t>(p.n) + 1, -1), sq2(static_cast<std::size_t>(p.n) + 1, -1);
    for (std::size_t i = 0; i < t1.squares.size(); ++i)
        for (int v : t1.squares[i]) sq1[static_cast<std::size_t>(v)] = static_cast<int>(i);
    for (std::size_t i = 0; i < t2.squares.size(); ++i)
        for (int v : t2.squares[i]) sq2[static_cast<std::size_t>(v)] = static_cast<int>(i);
    for (int v = 1; v <= p.n; ++v)
        if (sq1[static_cast<std::size_t>(v)] >= 0 && sq2[static_cast<std::size_t>(v)] >= 0)
            return {ZeroReason::square_overlap, {}};

    SuperpositionOutcome out;
    OrientedForest& g = out.graph;
    g.squares = t1.squares;
    g.squares.insert(g.squares.end(), t2.squares.begin(), t2.squares.end());
    std::vector<int> round_index(static_cast<std::size_t>(p.n) + 1, -1);
    for (int v = 1; v <= p.n; ++v) {
        if (sq1[static_cast<std::size_t>(v)] < 0 && sq2[static_cast<std::size_t>(v)] < 0) {
            round_index[static_cast<std::size_t>(v)] = static_cast<int>(g.rounds.size());
            g.rounds.push_back(v);
        }
    }
    const std::size_t offset = t1.squares.size();
    auto map_ref = [&](const OrientedForest& t, const VertexRef& v, bool first) {
        if (v.is_square()) return VertexRef::square(first ? v.index : offset + v.index);
        const int member = t.rounds[v.index];
        const int other_sq = first ? sq2[static_cast<std::size_t>(member)] : sq1[static_cast<std::size_t>(member)];
        if (other_sq >= 0)
            return VertexRef::square(first ? offset + static_cast<std::size_t>(other_sq) : static_cast<std::size_t>(other_sq));
        return VertexRef::round(static_cast<std::size_t>(round_index[static_cast<std::size_t>(member)]));
    };
    for (const Edge& e : t1.edges) g.edges.push_back({map_ref(t1, e.tail, true), map_ref(t1, e.head, true)});
    for (const Edge& e : t2.edges) g.edges.push_back({map_ref(t2, e.tail, false), map_ref(t2, e.head, false)});
    for (const auto& item : t1.orientation) g.orientation.push_back(item);
    for (const auto& item : t2.orientation) {
        g.orientation.push_back(item.kind == OrientationItem::Kind::square
                                    ? OrientationItem::square(offset + item.index)
                                    : OrientationItem::edge(t1.edges.size() + item.index));
    }

    detail::DisjointSets ds(g.squares.size() + g.rounds.size());
    for (const Edge& e : g.edges) {
        if (!ds.join(detail::vertex_slot(g, e.tail), detail::vertex_slot(g, e.head))) {
            out.zero = ZeroReason::unoriented_cycle;
            return out;
        }
    }
    const auto inc = detail::incidence(g);
    for (int cnt : inc.square_round_neighbors)
        if (cnt == 0) {
            out.zero = ZeroReason::bare_square;
            return out;
        }
    return out;
}

inline SuperpositionOutcome superpose(const CanonicalForest& t1, const CanonicalForest& t2, const Parameters& p)
{
    detail::check_forest_params(t1, p);
    detail::check_forest_params(t2, p);
    return superpose(t1.to_oriented(), t2.to_oriented(), p);
}

/// Picks which valency-2 round to rewrite next, given the candidate round
/// members in increasing order. Default: the smallest.
using RewriteChooser = std::function<std::size_t(const std::vector<int>& members)>;

inline std::size_t rewrite_smallest_first(const std::vector<int>&) { return 0; }
inline std::size_t rewrite_largest_first(const std::vector<int>& m) { return m.size() - 1; }

namespace detail {

inline void expand_into(const OrientedForest& g, const Integer& coeff, const Parameters& p, FormalSum& out,
                        const RewriteChooser& choose)
{
    const auto inc = incidence(g);
    for (int cnt : inc.square_round_neighbors)
        if (cnt == 0) return;  // a bare square never regains a round

    std::vector<int> candidates;
    std::vector<std::size_t> candidate_rounds;
    for (std::size_t j = 0; j < g.rounds.size(); ++j) {
        if (inc.round_valency[j] > 2)
            throw ContractViolation("expand_relation_R: round " + std::to_string(g.rounds[j]) + " has valency " +
                                    std::to_string(inc.round_valency[j]));
        if (inc.round_valency[j] == 2) {
            candidates.push_back(g.rounds[j]);
            candidate_rounds.push_back(j);
        }
    }
    if (candidates.empty()) {
        const auto sc = canonical_sign_form(g, p);
        out.add(sc.forest, coeff * sc.sign);
        return;
    }
    const std::size_t pick = choose(candidates);
    const VertexRef o = VertexRef::round(candidate_rounds.at(pick));

    std::vector<std::size_t> slot_of_edge(g.edges.size());
    for (std::size_t s = 0; s < g.orientation.size(); ++s)
        if (g.orientation[s].kind == OrientationItem::Kind::edge) slot_of_edge[g.orientation[s].index] = s;
    std::vector<std::size_t> at_o;
    for (std::size_t t = 0; t < g.edges.size(); ++t)
        if (g.edges[t].tail == o || g.edges[t].head == o) at_o.push_back(t);
    std::size_t first = at_o[0], second = at_o[1];
    if (slot_of_edge[first] > slot_of_edge[second]) std::swap(first, second);

    Integer c = coeff;
    const int reverse_sign = sign_power(p.d);
    auto other_end = [&](std::size_t t) {
        const Edge& e = g.edges[t];
        if (e.tail == o) return e.head;
        c *= reverse_sign;  // reorient so the edge leaves o
        return e.tail;
    };
    const VertexRef a = other_end(first);
    const VertexRef b = other_end(second);

    // (o->A, o->B) = (o->A, A->B) + (B->A, o->B), slots preserved
    OrientedForest g1 = g;
    g1.edges[first] = {o, a};
    g1.edges[second] = {a, b};
    OrientedForest g2 = g;
    g2.edges[first] = {b, a};
    g2.edges[second] = {o, b};
    expand_into(g1, c, p, out, choose);
    expand_into(g2, c, p, out, choose);
}

}  // namespace detail

/// Rewrites every valency-2 round vertex with relation (R) until only
/// k-forests remain; summands with a bare square are dropped.
inline FormalSum expand_relation_R(const OrientedForest& g, const Parameters& p,
                                   const RewriteChooser& choose = rewrite_smallest_first)
{
    ValidationReport report;
    detail::validate_common(g, p, report);
    if (!report.valid() && !(report.violations.size() == 1 && report.has(rules::square_needs_round)))
        throw ContractViolation("expand_relation_R: malformed graph (" + report.violations.front().rule + ")");
    FormalSum out(p);
    detail::expand_into(g, Integer(1), p, out, choose);
    return out;
}

// ---------------------------------------------------------------------------
// Relation space

struct RelationMatrix {
    std::vector<CanonicalForest> columns;
    std::vector<SparseRow<Integer>> rows;
};

namespace detail {

/// Emits every three-term and dual Jacobi relation instance of one degree as
/// sparse rows over `columns` (which must be enumerate_all of that degree).
template <typename Emit>
void emit_relations(const Parameters& p, const std::vector<CanonicalForest>& columns,
                    const std::unordered_map<CanonicalForest, std::size_t, CanonicalForestHash>& index, Emit&& emit)
{
    auto column_of = [&](const OrientedForest& f, Integer coeff, std::vector<std::pair<std::size_t, Integer>>& acc) {
        const auto sc = canonical_sign_form(f, p);
        auto it = index.find(sc.forest);
        if (it == index.end()) throw InconsistentSystem("relation term outside the degree's forest list");
        acc.emplace_back(it->second, coeff * sc.sign);
    };

    std::set<SparseRow<Integer>> seen;
    auto push = [&](std::vector<std::pair<std::size_t, Integer>> entries) {
        auto row = row_from_unsorted<Integer>(std::move(entries));
        if (row.empty()) return;
        if (row.front().second < 0) scale_in_place(row, Integer(-1));
        if (seen.insert(row).second) emit(std::move(row));
    };

    for (const CanonicalForest& t : columns) {
        const MemberGraph base = MemberGraph::of(t);

        // edge slots per square
        std::vector<std::vector<std::size_t>> round_slots(t.square_count());
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> square_links(t.square_count());
        for (std::size_t s = 0; s < base.edges.size(); ++s) {
            const auto& [x, y] = base.edges[s];
            if (x.square && y.square) {
                square_links[x.value].emplace_back(s, y.value);
                square_links[y.value].emplace_back(s, x.value);
            } else {
                round_slots[x.value].push_back(s);
            }
        }

        for (std::size_t i = 0; i < t.square_count(); ++i) {
            // Dual Jacobi: the square holds I + j_l, its rounds are J \ j_l.
            for (int j0 : members_of(t.squares()[i])) {
                std::vector<int> kept = members_of(t.squares()[i] & ~member_bit(j0));
                const std::vector<int> js = members_of(t.attached()[i] | member_bit(j0));
                std::vector<std::pair<std::size_t, Integer>> entries;
                for (std::size_t l = 0; l < js.size(); ++l) {
                    MemberGraph g = base;
                    g.squares[i] = kept;
                    g.squares[i].push_back(js[l]);
                    std::size_t slot = 0;
                    for (std::size_t q = 0; q < js.size(); ++q) {
                        if (q == l) continue;
                        g.edges[round_slots[i][slot++]] = {MemberGraph::sq(i), MemberGraph::rd(js[q])};
                    }
                    const int ell = static_cast<int>(l) + 1;
                    column_of(g.finalize(p.n), Integer(sign_power(ell * (p.d - 1))), entries);
                }
                push(std::move(entries));
            }

            // Three-term: edges A-B at the earlier slot, B-C at the later one.
            const auto& links = square_links[i];
            for (std::size_t u = 0; u < links.size(); ++u) {
                for (std::size_t v = u + 1; v < links.size(); ++v) {
                    auto [s1, na] = links[u];
                    auto [s2, nc] = links[v];
                    if (s1 > s2) {
                        std::swap(s1, s2);
                        std::swap(na, nc);
                    }
                    const auto A = MemberGraph::sq(na), B = MemberGraph::sq(i), C = MemberGraph::sq(nc);
                    std::vector<std::pair<std::size_t, Integer>> entries;
                    const std::pair<MemberGraph::End, MemberGraph::End> ab{A, B}, bc{B, C}, ca{C, A};
                    for (const auto& [first, second] : {std::pair{ab, bc}, std::pair{bc, ca}, std::pair{ca, ab}}) {
                        MemberGraph g = base;
                        g.edges[s1] = first;
                        g.edges[s2] = second;
                        column_of(g.finalize(p.n), Integer(1), entries);
                    }
                    push(std::move(entries));
                }
            }
        }
    }
}

inline std::unordered_map<CanonicalForest, std::size_t, CanonicalForestHash> index_of(
    const std::vector<CanonicalForest>& columns)
{
    std::unordered_map<CanonicalForest, std::size_t, CanonicalForestHash> index;
    index.reserve(columns.size());
    for (std::size_t i = 0; i < columns.size(); ++i) index.emplace(columns[i], i);
    return index;
}

}  // namespace detail

/// Every three-term and dual Jacobi relation of one degree, as integer rows
/// against enumerate_all(p, degree). Duplicate instances are emitted once.
inline RelationMatrix relation_space(const Parameters& p, int deg)
{
    RelationMatrix m;
    m.columns = enumerate_all(p, deg);
    const auto index = detail::index_of(m.columns);
    detail::emit_relations(p, m.columns, index, [&](SparseRow<Integer> row) { m.rows.push_back(std::move(row)); });
    return m;
}

// ---------------------------------------------------------------------------
// Straightening

/// Per-degree straightening data: every canonical forest of the degree and
/// its expression in the basic basis.
class StraighteningTable {
public:
    static std::shared_ptr<const StraighteningTable> build(const Parameters& p, int deg)
    {
        auto table = std::shared_ptr<StraighteningTable>(new StraighteningTable());
        table->params_ = p;
        table->degree_ = deg;
        table->forests_ = enumerate_all(p, deg);
        table->index_ = detail::index_of(table->forests_);
        table->basis_ = enumerate_basic(p, deg);

        const std::size_t cols = table->forests_.size();
        std::vector<bool> eliminate(cols, true);
        table->basis_index_.assign(cols, -1);
        for (std::size_t b = 0; b < table->basis_.size(); ++b) {
            auto it = table->index_.find(table->basis_[b]);
            if (it == table->index_.end()) throw InconsistentSystem("basic forest missing from the forest list");
            eliminate[it->second] = false;
            table->basis_index_[it->second] = static_cast<long>(b);
        }
        const auto reduction = reduce_onto_basis<Integer>(cols, eliminate, [&](auto&& sink) {
            detail::emit_relations(p, table->forests_, table->index_, sink);
        });
        table->relation_rank_ = reduction.rank;
        table->expression_.resize(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            if (!eliminate[c]) {
                table->expression_[c] = {{static_cast<std::size_t>(table->basis_index_[c]), Integer(1)}};
                continue;
            }
            SparseRow<Integer> e;
            for (const auto& [col, v] : *reduction.expression[c])
                e.emplace_back(static_cast<std::size_t>(table->basis_index_[col]), v);
            std::sort(e.begin(), e.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
            table->expression_[c] = std::move(e);
        }
        return table;
    }

    [[nodiscard]] const Parameters& params() const { return params_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] const std::vector<CanonicalForest>& forests() const { return forests_; }
    [[nodiscard]] const DegreeBasis& basis() const { return basis_; }
    [[nodiscard]] std::size_t relation_rank() const { return relation_rank_; }

    [[nodiscard]] std::optional<std::size_t> column(const CanonicalForest& f) const
    {
        auto it = index_.find(f);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Expression of column `c` over basis indices.
    [[nodiscard]] const SparseRow<Integer>& expression(std::size_t c) const { return expression_[c]; }

private:
    StraighteningTable() = default;

    Parameters params_;
    int degree_ = 0;
    std::vector<CanonicalForest> forests_;
    std::unordered_map<CanonicalForest, std::size_t, CanonicalForestHash> index_;
    DegreeBasis basis_;
    std::vector<long> basis_index_;
    std::vector<SparseRow<Integer>> expression_;
    std::size_t relation_rank_ = 0;
};

/// Shared cache of straightening tables and of products of basic forests.
/// Readers run concurrently; insertion takes the exclusive lock.
class RingCache {
public:
    std::shared_ptr<const StraighteningTable> table(const Parameters& p, int deg)
    {
        const Key key{p, deg};
        {
            std::shared_lock lock(mutex_);
            auto it = tables_.find(key);
            if (it != tables_.end()) return it->second;
        }
        auto built = StraighteningTable::build(p, deg);
        std::unique_lock lock(mutex_);
        return tables_.try_emplace(key, std::move(built)).first->second;
    }

    std::optional<CohomologyClass> product(const CanonicalForest& a, const CanonicalForest& b, const Parameters& p)
    {
        std::shared_lock lock(mutex_);
        auto it = products_.find(ProductKey{p, a, b});
        if (it == products_.end()) return std::nullopt;
        return it->second;
    }

    void store_product(const CanonicalForest& a, const CanonicalForest& b, const Parameters& p,
                       const CohomologyClass& value)
    {
        std::unique_lock lock(mutex_);
        products_.try_emplace(ProductKey{p, a, b}, value);
    }

    void clear()
    {
        std::unique_lock lock(mutex_);
        tables_.clear();
        products_.clear();
    }

private:
    using Key = std::pair<Parameters, int>;
    struct ProductKey {
        Parameters p;
        CanonicalForest a, b;
        friend bool operator<(const ProductKey& x, const ProductKey& y)
        {
            if (!(x.p == y.p)) return x.p < y.p;
            if (!(x.a == y.a)) return x.a < y.a;
            return x.b < y.b;
        }
    };

    std::shared_mutex mutex_;
    std::map<Key, std::shared_ptr<const StraighteningTable>> tables_;
    std::map<ProductKey, CohomologyClass> products_;
};

inline RingCache& ring_cache()
{
    static RingCache cache;
    return cache;
}

/// Expresses a homogeneous formal sum in the basic basis.
inline CohomologyClass straighten(const FormalSum& s, const Parameters& p)
{
    if (!(s.params() == p)) throw ContractViolation("straighten: parameter mismatch");
    CohomologyClass out(p, s.ring());
    if (s.is_zero()) return out;
    const auto deg = s.degree();
    if (!deg) throw ContractViolation("straighten: terms of mixed degree");
    const auto table = ring_cache().table(p, *deg);
    std::map<std::size_t, Integer> acc;
    for (const auto& [f, c] : s.terms()) {
        const auto col = table->column(f);
        if (!col) throw InconsistentSystem("straighten: forest not among the degree's canonical forests");
        for (const auto& [b, v] : table->expression(*col)) acc[b] += c * v;
    }
    for (const auto& [b, v] : acc) out.add_trusted(table->basis()[b], v);
    return out;
}

/// Straightening over Z/2 by direct elimination mod 2 (no integer lift).
inline CohomologyClass straighten_mod2_direct(const FormalSum& s, const Parameters& p)
{
    CohomologyClass out(p, CoefficientRing::mod2);
    if (s.is_zero()) return out;
    const auto deg = s.degree();
    if (!deg) throw ContractViolation("straighten: terms of mixed degree");
    const auto forests = enumerate_all(p, *deg);
    const auto index = detail::index_of(forests);
    const auto basis = enumerate_basic(p, *deg);
    std::vector<bool> eliminate(forests.size(), true);
    for (const auto& b : basis) eliminate[index.at(b)] = false;
    const auto red = reduce_onto_basis<Mod2>(forests.size(), eliminate, [&](auto&& sink) {
        detail::emit_relations(p, forests, index, [&](SparseRow<Integer> row) { sink(reduce_row_mod2(row)); });
    });
    std::map<std::size_t, int> acc;
    for (const auto& [f, c] : s.terms()) {
        const std::size_t col = index.at(f);
        const int bit = static_cast<int>(c % 2 != 0);
        if (!bit) continue;
        if (!eliminate[col]) {
            acc[col] ^= 1;
            continue;
        }
        for (const auto& [b, v] : *red.expression[col]) acc[b] ^= v.bit;
    }
    for (const auto& [col, bit] : acc)
        if (bit) out.add_trusted(forests[col], 1);
    return out;
}

inline CohomologyClass straighten(const OrientedForest& f, const Parameters& p,
                                  CoefficientRing ring = CoefficientRing::integers)
{
    const auto sc = canonical_sign_form(f, p);
    FormalSum s(p, ring);
    s.add(sc.forest, sc.sign);
    return straighten(s, p);
}

inline CohomologyClass reduce_mod2(const CohomologyClass& c)
{
    CohomologyClass out(c.params(), CoefficientRing::mod2);
    for (const auto& [f, v] : c.terms()) out.add_trusted(f, v);
    return out;
}

/// Product of two canonical forests over Z, straightened.
inline CohomologyClass multiply_forests(const CanonicalForest& a, const CanonicalForest& b, const Parameters& p,
                                        const RewriteChooser& choose = rewrite_smallest_first)
{
    const auto sup = superpose(a, b, p);
    if (sup.is_zero()) return CohomologyClass(p);
    return straighten(expand_relation_R(sup.graph, p, choose), p);
}

inline CohomologyClass multiply(const CohomologyClass& c1, const CohomologyClass& c2, const Parameters& p)
{
    c1.require_compatible(c2);
    if (!(c1.params() == p)) throw ContractViolation("multiply: parameter mismatch");
    CohomologyClass out(p, c1.ring());
    auto& cache = ring_cache();
    for (const auto& [a, ca] : c1.terms()) {
        for (const auto& [b, cb] : c2.terms()) {
            auto prod = cache.product(a, b, p);
            if (!prod) {
                prod = multiply_forests(a, b, p);
                cache.store_product(a, b, p, *prod);
            }
            for (const auto& [f, v] : prod->terms()) out.add_trusted(f, ca * cb * v);
        }
    }
    return out;
}

}  // namespace noke
