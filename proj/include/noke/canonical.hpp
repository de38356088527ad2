#pragma once

// Canonical orientation of k-forests.
//
// Squares are ordered component by component (components sorted by their
// smallest member). Each component is a tree of squares rooted at the square
// holding its smallest member, or at the square that smallest member is
// attached to as a round. Squares follow depth-first preorder, children in
// increasing order of their smallest member. Edges are grouped by the square
// they leave, groups in square order; inside a group the round edges come
// first ordered by round member, then the edges to child squares. Round
// edges point at the round, square-square edges point away from the root.
// The orientation set lists all squares, then all edges.
//
// On a semilinear tree whose smallest member sits at an end block this is
// exactly the orientation that makes the component basic.

#include "noke/forest.hpp"

#include <functional>
#include <span>

namespace noke {

/// A forest in canonical orientation, stored by structure only.
class CanonicalForest {
public:
    CanonicalForest() = default;

    /// Builds the canonical forest on {1..n} from unordered structure. The
    /// inputs are trusted to form a valid k-forest.
    static CanonicalForest from_structure(int n, std::span<const MemberSet> squares,
                                          std::span<const MemberSet> attached,
                                          std::span<const std::pair<std::size_t, std::size_t>> square_edges);

    /// The forest with every member in an isolated round vertex (the unit).
    static CanonicalForest unit(int n) { return CanonicalForest(n, {}, {}, {}); }

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] std::size_t square_count() const { return squares_.size(); }
    [[nodiscard]] const std::vector<MemberSet>& squares() const { return squares_; }
    [[nodiscard]] const std::vector<MemberSet>& attached() const { return attached_; }
    /// Parent square index in canonical order, or -1 for a component root.
    [[nodiscard]] const std::vector<int>& parents() const { return parent_; }

    [[nodiscard]] std::size_t edge_count() const
    {
        std::size_t e = 0;
        for (std::size_t i = 0; i < squares_.size(); ++i)
            e += static_cast<std::size_t>(member_count(attached_[i])) + (parent_[i] >= 0 ? 1 : 0);
        return e;
    }

    [[nodiscard]] int degree(const Parameters& p) const
    {
        const auto c = DerivedConstants::of(p);
        return static_cast<int>(squares_.size()) * c.square_degree + static_cast<int>(edge_count()) * c.edge_degree;
    }

    [[nodiscard]] MemberSet square_members() const
    {
        MemberSet s = 0;
        for (auto q : squares_) s |= q;
        return s;
    }

    [[nodiscard]] MemberSet attached_members() const
    {
        MemberSet s = 0;
        for (auto r : attached_) s |= r;
        return s;
    }

    /// Expands to the explicit oriented representation used by JSON and the
    /// product machinery. Rounds are listed by increasing member.
    [[nodiscard]] OrientedForest to_oriented() const;

    [[nodiscard]] const std::vector<std::uint32_t>& key() const { return key_; }

    friend bool operator==(const CanonicalForest& a, const CanonicalForest& b) { return a.key_ == b.key_; }
    friend bool operator<(const CanonicalForest& a, const CanonicalForest& b) { return a.key_ < b.key_; }

private:
    CanonicalForest(int n, std::vector<MemberSet> squares, std::vector<MemberSet> attached, std::vector<int> parent)
        : n_(n), squares_(std::move(squares)), attached_(std::move(attached)), parent_(std::move(parent))
    {
        key_.reserve(2 + 3 * squares_.size());
        key_.push_back(static_cast<std::uint32_t>(n_));
        key_.push_back(static_cast<std::uint32_t>(squares_.size()));
        for (auto s : squares_) key_.push_back(s);
        for (auto r : attached_) key_.push_back(r);
        for (int q : parent_) key_.push_back(static_cast<std::uint32_t>(q + 1));
    }

    friend struct CanonicalBuilder;

    int n_ = 0;
    std::vector<MemberSet> squares_;
    std::vector<MemberSet> attached_;
    std::vector<int> parent_;
    std::vector<std::uint32_t> key_;
};

struct CanonicalForestHash {
    std::size_t operator()(const CanonicalForest& f) const noexcept
    {
        std::size_t h = 0x9e3779b97f4a7c15ULL;
        for (auto w : f.key()) h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

struct SignedCanonicalForest {
    CanonicalForest forest;
    int sign = 1;
};

/// Koszul sign of listing items in a new order. `degrees[i]` is the degree of
/// the i-th item in the current order and `target[i]` its position in the new
/// order; every inverted pair contributes (-1)^(deg*deg).
inline int koszul_sign(std::span<const int> degrees, std::span<const std::size_t> target)
{
    int sign = 1;
    for (std::size_t i = 0; i < target.size(); ++i)
        for (std::size_t j = i + 1; j < target.size(); ++j)
            if (target[i] > target[j] && (degrees[i] * degrees[j]) % 2 != 0) sign = -sign;
    return sign;
}

/// Parity of the permutation sorting `values` ascending (+1 even, -1 odd).
inline int sorting_sign(std::span<const int> values)
{
    int sign = 1;
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (values[i] > values[j]) sign = -sign;
    return sign;
}

struct CanonicalBuilder {
    /// Canonical layout of a forest given by unordered structure.
    struct Layout {
        std::vector<std::size_t> position;         ///< input square -> canonical index
        std::vector<int> parent;                   ///< canonical index -> canonical parent
        std::vector<std::size_t> edge_offset;      ///< canonical index -> first edge slot
        std::vector<std::vector<std::size_t>> children;  ///< canonical index -> children (ascending)
    };

    static Layout layout(std::span<const MemberSet> squares, std::span<const MemberSet> attached,
                         std::span<const std::pair<std::size_t, std::size_t>> square_edges)
    {
        const std::size_t count = squares.size();
        std::vector<std::vector<std::size_t>> adj(count);
        for (auto [u, v] : square_edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        for (auto& list : adj)
            std::sort(list.begin(), list.end(), [&](std::size_t x, std::size_t y) {
                return lowest_member(squares[x]) < lowest_member(squares[y]);
            });

        detail::DisjointSets ds(count);
        for (auto [u, v] : square_edges) ds.join(u, v);
        std::vector<MemberSet> comp_members(count, 0);
        for (std::size_t i = 0; i < count; ++i) comp_members[ds.find(i)] |= squares[i] | attached[i];

        struct Root {
            int min_member;
            std::size_t square;
        };
        std::vector<Root> roots;
        for (std::size_t i = 0; i < count; ++i) {
            const MemberSet comp = comp_members[ds.find(i)];
            const MemberSet low = comp & (~comp + 1);
            if ((squares[i] | attached[i]) & low) roots.push_back({lowest_member(comp), i});
        }
        std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.min_member < b.min_member; });

        Layout out;
        out.position.assign(count, 0);
        out.parent.assign(count, -1);
        std::vector<std::size_t> order;
        order.reserve(count);
        std::vector<int> input_parent(count, -1);
        std::vector<bool> visited(count, false);
        for (const Root& r : roots) {
            // iterative preorder
            std::vector<std::size_t> stack{r.square};
            visited[r.square] = true;
            while (!stack.empty()) {
                const std::size_t u = stack.back();
                stack.pop_back();
                out.position[u] = order.size();
                order.push_back(u);
                for (auto it = adj[u].rbegin(); it != adj[u].rend(); ++it) {
                    if (visited[*it]) continue;
                    visited[*it] = true;
                    input_parent[*it] = static_cast<int>(u);
                    stack.push_back(*it);
                }
            }
        }
        out.children.assign(count, {});
        for (std::size_t c = 0; c < count; ++c) {
            const std::size_t u = order[c];
            if (input_parent[u] >= 0) {
                const std::size_t pc = out.position[static_cast<std::size_t>(input_parent[u])];
                out.parent[c] = static_cast<int>(pc);
                out.children[pc].push_back(c);
            }
        }
        for (auto& ch : out.children) std::sort(ch.begin(), ch.end());
        out.edge_offset.assign(count, 0);
        std::size_t slot = 0;
        for (std::size_t c = 0; c < count; ++c) {
            out.edge_offset[c] = slot;
            slot += static_cast<std::size_t>(member_count(attached[order[c]])) + out.children[c].size();
        }
        return out;
    }

    static CanonicalForest build(int n, std::span<const MemberSet> squares, std::span<const MemberSet> attached,
                                 const Layout& lay)
    {
        std::vector<MemberSet> sq(squares.size()), at(squares.size());
        for (std::size_t i = 0; i < squares.size(); ++i) {
            sq[lay.position[i]] = squares[i];
            at[lay.position[i]] = attached[i];
        }
        return CanonicalForest(n, std::move(sq), std::move(at), lay.parent);
    }
};

inline CanonicalForest CanonicalForest::from_structure(int n, std::span<const MemberSet> squares,
                                                       std::span<const MemberSet> attached,
                                                       std::span<const std::pair<std::size_t, std::size_t>> square_edges)
{
    const auto lay = CanonicalBuilder::layout(squares, attached, square_edges);
    return CanonicalBuilder::build(n, squares, attached, lay);
}

inline OrientedForest CanonicalForest::to_oriented() const
{
    OrientedForest f;
    const MemberSet in_squares = square_members();
    std::vector<int> round_index(static_cast<std::size_t>(n_) + 1, -1);
    for (int v = 1; v <= n_; ++v) {
        if (in_squares & member_bit(v)) continue;
        round_index[static_cast<std::size_t>(v)] = static_cast<int>(f.rounds.size());
        f.rounds.push_back(v);
    }
    for (auto s : squares_) f.squares.push_back(members_of(s));
    std::vector<std::vector<std::size_t>> children(squares_.size());
    for (std::size_t c = 0; c < squares_.size(); ++c)
        if (parent_[c] >= 0) children[static_cast<std::size_t>(parent_[c])].push_back(c);
    for (std::size_t c = 0; c < squares_.size(); ++c) {
        for (int r : members_of(attached_[c]))
            f.edges.push_back({VertexRef::square(c), VertexRef::round(static_cast<std::size_t>(round_index[static_cast<std::size_t>(r)]))});
        for (std::size_t ch : children[c]) f.edges.push_back({VertexRef::square(c), VertexRef::square(ch)});
    }
    for (std::size_t i = 0; i < f.squares.size(); ++i) f.orientation.push_back(OrientationItem::square(i));
    for (std::size_t t = 0; t < f.edges.size(); ++t) f.orientation.push_back(OrientationItem::edge(t));
    return f;
}

namespace detail {

/// Canonical sign form without the validity check; `f` must be a k-forest.
inline SignedCanonicalForest canonical_sign_form_unchecked(const OrientedForest& f, const Parameters& p)
{
    const auto consts = DerivedConstants::of(p);
    const int reverse_sign = sign_power(p.d);
    int sign = 1;

    const std::size_t count = f.squares.size();
    std::vector<MemberSet> squares(count, 0), attached(count, 0);
    for (std::size_t i = 0; i < count; ++i) {
        squares[i] = set_of(f.squares[i]);
        if (p.d % 2 != 0) sign *= sorting_sign(f.squares[i]);
    }
    std::vector<std::pair<std::size_t, std::size_t>> square_edges;
    for (const Edge& e : f.edges) {
        if (e.tail.is_square() && e.head.is_square())
            square_edges.emplace_back(e.tail.index, e.head.index);
        else if (e.tail.is_square())
            attached[e.tail.index] |= member_bit(f.rounds[e.head.index]);
        else
            attached[e.head.index] |= member_bit(f.rounds[e.tail.index]);
    }

    const auto lay = CanonicalBuilder::layout(squares, attached, square_edges);

    std::vector<std::size_t> edge_target(f.edges.size());
    for (std::size_t t = 0; t < f.edges.size(); ++t) {
        const Edge& e = f.edges[t];
        if (e.tail.is_square() && e.head.is_square()) {
            const std::size_t a = lay.position[e.tail.index];
            const std::size_t b = lay.position[e.head.index];
            const bool forward = lay.parent[b] == static_cast<int>(a);
            const std::size_t par = forward ? a : b;
            const std::size_t child = forward ? b : a;
            const std::size_t par_input = forward ? e.tail.index : e.head.index;
            const auto& ch = lay.children[par];
            const auto rank = static_cast<std::size_t>(std::lower_bound(ch.begin(), ch.end(), child) - ch.begin());
            edge_target[t] = lay.edge_offset[par] + static_cast<std::size_t>(member_count(attached[par_input])) + rank;
            if (!forward) sign *= reverse_sign;
        } else {
            const bool forward = e.tail.is_square();
            const std::size_t sq = forward ? e.tail.index : e.head.index;
            const int member = f.rounds[forward ? e.head.index : e.tail.index];
            const MemberSet below = attached[sq] & (member_bit(member) - 1);
            edge_target[t] = lay.edge_offset[lay.position[sq]] + static_cast<std::size_t>(member_count(below));
            if (!forward) sign *= reverse_sign;
        }
    }

    std::vector<int> degrees;
    std::vector<std::size_t> target;
    degrees.reserve(f.orientation.size());
    target.reserve(f.orientation.size());
    for (const auto& item : f.orientation) {
        if (item.kind == OrientationItem::Kind::square) {
            degrees.push_back(consts.square_degree);
            target.push_back(lay.position[item.index]);
        } else {
            degrees.push_back(consts.edge_degree);
            target.push_back(count + edge_target[item.index]);
        }
    }
    sign *= koszul_sign(degrees, target);
    return {CanonicalBuilder::build(p.n, squares, attached, lay), sign};
}

}  // namespace detail

/// Returns (sign, canonical) with f = sign * canonical under the orientation
/// relations: Koszul sign of the orientation reordering, eps(pi)^d for each
/// square-member sort, (-1)^d per reversed edge.
inline SignedCanonicalForest canonical_sign_form(const OrientedForest& f, const Parameters& p)
{
    require_valid(f, p, "canonical_sign_form");
    return detail::canonical_sign_form_unchecked(f, p);
}

inline bool is_canonical(const OrientedForest& f, const Parameters& p)
{
    if (!validate_forest(f, p).valid()) return false;
    const auto sc = detail::canonical_sign_form_unchecked(f, p);
    return sc.sign == 1 && sc.forest.to_oriented() == f;
}

/// Basic iff every component of squares is a path descending from its root
/// block and each square has an attached round larger than all its members.
inline bool is_basic(const CanonicalForest& f)
{
    std::vector<int> child_count(f.square_count(), 0);
    for (int par : f.parents())
        if (par >= 0 && ++child_count[static_cast<std::size_t>(par)] > 1) return false;
    for (std::size_t i = 0; i < f.square_count(); ++i)
        if (highest_member(f.attached()[i]) < highest_member(f.squares()[i])) return false;
    return true;
}

inline bool is_basic(const OrientedForest& f, const Parameters& p)
{
    require_valid(f, p, "is_basic");
    const auto sc = detail::canonical_sign_form_unchecked(f, p);
    if (sc.sign != 1 || !(sc.forest.to_oriented() == f))
        throw ContractViolation("is_basic: forest is not in canonical orientation");
    return is_basic(sc.forest);
}

}  // namespace noke
