#pragma once

#include "noke/canonical.hpp"

#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <unordered_map>

namespace noke {

namespace detail {

/// Calls fn(subset) for every subset of `universe` with `size` members.
template <typename Fn>
void for_each_subset_of_size(MemberSet universe, int size, Fn&& fn)
{
    const auto elems = members_of(universe);
    const int total = static_cast<int>(elems.size());
    if (size < 0 || size > total) return;
    std::vector<int> idx(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        MemberSet s = 0;
        for (int i : idx) s |= member_bit(elems[static_cast<std::size_t>(i)]);
        fn(s);
        int i = size - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == total - size + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

/// Calls fn(subset) for every nonempty subset of `universe`.
template <typename Fn>
void for_each_nonempty_subset(MemberSet universe, Fn&& fn)
{
    for (MemberSet s = universe; s; s = (s - 1) & universe) fn(s);
}

using SquareEdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

/// All acyclic edge sets with `edges` edges on `vertices` labelled vertices.
inline const std::vector<SquareEdgeList>& labelled_forests(std::size_t vertices, std::size_t edges)
{
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, std::size_t>, std::vector<SquareEdgeList>> cache;
    std::lock_guard lock(mutex);
    auto [it, inserted] = cache.try_emplace({vertices, edges});
    if (!inserted) return it->second;
    SquareEdgeList all;
    for (std::size_t u = 0; u < vertices; ++u)
        for (std::size_t v = u + 1; v < vertices; ++v) all.emplace_back(u, v);
    std::vector<SquareEdgeList>& out = it->second;
    SquareEdgeList current;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (current.size() == edges) {
            DisjointSets ds(vertices);
            for (auto [u, v] : current)
                if (!ds.join(u, v)) return;
            out.push_back(current);
            return;
        }
        for (std::size_t i = start; i < all.size(); ++i) {
            current.push_back(all[i]);
            rec(i + 1);
            current.pop_back();
        }
    };
    rec(0);
    return out;
}

/// Every way of distributing `pool` over `slots` squares so that each square
/// receives at least one member.
template <typename Fn>
void for_each_surjective_attachment(const std::vector<int>& pool, std::size_t slots, Fn&& fn)
{
    std::vector<MemberSet> attached(slots, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t empty) {
        if (pool.size() - i < empty) return;
        if (i == pool.size()) {
            fn(attached);
            return;
        }
        for (std::size_t s = 0; s < slots; ++s) {
            const bool was_empty = attached[s] == 0;
            attached[s] |= member_bit(pool[i]);
            rec(i + 1, empty - (was_empty ? 1 : 0));
            attached[s] &= ~member_bit(pool[i]);
        }
    };
    rec(0, slots);
}

template <typename Fn>
void for_each_square_family(MemberSet avail, int square_size, std::size_t count, Fn&& fn)
{
    std::vector<MemberSet> chosen;
    std::function<void(MemberSet, int)> rec = [&](MemberSet rest, int min_floor) {
        if (chosen.size() == count) {
            fn(chosen, rest);
            return;
        }
        for_each_subset_of_size(rest, square_size, [&](MemberSet s) {
            if (lowest_member(s) <= min_floor) return;
            chosen.push_back(s);
            rec(rest & ~s, lowest_member(s));
            chosen.pop_back();
        });
    };
    rec(avail, 0);
}

}  // namespace detail

/// Every canonical k-forest of the given degree, sorted by canonical key.
inline std::vector<CanonicalForest> enumerate_all(const Parameters& p, int deg)
{
    p.validate_enumerable();
    std::vector<CanonicalForest> out;
    if (deg < 0) return out;
    const auto c = DerivedConstants::of(p);
    const MemberSet everything = full_set(p.n);
    for (std::size_t alpha = 0; static_cast<int>(alpha) * p.k <= p.n; ++alpha) {
        const int rest = deg - static_cast<int>(alpha) * c.square_degree;
        if (rest < 0 || rest % c.edge_degree != 0) continue;
        const int beta = rest / c.edge_degree;
        if (alpha == 0) {
            if (beta == 0) out.push_back(CanonicalForest::unit(p.n));
            continue;
        }
        for (int e = 0; e < static_cast<int>(alpha) && e <= beta; ++e) {
            const int r = beta - e;
            if (r < static_cast<int>(alpha) || r > p.n - static_cast<int>(alpha) * (p.k - 1)) continue;
            const auto& shapes = detail::labelled_forests(alpha, static_cast<std::size_t>(e));
            detail::for_each_square_family(everything, p.k - 1, alpha, [&](const std::vector<MemberSet>& squares,
                                                                           MemberSet remaining) {
                detail::for_each_subset_of_size(remaining, r, [&](MemberSet rounds) {
                    detail::for_each_surjective_attachment(
                        members_of(rounds), alpha, [&](const std::vector<MemberSet>& attached) {
                            for (const auto& shape : shapes)
                                out.push_back(CanonicalForest::from_structure(p.n, squares, attached, shape));
                        });
                });
            });
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Calls fn(forest) once for every basic canonical forest of any degree
/// whose degree does not exceed `max_degree`.
template <typename Fn>
void for_each_basic(const Parameters& p, int max_degree, Fn&& fn)
{
    p.validate_enumerable();
    const auto c = DerivedConstants::of(p);
    std::vector<MemberSet> squares, attached;
    detail::SquareEdgeList chain_edges;

    std::function<void(MemberSet, int)> next_component;
    std::function<void(MemberSet, int, std::size_t)> extend_chain;

    auto degree_of_block = [&](MemberSet rounds, bool linked) {
        return c.square_degree + c.edge_degree * (member_count(rounds) + (linked ? 1 : 0));
    };

    // Appends blocks after square `last`; every block must have its largest
    // member among the attached rounds.
    extend_chain = [&](MemberSet avail, int deg, std::size_t last) {
        next_component(avail, deg);
        detail::for_each_subset_of_size(avail, p.k - 1, [&](MemberSet sq) {
            const MemberSet after = avail & ~sq;
            const MemberSet larger = after & ~(member_bit(highest_member(sq)) | (member_bit(highest_member(sq)) - 1));
            if (!larger) return;
            detail::for_each_nonempty_subset(after, [&](MemberSet rounds) {
                if (!(rounds & larger)) return;
                const int nd = deg + degree_of_block(rounds, true);
                if (nd > max_degree) return;
                squares.push_back(sq);
                attached.push_back(rounds);
                chain_edges.emplace_back(last, squares.size() - 1);
                extend_chain(after & ~rounds, nd, squares.size() - 1);
                chain_edges.pop_back();
                attached.pop_back();
                squares.pop_back();
            });
        });
    };

    next_component = [&](MemberSet avail, int deg) {
        if (!avail) {
            fn(CanonicalForest::from_structure(p.n, squares, attached, chain_edges));
            return;
        }
        const MemberSet low = avail & (~avail + 1);
        next_component(avail & ~low, deg);
        detail::for_each_subset_of_size(avail, p.k - 1, [&](MemberSet sq) {
            const MemberSet after = avail & ~sq;
            const MemberSet larger = after & ~(member_bit(highest_member(sq)) | (member_bit(highest_member(sq)) - 1));
            if (!larger) return;
            detail::for_each_nonempty_subset(after, [&](MemberSet rounds) {
                if (!(rounds & larger)) return;
                if (!((sq | rounds) & low)) return;
                const int nd = deg + degree_of_block(rounds, false);
                if (nd > max_degree) return;
                squares.push_back(sq);
                attached.push_back(rounds);
                extend_chain(after & ~rounds, nd, squares.size() - 1);
                attached.pop_back();
                squares.pop_back();
            });
        });
    };

    // An isolated-round choice for the current low member is handled by
    // `next_component` itself; `extend_chain` closes the chain through it.
    next_component(full_set(p.n), 0);
}

/// Ordered basic forests of one degree with index lookup.
class DegreeBasis {
public:
    DegreeBasis() = default;
    DegreeBasis(Parameters p, int deg, std::vector<CanonicalForest> forests)
        : params_(p), degree_(deg), forests_(std::move(forests))
    {
        std::sort(forests_.begin(), forests_.end());
        for (std::size_t i = 0; i < forests_.size(); ++i) index_.emplace(forests_[i], i);
    }

    [[nodiscard]] const Parameters& params() const { return params_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] std::size_t size() const { return forests_.size(); }
    [[nodiscard]] bool empty() const { return forests_.empty(); }
    [[nodiscard]] const CanonicalForest& operator[](std::size_t i) const { return forests_[i]; }
    [[nodiscard]] const std::vector<CanonicalForest>& forests() const { return forests_; }
    [[nodiscard]] auto begin() const { return forests_.begin(); }
    [[nodiscard]] auto end() const { return forests_.end(); }

    [[nodiscard]] std::optional<std::size_t> find(const CanonicalForest& f) const
    {
        auto it = index_.find(f);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

private:
    Parameters params_;
    int degree_ = 0;
    std::vector<CanonicalForest> forests_;
    std::unordered_map<CanonicalForest, std::size_t, CanonicalForestHash> index_;
};

/// All basic canonical forests of the given degree, sorted by canonical key.
inline DegreeBasis enumerate_basic(const Parameters& p, int deg)
{
    p.validate_enumerable();
    std::vector<CanonicalForest> out;
    if (deg >= 0)
        for_each_basic(p, deg, [&](CanonicalForest f) {
            if (f.degree(p) == deg) out.push_back(std::move(f));
        });
    return DegreeBasis(p, deg, std::move(out));
}

/// Number of basic forests per degree, one enumeration pass.
inline std::map<int, std::size_t> basic_counts_by_degree(const Parameters& p)
{
    std::map<int, std::size_t> counts;
    for_each_basic(p, std::numeric_limits<int>::max(), [&](const CanonicalForest& f) { ++counts[f.degree(p)]; });
    return counts;
}

}  // namespace noke
