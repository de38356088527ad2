#pragma once

// Test helpers and independent oracles. Nothing here calls the enumeration
// or canonicalization code it is meant to check, except where noted.

#include "noke/noke.hpp"

#include <random>
#include <set>

namespace noke::test {

/// Builds an oriented forest from member lists. `edges` name endpoints by
/// member: a member inside a square stands for that square.
inline OrientedForest build(const Parameters& p, const std::vector<std::vector<int>>& squares,
                            const std::vector<std::pair<int, int>>& edges,
                            std::vector<std::string> order = {})
{
    OrientedForest f;
    f.squares = squares;
    std::vector<int> square_of(static_cast<std::size_t>(p.n) + 1, -1);
    for (std::size_t i = 0; i < squares.size(); ++i)
        for (int v : squares[i]) square_of[static_cast<std::size_t>(v)] = static_cast<int>(i);
    std::vector<std::size_t> round_of(static_cast<std::size_t>(p.n) + 1, 0);
    for (int v = 1; v <= p.n; ++v)
        if (square_of[static_cast<std::size_t>(v)] < 0) {
            round_of[static_cast<std::size_t>(v)] = f.rounds.size();
            f.rounds.push_back(v);
        }
    auto ref = [&](int v) {
        const int s = square_of[static_cast<std::size_t>(v)];
        return s >= 0 ? VertexRef::square(static_cast<std::size_t>(s)) : VertexRef::round(round_of[static_cast<std::size_t>(v)]);
    };
    for (auto [a, b] : edges) f.edges.push_back({ref(a), ref(b)});
    if (order.empty()) {
        for (std::size_t i = 0; i < f.squares.size(); ++i) f.orientation.push_back(OrientationItem::square(i));
        for (std::size_t t = 0; t < f.edges.size(); ++t) f.orientation.push_back(OrientationItem::edge(t));
    } else {
        for (const auto& id : order) {
            const std::size_t idx = std::stoul(id.substr(1));
            f.orientation.push_back(id[0] == 's' ? OrientationItem::square(idx) : OrientationItem::edge(idx));
        }
    }
    return f;
}

/// Canonical forest from square member lists, the rounds attached to each
/// square, and square-square links by square index.
inline CanonicalForest make(int n, const std::vector<std::vector<int>>& squares,
                            const std::vector<std::vector<int>>& attached,
                            const std::vector<std::pair<std::size_t, std::size_t>>& links = {})
{
    std::vector<MemberSet> sq, at;
    for (const auto& s : squares) sq.push_back(set_of(s));
    for (const auto& a : attached) at.push_back(set_of(a));
    return CanonicalForest::from_structure(n, sq, at, links);
}

/// Canonical form of a forest known to be canonical already (asserts sign +1).
inline CanonicalForest canon(const OrientedForest& f, const Parameters& p)
{
    return canonical_sign_form(f, p).forest;
}

/// Koszul sign by explicit bubble sort of the items into their targets.
inline int koszul_by_bubble_sort(std::vector<int> degrees, std::vector<std::size_t> target)
{
    int sign = 1;
    bool swapped = true;
    while (swapped) {
        swapped = false;
        for (std::size_t i = 0; i + 1 < target.size(); ++i) {
            if (target[i] > target[i + 1]) {
                std::swap(target[i], target[i + 1]);
                std::swap(degrees[i], degrees[i + 1]);
                if (degrees[i] % 2 != 0 && degrees[i + 1] % 2 != 0) sign = -sign;
                swapped = true;
            }
        }
    }
    return sign;
}

/// Brute-force enumeration of all k-forests of a degree: every partition of
/// {1..n} into squares and rounds, every edge subset among those vertices,
/// filtered by validate_forest and reduced with canonical_sign_form.
inline std::set<CanonicalForest> brute_force_forests(const Parameters& p, int deg)
{
    std::set<CanonicalForest> out;
    const auto c = DerivedConstants::of(p);
    std::vector<std::vector<int>> squares;
    std::function<void(MemberSet)> choose_squares = [&](MemberSet rest) {
        // finalize with the current squares
        std::vector<int> rounds = members_of(rest);
        const std::size_t ns = squares.size(), nr = rounds.size();
        std::vector<std::pair<VertexRef, VertexRef>> candidates;
        for (std::size_t i = 0; i < ns; ++i) {
            for (std::size_t j = 0; j < nr; ++j) candidates.emplace_back(VertexRef::square(i), VertexRef::round(j));
            for (std::size_t j = i + 1; j < ns; ++j) candidates.emplace_back(VertexRef::square(i), VertexRef::square(j));
        }
        const int rest_deg = deg - static_cast<int>(ns) * c.square_degree;
        if (rest_deg >= 0 && rest_deg % c.edge_degree == 0 &&
            static_cast<std::size_t>(rest_deg / c.edge_degree) <= candidates.size()) {
            const std::size_t ne = static_cast<std::size_t>(rest_deg / c.edge_degree);
            std::vector<std::size_t> pick(ne);
            std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
                if (depth == ne) {
                    OrientedForest f;
                    f.squares = squares;
                    f.rounds = rounds;
                    for (std::size_t t : pick) f.edges.push_back({candidates[t].first, candidates[t].second});
                    for (std::size_t i = 0; i < ns; ++i) f.orientation.push_back(OrientationItem::square(i));
                    for (std::size_t t = 0; t < ne; ++t) f.orientation.push_back(OrientationItem::edge(t));
                    if (validate_forest(f, p).valid()) out.insert(canonical_sign_form(f, p).forest);
                    return;
                }
                for (std::size_t t = start; t < candidates.size(); ++t) {
                    pick[depth] = t;
                    rec(t + 1, depth + 1);
                }
            };
            rec(0, 0);
        }
        // add another square whose smallest member exceeds the previous one
        const int floor = squares.empty() ? 0 : squares.back().front();
        std::vector<int> avail = members_of(rest);
        std::vector<int> cur;
        std::function<void(std::size_t)> pick_sq = [&](std::size_t start) {
            if (static_cast<int>(cur.size()) == p.k - 1) {
                if (cur.front() <= floor) return;
                squares.push_back(cur);
                choose_squares(rest & ~set_of(cur));
                squares.pop_back();
                return;
            }
            for (std::size_t i = start; i < avail.size(); ++i) {
                cur.push_back(avail[i]);
                pick_sq(i + 1);
                cur.pop_back();
            }
        };
        pick_sq(0);
    };
    choose_squares(full_set(p.n));
    return out;
}

/// Random homogeneous class with up to `terms` basis elements.
inline CohomologyClass random_class(const Parameters& p, int deg, std::mt19937& rng, int terms = 4,
                                    CoefficientRing ring = CoefficientRing::integers)
{
    const auto basis = enumerate_basic(p, deg);
    CohomologyClass c(p, ring);
    if (basis.empty()) return c;
    for (int t = 0; t < terms; ++t) {
        int coeff = static_cast<int>(rng() % 7) - 3;
        c.add_basic(basis[rng() % basis.size()], coeff);
    }
    return c;
}

/// Degrees carrying nonzero Betti rank, including 0.
inline std::vector<int> nonzero_degrees(const Parameters& p)
{
    std::vector<int> out;
    for (const auto& [deg, rank] : betti(p)) out.push_back(deg);
    return out;
}

}  // namespace noke::test
