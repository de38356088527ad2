#pragma once

#include "noke/core.hpp"

#include <algorithm>
#include <compare>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace noke {

struct VertexRef {
    enum class Kind : std::uint8_t { square, round };
    Kind kind = Kind::square;
    std::size_t index = 0;

    static VertexRef square(std::size_t i) { return {Kind::square, i}; }
    static VertexRef round(std::size_t i) { return {Kind::round, i}; }
    [[nodiscard]] bool is_square() const { return kind == Kind::square; }
    [[nodiscard]] bool is_round() const { return kind == Kind::round; }

    friend bool operator==(const VertexRef&, const VertexRef&) = default;
    friend auto operator<=>(const VertexRef&, const VertexRef&) = default;
};

struct Edge {
    VertexRef tail;
    VertexRef head;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// One element of the orientation set: a square vertex or an edge.
struct OrientationItem {
    enum class Kind : std::uint8_t { square, edge };
    Kind kind = Kind::square;
    std::size_t index = 0;

    static OrientationItem square(std::size_t i) { return {Kind::square, i}; }
    static OrientationItem edge(std::size_t i) { return {Kind::edge, i}; }

    friend bool operator==(const OrientationItem&, const OrientationItem&) = default;
    friend auto operator<=>(const OrientationItem&, const OrientationItem&) = default;
};

/// A k-forest together with its full orientation data. Squares keep the
/// member ordering they were given; rounds hold one member each; the
/// orientation list orders every square and every edge.
///
/// The same structure carries the intermediate graphs of a superposition
/// (round vertices of valency 2), which are not k-forests.
struct OrientedForest {
    std::vector<std::vector<int>> squares;
    std::vector<int> rounds;
    std::vector<Edge> edges;
    std::vector<OrientationItem> orientation;

    friend bool operator==(const OrientedForest&, const OrientedForest&) = default;
};

struct Violation {
    std::string rule;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    [[nodiscard]] bool valid() const { return violations.empty(); }
    [[nodiscard]] bool has(const std::string& rule) const
    {
        return std::any_of(violations.begin(), violations.end(),
                           [&](const Violation& v) { return v.rule == rule; });
    }
};

namespace rules {
inline constexpr const char* member_range = "member-range";
inline constexpr const char* partition = "partition";
inline constexpr const char* square_cardinality = "square-cardinality";
inline constexpr const char* vertex_reference = "vertex-reference";
inline constexpr const char* self_loop = "self-loop";
inline constexpr const char* acyclic = "acyclic";
inline constexpr const char* square_needs_round = "square-round-neighbor";
inline constexpr const char* round_valency = "round-valency";
inline constexpr const char* round_neighbor = "round-neighbor-square";
inline constexpr const char* orientation = "orientation-permutation";
}  // namespace rules

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns false when x and y were already joined.
    bool join(std::size_t x, std::size_t y)
    {
        x = find(x);
        y = find(y);
        if (x == y) return false;
        parent_[y] = x;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

inline bool ref_in_range(const OrientedForest& f, const VertexRef& v)
{
    return v.is_square() ? v.index < f.squares.size() : v.index < f.rounds.size();
}

inline std::size_t vertex_slot(const OrientedForest& f, const VertexRef& v)
{
    return v.is_square() ? v.index : f.squares.size() + v.index;
}

/// Per-vertex neighbour counts; assumes every edge references existing vertices.
struct Incidence {
    std::vector<int> round_valency;
    std::vector<int> square_round_neighbors;
    std::vector<int> round_square_neighbors;
};

inline Incidence incidence(const OrientedForest& f)
{
    Incidence inc;
    inc.round_valency.assign(f.rounds.size(), 0);
    inc.square_round_neighbors.assign(f.squares.size(), 0);
    inc.round_square_neighbors.assign(f.rounds.size(), 0);
    for (const Edge& e : f.edges) {
        for (const auto& [self, other] : {std::pair{e.tail, e.head}, std::pair{e.head, e.tail}}) {
            if (self.is_round()) {
                ++inc.round_valency[self.index];
                if (other.is_square()) ++inc.round_square_neighbors[self.index];
            } else if (other.is_round()) {
                ++inc.square_round_neighbors[self.index];
            }
        }
    }
    return inc;
}

/// Checks every clause except round valency, which callers apply with their
/// own bound (1 for k-forests, 2 for superposition graphs).
inline void validate_common(const OrientedForest& f, const Parameters& p, ValidationReport& report)
{
    auto add = [&](const char* rule, std::string msg) { report.violations.push_back({rule, std::move(msg)}); };

    std::vector<int> seen(static_cast<std::size_t>(p.n) + 1, 0);
    auto note_member = [&](int v, const std::string& where) {
        if (v < 1 || v > p.n) {
            add(rules::member_range, where + " holds " + std::to_string(v) + " outside {1.." + std::to_string(p.n) + "}");
            return;
        }
        ++seen[static_cast<std::size_t>(v)];
    };
    for (std::size_t i = 0; i < f.squares.size(); ++i) {
        const auto& sq = f.squares[i];
        if (static_cast<int>(sq.size()) != p.k - 1)
            add(rules::square_cardinality, "square s" + std::to_string(i) + " has " + std::to_string(sq.size()) +
                                               " members, expected k-1=" + std::to_string(p.k - 1));
        for (int v : sq) note_member(v, "square s" + std::to_string(i));
    }
    for (std::size_t j = 0; j < f.rounds.size(); ++j) note_member(f.rounds[j], "round r" + std::to_string(j));
    for (int v = 1; v <= p.n; ++v) {
        const int c = seen[static_cast<std::size_t>(v)];
        if (c == 0)
            add(rules::partition, "member " + std::to_string(v) + " is not in any vertex");
        else if (c > 1)
            add(rules::partition, "member " + std::to_string(v) + " appears in " + std::to_string(c) + " vertices");
    }

    bool refs_ok = true;
    for (std::size_t t = 0; t < f.edges.size(); ++t) {
        const Edge& e = f.edges[t];
        if (!ref_in_range(f, e.tail) || !ref_in_range(f, e.head)) {
            add(rules::vertex_reference, "edge e" + std::to_string(t) + " references a missing vertex");
            refs_ok = false;
        } else if (e.tail == e.head) {
            add(rules::self_loop, "edge e" + std::to_string(t) + " is a loop");
            refs_ok = false;
        }
    }

    if (refs_ok) {
        DisjointSets ds(f.squares.size() + f.rounds.size());
        for (const Edge& e : f.edges) {
            if (!ds.join(vertex_slot(f, e.tail), vertex_slot(f, e.head))) {
                add(rules::acyclic, "underlying graph has a cycle");
                break;
            }
        }
        const Incidence inc = incidence(f);
        for (std::size_t i = 0; i < f.squares.size(); ++i)
            if (inc.square_round_neighbors[i] == 0)
                add(rules::square_needs_round, "square s" + std::to_string(i) + " has no round neighbor");
        for (std::size_t j = 0; j < f.rounds.size(); ++j)
            if (inc.round_valency[j] != inc.round_square_neighbors[j])
                add(rules::round_neighbor, "round r" + std::to_string(j) + " is joined to a round vertex");
    }

    const std::size_t total = f.squares.size() + f.edges.size();
    std::vector<int> hits(total, 0);
    bool perm_ok = f.orientation.size() == total;
    for (const auto& item : f.orientation) {
        const std::size_t slot =
            item.kind == OrientationItem::Kind::square ? item.index : f.squares.size() + item.index;
        const bool in_range = item.kind == OrientationItem::Kind::square ? item.index < f.squares.size()
                                                                          : item.index < f.edges.size();
        if (!in_range || hits[slot]++ > 0) perm_ok = false;
    }
    if (!perm_ok)
        add(rules::orientation, "orientation order is not a permutation of all squares and edges");
}

}  // namespace detail

/// Reports every violated clause of the k-forest definition. Never throws.
inline ValidationReport validate_forest(const OrientedForest& f, const Parameters& p)
{
    ValidationReport report;
    detail::validate_common(f, p, report);
    bool refs_ok = std::none_of(report.violations.begin(), report.violations.end(), [](const Violation& v) {
        return v.rule == rules::vertex_reference || v.rule == rules::self_loop;
    });
    if (refs_ok) {
        const auto inc = detail::incidence(f);
        for (std::size_t j = 0; j < f.rounds.size(); ++j)
            if (inc.round_valency[j] > 1)
                report.violations.push_back({rules::round_valency, "round r" + std::to_string(j) + " has valency " +
                                                                       std::to_string(inc.round_valency[j])});
    }
    return report;
}

inline void require_valid(const OrientedForest& f, const Parameters& p, const char* op)
{
    const auto report = validate_forest(f, p);
    if (!report.valid())
        throw ContractViolation(std::string(op) + ": invalid forest (" + report.violations.front().rule + ": " +
                                report.violations.front().message + ")");
}

/// Degree of an oriented forest: squares count d(k-2), edges count d-1.
inline int degree(const OrientedForest& f, const Parameters& p)
{
    require_valid(f, p, "degree");
    const auto c = DerivedConstants::of(p);
    return static_cast<int>(f.squares.size()) * c.square_degree + static_cast<int>(f.edges.size()) * c.edge_degree;
}

}  // namespace noke
