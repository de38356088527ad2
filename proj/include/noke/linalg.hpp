#pragma once

// Exact sparse linear algebra over Z and Z/2.
//
// Two independent routines live here. `reduce_onto_basis` eliminates with
// unit pivots restricted to a chosen set of columns and expresses each of
// those columns in terms of the remaining ones; it is what straightening
// uses. `smith_summary` computes rank and invariant factors of the full
// relation lattice with unrestricted pivoting plus a dense Smith normal form
// for whatever has no unit entry left; acceptance checks compare the two.

#include "noke/core.hpp"

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace noke {

/// Element of Z/2.
struct Mod2 {
    std::uint8_t bit = 0;

    Mod2() = default;
    explicit Mod2(int v) : bit(static_cast<std::uint8_t>(v & 1)) {}
    explicit Mod2(const Integer& v) : bit(Integer(v % 2).is_zero() ? 0 : 1) {}

    friend Mod2 operator+(Mod2 a, Mod2 b) { return Mod2(a.bit ^ b.bit); }
    friend Mod2 operator-(Mod2 a, Mod2 b) { return Mod2(a.bit ^ b.bit); }
    friend Mod2 operator*(Mod2 a, Mod2 b) { return Mod2(a.bit & b.bit); }
    Mod2 operator-() const { return *this; }
    friend bool operator==(Mod2 a, Mod2 b) { return a.bit == b.bit; }
};

template <typename S>
struct ScalarTraits;

template <>
struct ScalarTraits<Integer> {
    static bool is_zero(const Integer& x) { return x.is_zero(); }
    static bool is_unit(const Integer& x) { return x == 1 || x == -1; }
    /// Inverse of a unit.
    static Integer unit_inverse(const Integer& x) { return x; }
};

template <>
struct ScalarTraits<Mod2> {
    static bool is_zero(Mod2 x) { return x.bit == 0; }
    static bool is_unit(Mod2 x) { return x.bit == 1; }
    static Mod2 unit_inverse(Mod2 x) { return x; }
};

/// Sparse row: (column, value) pairs sorted by column, no zero values.
template <typename S>
using SparseRow = std::vector<std::pair<std::size_t, S>>;

/// Returns a + factor * b.
template <typename S>
SparseRow<S> axpy(const SparseRow<S>& a, const S& factor, const SparseRow<S>& b)
{
    using T = ScalarTraits<S>;
    SparseRow<S> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            S v = factor * b[j].second;
            if (!T::is_zero(v)) out.emplace_back(b[j].first, std::move(v));
            ++j;
        } else {
            S v = a[i].second + factor * b[j].second;
            if (!T::is_zero(v)) out.emplace_back(a[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    return out;
}

template <typename S>
void scale_in_place(SparseRow<S>& row, const S& factor)
{
    for (auto& [c, v] : row) v = v * factor;
}

template <typename S>
SparseRow<S> row_from_unsorted(std::vector<std::pair<std::size_t, S>> entries)
{
    using T = ScalarTraits<S>;
    std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    SparseRow<S> out;
    for (auto& [c, v] : entries) {
        if (!out.empty() && out.back().first == c)
            out.back().second = out.back().second + v;
        else
            out.emplace_back(c, std::move(v));
        if (T::is_zero(out.back().second)) out.pop_back();
    }
    return out;
}

inline SparseRow<Mod2> reduce_row_mod2(const SparseRow<Integer>& row)
{
    SparseRow<Mod2> out;
    for (const auto& [c, v] : row)
        if (Mod2(v).bit) out.emplace_back(c, Mod2(1));
    return out;
}

namespace detail {

/// Online echelon structure with unit pivots.
template <typename S>
class UnitPivotEchelon {
public:
    using T = ScalarTraits<S>;

    UnitPivotEchelon(std::size_t columns, std::vector<bool> eligible)
        : eligible_(std::move(eligible)), pivot_rows_(columns)
    {
    }

    /// Eliminates every pivoted eligible column from `row`.
    void reduce(SparseRow<S>& row) const
    {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& [c, v] : row) {
                if (eligible_[c] && pivot_rows_[c]) {
                    const S factor = -v;
                    row = axpy(row, factor, *pivot_rows_[c]);
                    changed = true;
                    break;
                }
            }
        }
    }

    enum class Outcome { absorbed, pivot, only_ineligible, no_unit };

    /// Reduces and tries to install `row` as a new pivot row.
    Outcome insert(SparseRow<S> row)
    {
        reduce(row);
        if (row.empty()) return Outcome::absorbed;
        std::optional<std::size_t> choice;
        bool any_eligible = false;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!eligible_[row[i].first]) continue;
            any_eligible = true;
            if (T::is_unit(row[i].second)) {
                choice = i;
                break;
            }
        }
        if (!any_eligible) {
            residual_.push_back(std::move(row));
            return Outcome::only_ineligible;
        }
        if (!choice) {
            deferred_.push_back(std::move(row));
            return Outcome::no_unit;
        }
        const std::size_t col = row[*choice].first;
        scale_in_place(row, T::unit_inverse(row[*choice].second));
        pivot_rows_[col] = std::move(row);
        order_.push_back(col);
        return Outcome::pivot;
    }

    /// Re-inserts deferred rows until no further pivot appears.
    void retry_deferred()
    {
        bool progress = true;
        while (progress && !deferred_.empty()) {
            progress = false;
            auto pending = std::move(deferred_);
            deferred_.clear();
            for (auto& row : pending)
                if (insert(std::move(row)) == Outcome::pivot) progress = true;
        }
    }

    [[nodiscard]] std::size_t pivot_count() const { return order_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& pivot_order() const { return order_; }
    [[nodiscard]] const std::optional<SparseRow<S>>& pivot_row(std::size_t col) const { return pivot_rows_[col]; }
    [[nodiscard]] const std::vector<SparseRow<S>>& deferred() const { return deferred_; }
    [[nodiscard]] const std::vector<SparseRow<S>>& residual() const { return residual_; }
    [[nodiscard]] bool eligible(std::size_t col) const { return eligible_[col]; }

private:
    std::vector<bool> eligible_;
    std::vector<std::optional<SparseRow<S>>> pivot_rows_;
    std::vector<std::size_t> order_;
    std::vector<SparseRow<S>> deferred_;
    std::vector<SparseRow<S>> residual_;
};

}  // namespace detail

/// Result of expressing the eliminated columns over the kept columns.
template <typename S>
struct BasisReduction {
    std::size_t rank = 0;
    /// For each eliminated column, its class as a combination of kept columns
    /// (column indices are the original ones). Empty optional for kept columns.
    std::vector<std::optional<SparseRow<S>>> expression;
};

/// Eliminates with unit pivots in the `eliminate` columns only and returns
/// each such column modulo the row lattice, written over the other columns.
/// Throws InconsistentSystem unless the kept columns form a basis of the
/// quotient (every eliminated column gets a unit pivot and no row survives
/// on kept columns alone).
template <typename S, typename RowSource>
BasisReduction<S> reduce_onto_basis(std::size_t columns, const std::vector<bool>& eliminate, RowSource&& rows)
{
    detail::UnitPivotEchelon<S> ech(columns, eliminate);
    rows([&](SparseRow<S> row) { ech.insert(std::move(row)); });
    ech.retry_deferred();
    if (!ech.residual().empty())
        throw InconsistentSystem("relation lattice contains a nonzero combination of basic forests");
    if (!ech.deferred().empty())
        throw InconsistentSystem("no unit pivot available: quotient has torsion or the basis is not integral");

    BasisReduction<S> out;
    out.rank = ech.pivot_count();
    out.expression.assign(columns, std::nullopt);
    for (std::size_t c = 0; c < columns; ++c)
        if (eliminate[c] && !ech.pivot_row(c))
            throw InconsistentSystem("column " + std::to_string(c) + " is independent of the basis modulo relations");

    const auto& order = ech.pivot_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t col = *it;
        SparseRow<S> acc;
        for (const auto& [c, v] : *ech.pivot_row(col)) {
            if (c == col) continue;
            const S factor = -v;
            if (eliminate[c]) {
                acc = axpy(acc, factor, *out.expression[c]);
            } else {
                acc = axpy(acc, factor, SparseRow<S>{{c, S(1)}});
            }
        }
        out.expression[col] = std::move(acc);
    }
    return out;
}

/// Smith normal form of a small dense integer matrix; returns the nonzero
/// diagonal entries (positive, each dividing the next).
inline std::vector<Integer> dense_smith_diagonal(std::vector<std::vector<Integer>> a)
{
    std::vector<Integer> diag;
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::size_t t = 0;
    while (t < rows && t < cols) {
        // smallest nonzero |entry| in the trailing block as pivot
        std::optional<std::pair<std::size_t, std::size_t>> best;
        for (std::size_t i = t; i < rows; ++i)
            for (std::size_t j = t; j < cols; ++j)
                if (!a[i][j].is_zero() &&
                    (!best || abs(a[i][j]) < abs(a[best->first][best->second])))
                    best = std::pair{i, j};
        if (!best) break;
        std::swap(a[t], a[best->first]);
        for (auto& row : a) std::swap(row[t], row[best->second]);
        bool clean = false;
        while (!clean) {
            clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (a[i][t].is_zero()) continue;
                const Integer q = a[i][t] / a[t][t];
                for (std::size_t j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
                if (!a[i][t].is_zero()) {
                    std::swap(a[t], a[i]);
                    clean = false;
                }
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (a[t][j].is_zero()) continue;
                const Integer q = a[t][j] / a[t][t];
                for (std::size_t i = t; i < rows; ++i) a[i][j] -= q * a[i][t];
                if (!a[t][j].is_zero()) {
                    for (auto& row : a) std::swap(row[t], row[j]);
                    clean = false;
                }
            }
            if (clean) {
                // divisibility condition against the trailing block
                for (std::size_t i = t + 1; i < rows && clean; ++i)
                    for (std::size_t j = t + 1; j < cols; ++j)
                        if (!Integer(a[i][j] % a[t][t]).is_zero()) {
                            for (std::size_t jj = t; jj < cols; ++jj) a[t][jj] += a[i][jj];
                            clean = false;
                            break;
                        }
            }
        }
        diag.push_back(abs(a[t][t]));
        ++t;
    }
    return diag;
}

struct SmithSummary {
    std::size_t rank = 0;
    /// Invariant factors different from 1, ascending.
    std::vector<Integer> nontrivial_factors;

    [[nodiscard]] bool torsion_free() const { return nontrivial_factors.empty(); }
};

/// Rank and invariant factors of the lattice spanned by `rows`.
inline SmithSummary smith_summary(std::size_t columns, const std::vector<SparseRow<Integer>>& rows)
{
    detail::UnitPivotEchelon<Integer> ech(columns, std::vector<bool>(columns, true));
    for (const auto& row : rows) ech.insert(row);
    ech.retry_deferred();

    SmithSummary out;
    out.rank = ech.pivot_count();
    const auto& rest = ech.deferred();
    if (rest.empty()) return out;

    std::vector<std::size_t> used;
    for (const auto& row : rest)
        for (const auto& [c, v] : row) used.push_back(c);
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::vector<std::vector<Integer>> dense(rest.size(), std::vector<Integer>(used.size()));
    for (std::size_t i = 0; i < rest.size(); ++i)
        for (const auto& [c, v] : rest[i])
            dense[i][static_cast<std::size_t>(std::lower_bound(used.begin(), used.end(), c) - used.begin())] = v;
    for (auto& f : dense_smith_diagonal(std::move(dense))) {
        ++out.rank;
        if (f != 1) out.nontrivial_factors.push_back(f);
    }
    return out;
}

/// Rank over Z/2.
inline std::size_t rank_mod2(std::size_t columns, const std::vector<SparseRow<Integer>>& rows)
{
    detail::UnitPivotEchelon<Mod2> ech(columns, std::vector<bool>(columns, true));
    for (const auto& row : rows) ech.insert(reduce_row_mod2(row));
    return ech.pivot_count();
}

}  // namespace noke
