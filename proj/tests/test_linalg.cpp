#include "noke/linalg.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>

using namespace noke;

namespace {

SparseRow<Integer> row(std::initializer_list<std::pair<std::size_t, int>> entries)
{
    std::vector<std::pair<std::size_t, Integer>> v;
    for (auto [c, x] : entries) v.emplace_back(c, Integer(x));
    return row_from_unsorted<Integer>(std::move(v));
}

// Fraction-free determinant (Bareiss), used as an oracle for the product of
// invariant factors.
Integer bareiss_det(std::vector<std::vector<Integer>> a)
{
    const std::size_t n = a.size();
    Integer prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k].is_zero()) {
            std::size_t r = k + 1;
            while (r < n && a[r][k].is_zero()) ++r;
            if (r == n) return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

}  // namespace

TEST(SparseRow, NormalizesAndCombines)
{
    const auto r = row({{3, 1}, {1, 2}, {3, -1}, {0, 0}});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].first, 1u);
    const auto s = axpy(row({{0, 1}, {2, 1}}), Integer(-1), row({{0, 1}, {1, 1}}));
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0], (std::pair<std::size_t, Integer>{1, -1}));
    EXPECT_EQ(s[1], (std::pair<std::size_t, Integer>{2, 1}));
}

TEST(Mod2, Arithmetic)
{
    EXPECT_EQ(Mod2(1) + Mod2(1), Mod2(0));
    EXPECT_EQ(Mod2(Integer(-3)), Mod2(1));
    EXPECT_EQ(Mod2(Integer(-4)), Mod2(0));
    const auto r = reduce_row_mod2(row({{0, 2}, {1, -3}, {4, 5}}));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].first, 1u);
    EXPECT_EQ(r[1].first, 4u);
}

TEST(DenseSmith, KnownDiagonals)
{
    using M = std::vector<std::vector<Integer>>;
    EXPECT_EQ(dense_smith_diagonal(M{{2, 4}, {6, 8}}), (std::vector<Integer>{2, 4}));
    EXPECT_EQ(dense_smith_diagonal(M{{2, 0}, {0, 3}}), (std::vector<Integer>{1, 6}));
    EXPECT_EQ(dense_smith_diagonal(M{{0, 0}, {0, 0}}), (std::vector<Integer>{}));
    EXPECT_EQ(dense_smith_diagonal(M{{4, 6, 2}}), (std::vector<Integer>{2}));
}

TEST(DenseSmith, ProductMatchesDeterminantAndDivisibility)
{
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 4;
        std::vector<std::vector<Integer>> a(n, std::vector<Integer>(n));
        Integer g = 0;
        for (auto& r : a)
            for (auto& x : r) {
                x = static_cast<int>(rng() % 13) - 6;
                g = gcd(g, x);
            }
        const Integer det = bareiss_det(a);
        const auto diag = dense_smith_diagonal(a);
        if (det.is_zero()) {
            EXPECT_LT(diag.size(), n);
            continue;
        }
        ASSERT_EQ(diag.size(), n);
        Integer prod = 1;
        for (std::size_t i = 0; i < n; ++i) {
            prod *= diag[i];
            if (i > 0) {
                EXPECT_TRUE(Integer(diag[i] % diag[i - 1]).is_zero());
            }
        }
        EXPECT_EQ(prod, abs(det));
        EXPECT_EQ(diag[0], g);
    }
}

TEST(SmithSummary, DetectsTorsion)
{
    const std::vector<SparseRow<Integer>> rows{row({{0, 1}, {1, 1}}), row({{0, 1}, {1, -1}})};
    const auto s = smith_summary(2, rows);
    EXPECT_EQ(s.rank, 2u);
    EXPECT_EQ(s.nontrivial_factors, (std::vector<Integer>{2}));
    EXPECT_FALSE(s.torsion_free());
    EXPECT_EQ(rank_mod2(2, rows), 1u);
}

TEST(SmithSummary, UnimodularRows)
{
    const std::vector<SparseRow<Integer>> rows{row({{0, 1}, {2, -1}}), row({{1, 1}, {0, 1}}),
                                               row({{1, 1}, {2, 1}})};
    const auto s = smith_summary(3, rows);
    EXPECT_EQ(s.rank, 2u);
    EXPECT_TRUE(s.torsion_free());
}

TEST(ReduceOntoBasis, ExpressesEliminatedColumns)
{
    // c0 = c2 and c1 = -c0 modulo the rows; keep c2
    const std::vector<SparseRow<Integer>> rows{row({{0, 1}, {2, -1}}), row({{1, 1}, {0, 1}})};
    const auto red = reduce_onto_basis<Integer>(3, {true, true, false}, [&](auto&& sink) {
        for (const auto& r : rows) sink(r);
    });
    EXPECT_EQ(red.rank, 2u);
    EXPECT_EQ(*red.expression[0], row({{2, 1}}));
    EXPECT_EQ(*red.expression[1], row({{2, -1}}));
    EXPECT_FALSE(red.expression[2].has_value());
}

TEST(ReduceOntoBasis, OrderIndependent)
{
    const std::vector<SparseRow<Integer>> rows{row({{0, 1}, {1, 2}, {3, -1}}), row({{1, 1}, {2, 1}}),
                                               row({{2, 1}, {4, 3}, {3, 1}}), row({{0, 1}, {1, 3}, {2, 2}, {4, 3}})};
    const std::vector<bool> elim{true, true, true, false, false};
    auto run = [&](std::vector<std::size_t> order) {
        return reduce_onto_basis<Integer>(5, elim, [&](auto&& sink) {
            for (std::size_t i : order) sink(rows[i]);
        });
    };
    const auto a = run({0, 1, 2, 3});
    const auto b = run({3, 2, 1, 0});
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(*a.expression[c], *b.expression[c]) << c;
}

TEST(ReduceOntoBasis, InconsistentSystemsThrow)
{
    // relation among kept columns
    EXPECT_THROW(reduce_onto_basis<Integer>(2, {false, false}, [](auto&& sink) { sink(row({{0, 1}, {1, 1}})); }),
                 InconsistentSystem);
    // eliminated column not determined
    EXPECT_THROW(reduce_onto_basis<Integer>(2, {true, false}, [](auto&&) {}), InconsistentSystem);
    // no unit pivot: 2 c0 = c1
    EXPECT_THROW(reduce_onto_basis<Integer>(2, {true, false}, [](auto&& sink) { sink(row({{0, 2}, {1, -1}})); }),
                 InconsistentSystem);
    // the same system is fine mod 2 only if c1 is eliminated instead
    EXPECT_NO_THROW(reduce_onto_basis<Mod2>(2, {false, true}, [](auto&& sink) {
        sink(reduce_row_mod2(row({{0, 2}, {1, -1}})));
    }));
}
