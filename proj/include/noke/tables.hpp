#pragma once

#include "noke/serialization.hpp"

#include <iomanip>
#include <sstream>

namespace noke {

enum class TableFormat { ascii, csv, json };

struct TableSpec {
    int d = 2;
    int s = 1;
    int k_min = 3, k_max = 3;
    int n_min = 4, n_max = 4;
    TableFormat format = TableFormat::json;

    void validate() const
    {
        if (d < 2) throw InvalidParameters("table requires d >= 2");
        if (s < 1) throw InvalidParameters("table requires s >= 1");
        if (k_min < 3) throw InvalidParameters("table requires k-min >= 3");
        if (k_min > k_max) throw InvalidParameters("table requires k-min <= k-max");
        if (n_min < 1 || n_min > n_max) throw InvalidParameters("table requires 1 <= n-min <= n-max");
    }
};

/// One (k,n) entry. Blank when n <= k; otherwise `value` is s*floor(n/k)
/// when the omnibus predicate holds and empty ("?") when it does not.
struct TableCell {
    int k = 0;
    int n = 0;
    bool blank = false;
    int floor = 0;
    bool determined = false;
    std::optional<int> value;
};

inline std::vector<TableCell> table_cells(const TableSpec& spec)
{
    spec.validate();
    std::vector<TableCell> cells;
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
        for (int k = spec.k_min; k <= spec.k_max; ++k) {
            TableCell c;
            c.k = k;
            c.n = n;
            if (n <= k) {
                c.blank = true;
            } else {
                const Parameters p{spec.d, k, n};
                c.floor = n / k;
                c.determined = determination_predicates(p).omnibus;
                if (c.determined) c.value = tc_bounds(p, spec.s).value;
            }
            cells.push_back(c);
        }
    }
    return cells;
}

inline std::string render_table(const TableSpec& spec)
{
    const auto cells = table_cells(spec);
    std::ostringstream out;
    switch (spec.format) {
    case TableFormat::csv:
        out << "k,n,floor,determined,value\n";
        for (const auto& c : cells) {
            out << c.k << ',' << c.n << ',';
            if (c.blank) {
                out << ",,\n";
                continue;
            }
            out << c.floor << ',' << (c.determined ? "true" : "false") << ',';
            if (c.value) out << *c.value;
            out << '\n';
        }
        break;
    case TableFormat::json: {
        Json j;
        j["d"] = spec.d;
        j["s"] = spec.s;
        j["cells"] = Json::array();
        for (const auto& c : cells) {
            Json cj{{"k", c.k}, {"n", c.n}};
            if (c.blank) {
                cj["blank"] = true;
            } else {
                cj["floor"] = c.floor;
                cj["determined"] = c.determined;
                cj["value"] = c.value ? Json(*c.value) : Json("?");
            }
            j["cells"].push_back(cj);
        }
        out << j.dump() << '\n';
        break;
    }
    case TableFormat::ascii: {
        const int width = 4;
        out << std::setw(width) << "n\\k";
        for (int k = spec.k_min; k <= spec.k_max; ++k) out << std::setw(width) << k;
        out << '\n';
        std::size_t i = 0;
        for (int n = spec.n_min; n <= spec.n_max; ++n) {
            out << std::setw(width) << n;
            for (int k = spec.k_min; k <= spec.k_max; ++k, ++i) {
                const auto& c = cells[i];
                std::string text = c.blank ? "" : c.value ? std::to_string(*c.value) : "?";
                out << std::setw(width) << text;
            }
            out << '\n';
        }
        break;
    }
    }
    return out.str();
}

}  // namespace noke
