#pragma once

#include "noke/invariants.hpp"

#include <json.hpp>

#include <charconv>

namespace noke {

using Json = nlohmann::ordered_json;

/// Malformed input. `where` is a JSON pointer, or "byte N" for syntax errors.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where))
    {
    }
    [[nodiscard]] const std::string& where() const { return where_; }

private:
    std::string where_;
};

// ---------------------------------------------------------------------------
// Forests

inline Json forest_to_json(const OrientedForest& f, const Parameters& p)
{
    Json j;
    j["d"] = p.d;
    j["k"] = p.k;
    j["n"] = p.n;
    j["squares"] = Json::array();
    for (const auto& sq : f.squares) j["squares"].push_back(sq);
    std::vector<std::optional<std::size_t>> attached(f.rounds.size());
    for (const Edge& e : f.edges) {
        if (e.tail.is_round() && e.head.is_square()) attached[e.tail.index] = e.head.index;
        if (e.head.is_round() && e.tail.is_square()) attached[e.head.index] = e.tail.index;
    }
    j["rounds"] = Json::array();
    for (std::size_t r = 0; r < f.rounds.size(); ++r) {
        Json rj;
        rj["member"] = f.rounds[r];
        if (attached[r]) rj["attached"] = *attached[r];
        j["rounds"].push_back(rj);
    }
    auto ref = [](const VertexRef& v) { return (v.is_square() ? "s" : "r") + std::to_string(v.index); };
    j["edges"] = Json::array();
    for (const Edge& e : f.edges) j["edges"].push_back(Json{{"tail", ref(e.tail)}, {"head", ref(e.head)}});
    j["orientationOrder"] = Json::array();
    for (const auto& item : f.orientation)
        j["orientationOrder"].push_back((item.kind == OrientationItem::Kind::square ? "s" : "e") +
                                        std::to_string(item.index));
    return j;
}

inline Json forest_to_json(const CanonicalForest& f, const Parameters& p)
{
    return forest_to_json(f.to_oriented(), p);
}

namespace detail {

inline const Json& member(const Json& j, const char* key, const std::string& ptr)
{
    if (!j.is_object()) throw ParseError(ptr, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(ptr, std::string("missing field \"") + key + "\"");
    return *it;
}

inline int as_int(const Json& j, const std::string& ptr)
{
    if (!j.is_number_integer()) throw ParseError(ptr, "expected an integer");
    const auto v = j.get<long long>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ParseError(ptr, "integer out of range");
    return static_cast<int>(v);
}

inline std::size_t parse_id(const Json& j, char prefix, const std::string& ptr)
{
    if (!j.is_string()) throw ParseError(ptr, std::string("expected a string id \"") + prefix + "<index>\"");
    const auto s = j.get<std::string>();
    std::size_t v = 0;
    if (s.size() < 2 || s[0] != prefix) throw ParseError(ptr, "bad id \"" + s + "\"");
    auto [end, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw ParseError(ptr, "bad id \"" + s + "\"");
    return v;
}

inline VertexRef parse_vertex(const Json& j, const std::string& ptr)
{
    if (j.is_string() && !j.get<std::string>().empty() && j.get<std::string>()[0] == 'r')
        return VertexRef::round(parse_id(j, 'r', ptr));
    return VertexRef::square(parse_id(j, 's', ptr));
}

}  // namespace detail

struct ParsedForest {
    Parameters params;
    OrientedForest forest;
};

/// Parses and validates forest JSON; rule violations are reported as
/// ParseError naming the rule.
inline ParsedForest parse_forest(const Json& j, const std::string& ptr = "")
{
    using detail::as_int;
    using detail::member;
    ParsedForest out;
    out.params = {as_int(member(j, "d", ptr), ptr + "/d"), as_int(member(j, "k", ptr), ptr + "/k"),
                  as_int(member(j, "n", ptr), ptr + "/n")};
    try {
        out.params.validate_enumerable();
    } catch (const std::exception& e) {
        throw ParseError(ptr, e.what());
    }
    OrientedForest& f = out.forest;

    const Json& squares = member(j, "squares", ptr);
    if (!squares.is_array()) throw ParseError(ptr + "/squares", "expected an array");
    for (std::size_t i = 0; i < squares.size(); ++i) {
        const std::string sp = ptr + "/squares/" + std::to_string(i);
        if (!squares[i].is_array()) throw ParseError(sp, "expected an array of members");
        std::vector<int> sq;
        for (std::size_t t = 0; t < squares[i].size(); ++t) sq.push_back(as_int(squares[i][t], sp + "/" + std::to_string(t)));
        f.squares.push_back(std::move(sq));
    }

    const Json& rounds = member(j, "rounds", ptr);
    if (!rounds.is_array()) throw ParseError(ptr + "/rounds", "expected an array");
    std::vector<std::optional<std::size_t>> declared(rounds.size());
    for (std::size_t r = 0; r < rounds.size(); ++r) {
        const std::string rp = ptr + "/rounds/" + std::to_string(r);
        f.rounds.push_back(as_int(member(rounds[r], "member", rp), rp + "/member"));
        if (rounds[r].contains("attached")) {
            const int a = as_int(rounds[r]["attached"], rp + "/attached");
            if (a < 0) throw ParseError(rp + "/attached", "negative square index");
            declared[r] = static_cast<std::size_t>(a);
        }
    }

    const Json& edges = member(j, "edges", ptr);
    if (!edges.is_array()) throw ParseError(ptr + "/edges", "expected an array");
    for (std::size_t t = 0; t < edges.size(); ++t) {
        const std::string ep = ptr + "/edges/" + std::to_string(t);
        f.edges.push_back({detail::parse_vertex(member(edges[t], "tail", ep), ep + "/tail"),
                           detail::parse_vertex(member(edges[t], "head", ep), ep + "/head")});
    }

    const Json& order = member(j, "orientationOrder", ptr);
    if (!order.is_array()) throw ParseError(ptr + "/orientationOrder", "expected an array");
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::string op = ptr + "/orientationOrder/" + std::to_string(i);
        if (order[i].is_string() && order[i].get<std::string>().starts_with("e"))
            f.orientation.push_back(OrientationItem::edge(detail::parse_id(order[i], 'e', op)));
        else
            f.orientation.push_back(OrientationItem::square(detail::parse_id(order[i], 's', op)));
    }

    const auto report = validate_forest(f, out.params);
    if (!report.valid())
        throw ParseError(ptr, "invalid forest: " + report.violations.front().rule + " (" +
                                  report.violations.front().message + ")");

    // "attached" must agree with the edge list
    std::vector<std::optional<std::size_t>> actual(f.rounds.size());
    for (const Edge& e : f.edges) {
        if (e.tail.is_round()) actual[e.tail.index] = e.head.index;
        if (e.head.is_round()) actual[e.head.index] = e.tail.index;
    }
    for (std::size_t r = 0; r < f.rounds.size(); ++r)
        if (declared[r] != actual[r])
            throw ParseError(ptr + "/rounds/" + std::to_string(r), "\"attached\" disagrees with the edge list");
    return out;
}

inline Json parse_json_text(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("byte " + std::to_string(e.byte), "malformed JSON");
    }
}

// ---------------------------------------------------------------------------
// Classes

inline Json coefficient_to_json(const Integer& c)
{
    if (c >= std::numeric_limits<long long>::min() && c <= std::numeric_limits<long long>::max())
        return static_cast<long long>(c);
    return c.str();
}

inline Integer coefficient_from_json(const Json& j, const std::string& ptr)
{
    if (j.is_number_integer()) return Integer(j.get<long long>());
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
        if (s.size() == start || !std::all_of(s.begin() + static_cast<long>(start), s.end(), [](char ch) {
                return ch >= '0' && ch <= '9';
            }))
            throw ParseError(ptr, "coefficient string is not an integer");
        return Integer(s);
    }
    throw ParseError(ptr, "expected an integer coefficient");
}

inline Json class_to_json(const CohomologyClass& c)
{
    Json j;
    j["ring"] = ring_name(c.ring());
    j["d"] = c.params().d;
    j["k"] = c.params().k;
    j["n"] = c.params().n;
    j["terms"] = Json::array();
    for (const auto& [f, v] : c.terms())
        j["terms"].push_back(Json{{"coeff", coefficient_to_json(v)}, {"forest", forest_to_json(f, c.params())}});
    return j;
}

inline std::string emit_class(const CohomologyClass& c) { return class_to_json(c).dump(); }

/// Parses class JSON. Terms may be any valid oriented forests; they are
/// brought to canonical form and straightened. Parameters come from the
/// optional top-level d/k/n, else from the terms, else from `fallback`.
inline CohomologyClass parse_class(const Json& j, std::optional<Parameters> fallback = std::nullopt)
{
    const Json& ring_j = detail::member(j, "ring", "");
    if (!ring_j.is_string()) throw ParseError("/ring", "expected \"Z\" or \"Z2\"");
    CoefficientRing ring;
    if (ring_j == "Z")
        ring = CoefficientRing::integers;
    else if (ring_j == "Z2")
        ring = CoefficientRing::mod2;
    else
        throw ParseError("/ring", "expected \"Z\" or \"Z2\"");

    const Json& terms = detail::member(j, "terms", "");
    if (!terms.is_array()) throw ParseError("/terms", "expected an array");
    std::optional<Parameters> params;
    if (j.contains("d") || j.contains("k") || j.contains("n")) {
        params = Parameters{detail::as_int(detail::member(j, "d", ""), "/d"), detail::as_int(detail::member(j, "k", ""), "/k"),
                            detail::as_int(detail::member(j, "n", ""), "/n")};
        try {
            params->validate_enumerable();
        } catch (const std::exception& e) {
            throw ParseError("", e.what());
        }
    }
    std::map<int, FormalSum> by_degree;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string tp = "/terms/" + std::to_string(t);
        const Integer coeff = coefficient_from_json(detail::member(terms[t], "coeff", tp), tp + "/coeff");
        const auto parsed = parse_forest(detail::member(terms[t], "forest", tp), tp + "/forest");
        if (params && !(*params == parsed.params))
            throw ParseError(tp + "/forest", "parameters " + parsed.params.to_string() + " differ from " +
                                                 params->to_string());
        params = parsed.params;
        const auto sc = canonical_sign_form(parsed.forest, parsed.params);
        const int deg = sc.forest.degree(parsed.params);
        by_degree.try_emplace(deg, parsed.params, ring).first->second.add(sc.forest, coeff * sc.sign);
    }
    if (!params) params = fallback;
    if (!params) throw ParseError("/terms", "empty class without parameters");
    CohomologyClass out(*params, ring);
    for (const auto& [deg, sum] : by_degree) {
        bool all_basic = true;
        for (const auto& [f, v] : sum.terms()) all_basic = all_basic && is_basic(f);
        if (all_basic) {
            for (const auto& [f, v] : sum.terms()) out.add_trusted(f, v);
        } else {
            const auto straight = straighten(sum, *params);
            for (const auto& [f, v] : straight.terms()) out.add_trusted(f, v);
        }
    }
    return out;
}

inline CohomologyClass parse_class(const std::string& text, std::optional<Parameters> fallback = std::nullopt)
{
    return parse_class(parse_json_text(text), fallback);
}

// ---------------------------------------------------------------------------
// Reports

inline Json betti_to_json(const BettiTable& b)
{
    Json j = Json::object();
    for (const auto& [deg, rank] : b) j[std::to_string(deg)] = rank;
    return j;
}

inline Json tensor_to_json(const TensorElement& t)
{
    Json j;
    j["ring"] = ring_name(t.ring());
    j["s"] = t.s();
    j["terms"] = Json::array();
    for (const auto& [key, v] : t.terms()) {
        Json factors = Json::array();
        for (const auto& f : key) factors.push_back(forest_to_json(f, t.params()));
        j["terms"].push_back(Json{{"coeff", coefficient_to_json(v)}, {"factors", factors}});
    }
    return j;
}

inline Json certificate_to_json(const WitnessCertificate& w)
{
    Json j;
    j["factors"] = Json::array();
    for (const auto& f : w.factors) j["factors"].push_back(tensor_to_json(f));
    j["product"] = tensor_to_json(w.product);
    j["productNonzeroIn"] = w.product_degree;
    j["verified"] = w.verified;
    return j;
}

inline Json length_report_to_json(const LengthReport& r)
{
    Json j;
    j["value"] = r.value;
    j["mode"] = r.mode == SearchMode::witness ? "witness" : "exhaustive";
    j["upperBound"] = r.upper_bound_argument;
    if (!r.nonzero_per_length.empty()) j["nonzeroProductsPerLength"] = r.nonzero_per_length;
    j["certificate"] = certificate_to_json(r.witness);
    return j;
}

inline Json tc_report_to_json(const Parameters& p, const TcBoundsReport& r)
{
    Json j;
    j["d"] = p.d;
    j["k"] = p.k;
    j["n"] = p.n;
    j["s"] = r.s;
    j["lower"] = r.lower;
    j["upperPlain"] = r.upper_plain;
    j["upperImproved"] = r.upper_improved;
    j["determined"] = r.determined;
    j["source"] = r.source;
    if (r.value) j["value"] = *r.value;
    return j;
}

inline Json predicates_to_json(const Parameters& p, const DeterminationPredicates& d)
{
    Json j;
    j["d"] = p.d;
    j["k"] = p.k;
    j["n"] = p.n;
    j["omnibus"] = d.omnibus;
    if (d.miller_formality)
        j["millerFormality"] = *d.miller_formality;
    else
        j["millerFormality"] = "not-applicable";
    return j;
}

}  // namespace noke
