#pragma once

// JSON reading and writing for spaces, coverings, operators, covers,
// certificates, complexes and reports. Complex entries are [re, im] pairs.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "coarse/dimension.hpp"
#include "coarse/multiscale.hpp"
#include "coarse/operators.hpp"
#include "coarse/report.hpp"

namespace coarse {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        fail(ErrorKind::Input, std::string("missing field '") + key + "'");
    return j.at(key);
}

template <class T>
T get_as(const json& j, const char* what)
{
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Input, std::string("bad ") + what + ": " + e.what());
    }
}

/// Rounds to 12 significant digits so that reports print identically.
inline double round12(double v)
{
    if (!std::isfinite(v))
        return v;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

} // namespace detail

// --- relations and sets ----------------------------------------------------------

inline json pairs_to_json(const std::vector<Pair>& pairs)
{
    json a = json::array();
    for (const auto& [x, y] : pairs)
        a.push_back({x, y});
    return a;
}

inline std::vector<Pair> pairs_from_json(const json& j)
{
    std::vector<Pair> out;
    if (!j.is_array())
        fail(ErrorKind::Input, "pair list must be an array");
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2)
            fail(ErrorKind::Input, "a pair must be a two-element array");
        out.emplace_back(detail::get_as<PointId>(p[0], "pair entry"), detail::get_as<PointId>(p[1], "pair entry"));
    }
    return out;
}

inline json entourage_to_json(const Entourage& e) { return {{"pairs", pairs_to_json(e.pairs())}}; }

inline Entourage entourage_from_json(const json& j) { return Entourage(pairs_from_json(detail::field(j, "pairs"))); }

inline PointSet point_set_from_json(const json& j, const char* what)
{
    auto v = detail::get_as<std::vector<PointId>>(j, what);
    return make_point_set(std::move(v));
}

// --- spaces ------------------------------------------------------------------------------

inline json space_to_json(const FiniteCoarseSpace& s)
{
    json ents = json::array();
    for (const auto& e : s.entourages())
        ents.push_back({{"name", e.name}, {"pairs", pairs_to_json(e.relation.pairs())}});
    return {{"points", s.points()}, {"entourages", ents}};
}

inline FiniteCoarseSpace space_from_json(const json& j)
{
    auto pts = detail::get_as<std::vector<PointId>>(detail::field(j, "points"), "points");
    std::vector<NamedEntourage> ents;
    if (j.contains("entourages"))
        for (const auto& e : j.at("entourages"))
            ents.push_back({detail::get_as<std::string>(detail::field(e, "name"), "entourage name"),
                            Entourage(pairs_from_json(detail::field(e, "pairs")))});
    return FiniteCoarseSpace(std::move(pts), std::move(ents));
}

// --- groups ----------------------------------------------------------------------------------

inline json action_to_json(const GroupAction& a)
{
    json perms = json::array();
    for (const auto& p : a.permutations()) {
        json one = json::array();
        for (const auto& [x, gx] : p)
            one.push_back({x, gx});
        perms.push_back(one);
    }
    return {{"table", a.group().table()}, {"action", perms}};
}

inline GroupAction action_from_json(const json& j, const PointSet& points)
{
    FiniteGroup g(detail::get_as<std::vector<std::vector<int>>>(detail::field(j, "table"), "group table"));
    std::vector<std::map<PointId, PointId>> perms;
    for (const auto& p : detail::field(j, "action")) {
        std::map<PointId, PointId> m;
        for (const auto& [x, gx] : pairs_from_json(p))
            if (!m.emplace(x, gx).second)
                fail(ErrorKind::Input, "permutation lists a point twice");
        perms.push_back(std::move(m));
    }
    return GroupAction(std::move(g), std::move(perms), points);
}

// --- coverings -------------------------------------------------------------------------------

inline json big_family_to_json(const BigFamily& b)
{
    json a = json::array();
    for (const auto& m : b.members())
        a.push_back({{"index", m.index}, {"subset", m.subset}});
    return a;
}

inline BigFamily big_family_from_json(const json& j)
{
    std::vector<BigFamilyMember> ms;
    for (const auto& m : j)
        ms.push_back({detail::get_as<int>(detail::field(m, "index"), "member index"),
                      point_set_from_json(detail::field(m, "subset"), "member subset")});
    return BigFamily(std::move(ms));
}

inline json covering_to_json(const BranchedCovering& c)
{
    json f = json::array();
    for (const auto& [x, y] : c.map())
        f.push_back({x, y});
    json j = {{"source", space_to_json(c.source())},
              {"target", space_to_json(c.target())},
              {"f", f},
              {"connection", entourage_to_json(c.connection())},
              {"big_family", big_family_to_json(c.big_family())}};
    if (c.deck())
        j["deck"] = action_to_json(*c.deck());
    return j;
}

inline BranchedCovering covering_from_json(const json& j)
{
    FiniteCoarseSpace src = space_from_json(detail::field(j, "source"));
    FiniteCoarseSpace tgt = space_from_json(detail::field(j, "target"));
    std::map<PointId, PointId> f;
    for (const auto& [x, y] : pairs_from_json(detail::field(j, "f")))
        if (!f.emplace(x, y).second)
            fail(ErrorKind::Input, "map lists point " + std::to_string(x) + " twice");
    std::optional<GroupAction> deck;
    if (j.contains("deck") && !j.at("deck").is_null())
        deck = action_from_json(j.at("deck"), src.points());
    return BranchedCovering(std::move(src), std::move(tgt), std::move(f),
                            entourage_from_json(detail::field(j, "connection")),
                            big_family_from_json(detail::field(j, "big_family")), std::move(deck));
}

// --- operators ------------------------------------------------------------------------------

inline json matrix_to_json(const Block& b)
{
    json rows = json::array();
    for (int i = 0; i < b.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < b.cols(); ++k)
            row.push_back({b(i, k).real(), b(i, k).imag()});
        rows.push_back(row);
    }
    return rows;
}

inline Block matrix_from_json(const json& j, int rows, int cols)
{
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        fail(ErrorKind::ShapeMismatch, "matrix has the wrong number of rows");
    Block b(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
            fail(ErrorKind::ShapeMismatch, "matrix row has the wrong length");
        for (int k = 0; k < cols; ++k) {
            const auto& e = j[i][k];
            if (e.is_number())
                b(i, k) = e.get<double>();
            else if (e.is_array() && e.size() == 2)
                b(i, k) = Complex(detail::get_as<double>(e[0], "entry"), detail::get_as<double>(e[1], "entry"));
            else
                fail(ErrorKind::Input, "matrix entry must be a number or [re, im]");
        }
    }
    return b;
}

inline json dims_to_json(const std::map<PointId, int>& dims)
{
    json o = json::object();
    for (const auto& [x, d] : dims)
        o[std::to_string(x)] = d;
    return o;
}

inline std::map<PointId, int> dims_from_json(const json& j)
{
    if (!j.is_object())
        fail(ErrorKind::Input, "dims must be an object");
    std::map<PointId, int> out;
    for (const auto& [k, v] : j.items()) {
        char* end = nullptr;
        const long long x = std::strtoll(k.c_str(), &end, 10);
        if (k.empty() || *end != '\0')
            fail(ErrorKind::Input, "dims key '" + k + "' is not a point id");
        out[x] = detail::get_as<int>(v, "dimension");
    }
    return out;
}

inline json cocycle_to_json(const ControlledObject& o)
{
    json a = json::array();
    for (const auto& [key, b] : o.cocycle())
        if (!b.isIdentity(0.0))
            a.push_back({{"g", key.first}, {"x", key.second}, {"matrix", matrix_to_json(b)}});
    return a;
}

inline std::map<CocycleKey, Block> cocycle_from_json(const json& j, const std::map<PointId, int>& dims)
{
    std::map<CocycleKey, Block> out;
    for (const auto& e : j) {
        const int g = detail::get_as<int>(detail::field(e, "g"), "cocycle element");
        const PointId x = detail::get_as<PointId>(detail::field(e, "x"), "cocycle point");
        auto it = dims.find(x);
        const int d = it == dims.end() ? 0 : it->second;
        out[{g, x}] = matrix_from_json(detail::field(e, "matrix"), d, d);
    }
    return out;
}

/// Operator file; objects carry "action" plus per-object cocycles when equivariant.
inline json operator_to_json(const ControlledOperator& a)
{
    json blocks = json::array();
    for (const auto& [key, b] : a.blocks())
        blocks.push_back({{"row", key.first}, {"col", key.second}, {"matrix", matrix_to_json(b)}});
    json j = {{"space", space_to_json(*a.space())},
              {"domain_dims", dims_to_json(a.domain().dims())},
              {"codomain_dims", dims_to_json(a.codomain().dims())},
              {"blocks", blocks}};
    if (a.domain().equivariant()) {
        j["action"] = action_to_json(*a.domain().action());
        j["domain_cocycle"] = cocycle_to_json(a.domain());
        j["codomain_cocycle"] = cocycle_to_json(a.codomain());
    }
    return j;
}

inline ControlledOperator operator_from_json(const json& j, SpacePtr space = nullptr)
{
    if (!space)
        space = std::make_shared<const FiniteCoarseSpace>(space_from_json(detail::field(j, "space")));
    const auto dd = dims_from_json(detail::field(j, "domain_dims"));
    const auto cd = dims_from_json(detail::field(j, "codomain_dims"));
    ControlledObject dom, cod;
    if (j.contains("action") && !j.at("action").is_null()) {
        GroupAction act = action_from_json(j.at("action"), space->points());
        dom = ControlledObject(space, dd, act, cocycle_from_json(j.value("domain_cocycle", json::array()), dd));
        cod = ControlledObject(space, cd, act, cocycle_from_json(j.value("codomain_cocycle", json::array()), cd));
    } else {
        dom = ControlledObject(space, dd);
        cod = ControlledObject(space, cd);
    }
    std::map<Pair, Block> blocks;
    for (const auto& b : detail::field(j, "blocks")) {
        const PointId r = detail::get_as<PointId>(detail::field(b, "row"), "block row");
        const PointId c = detail::get_as<PointId>(detail::field(b, "col"), "block col");
        if (!blocks.emplace(Pair{r, c}, matrix_from_json(detail::field(b, "matrix"), cod.dim(r), dom.dim(c))).second)
            fail(ErrorKind::Input, "block listed twice");
    }
    return ControlledOperator(std::move(dom), std::move(cod), std::move(blocks));
}

/// Exact equality of objects and blocks.
inline bool identical(const ControlledOperator& a, const ControlledOperator& b)
{
    if (!a.domain().matches(b.domain()) || !a.codomain().matches(b.codomain()))
        return false;
    if (a.blocks().size() != b.blocks().size())
        return false;
    for (const auto& [key, blk] : a.blocks()) {
        auto it = b.blocks().find(key);
        if (it == b.blocks().end() || it->second.rows() != blk.rows() || it->second.cols() != blk.cols() ||
            it->second != blk)
            return false;
    }
    return true;
}

// --- covers, certificates, complexes ----------------------------------------------------------

inline json cover_to_json(const CoverFamily& w)
{
    json j = {{"parts", w.parts()}, {"multiplicity", w.multiplicity()}};
    if (w.lebesgue_witness())
        j["lebesgue"] = entourage_to_json(*w.lebesgue_witness());
    return j;
}

inline CoverFamily cover_from_json(const json& j)
{
    auto parts = detail::get_as<std::vector<PointSet>>(detail::field(j, "parts"), "parts");
    std::optional<Entourage> leb;
    if (j.contains("lebesgue") && !j.at("lebesgue").is_null())
        leb = entourage_from_json(j.at("lebesgue"));
    return CoverFamily(std::move(parts), std::move(leb));
}

inline json certificate_to_json(const DimensionCertificate& c)
{
    return {{"scale_name", c.scale_name},
            {"scale", entourage_to_json(c.scale)},
            {"cover", cover_to_json(c.cover)},
            {"dimension", c.dimension},
            {"depth", c.depth}};
}

inline DimensionCertificate certificate_from_json(const json& j)
{
    DimensionCertificate c;
    c.scale_name = j.value("scale_name", std::string{});
    c.scale = entourage_from_json(detail::field(j, "scale"));
    c.cover = cover_from_json(detail::field(j, "cover"));
    c.dimension = detail::get_as<int>(detail::field(j, "dimension"), "dimension");
    c.depth = j.value("depth", 3);
    return c;
}

inline json complex_to_json(const SimplicialComplex& k)
{
    return {{"vertices", k.vertices}, {"max_dim", k.max_dim}, {"simplices", k.simplices}};
}

inline SimplicialComplex complex_from_json(const json& j)
{
    SimplicialComplex k;
    k.vertices = point_set_from_json(detail::field(j, "vertices"), "vertices");
    k.max_dim = detail::get_as<int>(detail::field(j, "max_dim"), "max_dim");
    for (const auto& s : detail::field(j, "simplices"))
        k.simplices.push_back(point_set_from_json(s, "simplex"));
    std::sort(k.simplices.begin(), k.simplices.end(), SimplicialComplex::order);
    return k;
}

// --- reports ---------------------------------------------------------------------------------

inline json report_to_json(const VerificationReport& r)
{
    json checks = json::array();
    for (const auto& c : r.checks) {
        json o = {{"condition", c.condition},
                  {"scale", c.scale},
                  {"z_index", c.z_index ? json(*c.z_index) : json(nullptr)},
                  {"pass", c.pass},
                  {"witnesses", pairs_to_json(c.witnesses)},
                  {"detail", c.detail}};
        checks.push_back(o);
    }
    json ms = json::array();
    for (const auto& m : r.measurements)
        ms.push_back({{"name", m.name}, {"value", detail::round12(m.value)}});
    return {{"subject", r.subject}, {"depth", r.depth}, {"all_pass", r.all_pass()}, {"checks", checks},
            {"measurements", ms}};
}

/// Inverse of report_to_json (measurements come back rounded).
inline VerificationReport report_from_json(const json& j)
{
    VerificationReport r;
    r.subject = j.value("subject", std::string{});
    r.depth = j.value("depth", 3);
    for (const auto& o : detail::field(j, "checks")) {
        Check c;
        c.condition = detail::get_as<std::string>(detail::field(o, "condition"), "condition");
        c.scale = o.value("scale", std::string{});
        if (o.contains("z_index") && !o.at("z_index").is_null())
            c.z_index = o.at("z_index").get<int>();
        c.pass = detail::get_as<bool>(detail::field(o, "pass"), "pass");
        if (o.contains("witnesses"))
            c.witnesses = pairs_from_json(o.at("witnesses"));
        c.detail = o.value("detail", std::string{});
        r.checks.push_back(std::move(c));
    }
    if (j.contains("measurements"))
        for (const auto& m : j.at("measurements"))
            r.measurements.push_back({detail::get_as<std::string>(detail::field(m, "name"), "name"),
                                      detail::get_as<double>(detail::field(m, "value"), "value")});
    return r;
}

inline VerificationReport rounded(VerificationReport r)
{
    for (auto& m : r.measurements)
        m.value = detail::round12(m.value);
    return r;
}

// --- files --------------------------------------------------------------------------------------

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::Input, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Input, path + ": " + e.what());
    }
}

/// Pretty-printed with a trailing newline.
inline void write_json_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
        fail(ErrorKind::Input, "cannot write " + path);
    out << j.dump(2) << '\n';
}

} // namespace coarse
