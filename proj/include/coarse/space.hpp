#pragma once

// Finite coarse spaces: point sets, entourages as explicit relations, big
// families and cover families, plus the measuring primitives used by the
// dimension and covering code (images, thinnings, Lebesgue checks, ...).

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coarse/error.hpp"

namespace coarse {

using PointId = std::int64_t;
/// An ordered pair (x', x); relations read "x' is close to x".
using Pair = std::pair<PointId, PointId>;
/// Sorted, duplicate-free list of point ids.
using PointSet = std::vector<PointId>;

inline PointSet make_point_set(std::vector<PointId> ids)
{
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

inline bool contains(const PointSet& set, PointId x)
{
    return std::binary_search(set.begin(), set.end(), x);
}

inline bool is_subset(const PointSet& a, const PointSet& b)
{
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline PointSet set_union(const PointSet& a, const PointSet& b)
{
    PointSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline PointSet set_intersection(const PointSet& a, const PointSet& b)
{
    PointSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline PointSet set_difference(const PointSet& a, const PointSet& b)
{
    PointSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// A relation on point ids. Immutable; pairs are kept sorted and unique, with
/// a second index sorted by the right coordinate so that U[x] is a range query.
class Entourage {
public:
    Entourage() = default;

    explicit Entourage(std::vector<Pair> pairs) : rows_(std::move(pairs))
    {
        std::sort(rows_.begin(), rows_.end());
        rows_.erase(std::unique(rows_.begin(), rows_.end()), rows_.end());
        cols_.reserve(rows_.size());
        for (const auto& [a, b] : rows_)
            cols_.emplace_back(b, a);
        std::sort(cols_.begin(), cols_.end());
    }

    static Entourage diagonal(const PointSet& points)
    {
        std::vector<Pair> pairs;
        pairs.reserve(points.size());
        for (PointId x : points)
            pairs.emplace_back(x, x);
        return Entourage(std::move(pairs));
    }

    static Entourage full(const PointSet& points)
    {
        std::vector<Pair> pairs;
        pairs.reserve(points.size() * points.size());
        for (PointId a : points)
            for (PointId b : points)
                pairs.emplace_back(a, b);
        return Entourage(std::move(pairs));
    }

    const std::vector<Pair>& pairs() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    bool contains(PointId xp, PointId x) const
    {
        return std::binary_search(rows_.begin(), rows_.end(), Pair{xp, x});
    }

    /// U[x] = {x' : (x', x) in U}.
    PointSet image_of(PointId x) const
    {
        auto lo = std::lower_bound(cols_.begin(), cols_.end(), Pair{x, INT64_MIN});
        PointSet out;
        for (auto it = lo; it != cols_.end() && it->first == x; ++it)
            out.push_back(it->second);
        return out;
    }

    /// {x : (x', x) in U}.
    PointSet preimage_of(PointId xp) const
    {
        auto lo = std::lower_bound(rows_.begin(), rows_.end(), Pair{xp, INT64_MIN});
        PointSet out;
        for (auto it = lo; it != rows_.end() && it->first == xp; ++it)
            out.push_back(it->second);
        return out;
    }

    bool subset_of(const Entourage& other) const
    {
        return std::includes(other.rows_.begin(), other.rows_.end(), rows_.begin(), rows_.end());
    }

    /// Pairs of this relation missing from `other`.
    std::vector<Pair> missing_from(const Entourage& other) const
    {
        std::vector<Pair> out;
        std::set_difference(rows_.begin(), rows_.end(), other.rows_.begin(), other.rows_.end(),
                            std::back_inserter(out));
        return out;
    }

    /// Every id mentioned by some pair.
    PointSet support() const
    {
        std::vector<PointId> ids;
        ids.reserve(2 * rows_.size());
        for (const auto& [a, b] : rows_) {
            ids.push_back(a);
            ids.push_back(b);
        }
        return make_point_set(std::move(ids));
    }

    friend bool operator==(const Entourage& a, const Entourage& b) { return a.rows_ == b.rows_; }

private:
    std::vector<Pair> rows_;
    std::vector<Pair> cols_; // (x, x') sorted
};

// --- relation calculus ------------------------------------------------------

/// U o V = {(a, c) : exists b with (a, b) in U and (b, c) in V}.
inline Entourage compose(const Entourage& u, const Entourage& v)
{
    std::vector<Pair> out;
    for (const auto& [a, b] : u.pairs())
        for (PointId c : v.preimage_of(b))
            out.emplace_back(a, c);
    return Entourage(std::move(out));
}

inline Entourage inverse(const Entourage& u)
{
    std::vector<Pair> out;
    out.reserve(u.size());
    for (const auto& [a, b] : u.pairs())
        out.emplace_back(b, a);
    return Entourage(std::move(out));
}

inline Entourage unite(const Entourage& u, const Entourage& v)
{
    std::vector<Pair> out;
    std::set_union(u.pairs().begin(), u.pairs().end(), v.pairs().begin(), v.pairs().end(),
                   std::back_inserter(out));
    return Entourage(std::move(out));
}

inline Entourage intersect(const Entourage& u, const Entourage& v)
{
    std::vector<Pair> out;
    std::set_intersection(u.pairs().begin(), u.pairs().end(), v.pairs().begin(), v.pairs().end(),
                          std::back_inserter(out));
    return Entourage(std::move(out));
}

inline Entourage symmetrize(const Entourage& u) { return unite(u, inverse(u)); }

inline bool is_symmetric(const Entourage& u) { return u == inverse(u); }

/// U[A] = {x' : exists x in A with (x', x) in U}.
inline PointSet ent_image(const Entourage& u, const PointSet& a)
{
    std::vector<PointId> out;
    for (PointId x : a) {
        auto img = u.image_of(x);
        out.insert(out.end(), img.begin(), img.end());
    }
    return make_point_set(std::move(out));
}

/// The U-thinning U(B) = {x in ambient : U[x] subset of B}.
inline PointSet thinning(const Entourage& u, const PointSet& b, const PointSet& ambient)
{
    PointSet out;
    for (PointId x : ambient)
        if (is_subset(u.image_of(x), b))
            out.push_back(x);
    return out;
}

/// B is U-bounded iff B x B is contained in U.
inline bool is_bounded(const Entourage& u, const PointSet& b)
{
    for (PointId x : b)
        for (PointId y : b)
            if (!u.contains(x, y))
                return false;
    return true;
}

/// Right restriction V_A = V cap (points x A).
inline Entourage restrict_entourage(const Entourage& v, const PointSet& a)
{
    std::vector<Pair> out;
    for (const auto& p : v.pairs())
        if (contains(a, p.second))
            out.push_back(p);
    return Entourage(std::move(out));
}

/// V cap (A x A).
inline Entourage restrict_both(const Entourage& v, const PointSet& a)
{
    std::vector<Pair> out;
    for (const auto& p : v.pairs())
        if (contains(a, p.first) && contains(a, p.second))
            out.push_back(p);
    return Entourage(std::move(out));
}

/// B x B as a relation.
inline Entourage square(const PointSet& b)
{
    return Entourage::full(b);
}

// --- maximal bounded sets ---------------------------------------------------

inline constexpr std::size_t kDefaultCliqueCap = std::size_t{1} << 20;

namespace detail {

struct CliqueSearch {
    std::vector<std::vector<int>> adj; // sorted neighbour lists
    std::vector<PointId> ids;
    std::vector<PointSet> found;
    std::size_t cap;

    static std::vector<int> intersect_sorted(const std::vector<int>& a, const std::vector<int>& b)
    {
        std::vector<int> out;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }

    void run(std::vector<int>& r, std::vector<int> p, std::vector<int> x)
    {
        if (p.empty() && x.empty()) {
            if (found.size() >= cap)
                fail(ErrorKind::CapExceeded, "more than " + std::to_string(cap) + " maximal bounded sets");
            PointSet clique;
            for (int v : r)
                clique.push_back(ids[v]);
            found.push_back(make_point_set(std::move(clique)));
            return;
        }
        // Tomita pivot: the vertex of P u X with most neighbours in P.
        int pivot = -1;
        std::size_t best = 0;
        for (const auto* s : {&p, &x})
            for (int u : *s) {
                std::size_t c = intersect_sorted(adj[u], p).size();
                if (pivot < 0 || c > best) {
                    pivot = u;
                    best = c;
                }
            }
        std::vector<int> candidates;
        std::set_difference(p.begin(), p.end(), adj[pivot].begin(), adj[pivot].end(),
                            std::back_inserter(candidates));
        for (int v : candidates) {
            r.push_back(v);
            run(r, intersect_sorted(p, adj[v]), intersect_sorted(x, adj[v]));
            r.pop_back();
            p.erase(std::lower_bound(p.begin(), p.end(), v));
            x.insert(std::lower_bound(x.begin(), x.end(), v), v);
        }
    }
};

} // namespace detail

/// Maximal U-bounded subsets (maximal cliques of the graph whose vertices are
/// the points with (x, x) in U and whose edges are the pairs related both ways).
inline std::vector<PointSet> maximal_bounded_sets(const Entourage& u, std::size_t cap = kDefaultCliqueCap)
{
    detail::CliqueSearch search;
    search.cap = cap;
    for (const auto& [a, b] : u.pairs())
        if (a == b)
            search.ids.push_back(a);
    std::unordered_map<PointId, int> index;
    for (std::size_t i = 0; i < search.ids.size(); ++i)
        index.emplace(search.ids[i], static_cast<int>(i));
    search.adj.assign(search.ids.size(), {});
    for (const auto& [a, b] : u.pairs()) {
        if (a >= b)
            continue;
        auto ia = index.find(a);
        auto ib = index.find(b);
        if (ia == index.end() || ib == index.end() || !u.contains(b, a))
            continue;
        search.adj[ia->second].push_back(ib->second);
        search.adj[ib->second].push_back(ia->second);
    }
    for (auto& n : search.adj)
        std::sort(n.begin(), n.end());
    std::vector<int> r;
    std::vector<int> p(search.ids.size());
    std::iota(p.begin(), p.end(), 0);
    search.run(r, std::move(p), {});
    std::sort(search.found.begin(), search.found.end());
    return std::move(search.found);
}

// --- families ---------------------------------------------------------------

/// An indexed family of subsets (a cover, or a candidate dimension certificate).
class CoverFamily {
public:
    CoverFamily() = default;

    explicit CoverFamily(std::vector<PointSet> parts, std::optional<Entourage> lebesgue_witness = std::nullopt)
        : parts_(std::move(parts)), lebesgue_(std::move(lebesgue_witness))
    {
        for (auto& part : parts_)
            part = make_point_set(std::move(part));
        std::map<PointId, std::size_t> counts;
        for (const auto& part : parts_)
            for (PointId x : part)
                mult_ = std::max(mult_, ++counts[x]);
    }

    const std::vector<PointSet>& parts() const { return parts_; }
    std::size_t size() const { return parts_.size(); }
    std::size_t multiplicity() const { return mult_; }
    const std::optional<Entourage>& lebesgue_witness() const { return lebesgue_; }

    /// bd(W) = union of W_i x W_i.
    Entourage bound() const
    {
        std::vector<Pair> pairs;
        for (const auto& part : parts_)
            for (PointId a : part)
                for (PointId b : part)
                    pairs.emplace_back(a, b);
        return Entourage(std::move(pairs));
    }

    PointSet union_of_parts() const
    {
        std::vector<PointId> all;
        for (const auto& part : parts_)
            all.insert(all.end(), part.begin(), part.end());
        return make_point_set(std::move(all));
    }

    /// Parts intersected with `s`; indices are kept aligned (parts may become empty).
    CoverFamily restricted_to(const PointSet& s) const
    {
        std::vector<PointSet> parts;
        parts.reserve(parts_.size());
        for (const auto& part : parts_)
            parts.push_back(set_intersection(part, s));
        return CoverFamily(std::move(parts), lebesgue_);
    }

    CoverFamily without_empty_parts() const
    {
        std::vector<PointSet> parts;
        for (const auto& part : parts_)
            if (!part.empty())
                parts.push_back(part);
        return CoverFamily(std::move(parts), lebesgue_);
    }

    friend bool operator==(const CoverFamily& a, const CoverFamily& b) { return a.parts_ == b.parts_; }

private:
    std::vector<PointSet> parts_;
    std::optional<Entourage> lebesgue_;
    std::size_t mult_ = 0;
};

inline std::size_t multiplicity(const CoverFamily& w) { return w.multiplicity(); }

struct LebesgueResult {
    bool ok = true;
    PointSet witness; // a maximal bounded set contained in no part
    explicit operator bool() const { return ok; }
};

/// Whether every U-bounded subset lies in some part, via maximal bounded sets.
inline LebesgueResult check_lebesgue(const Entourage& u, const CoverFamily& w,
                                     std::size_t cap = kDefaultCliqueCap)
{
    if (w.size() == 0)
        return {false, {}}; // the empty set is bounded and lies in no part
    for (const auto& clique : maximal_bounded_sets(u, cap)) {
        bool inside = std::any_of(w.parts().begin(), w.parts().end(),
                                  [&](const PointSet& part) { return is_subset(clique, part); });
        if (!inside)
            return {false, clique};
    }
    return {};
}

inline bool is_lebesgue(const Entourage& u, const CoverFamily& w) { return check_lebesgue(u, w).ok; }

struct BigFamilyMember {
    int index = 0;
    PointSet subset;
    friend bool operator==(const BigFamilyMember&, const BigFamilyMember&) = default;
};

/// An increasing chain Z_0 <= Z_1 <= ... with integer labels.
class BigFamily {
public:
    BigFamily() = default;

    explicit BigFamily(std::vector<BigFamilyMember> members) : members_(std::move(members))
    {
        for (auto& m : members_)
            m.subset = make_point_set(std::move(m.subset));
        for (std::size_t i = 1; i < members_.size(); ++i) {
            if (members_[i].index <= members_[i - 1].index)
                fail(ErrorKind::Input, "big family indices must increase");
            if (!is_subset(members_[i - 1].subset, members_[i].subset))
                fail(ErrorKind::Input, "big family member " + std::to_string(members_[i].index) +
                                           " does not contain its predecessor");
        }
    }

    /// The family (emptyset) with one member.
    static BigFamily trivial(int index = 0) { return BigFamily(std::vector<BigFamilyMember>{BigFamilyMember{index, {}}}); }

    const std::vector<BigFamilyMember>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    const BigFamilyMember& operator[](std::size_t pos) const { return members_.at(pos); }

    std::optional<std::size_t> position_of(int index) const
    {
        for (std::size_t i = 0; i < members_.size(); ++i)
            if (members_[i].index == index)
                return i;
        return std::nullopt;
    }

    PointSet complement(std::size_t pos, const PointSet& ambient) const
    {
        return set_difference(ambient, members_.at(pos).subset);
    }

    friend bool operator==(const BigFamily&, const BigFamily&) = default;

private:
    std::vector<BigFamilyMember> members_;
};

// --- spaces -----------------------------------------------------------------

struct NamedEntourage {
    std::string name;
    Entourage relation;
    friend bool operator==(const NamedEntourage&, const NamedEntourage&) = default;
};

/// A finite point set with a named generating family of entourages. Every
/// subset is bounded; the diagonal is implicitly a member.
class FiniteCoarseSpace {
public:
    FiniteCoarseSpace() = default;

    FiniteCoarseSpace(std::vector<PointId> points, std::vector<NamedEntourage> entourages)
        : entourages_(std::move(entourages))
    {
        const std::size_t given = points.size();
        points_ = make_point_set(std::move(points));
        if (points_.size() != given)
            fail(ErrorKind::Input, "duplicate point ids");
        for (std::size_t i = 0; i < points_.size(); ++i)
            index_.emplace(points_[i], i);
        for (const auto& e : entourages_)
            check_entourage(e.relation, "entourage '" + e.name + "'");
    }

    const PointSet& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool has_point(PointId x) const { return index_.count(x) != 0; }

    std::size_t index_of(PointId x) const
    {
        auto it = index_.find(x);
        if (it == index_.end())
            fail(ErrorKind::Input, "unknown point id " + std::to_string(x));
        return it->second;
    }

    const std::vector<NamedEntourage>& entourages() const { return entourages_; }

    bool has_entourage(std::string_view name) const
    {
        return std::any_of(entourages_.begin(), entourages_.end(),
                           [&](const NamedEntourage& e) { return e.name == name; });
    }

    /// Looks up a generator by name; "diag" always resolves to the diagonal.
    Entourage entourage(std::string_view name) const
    {
        for (const auto& e : entourages_)
            if (e.name == name)
                return e.relation;
        if (name == "diag")
            return diagonal();
        fail(ErrorKind::Input, "no entourage named '" + std::string(name) + "'");
    }

    Entourage diagonal() const { return Entourage::diagonal(points_); }

    bool all_bounded() const { return true; }

    /// (diag u union of generators)^depth: the finite surrogate of the
    /// generated coarse structure.
    Entourage generated(int depth) const
    {
        Entourage step = diagonal();
        for (const auto& e : entourages_)
            step = unite(step, e.relation);
        if (depth <= 0)
            return diagonal();
        Entourage out = step;
        for (int i = 1; i < depth; ++i)
            out = compose(out, step);
        return out;
    }

    void check_subset(const PointSet& s, const std::string& what) const
    {
        for (PointId x : s)
            if (!has_point(x))
                fail(ErrorKind::Input, what + " references unknown point " + std::to_string(x));
    }

    void check_entourage(const Entourage& u, const std::string& what) const
    {
        for (const auto& [a, b] : u.pairs())
            if (!has_point(a) || !has_point(b))
                fail(ErrorKind::Input, what + " references unknown pair (" + std::to_string(a) + "," +
                                           std::to_string(b) + ")");
    }

    friend bool operator==(const FiniteCoarseSpace& a, const FiniteCoarseSpace& b)
    {
        return a.points_ == b.points_ && a.entourages_ == b.entourages_;
    }

private:
    PointSet points_;
    std::vector<NamedEntourage> entourages_;
    std::unordered_map<PointId, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const FiniteCoarseSpace>;

/// Composition with both arguments validated against the same ambient space.
inline Entourage compose(const FiniteCoarseSpace& space, const Entourage& u, const Entourage& v)
{
    space.check_entourage(u, "left operand");
    space.check_entourage(v, "right operand");
    return compose(u, v);
}

/// Coarse components: connected components of the union of all generators,
/// each sorted, ordered by lowest id.
inline std::vector<PointSet> coarse_components(const FiniteCoarseSpace& space)
{
    std::vector<std::size_t> parent(space.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    };
    for (const auto& e : space.entourages())
        for (const auto& [a, b] : e.relation.pairs()) {
            auto ra = find(space.index_of(a));
            auto rb = find(space.index_of(b));
            if (ra != rb)
                parent[std::max(ra, rb)] = std::min(ra, rb);
        }
    std::map<std::size_t, PointSet> groups;
    for (std::size_t i = 0; i < space.size(); ++i)
        groups[find(i)].push_back(space.points()[i]);
    std::vector<PointSet> out;
    for (auto& [root, members] : groups)
        out.push_back(std::move(members));
    std::sort(out.begin(), out.end(), [](const PointSet& a, const PointSet& b) { return a.front() < b.front(); });
    return out;
}

// --- metric constructors ----------------------------------------------------

inline std::int64_t cyclic_distance(std::int64_t a, std::int64_t b, std::int64_t n)
{
    std::int64_t d = ((a - b) % n + n) % n;
    return std::min(d, n - d);
}

/// Pairs of {offset, ..., offset+n-1} at distance <= r.
inline Entourage path_entourage(std::int64_t n, std::int64_t r, PointId offset = 0)
{
    std::vector<Pair> pairs;
    for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = std::max<std::int64_t>(0, a - r); b <= std::min(n - 1, a + r); ++b)
            pairs.emplace_back(offset + a, offset + b);
    return Entourage(std::move(pairs));
}

/// Pairs of Z/nZ (ids offset + i) at cyclic distance <= r.
inline Entourage cycle_entourage(std::int64_t n, std::int64_t r, PointId offset = 0)
{
    std::vector<Pair> pairs;
    for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = 0; b < n; ++b)
            if (cyclic_distance(a, b, n) <= r)
                pairs.emplace_back(offset + a, offset + b);
    return Entourage(std::move(pairs));
}

inline std::vector<PointId> id_range(std::int64_t n, PointId offset = 0)
{
    std::vector<PointId> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), offset);
    return ids;
}

/// Path {0..n-1} with generators "U<r>" for each radius.
inline FiniteCoarseSpace path_space(std::int64_t n, const std::vector<std::int64_t>& radii)
{
    std::vector<NamedEntourage> gens;
    for (auto r : radii)
        gens.push_back({"U" + std::to_string(r), path_entourage(n, r)});
    return FiniteCoarseSpace(id_range(n), std::move(gens));
}

/// Cycle Z/nZ with generators "U<r>" for each radius.
inline FiniteCoarseSpace cycle_space(std::int64_t n, const std::vector<std::int64_t>& radii)
{
    std::vector<NamedEntourage> gens;
    for (auto r : radii)
        gens.push_back({"U" + std::to_string(r), cycle_entourage(n, r)});
    return FiniteCoarseSpace(id_range(n), std::move(gens));
}

} // namespace coarse
