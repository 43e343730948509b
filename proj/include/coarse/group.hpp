#pragma once

// Finite groups by Cayley table and their actions on point sets.

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "coarse/space.hpp"

namespace coarse {

class FiniteGroup {
public:
    FiniteGroup() : FiniteGroup(std::vector<std::vector<int>>{{0}}) {}

    /// table[a][b] = a*b on elements 0..n-1. Validated: closure, associativity,
    /// identity, inverses.
    explicit FiniteGroup(std::vector<std::vector<int>> table) : table_(std::move(table))
    {
        const int n = static_cast<int>(table_.size());
        if (n == 0)
            fail(ErrorKind::Input, "empty group table");
        for (const auto& row : table_) {
            if (static_cast<int>(row.size()) != n)
                fail(ErrorKind::Input, "group table is not square");
            for (int v : row)
                if (v < 0 || v >= n)
                    fail(ErrorKind::Input, "group table entry out of range");
        }
        identity_ = -1;
        for (int e = 0; e < n && identity_ < 0; ++e) {
            bool ok = true;
            for (int a = 0; a < n && ok; ++a)
                ok = table_[e][a] == a && table_[a][e] == a;
            if (ok)
                identity_ = e;
        }
        if (identity_ < 0)
            fail(ErrorKind::Input, "group table has no identity");
        inverse_.assign(n, -1);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (table_[a][b] == identity_ && table_[b][a] == identity_)
                    inverse_[a] = b;
        for (int a = 0; a < n; ++a)
            if (inverse_[a] < 0)
                fail(ErrorKind::Input, "element " + std::to_string(a) + " has no inverse");
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
                        fail(ErrorKind::Input, "group table is not associative");
    }

    static FiniteGroup cyclic(int m)
    {
        if (m < 1)
            fail(ErrorKind::Input, "cyclic group order must be positive");
        std::vector<std::vector<int>> t(m, std::vector<int>(m));
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                t[a][b] = (a + b) % m;
        return FiniteGroup(std::move(t));
    }

    int size() const { return static_cast<int>(table_.size()); }
    int identity() const { return identity_; }
    int mul(int a, int b) const { return table_.at(a).at(b); }
    int inv(int a) const { return inverse_.at(a); }
    const std::vector<std::vector<int>>& table() const { return table_; }

    friend bool operator==(const FiniteGroup& a, const FiniteGroup& b) { return a.table_ == b.table_; }

private:
    std::vector<std::vector<int>> table_;
    std::vector<int> inverse_;
    int identity_ = 0;
};

/// A left action of a finite group on a point set, one permutation per element.
class GroupAction {
public:
    GroupAction() = default;

    GroupAction(FiniteGroup group, std::vector<std::map<PointId, PointId>> perms, const PointSet& points)
        : group_(std::move(group)), perms_(std::move(perms))
    {
        if (static_cast<int>(perms_.size()) != group_.size())
            fail(ErrorKind::Input, "action needs one permutation per group element");
        for (std::size_t g = 0; g < perms_.size(); ++g) {
            const auto& p = perms_[g];
            if (p.size() != points.size())
                fail(ErrorKind::Input, "permutation " + std::to_string(g) + " is not total");
            std::vector<PointId> img;
            for (const auto& [x, gx] : p) {
                if (!contains(points, x) || !contains(points, gx))
                    fail(ErrorKind::Input, "permutation " + std::to_string(g) + " leaves the point set");
                img.push_back(gx);
            }
            if (make_point_set(img) != points)
                fail(ErrorKind::Input, "map " + std::to_string(g) + " is not a permutation");
        }
    }

    /// The trivial action of the one-element group.
    static GroupAction trivial(const PointSet& points)
    {
        std::map<PointId, PointId> id;
        for (PointId x : points)
            id.emplace(x, x);
        return GroupAction(FiniteGroup::cyclic(1), {id}, points);
    }

    const FiniteGroup& group() const { return group_; }
    const std::vector<std::map<PointId, PointId>>& permutations() const { return perms_; }

    PointId act(int g, PointId x) const
    {
        auto it = perms_.at(g).find(x);
        if (it == perms_[g].end())
            fail(ErrorKind::Input, "action undefined at point " + std::to_string(x));
        return it->second;
    }

    /// First (g, h, x) with (gh)x != g(hx), if any.
    std::optional<std::tuple<int, int, PointId>> homomorphism_defect() const
    {
        for (int g = 0; g < group_.size(); ++g)
            for (int h = 0; h < group_.size(); ++h)
                for (const auto& [x, hx] : perms_[h])
                    if (act(group_.mul(g, h), x) != act(g, hx))
                        return std::tuple{g, h, x};
        return std::nullopt;
    }

    std::vector<int> stabilizer(PointId x) const
    {
        std::vector<int> out;
        for (int g = 0; g < group_.size(); ++g)
            if (act(g, x) == x)
                out.push_back(g);
        return out;
    }

    PointSet orbit(PointId x) const
    {
        std::vector<PointId> out;
        for (int g = 0; g < group_.size(); ++g)
            out.push_back(act(g, x));
        return make_point_set(std::move(out));
    }

    /// Orbits meeting `s`, each as a sorted set, ordered by lowest id.
    std::vector<PointSet> orbits(const PointSet& s) const
    {
        std::map<PointId, PointSet> by_min;
        for (PointId x : s) {
            auto o = orbit(x);
            by_min.emplace(o.front(), std::move(o));
        }
        std::vector<PointSet> out;
        for (auto& [m, o] : by_min)
            out.push_back(std::move(o));
        return out;
    }

    friend bool operator==(const GroupAction& a, const GroupAction& b)
    {
        return a.group_ == b.group_ && a.perms_ == b.perms_;
    }

private:
    FiniteGroup group_;
    std::vector<std::map<PointId, PointId>> perms_;
};

} // namespace coarse
