#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coarse/space.hpp"

namespace coarse {

/// One checked condition. `scale` names the entourage the condition was
/// evaluated at (empty when scale-free); `z_index` is the big-family label used.
struct Check {
    std::string condition;
    std::string scale;
    std::optional<int> z_index;
    bool pass = true;
    std::vector<Pair> witnesses;
    std::string detail;
    friend bool operator==(const Check&, const Check&) = default;
};

/// A named measured quantity carried along with a report.
struct Measurement {
    std::string name;
    double value = 0.0;
    friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct VerificationReport {
    std::string subject;
    int depth = 3;
    std::vector<Check> checks;
    std::vector<Measurement> measurements;

    friend bool operator==(const VerificationReport&, const VerificationReport&) = default;

    void add(Check c) { checks.push_back(std::move(c)); }
    void measure(std::string name, double value) { measurements.push_back({std::move(name), value}); }

    void merge(const VerificationReport& other)
    {
        checks.insert(checks.end(), other.checks.begin(), other.checks.end());
        measurements.insert(measurements.end(), other.measurements.begin(), other.measurements.end());
    }

    bool all_pass() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }

    const Check* find(const std::string& condition, const std::string& scale = {}) const
    {
        for (const auto& c : checks)
            if (c.condition == condition && (scale.empty() || c.scale == scale))
                return &c;
        return nullptr;
    }

    /// The z-index of the per-scale summary check ("index") for `scale`.
    std::optional<int> minimal_index(const std::string& scale) const
    {
        const Check* c = find("index", scale);
        if (c == nullptr || !c->pass)
            return std::nullopt;
        return c->z_index;
    }

    std::optional<double> measurement(const std::string& name) const
    {
        for (const auto& m : measurements)
            if (m.name == name)
                return m.value;
        return std::nullopt;
    }

    std::vector<const Check*> failures() const
    {
        std::vector<const Check*> out;
        for (const auto& c : checks)
            if (!c.pass)
                out.push_back(&c);
        return out;
    }
};

} // namespace coarse
