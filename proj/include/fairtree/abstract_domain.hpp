#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "fairtree/schema.hpp"

namespace fairtree {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Real interval with optional open ends. Infinite bounds are never members.
struct Interval {
    double lower = -kInf;
    double upper = kInf;
    bool lower_open = false;
    bool upper_open = false;

    static Interval top() { return {}; }
    static Interval point(double v) { return {v, v, false, false}; }
    static Interval closed(double lo, double hi) { return {lo, hi, false, false}; }

    bool is_empty() const { return lower > upper || (lower == upper && (lower_open || upper_open)); }
    bool is_point() const { return lower == upper && !is_empty(); }
    bool contains(double v) const
    {
        return (lower_open ? v > lower : v >= lower) && (upper_open ? v < upper : v <= upper) && std::isfinite(v);
    }

    /// Intersection with (-inf, k].
    Interval meet_le(double k) const
    {
        Interval r = *this;
        if (k < r.upper) {
            r.upper = k;
            r.upper_open = false;
        }
        return r;
    }
    /// Intersection with (k, +inf).
    Interval meet_gt(double k) const
    {
        Interval r = *this;
        if (k >= r.lower) {
            r.lower = k;
            r.lower_open = true;
        }
        return r;
    }
    Interval meet(const Interval& o) const;

    bool operator==(const Interval&) const = default;
};

std::ostream& operator<<(std::ostream& os, const Interval& i);

/// Split condition as seen along a root-to-leaf path: x[column] <= threshold,
/// or its negation x[column] > threshold.
struct Constraint {
    enum class Op : std::uint8_t { Le, Gt };

    std::size_t column = 0;
    Op op = Op::Le;
    double threshold = 0.0;

    bool holds(std::span<const double> x) const
    {
        return op == Op::Le ? x[column] <= threshold : x[column] > threshold;
    }

    bool operator==(const Constraint&) const = default;
};

std::ostream& operator<<(std::ostream& os, const Constraint& c);

/// Reduced product of the box domain over numeric columns and the one-hot
/// domain over categorical groups.
///
/// The categorical part keeps, per group, the set of categories that may be
/// hot. Its concretization only contains genuine one-hot assignments: every
/// column of a group is 0 or 1 and exactly one of them is 1.
class ReducedAbstractValue {
public:
    /// Whole input space.
    static ReducedAbstractValue top(std::shared_ptr<const ColumnLayout> layout);
    /// Exactly the sample x (x must be one-hot valid under the layout).
    static ReducedAbstractValue point(std::shared_ptr<const ColumnLayout> layout, std::span<const double> x);
    static ReducedAbstractValue bottom(std::shared_ptr<const ColumnLayout> layout);

    const ColumnLayout& layout() const { return *layout_; }
    const std::shared_ptr<const ColumnLayout>& layout_ptr() const { return layout_; }

    bool is_bottom() const { return bottom_; }

    const Interval& interval(std::size_t numeric_feature) const { return box_[numeric_feature]; }
    void set_interval(std::size_t numeric_feature, const Interval& i);

    bool admits(std::size_t group, std::size_t category) const;
    std::vector<std::size_t> admitted(std::size_t group) const;
    std::size_t admitted_count(std::size_t group) const { return count_[group]; }
    void admit_all(std::size_t group);
    void admit_only(std::size_t group, std::size_t category);

    /// In-place meet with one constraint. Returns false when the value
    /// became bottom.
    bool refine(const Constraint& c);
    ReducedAbstractValue meet(const Constraint& c) const
    {
        ReducedAbstractValue r = *this;
        r.refine(c);
        return r;
    }

    /// Membership of x in the concretization.
    bool contains(std::span<const double> x) const;

    /// Deterministic member of the concretization. Throws ConfigError on bottom.
    Sample witness() const;

    /// Number of concrete one-hot assignments (product of admitted counts).
    double onehot_assignments() const;

    bool operator==(const ReducedAbstractValue& o) const
    {
        return bottom_ == o.bottom_ && box_ == o.box_ && admitted_ == o.admitted_;
    }

private:
    explicit ReducedAbstractValue(std::shared_ptr<const ColumnLayout> layout);
    void make_bottom() { bottom_ = true; }

    std::shared_ptr<const ColumnLayout> layout_;
    std::vector<Interval> box_;           // per numeric feature
    std::vector<std::uint8_t> admitted_;  // per category slot
    std::vector<std::uint32_t> count_;    // admitted categories per group
    bool bottom_ = false;
};

std::ostream& operator<<(std::ostream& os, const ReducedAbstractValue& v);

ReducedAbstractValue meet_constraint(const ReducedAbstractValue& v, const Constraint& c);

/// True iff some sample of the concretization satisfies every constraint.
/// Exact for this domain.
bool satisfies(const ReducedAbstractValue& v, std::span<const Constraint> constraints);

inline bool contains(const ReducedAbstractValue& v, std::span<const double> x) { return v.contains(x); }
inline Sample sample_witness(const ReducedAbstractValue& v) { return v.witness(); }

} // namespace fairtree
