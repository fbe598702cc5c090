#include "fairtree/abstract_domain.hpp"

#include <cmath>

#include "fairtree/error.hpp"

namespace fairtree {

Interval Interval::meet(const Interval& o) const
{
    Interval r = *this;
    if (o.lower > r.lower || (o.lower == r.lower && o.lower_open)) {
        r.lower = o.lower;
        r.lower_open = o.lower_open;
    }
    if (o.upper < r.upper || (o.upper == r.upper && o.upper_open)) {
        r.upper = o.upper;
        r.upper_open = o.upper_open;
    }
    return r;
}

std::ostream& operator<<(std::ostream& os, const Interval& i)
{
    if (i.is_empty())
        return os << "empty";
    return os << (i.lower_open || std::isinf(i.lower) ? '(' : '[') << i.lower << ", " << i.upper
              << (i.upper_open || std::isinf(i.upper) ? ')' : ']');
}

std::ostream& operator<<(std::ostream& os, const Constraint& c)
{
    return os << "x" << c.column << (c.op == Constraint::Op::Le ? " <= " : " > ") << c.threshold;
}

ReducedAbstractValue::ReducedAbstractValue(std::shared_ptr<const ColumnLayout> layout)
    : layout_(std::move(layout)),
      box_(layout_->numeric_count()),
      admitted_(layout_->category_slots(), 1),
      count_(layout_->group_count())
{
    for (std::size_t g = 0; g < count_.size(); ++g)
        count_[g] = static_cast<std::uint32_t>(layout_->group_size(g));
}

ReducedAbstractValue ReducedAbstractValue::top(std::shared_ptr<const ColumnLayout> layout)
{
    return ReducedAbstractValue(std::move(layout));
}

ReducedAbstractValue ReducedAbstractValue::bottom(std::shared_ptr<const ColumnLayout> layout)
{
    ReducedAbstractValue v(std::move(layout));
    v.bottom_ = true;
    return v;
}

ReducedAbstractValue ReducedAbstractValue::point(std::shared_ptr<const ColumnLayout> layout, std::span<const double> x)
{
    if (x.size() != layout->dimension())
        throw DataError("abstract point: sample width does not match the layout");
    ReducedAbstractValue v(std::move(layout));
    const auto& lay = *v.layout_;
    for (std::size_t f = 0; f < lay.numeric_count(); ++f)
        v.box_[f] = Interval::point(x[lay.numeric_column(f)]);
    for (std::size_t g = 0; g < lay.group_count(); ++g) {
        const auto& cols = lay.group_columns(g);
        std::optional<std::size_t> hot;
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (x[cols[k]] == 1.0) {
                if (hot)
                    throw DataError("abstract point: sample is not one-hot");
                hot = k;
            } else if (x[cols[k]] != 0.0) {
                throw DataError("abstract point: sample is not one-hot");
            }
        if (!hot)
            throw DataError("abstract point: sample is not one-hot");
        v.admit_only(g, *hot);
    }
    return v;
}

void ReducedAbstractValue::set_interval(std::size_t numeric_feature, const Interval& i)
{
    box_[numeric_feature] = i;
    if (i.is_empty())
        bottom_ = true;
}

bool ReducedAbstractValue::admits(std::size_t group, std::size_t category) const
{
    return admitted_[layout_->group_offset(group) + category] != 0;
}

std::vector<std::size_t> ReducedAbstractValue::admitted(std::size_t group) const
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < layout_->group_size(group); ++k)
        if (admits(group, k))
            out.push_back(k);
    return out;
}

void ReducedAbstractValue::admit_all(std::size_t group)
{
    const auto off = layout_->group_offset(group);
    for (std::size_t k = 0; k < layout_->group_size(group); ++k)
        admitted_[off + k] = 1;
    count_[group] = static_cast<std::uint32_t>(layout_->group_size(group));
}

void ReducedAbstractValue::admit_only(std::size_t group, std::size_t category)
{
    const auto off = layout_->group_offset(group);
    for (std::size_t k = 0; k < layout_->group_size(group); ++k)
        admitted_[off + k] = k == category ? 1 : 0;
    count_[group] = 1;
}

bool ReducedAbstractValue::refine(const Constraint& c)
{
    if (bottom_)
        return false;
    const auto& col = layout_->column(c.column);
    const double k = c.threshold;
    if (col.kind == ColumnLayout::Kind::Numeric) {
        auto& iv = box_[col.index];
        iv = c.op == Constraint::Op::Le ? iv.meet_le(k) : iv.meet_gt(k);
        if (iv.is_empty())
            bottom_ = true;
        return !bottom_;
    }

    // One-hot column: its value is 0 (category absent) or 1 (category hot).
    const bool zero_ok = c.op == Constraint::Op::Le ? 0.0 <= k : 0.0 > k;
    const bool one_ok = c.op == Constraint::Op::Le ? 1.0 <= k : 1.0 > k;
    auto& slot = admitted_[col.slot];
    if (zero_ok && one_ok)
        return true;
    if (!zero_ok && !one_ok) {
        bottom_ = true;
        return false;
    }
    if (one_ok) {
        // the category must be the hot one
        if (!slot) {
            bottom_ = true;
            return false;
        }
        admit_only(col.index, col.category);
        return true;
    }
    // the category must not be hot
    if (slot) {
        slot = 0;
        if (--count_[col.index] == 0)
            bottom_ = true;
    }
    return !bottom_;
}

bool ReducedAbstractValue::contains(std::span<const double> x) const
{
    if (x.size() != layout_->dimension())
        throw DataError("contains: sample width does not match the layout");
    if (bottom_)
        return false;
    for (std::size_t f = 0; f < box_.size(); ++f)
        if (!box_[f].contains(x[layout_->numeric_column(f)]))
            return false;
    for (std::size_t g = 0; g < count_.size(); ++g) {
        const auto& cols = layout_->group_columns(g);
        int hot = 0;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const double v = x[cols[k]];
            if (v == 1.0) {
                if (!admits(g, k))
                    return false;
                ++hot;
            } else if (v != 0.0) {
                return false;
            }
        }
        if (hot != 1)
            return false;
    }
    return true;
}

namespace {

double interval_witness(const Interval& i)
{
    const bool lo_finite = std::isfinite(i.lower);
    const bool hi_finite = std::isfinite(i.upper);
    const double inward_lo = i.lower_open ? std::nextafter(i.lower, kInf) : i.lower;
    const double inward_hi = i.upper_open ? std::nextafter(i.upper, -kInf) : i.upper;
    double candidate = 0.0;
    if (lo_finite && hi_finite)
        candidate = i.lower / 2 + i.upper / 2;
    else if (lo_finite)
        candidate = inward_lo;
    else if (hi_finite)
        candidate = inward_hi;
    if (i.contains(candidate))
        return candidate;
    if (lo_finite && i.contains(inward_lo))
        return inward_lo;
    if (hi_finite && i.contains(inward_hi))
        return inward_hi;
    throw ConfigError("witness: interval has no representable member");
}

} // namespace

Sample ReducedAbstractValue::witness() const
{
    if (bottom_)
        throw ConfigError("witness: abstract value is bottom");
    Sample x(layout_->dimension(), 0.0);
    for (std::size_t f = 0; f < box_.size(); ++f)
        x[layout_->numeric_column(f)] = interval_witness(box_[f]);
    for (std::size_t g = 0; g < count_.size(); ++g) {
        const auto& cols = layout_->group_columns(g);
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (admits(g, k)) {
                x[cols[k]] = 1.0;
                break;
            }
    }
    return x;
}

double ReducedAbstractValue::onehot_assignments() const
{
    if (bottom_)
        return 0.0;
    double n = 1.0;
    for (auto c : count_)
        n *= c;
    return n;
}

std::ostream& operator<<(std::ostream& os, const ReducedAbstractValue& v)
{
    if (v.is_bottom())
        return os << "bottom";
    os << '<';
    const auto& lay = v.layout();
    for (std::size_t f = 0; f < lay.numeric_count(); ++f)
        os << (f ? ", " : "") << 'x' << lay.numeric_column(f) << " in " << v.interval(f);
    for (std::size_t g = 0; g < lay.group_count(); ++g) {
        os << (g || lay.numeric_count() ? ", " : "") << 'g' << g << " in {";
        const auto adm = v.admitted(g);
        for (std::size_t k = 0; k < adm.size(); ++k)
            os << (k ? "," : "") << adm[k];
        os << '}';
    }
    return os << '>';
}

ReducedAbstractValue meet_constraint(const ReducedAbstractValue& v, const Constraint& c)
{
    return v.meet(c);
}

bool satisfies(const ReducedAbstractValue& v, std::span<const Constraint> constraints)
{
    ReducedAbstractValue r = v;
    for (const auto& c : constraints)
        if (!r.refine(c))
            return false;
    return !r.is_bottom();
}

} // namespace fairtree
