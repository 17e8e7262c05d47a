//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <vector>

namespace causalflow
{

/// Half-open index range [lo, hi). Empty when hi <= lo.
struct Interval
{
    int64_t lo = 0;
    int64_t hi = 0;

    bool Empty() const { return hi <= lo; }
    int64_t Size() const { return Empty() ? 0 : hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Finite union of disjoint, non-adjacent intervals kept in ascending order.
class IntervalSet
{
public:
    IntervalSet() = default;
    explicit IntervalSet(Interval iv);

    void Add(Interval iv);
    IntervalSet Union(const IntervalSet& other) const;
    IntervalSet Intersect(const IntervalSet& other) const;
    IntervalSet Subtract(const IntervalSet& other) const;
    IntervalSet Shifted(int64_t delta) const;

    int64_t Count() const;
    bool Empty() const { return m_Parts.empty(); }
    /// Smallest interval containing the set.
    Interval Hull() const;
    const std::vector<Interval>& Parts() const { return m_Parts; }

    bool operator==(const IntervalSet&) const = default;

private:
    std::vector<Interval> m_Parts;
};

/// Sliding-window geometry along one axis.
struct AxisWindow
{
    int64_t kernel = 1;
    int64_t stride = 1;
    int64_t dilation = 1;
    int64_t padLo = 0;
};

/// Input indices in [0, inExtent) touched by any tap of any output index in `outputs`.
IntervalSet TappedInputs(const IntervalSet& outputs, const AxisWindow& window, int64_t inExtent);

/// Bounding interval of TappedInputs.
Interval TapHull(const IntervalSet& outputs, const AxisWindow& window, int64_t inExtent);

}   // namespace causalflow
