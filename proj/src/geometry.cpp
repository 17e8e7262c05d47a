//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/geometry.hpp"

#include <algorithm>

namespace causalflow
{

IntervalSet::IntervalSet(Interval iv)
{
    Add(iv);
}

void IntervalSet::Add(Interval iv)
{
    if (iv.Empty())
    {
        return;
    }
    std::vector<Interval> merged;
    merged.reserve(m_Parts.size() + 1);
    bool placed = false;
    for (const Interval& p : m_Parts)
    {
        if (p.hi < iv.lo)
        {
            merged.push_back(p);
        }
        else if (iv.hi < p.lo)
        {
            if (!placed)
            {
                merged.push_back(iv);
                placed = true;
            }
            merged.push_back(p);
        }
        else
        {
            iv.lo = std::min(iv.lo, p.lo);
            iv.hi = std::max(iv.hi, p.hi);
        }
    }
    if (!placed)
    {
        merged.push_back(iv);
    }
    m_Parts = std::move(merged);
}

IntervalSet IntervalSet::Union(const IntervalSet& other) const
{
    IntervalSet out = *this;
    for (const Interval& p : other.m_Parts)
    {
        out.Add(p);
    }
    return out;
}

IntervalSet IntervalSet::Intersect(const IntervalSet& other) const
{
    IntervalSet out;
    size_t i = 0;
    size_t j = 0;
    while (i < m_Parts.size() && j < other.m_Parts.size())
    {
        const Interval& a = m_Parts[i];
        const Interval& b = other.m_Parts[j];
        Interval c{ std::max(a.lo, b.lo), std::min(a.hi, b.hi) };
        if (!c.Empty())
        {
            out.m_Parts.push_back(c);
        }
        if (a.hi < b.hi)
        {
            ++i;
        }
        else
        {
            ++j;
        }
    }
    return out;
}

IntervalSet IntervalSet::Subtract(const IntervalSet& other) const
{
    IntervalSet out;
    for (Interval a : m_Parts)
    {
        for (const Interval& b : other.m_Parts)
        {
            if (b.hi <= a.lo || b.lo >= a.hi)
            {
                continue;
            }
            if (b.lo > a.lo)
            {
                out.m_Parts.push_back({ a.lo, b.lo });
            }
            a.lo = std::max(a.lo, b.hi);
            if (a.Empty())
            {
                break;
            }
        }
        if (!a.Empty())
        {
            out.m_Parts.push_back(a);
        }
    }
    return out;
}

IntervalSet IntervalSet::Shifted(int64_t delta) const
{
    IntervalSet out = *this;
    for (Interval& p : out.m_Parts)
    {
        p.lo += delta;
        p.hi += delta;
    }
    return out;
}

int64_t IntervalSet::Count() const
{
    int64_t n = 0;
    for (const Interval& p : m_Parts)
    {
        n += p.Size();
    }
    return n;
}

Interval IntervalSet::Hull() const
{
    if (m_Parts.empty())
    {
        return {};
    }
    return { m_Parts.front().lo, m_Parts.back().hi };
}

IntervalSet TappedInputs(const IntervalSet& outputs, const AxisWindow& window, int64_t inExtent)
{
    IntervalSet taps;
    if (inExtent <= 0)
    {
        return taps;
    }
    // A dense window (stride covered by taps) maps an output interval to a contiguous input
    // interval; otherwise fall back to per-index marking.
    bool dense = window.dilation == 1 || window.kernel == 1;
    dense = dense && window.stride <= (window.kernel - 1) * window.dilation + 1;
    if (dense)
    {
        for (const Interval& o : outputs.Parts())
        {
            int64_t lo = o.lo * window.stride - window.padLo;
            int64_t hi = (o.hi - 1) * window.stride - window.padLo + (window.kernel - 1) * window.dilation + 1;
            taps.Add({ std::max<int64_t>(lo, 0), std::min(hi, inExtent) });
        }
        return taps;
    }
    std::vector<char> mark(static_cast<size_t>(inExtent), 0);
    for (const Interval& o : outputs.Parts())
    {
        for (int64_t out = o.lo; out < o.hi; ++out)
        {
            for (int64_t f = 0; f < window.kernel; ++f)
            {
                int64_t idx = out * window.stride + f * window.dilation - window.padLo;
                if (idx >= 0 && idx < inExtent)
                {
                    mark[static_cast<size_t>(idx)] = 1;
                }
            }
        }
    }
    int64_t start = -1;
    for (int64_t i = 0; i <= inExtent; ++i)
    {
        bool on = i < inExtent && mark[static_cast<size_t>(i)];
        if (on && start < 0)
        {
            start = i;
        }
        else if (!on && start >= 0)
        {
            taps.Add({ start, i });
            start = -1;
        }
    }
    return taps;
}

Interval TapHull(const IntervalSet& outputs, const AxisWindow& window, int64_t inExtent)
{
    return TappedInputs(outputs, window, inExtent).Hull();
}

}   // namespace causalflow
