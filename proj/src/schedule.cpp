//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/schedule.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace causalflow
{

std::vector<SubStack> SubStacksOf(const std::vector<int>& cuts, int layerCount)
{
    std::vector<SubStack> out;
    int first = 0;
    for (int c : cuts)
    {
        out.push_back({ first, c - 1 });
        first = c;
    }
    out.push_back({ first, layerCount - 1 });
    return out;
}

std::string EncodeCandidate(const ScheduleCandidate& candidate)
{
    std::string s = "cuts=";
    for (size_t i = 0; i < candidate.cuts.size(); ++i)
    {
        s += (i ? "," : "") + std::to_string(candidate.cuts[i]);
    }
    s += ";tiles=";
    for (size_t i = 0; i < candidate.tiles.size(); ++i)
    {
        s += (i ? "|(" : "(") + std::to_string(candidate.tiles[i].tx) + "," + std::to_string(candidate.tiles[i].ty) + ")";
    }
    s += ";ds=";
    for (size_t i = 0; i < candidate.dramSkip.size(); ++i)
    {
        s += (i ? "," : "") + std::string(candidate.dramSkip[i] ? "1" : "0");
    }
    return s;
}

namespace
{

[[noreturn]] void Bad(const std::string& text)
{
    throw std::invalid_argument("malformed candidate encoding '" + text + "'");
}

int64_t ParseInt(std::string_view s, const std::string& whole)
{
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
    {
        Bad(whole);
    }
    return v;
}

std::vector<std::string_view> Split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    if (s.empty())
    {
        return out;
    }
    size_t start = 0;
    while (true)
    {
        size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
        {
            return out;
        }
        start = pos + 1;
    }
}

}   // namespace

ScheduleCandidate DecodeCandidate(const std::string& text)
{
    auto fields = Split(text, ';');
    if (fields.size() != 3 || !fields[0].starts_with("cuts=") || !fields[1].starts_with("tiles=") ||
        !fields[2].starts_with("ds="))
    {
        Bad(text);
    }
    ScheduleCandidate c;
    for (auto v : Split(fields[0].substr(5), ','))
    {
        c.cuts.push_back(static_cast<int>(ParseInt(v, text)));
    }
    for (auto t : Split(fields[1].substr(6), '|'))
    {
        if (t.size() < 5 || t.front() != '(' || t.back() != ')')
        {
            Bad(text);
        }
        auto parts = Split(t.substr(1, t.size() - 2), ',');
        if (parts.size() != 2)
        {
            Bad(text);
        }
        c.tiles.push_back({ ParseInt(parts[0], text), ParseInt(parts[1], text) });
    }
    for (auto v : Split(fields[2].substr(3), ','))
    {
        if (v != "0" && v != "1")
        {
            Bad(text);
        }
        c.dramSkip.push_back(v == "1");
    }
    return c;
}

void CheckCandidate(const FlattenedWorkload& flat, const ScheduleCandidate& candidate)
{
    const int n = static_cast<int>(flat.layers.size());
    int prev = 0;
    for (int c : candidate.cuts)
    {
        if (c <= prev || c >= n)
        {
            throw std::invalid_argument("cut positions must be strictly increasing inside (0, " + std::to_string(n) + ")");
        }
        prev = c;
    }
    if (candidate.tiles.size() != candidate.cuts.size() + 1)
    {
        throw std::invalid_argument("expected one tile size per sub-stack");
    }
    if (candidate.dramSkip.size() != candidate.cuts.size())
    {
        throw std::invalid_argument("expected one DRAM-skip flag per boundary");
    }
    for (const auto& s : SubStacksOf(candidate.cuts, n))
    {
        if (!IsValidSubStack(flat, s))
        {
            throw std::invalid_argument("cut splits a branch from its join at sub-stack [" + std::to_string(s.first) +
                                        ", " + std::to_string(s.last) + "]");
        }
    }
}

int64_t BoundaryBytes(const CostBreakdown& producer, int activationBits)
{
    return BytesForWords(producer.exitWords, activationBits);
}

CostBreakdown EvaluateCandidate(const FlattenedWorkload& flat, const ScheduleCandidate& candidate,
                                const AcceleratorSpec& hw)
{
    CheckCandidate(flat, candidate);
    auto stacks = SubStacksOf(candidate.cuts, static_cast<int>(flat.layers.size()));
    std::vector<CostBreakdown> costs;
    for (size_t i = 0; i < stacks.size(); ++i)
    {
        costs.push_back(EvaluateSubStack(flat, stacks[i], candidate.tiles[i], hw));
    }
    std::vector<Boundary> boundaries;
    for (size_t i = 0; i + 1 < stacks.size(); ++i)
    {
        boundaries.push_back({ !candidate.dramSkip[i], BoundaryBytes(costs[i], flat.activationBits) });
    }
    return Aggregate(costs, boundaries, hw, flat.activationBits);
}

}   // namespace causalflow
