//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/dse.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>
#include <tuple>

namespace causalflow
{

std::string_view ToString(Objective objective)
{
    switch (objective)
    {
        case Objective::Latency:
            return "lat";
        case Objective::Energy:
            return "ene";
        case Objective::Edp:
            return "edp";
        case Objective::Pareto:
            return "pareto";
    }
    return "?";
}

Objective ParseObjective(std::string_view text)
{
    if (text == "lat")
    {
        return Objective::Latency;
    }
    if (text == "ene")
    {
        return Objective::Energy;
    }
    if (text == "edp")
    {
        return Objective::Edp;
    }
    if (text == "pareto")
    {
        return Objective::Pareto;
    }
    throw ConfigError("unknown objective '" + std::string(text) + "' (expected lat, ene, edp or pareto)");
}

const EvaluatedCandidate& ExploreResult::Best(Objective objective) const
{
    switch (objective)
    {
        case Objective::Latency:
            return evaluated.at(bestLatency);
        case Objective::Energy:
            return evaluated.at(bestEnergy);
        default:
            return evaluated.at(bestEdp);
    }
}

std::vector<std::vector<int>> EnumerateCuts(int layerCount, int maxCuts)
{
    std::vector<std::vector<int>> out;
    std::vector<int> current;
    const int positions = std::max(0, layerCount - 1);
    for (int size = 0; size <= std::min(maxCuts, positions); ++size)
    {
        // Lexicographic k-combinations of 1..positions.
        current.resize(static_cast<size_t>(size));
        for (int i = 0; i < size; ++i)
        {
            current[static_cast<size_t>(i)] = i + 1;
        }
        while (true)
        {
            out.push_back(current);
            int i = size - 1;
            while (i >= 0 && current[static_cast<size_t>(i)] == positions - (size - 1 - i))
            {
                --i;
            }
            if (i < 0)
            {
                break;
            }
            ++current[static_cast<size_t>(i)];
            for (int j = i + 1; j < size; ++j)
            {
                current[static_cast<size_t>(j)] = current[static_cast<size_t>(j - 1)] + 1;
            }
        }
    }
    return out;
}

std::vector<std::vector<int>> EnumerateValidCuts(const FlattenedWorkload& flat, int maxCuts)
{
    const int n = static_cast<int>(flat.layers.size());
    std::vector<std::vector<int>> out;
    for (auto& cuts : EnumerateCuts(n, maxCuts))
    {
        auto stacks = SubStacksOf(cuts, n);
        if (std::all_of(stacks.begin(), stacks.end(), [&](const SubStack& s) { return IsValidSubStack(flat, s); }))
        {
            out.push_back(std::move(cuts));
        }
    }
    return out;
}

TileConfig FixedTile(TileConfig exitSpace, const PEArray& pe)
{
    int64_t ox = pe.UnrollOf(LoopDim::OX);
    int64_t oy = pe.UnrollOf(LoopDim::OY);
    return { std::clamp<int64_t>(ox, 1, exitSpace.tx), std::clamp<int64_t>(oy, 1, exitSpace.ty) };
}

std::vector<TileConfig> DefaultTileCandidates(TileConfig exitSpace, const PEArray* pe)
{
    auto ladder = [](int64_t extent) {
        std::vector<int64_t> v;
        for (int64_t p = 1; p < extent; p *= 2)
        {
            v.push_back(p);
        }
        v.push_back(std::max<int64_t>(extent, 1));
        return v;
    };
    std::vector<TileConfig> out;
    for (int64_t ty : ladder(exitSpace.ty))
    {
        for (int64_t tx : ladder(exitSpace.tx))
        {
            out.push_back({ tx, ty });
        }
    }
    if (pe != nullptr)
    {
        out.push_back(FixedTile(exitSpace, *pe));
    }
    std::sort(out.begin(), out.end(), [](TileConfig a, TileConfig b) { return std::tie(a.ty, a.tx) < std::tie(b.ty, b.tx); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool EarlyStop(const FlattenedWorkload& flat, const ScheduleCandidate& candidate, const AcceleratorSpec& hw)
{
    auto stacks = SubStacksOf(candidate.cuts, static_cast<int>(flat.layers.size()));
    for (size_t i = 0; i < stacks.size(); ++i)
    {
        if (FreshFootprintBytes(flat, stacks[i], candidate.tiles.at(i)) > hw.ActivationCapacityBytes())
        {
            return true;
        }
    }
    return false;
}

bool DramSkipEligible(int64_t boundaryBytes, int64_t residentBytes, const MemoryLevel& gb)
{
    return Fits(gb, boundaryBytes + residentBytes);
}

std::vector<size_t> ParetoFilter(const std::vector<CostPoint>& points)
{
    std::vector<size_t> order(points.size());
    for (size_t i = 0; i < order.size(); ++i)
    {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return std::tie(points[a].latency, points[a].energy) < std::tie(points[b].latency, points[b].energy);
    });
    std::vector<size_t> kept;
    double bestEnergy = 0.0;
    for (size_t idx : order)
    {
        // Sorted by latency then energy, a point survives iff its energy beats every earlier one.
        if (kept.empty() || points[idx].energy < bestEnergy)
        {
            kept.push_back(idx);
            bestEnergy = points[idx].energy;
        }
    }
    return kept;
}

std::vector<bool> GreedyDramSkip(const std::vector<CostBreakdown>& stacks, const AcceleratorSpec& hw,
                                 int activationBits)
{
    const MemoryLevel& gb = hw.levels.at(static_cast<size_t>(hw.GlobalBufferIndex()));
    std::vector<bool> out;
    for (size_t i = 0; i + 1 < stacks.size(); ++i)
    {
        int64_t resident = std::max(stacks[i].peakCacheBytes, stacks[i + 1].peakCacheBytes);
        out.push_back(DramSkipEligible(BoundaryBytes(stacks[i], activationBits), resident, gb));
    }
    return out;
}

namespace
{

template <class F>
void ParallelFor(size_t count, int threads, F&& body)
{
    size_t workers = threads > 0 ? static_cast<size_t>(threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<size_t>(count, 1));
    std::atomic<size_t> next{ 0 };
    auto run = [&]() {
        for (size_t i = next++; i < count; i = next++)
        {
            body(i);
        }
    };
    if (workers <= 1)
    {
        run();
        return;
    }
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w)
    {
        pool.emplace_back(run);
    }
    for (auto& t : pool)
    {
        t.join();
    }
}

struct StackOption
{
    TileConfig tile;
    CostBreakdown cost;
};

/// Drops options no better in latency, energy and cached bytes than another option and
/// strictly worse in latency or energy. Such options cannot appear in the Pareto set or in
/// any best-* pick, since the remaining sub-stacks and DS decisions stay the same or improve.
std::vector<StackOption> PruneDominated(std::vector<StackOption> options)
{
    std::vector<StackOption> out;
    for (size_t i = 0; i < options.size(); ++i)
    {
        const CostBreakdown& a = options[i].cost;
        bool dominated = false;
        for (size_t j = 0; j < options.size() && !dominated; ++j)
        {
            const CostBreakdown& b = options[j].cost;
            dominated = j != i && b.latencyCycles <= a.latencyCycles && b.energy <= a.energy &&
                        b.peakCacheBytes <= a.peakCacheBytes &&
                        (b.latencyCycles < a.latencyCycles || b.energy < a.energy);
        }
        if (!dominated)
        {
            out.push_back(std::move(options[i]));
        }
    }
    return out;
}

/// Lexicographic key: objective, energy, latency, fewer cuts, smaller (ty, tx) per sub-stack.
bool Better(const EvaluatedCandidate& a, const EvaluatedCandidate& b, Objective objective)
{
    auto scalar = [&](const EvaluatedCandidate& c) {
        switch (objective)
        {
            case Objective::Latency:
                return static_cast<double>(c.cost.latencyCycles);
            case Objective::Energy:
                return c.cost.energy;
            default:
                return c.cost.edp;
        }
    };
    auto tiles = [](const EvaluatedCandidate& c) {
        std::vector<std::pair<int64_t, int64_t>> v;
        for (const auto& t : c.candidate.tiles)
        {
            v.emplace_back(t.ty, t.tx);
        }
        return v;
    };
    auto ka = std::make_tuple(scalar(a), a.cost.energy, a.cost.latencyCycles, a.candidate.cuts.size());
    auto kb = std::make_tuple(scalar(b), b.cost.energy, b.cost.latencyCycles, b.candidate.cuts.size());
    if (ka != kb)
    {
        return ka < kb;
    }
    return tiles(a) < tiles(b);
}

}   // namespace

ExploreResult Explore(const FlattenedWorkload& flat, const AcceleratorSpec& hw, const SearchSpace& space)
{
    const int n = static_cast<int>(flat.layers.size());
    auto cutSets = EnumerateValidCuts(flat, space.maxCuts);

    // Every distinct (sub-stack, tile) pair is evaluated once.
    std::map<SubStack, std::vector<TileConfig>> tilesOf;
    for (const auto& cuts : cutSets)
    {
        for (const auto& s : SubStacksOf(cuts, n))
        {
            if (tilesOf.count(s))
            {
                continue;
            }
            TileConfig exitSpace = ExitTileSpace(flat, s);
            std::vector<TileConfig> tiles;
            if (space.tiles.empty())
            {
                tiles = DefaultTileCandidates(exitSpace, &hw.pe);
            }
            else
            {
                for (TileConfig t : space.tiles)
                {
                    TileConfig c = ClampTile(flat, s, t);
                    if (std::find(tiles.begin(), tiles.end(), c) == tiles.end())
                    {
                        tiles.push_back(c);
                    }
                }
            }
            tilesOf[s] = std::move(tiles);
        }
    }
    struct Job
    {
        SubStack stack;
        TileConfig tile;
        std::optional<CostBreakdown> cost;
    };
    std::vector<Job> jobs;
    for (const auto& [s, tiles] : tilesOf)
    {
        for (TileConfig t : tiles)
        {
            jobs.push_back({ s, t, std::nullopt });
        }
    }
    ParallelFor(jobs.size(), space.threads, [&](size_t i) {
        Job& job = jobs[i];
        if (FreshFootprintBytes(flat, job.stack, job.tile) > hw.ActivationCapacityBytes())
        {
            return;   // early stop
        }
        job.cost = EvaluateSubStack(flat, job.stack, job.tile, hw);
    });

    std::map<SubStack, std::vector<StackOption>> options;
    std::map<SubStack, std::pair<int64_t, int64_t>> counts;   // (all tiles, feasible tiles)
    for (auto& job : jobs)
    {
        auto& c = counts[job.stack];
        ++c.first;
        if (job.cost)
        {
            ++c.second;
            options[job.stack].push_back({ job.tile, std::move(*job.cost) });
        }
    }
    for (auto& [s, opts] : options)
    {
        opts = PruneDominated(std::move(opts));
    }

    ExploreResult result;
    for (const auto& cuts : cutSets)
    {
        auto stacks = SubStacksOf(cuts, n);
        int64_t all = 1, feasible = 1, kept = 1;
        for (const auto& s : stacks)
        {
            all *= counts[s].first;
            feasible *= counts[s].second;
            kept *= static_cast<int64_t>(options[s].size());
        }
        result.rejectedCount += all - feasible;
        result.dominatedCount += feasible - kept;
        if (kept == 0)
        {
            continue;
        }
        // Odometer over per-sub-stack options, first sub-stack slowest.
        std::vector<size_t> pick(stacks.size(), 0);
        std::vector<CostBreakdown> costs(stacks.size());
        while (true)
        {
            EvaluatedCandidate ec;
            ec.candidate.cuts = cuts;
            for (size_t i = 0; i < stacks.size(); ++i)
            {
                const StackOption& o = options[stacks[i]][pick[i]];
                ec.candidate.tiles.push_back(o.tile);
                costs[i] = o.cost;
            }
            ec.candidate.dramSkip = space.dramSkip ? GreedyDramSkip(costs, hw, flat.activationBits)
                                                   : std::vector<bool>(cuts.size(), false);
            std::vector<Boundary> boundaries;
            for (size_t i = 0; i + 1 < stacks.size(); ++i)
            {
                boundaries.push_back({ !ec.candidate.dramSkip[i], BoundaryBytes(costs[i], flat.activationBits) });
            }
            ec.cost = Aggregate(costs, boundaries, hw, flat.activationBits);
            result.evaluated.push_back(std::move(ec));

            size_t i = stacks.size();
            while (i > 0)
            {
                --i;
                if (++pick[i] < options[stacks[i]].size())
                {
                    break;
                }
                pick[i] = 0;
                if (i == 0)
                {
                    i = stacks.size() + 1;   // done
                    break;
                }
            }
            if (i == stacks.size() + 1)
            {
                break;
            }
        }
    }
    result.evaluatedCount = static_cast<int64_t>(result.evaluated.size());
    if (result.evaluated.empty())
    {
        throw InfeasibleSpace("no schedule fits on chip: all " + std::to_string(result.rejectedCount) +
                              " candidates were rejected by the footprint check");
    }

    std::vector<CostPoint> points;
    for (const auto& e : result.evaluated)
    {
        points.push_back({ static_cast<double>(e.cost.latencyCycles), e.cost.energy });
    }
    for (size_t idx : ParetoFilter(points))
    {
        result.pareto.push_back(result.evaluated[idx]);
    }
    for (size_t i = 1; i < result.evaluated.size(); ++i)
    {
        const auto& e = result.evaluated[i];
        if (Better(e, result.evaluated[result.bestLatency], Objective::Latency))
        {
            result.bestLatency = i;
        }
        if (Better(e, result.evaluated[result.bestEnergy], Objective::Energy))
        {
            result.bestEnergy = i;
        }
        if (Better(e, result.evaluated[result.bestEdp], Objective::Edp))
        {
            result.bestEdp = i;
        }
    }
    return result;
}

EvaluatedCandidate FixedTilingSchedule(const FlattenedWorkload& flat, const AcceleratorSpec& hw)
{
    SubStack whole{ 0, static_cast<int>(flat.layers.size()) - 1 };
    EvaluatedCandidate ec;
    ec.candidate.tiles = { FixedTile(ExitTileSpace(flat, whole), hw.pe) };
    try
    {
        ec.cost = EvaluateCandidate(flat, ec.candidate, hw);
    }
    catch (const OnChipOverflow& e)
    {
        throw InfeasibleSpace(std::string("fixed tiling does not fit on chip: ") + e.what());
    }
    return ec;
}

EvaluatedCandidate LayerByLayerSchedule(const FlattenedWorkload& flat, const AcceleratorSpec& hw)
{
    const int n = static_cast<int>(flat.layers.size());
    EvaluatedCandidate ec;
    for (int c = 1; c < n; ++c)
    {
        std::vector<int> single{ c };
        auto stacks = SubStacksOf(single, n);
        if (IsValidSubStack(flat, stacks[0]) && IsValidSubStack(flat, stacks[1]))
        {
            ec.candidate.cuts.push_back(c);
        }
    }
    auto stacks = SubStacksOf(ec.candidate.cuts, n);
    std::vector<CostBreakdown> costs;
    try
    {
        for (const auto& s : stacks)
        {
            costs.push_back(EvaluateLayerByLayer(flat, s, hw));
            ec.candidate.tiles.push_back(ExitTileSpace(flat, s));
        }
    }
    catch (const OnChipOverflow& e)
    {
        throw InfeasibleSpace(std::string("layer-by-layer schedule does not fit on chip: ") + e.what());
    }
    std::vector<Boundary> boundaries;
    for (size_t i = 0; i + 1 < stacks.size(); ++i)
    {
        boundaries.push_back({ true, BoundaryBytes(costs[i], flat.activationBits) });
        ec.candidate.dramSkip.push_back(false);
    }
    ec.cost = Aggregate(costs, boundaries, hw, flat.activationBits);
    return ec;
}

}   // namespace causalflow
