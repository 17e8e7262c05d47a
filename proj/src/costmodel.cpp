//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/costmodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace causalflow
{

int64_t BytesForWords(int64_t words, int bits)
{
    return (words * bits + 7) / 8;
}

bool IsValidSubStack(const FlattenedWorkload& flat, const SubStack& stack)
{
    const int n = static_cast<int>(flat.layers.size());
    if (stack.first < 0 || stack.last < stack.first || stack.last >= n)
    {
        return false;
    }
    const int entry = stack.first == 0 ? kNetworkInput : stack.first - 1;
    for (int k = stack.first; k <= stack.last; ++k)
    {
        for (int p : flat.layers[static_cast<size_t>(k)].inputs)
        {
            bool inside = p >= stack.first && p < k;
            if (!inside && p != entry)
            {
                return false;
            }
        }
    }
    // Intermediate results must not escape the stack.
    auto consumers = flat.Consumers();
    for (int k = stack.first; k < stack.last; ++k)
    {
        for (int c : consumers[static_cast<size_t>(k)])
        {
            if (c > stack.last)
            {
                return false;
            }
        }
    }
    return true;
}

TileConfig ExitTileSpace(const FlattenedWorkload& flat, const SubStack& stack)
{
    const TensorShape& s = flat.layers.at(static_cast<size_t>(stack.last)).outShape;
    return { s.x, flat.mode == ExecutionMode::RealTime ? 1 : s.y };
}

TileConfig ClampTile(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile)
{
    TileConfig space = ExitTileSpace(flat, stack);
    return { std::clamp<int64_t>(tile.tx, 1, space.tx), std::clamp<int64_t>(tile.ty, 1, space.ty) };
}

namespace
{

const AxisWindow kIdentity{ 1, 1, 1, 0 };

Interval HullOf(Interval a, Interval b)
{
    if (a.Empty())
    {
        return b;
    }
    if (b.Empty())
    {
        return a;
    }
    return { std::min(a.lo, b.lo), std::max(a.hi, b.hi) };
}

IntervalSet SetOf(Interval iv)
{
    return iv.Empty() ? IntervalSet{} : IntervalSet(iv);
}

/// Precomputed per-axis region algebra of one sub-stack under one tile size. Tensor 0 is
/// the entry tensor, tensor i >= 1 is layer first + i - 1.
class StackPlan
{
public:
    StackPlan(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile)
        : m_Flat(flat)
        , m_Stack(stack)
    {
        if (!IsValidSubStack(flat, stack))
        {
            throw std::invalid_argument("invalid sub-stack [" + std::to_string(stack.first) + ", " +
                                        std::to_string(stack.last) + "]");
        }
        m_Tile = ClampTile(flat, stack, tile);
        const int entry = stack.first == 0 ? kNetworkInput : stack.first - 1;
        const size_t nt = static_cast<size_t>(stack.Size()) + 1;
        m_ExtX.resize(nt);
        m_ExtY.resize(nt);
        m_Ch.resize(nt);
        m_Operands.resize(nt);
        const TensorShape& es = flat.TensorOf(entry);
        m_ExtX[0] = es.x;
        m_ExtY[0] = es.y;
        m_Ch[0] = es.c;
        for (size_t t = 1; t < nt; ++t)
        {
            const FlattenedLayer& l = Layer(t);
            m_ExtX[t] = l.outShape.x;
            m_ExtY[t] = l.outShape.y;
            m_Ch[t] = l.outShape.c;
            for (int p : l.inputs)
            {
                m_Operands[t].push_back(p == entry ? 0 : static_cast<size_t>(p - stack.first + 1));
            }
        }

        const size_t exitT = nt - 1;
        const bool realTime = flat.mode == ExecutionMode::RealTime;
        const int64_t ey = m_ExtY[exitT];
        const int64_t ex = m_ExtX[exitT];
        m_Bands = realTime ? 1 : (ey + m_Tile.ty - 1) / m_Tile.ty;
        m_Cols = (ex + m_Tile.tx - 1) / m_Tile.tx;

        // Required row hulls per band and column hulls per column.
        m_Rows.assign(nt, std::vector<Interval>(static_cast<size_t>(m_Bands)));
        for (int64_t b = 0; b < m_Bands; ++b)
        {
            Interval exitRows = realTime ? Interval{ ey - 1, ey } : Interval{ b * m_Tile.ty, std::min(ey, (b + 1) * m_Tile.ty) };
            auto hulls = Backward(exitRows, /*rowsAxis=*/true);
            for (size_t t = 0; t < nt; ++t)
            {
                m_Rows[t][static_cast<size_t>(b)] = hulls[t];
            }
        }
        m_ColHulls.assign(nt, std::vector<Interval>(static_cast<size_t>(m_Cols)));
        for (int64_t a = 0; a < m_Cols; ++a)
        {
            Interval exitCols{ a * m_Tile.tx, std::min(ex, (a + 1) * m_Tile.tx) };
            auto hulls = Backward(exitCols, /*rowsAxis=*/false);
            for (size_t t = 0; t < nt; ++t)
            {
                m_ColHulls[t][static_cast<size_t>(a)] = hulls[t];
            }
        }

        BuildRowClasses(realTime);
        BuildColClasses();
    }

    size_t Tensors() const { return m_ExtX.size(); }
    int64_t Bands() const { return m_Bands; }
    int64_t Cols() const { return m_Cols; }
    TileConfig Tile() const { return m_Tile; }
    int64_t Channels(size_t t) const { return m_Ch[t]; }
    const std::vector<size_t>& Operands(size_t t) const { return m_Operands[t]; }
    const FlattenedLayer& Layer(size_t t) const
    {
        return m_Flat.layers[static_cast<size_t>(m_Stack.first) + t - 1];
    }

    Interval RowHull(size_t t, int64_t b) const { return m_Rows[t][static_cast<size_t>(b)]; }
    Interval ColHull(size_t t, int64_t a) const { return m_ColHulls[t][static_cast<size_t>(a)]; }
    const IntervalSet& FreshRows(size_t t, int64_t b) const { return m_FreshRows[t][static_cast<size_t>(b)]; }
    const IntervalSet& FreshCols(size_t t, int64_t a) const { return m_FreshCols[t][static_cast<size_t>(a)]; }

    int64_t Fresh(size_t t, int64_t b, int64_t a) const
    {
        return FreshRows(t, b).Count() * FreshCols(t, a).Count();
    }

    /// Positions of tensor t alive (produced and still needed) during tile (b, a).
    int64_t Live(size_t t, int64_t b, int64_t a) const
    {
        const auto& r = m_RowClass[t][static_cast<size_t>(b)];
        const auto& c = m_ColClass[t][static_cast<size_t>(a)];
        // r: {A∩Rn∖R, R∩A∩Rn, R∩A∖Rn, R∩Rn∖A, R∖A∖Rn}
        // c: {Cf, Cp∪Cs, Cs, Cp, Cp∩Cs}
        return c[0] * r[0] + c[1] * r[1] + c[2] * r[2] + c[3] * r[3] + c[4] * r[4];
    }

    /// Input rows/cols of operand `o` of layer tensor t tapped by its fresh outputs.
    IntervalSet TappedRows(size_t t, size_t o, int64_t b) const
    {
        return TappedInputs(FreshRows(t, b), WindowY(t), m_ExtY[o]);
    }
    IntervalSet TappedCols(size_t t, size_t o, int64_t a) const
    {
        return TappedInputs(FreshCols(t, a), WindowX(t), m_ExtX[o]);
    }

private:
    AxisWindow WindowY(size_t t) const
    {
        return Layer(t).base.kind == LayerKind::ElementwiseAdd ? kIdentity : Layer(t).WindowY();
    }
    AxisWindow WindowX(size_t t) const
    {
        return Layer(t).base.kind == LayerKind::ElementwiseAdd ? kIdentity : Layer(t).WindowX();
    }

    std::vector<Interval> Backward(Interval exitRange, bool rowsAxis) const
    {
        const size_t nt = Tensors();
        std::vector<Interval> hull(nt);
        hull[nt - 1] = exitRange;
        for (size_t t = nt - 1; t >= 1; --t)
        {
            if (hull[t].Empty())
            {
                continue;
            }
            IntervalSet out = SetOf(hull[t]);
            for (size_t o : m_Operands[t])
            {
                Interval need = rowsAxis ? TapHull(out, WindowY(t), m_ExtY[o]) : TapHull(out, WindowX(t), m_ExtX[o]);
                hull[o] = HullOf(hull[o], need);
            }
        }
        return hull;
    }

    void BuildRowClasses(bool realTime)
    {
        const size_t nt = Tensors();
        const size_t nb = static_cast<size_t>(m_Bands);
        m_FreshRows.assign(nt, std::vector<IntervalSet>(nb));
        m_RowClass.assign(nt, std::vector<std::array<int64_t, 5>>(nb));
        for (size_t t = 0; t < nt; ++t)
        {
            IntervalSet prefill = realTime ? SetOf({ 0, m_ExtY[t] - 1 }) : IntervalSet{};
            std::vector<IntervalSet> suffix(nb + 1);
            if (realTime)
            {
                // The next update needs the same rows one step later.
                IntervalSet all;
                for (size_t b = 0; b < nb; ++b)
                {
                    all.Add(m_Rows[t][b]);
                }
                suffix[nb] = all.Shifted(1).Intersect(SetOf({ 0, m_ExtY[t] }));
            }
            for (size_t b = nb; b-- > 0;)
            {
                suffix[b] = suffix[b + 1].Union(SetOf(m_Rows[t][b]));
            }
            IntervalSet before = prefill;
            for (size_t b = 0; b < nb; ++b)
            {
                IntervalSet r = SetOf(m_Rows[t][b]);
                const IntervalSet& a = before;
                const IntervalSet& rn = suffix[b + 1];
                m_FreshRows[t][b] = r.Subtract(a);
                IntervalSet aRn = a.Intersect(rn);
                m_RowClass[t][b] = {
                    aRn.Subtract(r).Count(),
                    r.Intersect(aRn).Count(),
                    r.Intersect(a).Subtract(rn).Count(),
                    r.Intersect(rn).Subtract(a).Count(),
                    r.Subtract(a).Subtract(rn).Count(),
                };
                before = before.Union(r);
            }
        }
    }

    void BuildColClasses()
    {
        const size_t nt = Tensors();
        const size_t nc = static_cast<size_t>(m_Cols);
        m_FreshCols.assign(nt, std::vector<IntervalSet>(nc));
        m_ColClass.assign(nt, std::vector<std::array<int64_t, 5>>(nc));
        for (size_t t = 0; t < nt; ++t)
        {
            std::vector<IntervalSet> prefix(nc + 1), suffix(nc + 1);
            for (size_t a = 0; a < nc; ++a)
            {
                prefix[a + 1] = prefix[a].Union(SetOf(m_ColHulls[t][a]));
            }
            for (size_t a = nc; a-- > 0;)
            {
                suffix[a] = suffix[a + 1].Union(SetOf(m_ColHulls[t][a]));
            }
            const IntervalSet& cf = prefix[nc];
            for (size_t a = 0; a < nc; ++a)
            {
                m_FreshCols[t][a] = SetOf(m_ColHulls[t][a]).Subtract(prefix[a]);
                const IntervalSet& cp = prefix[a + 1];
                const IntervalSet& cs = suffix[a];
                m_ColClass[t][a] = {
                    cf.Count(), cp.Union(cs).Count(), cs.Count(), cp.Count(), cp.Intersect(cs).Count(),
                };
            }
        }
    }

    const FlattenedWorkload& m_Flat;
    SubStack m_Stack;
    TileConfig m_Tile;
    int64_t m_Bands = 0;
    int64_t m_Cols = 0;
    std::vector<int64_t> m_ExtX, m_ExtY, m_Ch;
    std::vector<std::vector<size_t>> m_Operands;
    std::vector<std::vector<Interval>> m_Rows;
    std::vector<std::vector<Interval>> m_ColHulls;
    std::vector<std::vector<IntervalSet>> m_FreshRows;
    std::vector<std::vector<IntervalSet>> m_FreshCols;
    std::vector<std::vector<std::array<int64_t, 5>>> m_RowClass;
    std::vector<std::vector<std::array<int64_t, 5>>> m_ColClass;
};

int64_t FreshWords(const StackPlan& plan, int64_t b, int64_t a)
{
    int64_t words = 0;
    for (size_t t = 0; t < plan.Tensors(); ++t)
    {
        words += plan.Fresh(t, b, a) * plan.Channels(t);
    }
    return words;
}

int64_t LiveWords(const StackPlan& plan, int64_t b, int64_t a)
{
    int64_t words = 0;
    for (size_t t = 0; t < plan.Tensors(); ++t)
    {
        words += plan.Live(t, b, a) * plan.Channels(t);
    }
    return words;
}

/// Local-buffer capacity available to activations (bounded, non-GB levels serving I or O).
int64_t LocalActivationBytes(const AcceleratorSpec& hw)
{
    int64_t total = 0;
    for (const auto& l : hw.levels)
    {
        if (!l.Unbounded() && !l.isGlobalBuffer && (l.servesInputs || l.servesOutputs))
        {
            total += l.capacityBytes;
        }
    }
    return total;
}

int64_t WordsForBytes(int64_t bytes, int bits)
{
    return bytes == kUnboundedCapacity ? kUnboundedCapacity : bytes * 8 / bits;
}

int64_t CeilDiv(int64_t a, int64_t b)
{
    return (a + b - 1) / b;
}

/// MACs the array runs concurrently for a conv tile.
int64_t ActiveMacs(const FlattenedLayer& l, int64_t rows, int64_t cols, const PEArray& pe)
{
    int64_t active = 1;
    for (const auto& [dim, factor] : pe.unrolling)
    {
        int64_t extent = factor;
        switch (dim)
        {
            case LoopDim::K:
                extent = l.outShape.c;
                break;
            case LoopDim::C:
                extent = l.inChannels;
                break;
            case LoopDim::OX:
                extent = cols;
                break;
            case LoopDim::OY:
                extent = rows;
                break;
            case LoopDim::FX:
                extent = l.base.kernelX;
                break;
            case LoopDim::FY:
                extent = l.base.kernelY;
                break;
        }
        active *= std::clamp<int64_t>(extent, 1, factor);
    }
    return active;
}

/// Accumulates one tile's traffic and turns it into cycles.
struct TileTally
{
    std::vector<LevelAccess> levels;
    int64_t computeCycles = 0;

    explicit TileTally(size_t n)
        : levels(n)
    {
    }
    void Read(int lvl, int64_t words, bool io)
    {
        levels[static_cast<size_t>(lvl)].reads += words;
        if (io)
        {
            levels[static_cast<size_t>(lvl)].ioReads += words;
        }
    }
    void Write(int lvl, int64_t words, bool io)
    {
        levels[static_cast<size_t>(lvl)].writes += words;
        if (io)
        {
            levels[static_cast<size_t>(lvl)].ioWrites += words;
        }
    }
    int64_t MovementCycles(const AcceleratorSpec& hw) const
    {
        int64_t cycles = 0;
        for (size_t i = 0; i < levels.size(); ++i)
        {
            double words = static_cast<double>(levels[i].reads + levels[i].writes);
            cycles = std::max(cycles, static_cast<int64_t>(std::ceil(words / hw.levels[i].bandwidth)));
        }
        return cycles;
    }
};

/// Shared cost arithmetic for one tile given fresh row/col sets per tensor.
struct TileWork
{
    std::vector<int64_t> freshRows;
    std::vector<int64_t> freshCols;
    // Per layer tensor and operand: tapped input words.
    std::vector<std::vector<int64_t>> tappedWords;
};

struct Accumulator
{
    const AcceleratorSpec& hw;
    int lbI, lbO, lbW, gb, dram;
    CostBreakdown cost;
    double utilWeighted = 0.0;

    explicit Accumulator(const AcceleratorSpec& spec)
        : hw(spec)
        , lbI(spec.InnermostFor(Operand::Inputs))
        , lbO(spec.InnermostFor(Operand::Outputs))
        , lbW(spec.InnermostFor(Operand::Weights))
        , gb(spec.GlobalBufferIndex())
        , dram(spec.DramIndex())
    {
        for (const auto& l : spec.levels)
        {
            cost.levelNames.push_back(l.name);
        }
        cost.levels.resize(spec.levels.size());
    }

    /// Layer compute and I/O traffic for `fresh` output positions of one tile.
    void Layer(TileTally& tally, const FlattenedLayer& l, int64_t rows, int64_t cols,
               const std::vector<int64_t>& tappedWords)
    {
        const int64_t fresh = rows * cols;
        if (fresh == 0)
        {
            return;
        }
        if (l.base.kind == LayerKind::Conv)
        {
            int64_t macs = fresh * MacsPerPosition(l.base, l.inChannels);
            int64_t active = ActiveMacs(l, rows, cols, hw.pe);
            tally.computeCycles += CeilDiv(macs, active);
            cost.macs += macs;
            utilWeighted += static_cast<double>(macs) * static_cast<double>(active) / static_cast<double>(hw.pe.totalMacs);
        }
        else
        {
            int64_t ops = fresh * OpsPerPosition(l.base, l.outShape.c);
            tally.computeCycles += CeilDiv(ops, hw.pe.totalMacs);
            cost.ops += ops;
        }
        for (int64_t words : tappedWords)
        {
            tally.Read(gb, words, true);
            if (lbI != gb)
            {
                tally.Write(lbI, words, true);
                tally.Read(lbI, words, true);
            }
        }
        const int64_t outWords = fresh * l.outShape.c;
        if (lbO != gb)
        {
            tally.Write(lbO, outWords, true);
            tally.Read(lbO, outWords, true);
        }
        tally.Write(gb, outWords, true);
    }

    void Spill(TileTally& tally, int64_t freshWords, int64_t liveWords, int bits)
    {
        int64_t lbWords = WordsForBytes(LocalActivationBytes(hw), bits);
        int64_t capWords = WordsForBytes(hw.ActivationCapacityBytes(), bits);
        if (freshWords > lbWords)
        {
            tally.Write(gb, freshWords - lbWords, true);
            tally.Read(gb, freshWords - lbWords, true);
        }
        if (liveWords > capWords)
        {
            tally.Write(dram, liveWords - capWords, true);
            tally.Read(dram, liveWords - capWords, true);
        }
    }

    void Close(TileTally& tally)
    {
        int64_t latency = std::max(tally.computeCycles, tally.MovementCycles(hw));
        cost.latencyCycles += latency;
        for (size_t i = 0; i < tally.levels.size(); ++i)
        {
            auto& dst = cost.levels[i];
            dst.reads += tally.levels[i].reads;
            dst.writes += tally.levels[i].writes;
            dst.ioReads += tally.levels[i].ioReads;
            dst.ioWrites += tally.levels[i].ioWrites;
        }
    }

    CostBreakdown Finish(int64_t frames)
    {
        cost.utilAvg = cost.macs > 0 ? utilWeighted / static_cast<double>(cost.macs) : 1.0;
        cost.latencyCycles *= frames;
        cost.macs *= frames;
        cost.ops *= frames;
        cost.exitWords *= frames;
        for (auto& l : cost.levels)
        {
            l.reads *= frames;
            l.writes *= frames;
            l.ioReads *= frames;
            l.ioWrites *= frames;
        }
        double energy = hw.pe.macCost * static_cast<double>(cost.macs + cost.ops);
        for (size_t i = 0; i < cost.levels.size(); ++i)
        {
            energy += static_cast<double>(cost.levels[i].reads) * hw.levels[i].readCost +
                      static_cast<double>(cost.levels[i].writes) * hw.levels[i].writeCost;
        }
        cost.energy = energy;
        cost.edp = energy * static_cast<double>(cost.latencyCycles);
        return cost;
    }
};

/// Where stack weights stay resident: a level index, or -1 when they must be re-streamed.
int WeightResidence(const AcceleratorSpec& hw, int64_t weightBytes)
{
    int lbW = hw.InnermostFor(Operand::Weights);
    if (Fits(hw.levels[static_cast<size_t>(lbW)], weightBytes))
    {
        return lbW;
    }
    int gb = hw.GlobalBufferIndex();
    if (Fits(hw.levels[static_cast<size_t>(gb)], weightBytes))
    {
        return gb;
    }
    return -1;
}

std::vector<int64_t> StackWeightWords(const FlattenedWorkload& flat, const SubStack& stack)
{
    std::vector<int64_t> out;
    for (int k = stack.first; k <= stack.last; ++k)
    {
        const FlattenedLayer& l = flat.layers[static_cast<size_t>(k)];
        out.push_back(WeightWords(l.base, l.inChannels));
    }
    return out;
}

/// Weight traffic shared by both evaluators.
class WeightTraffic
{
public:
    WeightTraffic(const FlattenedWorkload& flat, const SubStack& stack, const AcceleratorSpec& hw)
        : m_Words(StackWeightWords(flat, stack))
        , m_Lb(hw.InnermostFor(Operand::Weights))
        , m_Dram(hw.DramIndex())
    {
        for (int64_t w : m_Words)
        {
            m_Total += w;
        }
        m_Resident = WeightResidence(hw, BytesForWords(m_Total, flat.weightBits));
    }

    void Initial(TileTally& tally) const
    {
        if (m_Total == 0 || m_Resident < 0)
        {
            return;
        }
        tally.Read(m_Dram, m_Total, false);
        tally.Write(m_Resident, m_Total, false);
    }

    /// Start of a tile row: re-stream the weights of layers active in it.
    void BandStart(TileTally& tally, const std::vector<bool>& active) const
    {
        if (m_Resident >= 0)
        {
            return;
        }
        for (size_t i = 0; i < m_Words.size(); ++i)
        {
            if (active[i] && m_Words[i] > 0)
            {
                tally.Read(m_Dram, m_Words[i], false);
                tally.Write(m_Lb, m_Words[i], false);
            }
        }
    }

    /// Per tile: the array reads weights of each active layer from the innermost level.
    void Tile(TileTally& tally, const std::vector<bool>& active) const
    {
        for (size_t i = 0; i < m_Words.size(); ++i)
        {
            if (!active[i] || m_Words[i] == 0)
            {
                continue;
            }
            if (m_Resident >= 0 && m_Resident != m_Lb)
            {
                tally.Read(m_Resident, m_Words[i], false);
                tally.Write(m_Lb, m_Words[i], false);
            }
            tally.Read(m_Lb, m_Words[i], false);
        }
    }

private:
    std::vector<int64_t> m_Words;
    int64_t m_Total = 0;
    int m_Lb;
    int m_Dram;
    int m_Resident = -1;
};

void CheckFootprint(int64_t freshBytes, const AcceleratorSpec& hw)
{
    if (freshBytes > hw.ActivationCapacityBytes())
    {
        throw OnChipOverflow("tile footprint of " + std::to_string(freshBytes) + " bytes exceeds on-chip capacity of " +
                             std::to_string(hw.ActivationCapacityBytes()) + " bytes");
    }
}

}   // namespace

std::vector<TileInstance> ScheduleTiles(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile)
{
    TileConfig space = ExitTileSpace(flat, stack);
    tile = ClampTile(flat, stack, tile);
    const bool realTime = flat.mode == ExecutionMode::RealTime;
    const int64_t ey = flat.layers.at(static_cast<size_t>(stack.last)).outShape.y;
    const int64_t bands = realTime ? 1 : CeilDiv(space.ty, tile.ty);
    const int64_t cols = CeilDiv(space.tx, tile.tx);
    std::vector<TileInstance> out;
    out.reserve(static_cast<size_t>(bands * cols));
    for (int64_t b = 0; b < bands; ++b)
    {
        for (int64_t a = 0; a < cols; ++a)
        {
            TileInstance ti;
            ti.band = b;
            ti.column = a;
            ti.rows = realTime ? Interval{ ey - 1, ey } : Interval{ b * tile.ty, std::min(space.ty, (b + 1) * tile.ty) };
            ti.cols = { a * tile.tx, std::min(space.tx, (a + 1) * tile.tx) };
            // Only the first temporal pass reaches rows nothing has produced yet.
            ti.phase = (!realTime && b == 0) ? TilePhase::WarmUp : TilePhase::Stable;
            out.push_back(ti);
        }
    }
    return out;
}

DependencyMap BackpropDependency(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile,
                                 size_t tileIndex)
{
    StackPlan plan(flat, stack, tile);
    const int64_t idx = static_cast<int64_t>(tileIndex);
    if (idx >= plan.Bands() * plan.Cols())
    {
        throw std::out_of_range("tile index out of range");
    }
    const int64_t b = idx / plan.Cols();
    const int64_t a = idx % plan.Cols();
    DependencyMap map;
    for (size_t t = 0; t < plan.Tensors(); ++t)
    {
        RegionSplit r;
        r.rows = plan.RowHull(t, b);
        r.cols = plan.ColHull(t, a);
        r.freshRows = plan.FreshRows(t, b);
        r.freshCols = plan.FreshCols(t, a);
        r.freshElements = plan.Fresh(t, b, a);
        r.cachedElements = r.rows.Size() * r.cols.Size() - r.freshElements;
        map.tensors.push_back(std::move(r));
    }
    return map;
}

int64_t FreshFootprintBytes(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile)
{
    StackPlan plan(flat, stack, tile);
    int64_t peak = 0;
    for (int64_t b = 0; b < plan.Bands(); ++b)
    {
        for (int64_t a = 0; a < plan.Cols(); ++a)
        {
            peak = std::max(peak, FreshWords(plan, b, a));
        }
    }
    return BytesForWords(peak, flat.activationBits);
}

namespace
{

int64_t PeakLive(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile, int64_t firstBand)
{
    StackPlan plan(flat, stack, tile);
    int64_t peak = 0;
    for (int64_t b = firstBand; b < plan.Bands(); ++b)
    {
        for (int64_t a = 0; a < plan.Cols(); ++a)
        {
            peak = std::max(peak, LiveWords(plan, b, a));
        }
    }
    return BytesForWords(peak, flat.activationBits);
}

}   // namespace

int64_t PeakIoCache(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile)
{
    return PeakLive(flat, stack, tile, 0);
}

int64_t StablePeakIoCache(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile)
{
    // Band 0 is the warm-up pass except in RealTime mode.
    return PeakLive(flat, stack, tile, flat.mode == ExecutionMode::RealTime ? 0 : 1);
}

CostBreakdown EvaluateSubStack(const FlattenedWorkload& flat, const SubStack& stack, TileConfig tile,
                               const AcceleratorSpec& hw)
{
    StackPlan plan(flat, stack, tile);
    const int bits = flat.activationBits;
    Accumulator acc(hw);
    WeightTraffic weights(flat, stack, hw);
    const size_t nt = plan.Tensors();
    int64_t peakLive = 0;
    int64_t peakCached = 0;

    for (int64_t b = 0; b < plan.Bands(); ++b)
    {
        std::vector<bool> bandActive(nt - 1);
        for (size_t t = 1; t < nt; ++t)
        {
            bandActive[t - 1] = !plan.FreshRows(t, b).Empty();
        }
        for (int64_t a = 0; a < plan.Cols(); ++a)
        {
            TileTally tally(hw.levels.size());
            if (b == 0 && a == 0)
            {
                weights.Initial(tally);
            }
            if (a == 0)
            {
                weights.BandStart(tally, bandActive);
            }
            std::vector<bool> active(nt - 1);
            for (size_t t = 1; t < nt; ++t)
            {
                const int64_t rows = plan.FreshRows(t, b).Count();
                const int64_t cols = plan.FreshCols(t, a).Count();
                active[t - 1] = rows * cols > 0;
                if (!active[t - 1])
                {
                    continue;
                }
                std::vector<int64_t> tapped;
                for (size_t o : plan.Operands(t))
                {
                    tapped.push_back(plan.TappedRows(t, o, b).Count() * plan.TappedCols(t, o, a).Count() *
                                     plan.Channels(o));
                }
                acc.Layer(tally, plan.Layer(t), rows, cols, tapped);
            }
            weights.Tile(tally, active);

            const int64_t fresh = FreshWords(plan, b, a);
            const int64_t live = LiveWords(plan, b, a);
            CheckFootprint(BytesForWords(fresh, bits), hw);
            acc.Spill(tally, fresh, live, bits);
            acc.Close(tally);
            peakLive = std::max(peakLive, live);
            peakCached = std::max(peakCached, live - fresh);
            acc.cost.exitWords += plan.Fresh(nt - 1, b, a) * plan.Channels(nt - 1);
        }
    }
    acc.cost.peakIoCacheBytes = BytesForWords(peakLive, bits);
    acc.cost.peakCacheBytes = BytesForWords(peakCached, bits);
    return acc.Finish(flat.framesPerInvocation);
}

CostBreakdown EvaluateLayerByLayer(const FlattenedWorkload& flat, const SubStack& stack,
                                   const AcceleratorSpec& hw)
{
    if (!IsValidSubStack(flat, stack))
    {
        throw std::invalid_argument("invalid sub-stack");
    }
    const bool realTime = flat.mode == ExecutionMode::RealTime;
    const int bits = flat.activationBits;
    const int entry = stack.first == 0 ? kNetworkInput : stack.first - 1;
    const size_t nt = static_cast<size_t>(stack.Size()) + 1;
    auto producerOf = [&](size_t t) { return t == 0 ? entry : stack.first + static_cast<int>(t) - 1; };
    auto tensorOf = [&](int p) { return p == entry ? size_t{ 0 } : static_cast<size_t>(p - stack.first + 1); };
    auto shapeOf = [&](size_t t) -> const TensorShape& { return flat.TensorOf(producerOf(t)); };
    auto layerOf = [&](size_t t) -> const FlattenedLayer& { return flat.layers[static_cast<size_t>(producerOf(t))]; };

    // One pass over the whole exit region, walking producers backwards.
    std::vector<Interval> rows(nt), cols(nt);
    const TensorShape& exitShape = shapeOf(nt - 1);
    rows[nt - 1] = realTime ? Interval{ exitShape.y - 1, exitShape.y } : Interval{ 0, exitShape.y };
    cols[nt - 1] = { 0, exitShape.x };
    for (size_t t = nt - 1; t >= 1; --t)
    {
        const FlattenedLayer& l = layerOf(t);
        const bool add = l.base.kind == LayerKind::ElementwiseAdd;
        for (int p : l.inputs)
        {
            size_t o = tensorOf(p);
            if (rows[t].Empty() || cols[t].Empty())
            {
                continue;
            }
            rows[o] = HullOf(rows[o], TapHull(SetOf(rows[t]), add ? kIdentity : l.WindowY(), shapeOf(o).y));
            cols[o] = HullOf(cols[o], TapHull(SetOf(cols[t]), add ? kIdentity : l.WindowX(), shapeOf(o).x));
        }
    }

    Accumulator acc(hw);
    WeightTraffic weights(flat, stack, hw);
    TileTally tally(hw.levels.size());
    weights.Initial(tally);
    std::vector<bool> active(nt - 1);
    std::vector<IntervalSet> freshRows(nt);
    int64_t fresh = 0;
    int64_t live = 0;
    for (size_t t = 0; t < nt; ++t)
    {
        const int64_t ext = shapeOf(t).y;
        IntervalSet r = SetOf(rows[t]);
        IntervalSet before = realTime ? SetOf({ 0, ext - 1 }) : IntervalSet{};
        IntervalSet after = realTime ? r.Shifted(1).Intersect(SetOf({ 0, ext })) : IntervalSet{};
        freshRows[t] = r.Subtract(before);
        fresh += freshRows[t].Count() * cols[t].Size() * shapeOf(t).c;
        live += before.Union(r).Intersect(r.Union(after)).Count() * cols[t].Size() * shapeOf(t).c;
    }
    std::vector<bool> bandActive(nt - 1);
    for (size_t t = 1; t < nt; ++t)
    {
        bandActive[t - 1] = !freshRows[t].Empty();
    }
    weights.BandStart(tally, bandActive);
    for (size_t t = 1; t < nt; ++t)
    {
        const FlattenedLayer& l = layerOf(t);
        const bool add = l.base.kind == LayerKind::ElementwiseAdd;
        active[t - 1] = freshRows[t].Count() * cols[t].Size() > 0;
        std::vector<int64_t> tapped;
        for (int p : l.inputs)
        {
            size_t o = tensorOf(p);
            int64_t tr = TappedInputs(freshRows[t], add ? kIdentity : l.WindowY(), shapeOf(o).y).Count();
            int64_t tc = TappedInputs(SetOf(cols[t]), add ? kIdentity : l.WindowX(), shapeOf(o).x).Count();
            tapped.push_back(tr * tc * shapeOf(o).c);
        }
        acc.Layer(tally, l, freshRows[t].Count(), cols[t].Size(), tapped);
    }
    weights.Tile(tally, active);
    CheckFootprint(BytesForWords(fresh, bits), hw);
    acc.Spill(tally, fresh, live, bits);
    acc.Close(tally);
    acc.cost.peakIoCacheBytes = BytesForWords(live, bits);
    acc.cost.peakCacheBytes = BytesForWords(live - fresh, bits);
    acc.cost.exitWords = freshRows[nt - 1].Count() * cols[nt - 1].Size() * exitShape.c;
    return acc.Finish(flat.framesPerInvocation);
}

CostBreakdown Aggregate(const std::vector<CostBreakdown>& stacks, const std::vector<Boundary>& boundaries,
                        const AcceleratorSpec& hw, int activationBits)
{
    if (stacks.empty())
    {
        return {};
    }
    if (boundaries.size() + 1 != stacks.size())
    {
        throw std::invalid_argument("aggregate: expected one boundary between consecutive sub-stacks");
    }
    if (stacks.size() == 1)
    {
        return stacks.front();
    }
    CostBreakdown total;
    total.levelNames = stacks.front().levelNames;
    total.levels.resize(total.levelNames.size());
    total.utilAvg = 0.0;
    double utilWeighted = 0.0;
    double energy = 0.0;
    for (const auto& c : stacks)
    {
        total.latencyCycles += c.latencyCycles;
        energy += c.energy;
        total.peakIoCacheBytes = std::max(total.peakIoCacheBytes, c.peakIoCacheBytes);
        total.peakCacheBytes = std::max(total.peakCacheBytes, c.peakCacheBytes);
        total.macs += c.macs;
        total.ops += c.ops;
        utilWeighted += c.utilAvg * static_cast<double>(c.macs);
        for (size_t i = 0; i < total.levels.size(); ++i)
        {
            total.levels[i].reads += c.levels[i].reads;
            total.levels[i].writes += c.levels[i].writes;
            total.levels[i].ioReads += c.levels[i].ioReads;
            total.levels[i].ioWrites += c.levels[i].ioWrites;
        }
    }
    total.exitWords = stacks.back().exitWords;
    const int lvl[2] = { hw.GlobalBufferIndex(), hw.DramIndex() };
    for (const auto& bnd : boundaries)
    {
        const size_t i = static_cast<size_t>(lvl[bnd.viaDram ? 1 : 0]);
        const int64_t words = bnd.transferBytes * 8 / activationBits;
        const MemoryLevel& level = hw.levels[i];
        total.levels[i].writes += words;
        total.levels[i].reads += words;
        total.levels[i].ioWrites += words;
        total.levels[i].ioReads += words;
        energy += static_cast<double>(words) * (level.readCost + level.writeCost);
        total.latencyCycles += static_cast<int64_t>(std::ceil(2.0 * static_cast<double>(words) / level.bandwidth));
    }
    total.energy = energy;
    total.utilAvg = total.macs > 0 ? utilWeighted / static_cast<double>(total.macs) : 1.0;
    total.edp = total.energy * static_cast<double>(total.latencyCycles);
    return total;
}

}   // namespace causalflow
