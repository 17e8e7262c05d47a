//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/oracle.hpp"

#include <algorithm>
#include <limits>

namespace causalflow
{

Tensor::Tensor(TensorShape s)
    : shape(s)
    , values(static_cast<size_t>(s.Elements()), 0)
{
}

int64_t& Tensor::At(int64_t x, int64_t y, int64_t c)
{
    return values[static_cast<size_t>((y * shape.x + x) * shape.c + c)];
}

int64_t Tensor::At(int64_t x, int64_t y, int64_t c) const
{
    return values[static_cast<size_t>((y * shape.x + x) * shape.c + c)];
}

Tensor RandomTensor(TensorShape shape, std::mt19937_64& rng, int64_t lo, int64_t hi)
{
    Tensor t(shape);
    std::uniform_int_distribution<int64_t> dist(lo, hi);
    for (auto& v : t.values)
    {
        v = dist(rng);
    }
    return t;
}

namespace
{

struct KernelDims
{
    int64_t k = 0;
    int64_t c = 0;
    int64_t fy = 0;
    int64_t fx = 0;
};

WeightSet WeightsFor(const std::vector<std::pair<LayerKind, KernelDims>>& dims, uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<int64_t> dist(-8, 8);
    WeightSet out;
    for (const auto& [kind, d] : dims)
    {
        std::vector<int64_t> w;
        if (kind == LayerKind::Conv)
        {
            w.resize(static_cast<size_t>(d.k * d.c * d.fy * d.fx));
            for (auto& v : w)
            {
                v = dist(rng);
            }
        }
        out.push_back(std::move(w));
    }
    return out;
}

int64_t WrapAdd(int64_t a, int64_t b)
{
    return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}

int64_t WrapMul(int64_t a, int64_t b)
{
    return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

/// One layer's geometry as the executors see it.
struct Op
{
    LayerKind kind = LayerKind::Conv;
    AxisWindow wx;
    AxisWindow wy;
    int64_t outC = 1;
    int64_t inC = 1;
    const std::vector<int64_t>* weights = nullptr;
};

/// Calls f(ix, iy) for every in-range tap of output (x, y), in kernel order.
template <class F>
void ForEachTap(const Op& op, int64_t x, int64_t y, int64_t inX, int64_t inY, F&& f)
{
    if (op.kind == LayerKind::ElementwiseAdd)
    {
        f(x, y, int64_t{ 0 }, int64_t{ 0 });
        return;
    }
    for (int64_t fy = 0; fy < op.wy.kernel; ++fy)
    {
        int64_t iy = y * op.wy.stride - op.wy.padLo + fy * op.wy.dilation;
        if (iy < 0 || iy >= inY)
        {
            continue;
        }
        for (int64_t fx = 0; fx < op.wx.kernel; ++fx)
        {
            int64_t ix = x * op.wx.stride - op.wx.padLo + fx * op.wx.dilation;
            if (ix < 0 || ix >= inX)
            {
                continue;
            }
            f(ix, iy, fx, fy);
        }
    }
}

/// Computes all channels of output position (x, y).
void ComputePosition(const Op& op, const std::vector<const Tensor*>& ins, int64_t x, int64_t y, Tensor& out)
{
    const Tensor& in0 = *ins.front();
    if (op.kind == LayerKind::ElementwiseAdd)
    {
        for (int64_t c = 0; c < op.outC; ++c)
        {
            out.At(x, y, c) = WrapAdd(in0.At(x, y, c), ins[1]->At(x, y, c));
        }
        return;
    }
    if (op.kind == LayerKind::Pool)
    {
        for (int64_t c = 0; c < op.outC; ++c)
        {
            bool any = false;
            int64_t best = 0;
            ForEachTap(op, x, y, in0.shape.x, in0.shape.y, [&](int64_t ix, int64_t iy, int64_t, int64_t) {
                int64_t v = in0.At(ix, iy, c);
                best = any ? std::max(best, v) : v;
                any = true;
            });
            out.At(x, y, c) = best;
        }
        return;
    }
    const auto& w = *op.weights;
    for (int64_t k = 0; k < op.outC; ++k)
    {
        int64_t acc = 0;
        ForEachTap(op, x, y, in0.shape.x, in0.shape.y, [&](int64_t ix, int64_t iy, int64_t fx, int64_t fy) {
            for (int64_t c = 0; c < op.inC; ++c)
            {
                size_t wi = static_cast<size_t>(((k * op.inC + c) * op.wy.kernel + fy) * op.wx.kernel + fx);
                acc = WrapAdd(acc, WrapMul(w[wi], in0.At(ix, iy, c)));
            }
        });
        out.At(x, y, k) = acc;
    }
}

Op OpOfFlattened(const FlattenedLayer& l, const WeightSet& weights, size_t index)
{
    Op op;
    op.kind = l.base.kind;
    op.wx = l.WindowX();
    op.wy = l.WindowY();
    op.outC = l.outShape.c;
    op.inC = l.inChannels;
    op.weights = &weights.at(index);
    return op;
}

}   // namespace

WeightSet MakeWeights(const WorkloadGraph& graph, uint64_t seed)
{
    auto shapes = InferShapes(graph);
    std::vector<std::pair<LayerKind, KernelDims>> dims;
    for (size_t i = 0; i < graph.layers.size(); ++i)
    {
        const LayerSpec& l = graph.layers[i];
        dims.push_back({ l.kind, { shapes[i].output.c, shapes[i].inputs.front().c, l.kernelY, l.kernelX } });
    }
    return WeightsFor(dims, seed);
}

WeightSet MakeWeights(const FlattenedWorkload& flat, uint64_t seed)
{
    std::vector<std::pair<LayerKind, KernelDims>> dims;
    for (const auto& l : flat.layers)
    {
        dims.push_back({ l.base.kind, { l.outShape.c, l.inChannels, l.base.kernelY, l.base.kernelX } });
    }
    return WeightsFor(dims, seed);
}

std::vector<Tensor> ExecuteReference(const WorkloadGraph& graph, const WeightSet& weights,
                                     const std::vector<Tensor>& frames)
{
    auto shapes = InferShapes(graph);
    std::vector<Tensor> outputs;
    for (const Tensor& frame : frames)
    {
        if (!(frame.shape == graph.inputShape))
        {
            throw std::invalid_argument("frame shape does not match the workload input shape");
        }
        std::vector<Tensor> acts;
        for (size_t i = 0; i < graph.layers.size(); ++i)
        {
            const LayerSpec& l = graph.layers[i];
            Op op;
            op.kind = l.kind;
            op.wx = { l.kernelX, l.strideX, l.dilationX, l.padLeft };
            op.wy = { l.kernelY, l.strideY, l.dilationY, l.padTop };
            op.outC = shapes[i].output.c;
            op.inC = shapes[i].inputs.front().c;
            op.weights = &weights.at(i);
            std::vector<const Tensor*> ins;
            for (int p : l.predecessors)
            {
                ins.push_back(p == kNetworkInput ? &frame : &acts[static_cast<size_t>(graph.IndexOf(p))]);
            }
            Tensor out(shapes[i].output);
            for (int64_t y = 0; y < out.shape.y; ++y)
            {
                for (int64_t x = 0; x < out.shape.x; ++x)
                {
                    ComputePosition(op, ins, x, y, out);
                }
            }
            acts.push_back(std::move(out));
        }
        outputs.push_back(std::move(acts.back()));
    }
    return outputs;
}

std::vector<Tensor> FramesFromStream(const Tensor& stream, int64_t frameRows, int64_t count)
{
    if (count - 1 + frameRows > stream.shape.y)
    {
        throw std::invalid_argument("stream too short for the requested frames");
    }
    std::vector<Tensor> frames;
    for (int64_t f = 0; f < count; ++f)
    {
        Tensor t({ stream.shape.x, frameRows, stream.shape.c });
        for (int64_t y = 0; y < frameRows; ++y)
        {
            for (int64_t x = 0; x < stream.shape.x; ++x)
            {
                for (int64_t c = 0; c < stream.shape.c; ++c)
                {
                    t.At(x, y, c) = stream.At(x, f + y, c);
                }
            }
        }
        frames.push_back(std::move(t));
    }
    return frames;
}

Tensor StreamFromFrames(const std::vector<Tensor>& frames, int64_t rows)
{
    if (frames.empty())
    {
        throw std::invalid_argument("insufficient frames: none given");
    }
    const TensorShape& fs = frames.front().shape;
    const int64_t count = static_cast<int64_t>(frames.size());
    if (count - 1 + fs.y < rows)
    {
        throw std::invalid_argument("insufficient frames: " + std::to_string(count) + " frames of " +
                                    std::to_string(fs.y) + " rows cover fewer than " + std::to_string(rows) + " rows");
    }
    Tensor stream({ fs.x, rows, fs.c });
    for (int64_t s = 0; s < rows; ++s)
    {
        int64_t f = std::min(s, count - 1);
        for (int64_t x = 0; x < fs.x; ++x)
        {
            for (int64_t c = 0; c < fs.c; ++c)
            {
                stream.At(x, s, c) = frames[static_cast<size_t>(f)].At(x, s - f, c);
            }
        }
    }
    return stream;
}

std::vector<Tensor> ExecuteFlattenedAll(const FlattenedWorkload& flat, const WeightSet& weights, const Tensor& input)
{
    if (input.shape.x != flat.inputShape.x || input.shape.c != flat.inputShape.c || input.shape.y < flat.inputShape.y)
    {
        throw std::invalid_argument("flattened input does not cover the workload input extents");
    }
    Tensor view(flat.inputShape);
    std::copy_n(input.values.begin(), view.values.size(), view.values.begin());
    std::vector<Tensor> acts;
    for (size_t i = 0; i < flat.layers.size(); ++i)
    {
        const FlattenedLayer& l = flat.layers[i];
        Op op = OpOfFlattened(l, weights, i);
        std::vector<const Tensor*> ins;
        for (int p : l.inputs)
        {
            ins.push_back(p == kNetworkInput ? &view : &acts[static_cast<size_t>(p)]);
        }
        Tensor out(l.outShape);
        for (int64_t y = 0; y < out.shape.y; ++y)
        {
            for (int64_t x = 0; x < out.shape.x; ++x)
            {
                ComputePosition(op, ins, x, y, out);
            }
        }
        acts.push_back(std::move(out));
    }
    return acts;
}

Tensor ExecuteFlattened(const FlattenedWorkload& flat, const WeightSet& weights, const std::vector<Tensor>& frames)
{
    if (flat.mode == ExecutionMode::Baseline)
    {
        throw std::invalid_argument("baseline workloads run frame by frame; use ExecuteReference");
    }
    Tensor stream = StreamFromFrames(frames, flat.inputShape.y);
    return ExecuteFlattenedAll(flat, weights, stream).back();
}

FrameRow ReferenceRowOf(const FlattenedWorkload& flat, int64_t flattenedRow)
{
    const int64_t period = flat.layers.back().interleaveOut;
    return { flattenedRow % period, flattenedRow / period };
}

namespace
{

/// Bounding box accumulator.
struct Box
{
    int64_t x0 = std::numeric_limits<int64_t>::max();
    int64_t x1 = std::numeric_limits<int64_t>::min();
    int64_t y0 = std::numeric_limits<int64_t>::max();
    int64_t y1 = std::numeric_limits<int64_t>::min();

    bool Empty() const { return x1 < x0; }
    void Add(int64_t x, int64_t y)
    {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    bool Contains(int64_t x, int64_t y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

constexpr int64_t kForever = std::numeric_limits<int64_t>::max();
constexpr int64_t kNever = std::numeric_limits<int64_t>::min();

struct TraceLevels
{
    int lbI, lbO, gb, dram;
    std::vector<LevelAccess>& levels;

    void Read(int lvl, int64_t w) { levels[static_cast<size_t>(lvl)].ioReads += w; }
    void Write(int lvl, int64_t w) { levels[static_cast<size_t>(lvl)].ioWrites += w; }
};

}   // namespace

std::pair<Tensor, ExecutionTrace> ExecuteTiledDf(const FlattenedWorkload& flat, const WeightSet& weights,
                                                 const ScheduleCandidate& candidate, const AcceleratorSpec& hw,
                                                 const Tensor& input)
{
    CheckCandidate(flat, candidate);
    const bool realTime = flat.mode == ExecutionMode::RealTime;
    const size_t n = flat.layers.size();
    const int bits = flat.activationBits;

    // Values of earlier invocations, used only to pre-fill caches in RealTime mode.
    std::vector<Tensor> history;
    if (realTime)
    {
        history = ExecuteFlattenedAll(flat, weights, input);
    }
    Tensor view(flat.inputShape);
    std::copy_n(input.values.begin(), view.values.size(), view.values.begin());

    std::vector<Tensor> outs;
    std::vector<std::vector<char>> ready;   // per layer output position
    for (const auto& l : flat.layers)
    {
        outs.emplace_back(l.outShape);
        ready.emplace_back(static_cast<size_t>(l.outShape.x * l.outShape.y), 0);
    }

    ExecutionTrace trace;
    for (const auto& l : hw.levels)
    {
        trace.levelNames.push_back(l.name);
    }
    trace.levels.resize(hw.levels.size());
    trace.producedRows.resize(n);
    trace.producedCols.resize(n);
    std::vector<Box> produced(n);
    TraceLevels tally{ hw.InnermostFor(Operand::Inputs), hw.InnermostFor(Operand::Outputs), hw.GlobalBufferIndex(),
                       hw.DramIndex(), trace.levels };
    int64_t localBytes = 0;
    for (const auto& l : hw.levels)
    {
        if (!l.Unbounded() && !l.isGlobalBuffer && (l.servesInputs || l.servesOutputs))
        {
            localBytes += l.capacityBytes;
        }
    }
    const int64_t localWords = localBytes * 8 / bits;
    const int64_t capWords = hw.ActivationCapacityBytes() * 8 / bits;

    auto stacks = SubStacksOf(candidate.cuts, static_cast<int>(n));
    for (size_t s = 0; s < stacks.size(); ++s)
    {
        const SubStack& st = stacks[s];
        const int entry = st.first == 0 ? kNetworkInput : st.first - 1;
        const size_t nt = static_cast<size_t>(st.Size()) + 1;
        auto producerOf = [&](size_t t) { return t == 0 ? entry : st.first + static_cast<int>(t) - 1; };
        auto tensorOf = [&](int p) { return p == entry ? size_t{ 0 } : static_cast<size_t>(p - st.first + 1); };
        std::vector<TensorShape> shape(nt);
        for (size_t t = 0; t < nt; ++t)
        {
            shape[t] = flat.TensorOf(producerOf(t));
        }
        std::vector<Op> ops(nt);
        for (size_t t = 1; t < nt; ++t)
        {
            ops[t] = OpOfFlattened(flat.layers[static_cast<size_t>(producerOf(t))], weights,
                                   static_cast<size_t>(producerOf(t)));
        }

        auto tiles = ScheduleTiles(flat, st, candidate.tiles[s]);
        const int64_t nTiles = static_cast<int64_t>(tiles.size());

        // Pass 1: dependency boxes of every tile by marking every tap.
        std::vector<std::vector<Box>> boxes(tiles.size(), std::vector<Box>(nt));
        for (size_t i = 0; i < tiles.size(); ++i)
        {
            auto& bx = boxes[i];
            for (int64_t y = tiles[i].rows.lo; y < tiles[i].rows.hi; ++y)
            {
                for (int64_t x = tiles[i].cols.lo; x < tiles[i].cols.hi; ++x)
                {
                    bx[nt - 1].Add(x, y);
                }
            }
            for (size_t t = nt - 1; t >= 1; --t)
            {
                if (bx[t].Empty())
                {
                    continue;
                }
                const FlattenedLayer& l = flat.layers[static_cast<size_t>(producerOf(t))];
                for (int64_t y = bx[t].y0; y <= bx[t].y1; ++y)
                {
                    for (int64_t x = bx[t].x0; x <= bx[t].x1; ++x)
                    {
                        for (int p : l.inputs)
                        {
                            size_t o = tensorOf(p);
                            ForEachTap(ops[t], x, y, shape[o].x, shape[o].y,
                                       [&](int64_t ix, int64_t iy, int64_t, int64_t) { bx[o].Add(ix, iy); });
                        }
                    }
                }
            }
        }

        // First and last tile touching each position; -1 = pre-filled, kForever = needed later.
        std::vector<std::vector<int64_t>> first(nt), last(nt);
        for (size_t t = 0; t < nt; ++t)
        {
            const size_t area = static_cast<size_t>(shape[t].x * shape[t].y);
            first[t].assign(area, kForever);
            last[t].assign(area, kNever);
            for (int64_t y = 0; y < shape[t].y; ++y)
            {
                for (int64_t x = 0; x < shape[t].x; ++x)
                {
                    size_t e = static_cast<size_t>(y * shape[t].x + x);
                    if (realTime && y < shape[t].y - 1)
                    {
                        first[t][e] = -1;
                    }
                    for (int64_t i = 0; i < nTiles; ++i)
                    {
                        if (boxes[static_cast<size_t>(i)][t].Contains(x, y))
                        {
                            first[t][e] = std::min(first[t][e], i);
                            last[t][e] = i;
                        }
                    }
                    // The next update needs the same box one row later.
                    if (realTime && y >= 1)
                    {
                        for (const auto& bx : boxes)
                        {
                            if (bx[t].Contains(x, y - 1))
                            {
                                last[t][e] = kForever;
                            }
                        }
                    }
                }
            }
        }

        // Pre-fill caches from earlier invocations.
        if (realTime)
        {
            for (size_t t = 1; t < nt; ++t)
            {
                size_t li = static_cast<size_t>(producerOf(t));
                for (int64_t y = 0; y < shape[t].y - 1; ++y)
                {
                    for (int64_t x = 0; x < shape[t].x; ++x)
                    {
                        for (int64_t c = 0; c < shape[t].c; ++c)
                        {
                            outs[li].At(x, y, c) = history[li].At(x, y, c);
                        }
                        ready[li][static_cast<size_t>(y * shape[t].x + x)] = 1;
                    }
                }
            }
        }

        auto available = [&](size_t t, int64_t x, int64_t y) {
            int p = producerOf(t);
            return p == kNetworkInput || ready[static_cast<size_t>(p)][static_cast<size_t>(y * shape[t].x + x)] != 0;
        };
        auto tensorValues = [&](size_t t) -> const Tensor* {
            int p = producerOf(t);
            return p == kNetworkInput ? &view : &outs[static_cast<size_t>(p)];
        };

        int64_t stackPeak = 0;
        int64_t exitWords = 0;
        for (int64_t i = 0; i < nTiles; ++i)
        {
            int64_t freshWords = 0;
            for (size_t t = 0; t < nt; ++t)
            {
                const auto& bx = boxes[static_cast<size_t>(i)][t];
                if (bx.Empty())
                {
                    continue;
                }
                std::vector<std::pair<int64_t, int64_t>> fresh;
                for (int64_t y = bx.y0; y <= bx.y1; ++y)
                {
                    for (int64_t x = bx.x0; x <= bx.x1; ++x)
                    {
                        if (first[t][static_cast<size_t>(y * shape[t].x + x)] == i)
                        {
                            fresh.emplace_back(x, y);
                        }
                    }
                }
                freshWords += static_cast<int64_t>(fresh.size()) * shape[t].c;
                if (t == 0)
                {
                    for (auto [x, y] : fresh)
                    {
                        if (!available(0, x, y))
                        {
                            throw CacheMissError("entry tensor position (" + std::to_string(x) + ", " +
                                                 std::to_string(y) + ") was never produced");
                        }
                    }
                    continue;
                }
                if (t == nt - 1)
                {
                    exitWords += static_cast<int64_t>(fresh.size()) * shape[t].c;
                }
                const size_t li = static_cast<size_t>(producerOf(t));
                const FlattenedLayer& l = flat.layers[li];
                std::vector<const Tensor*> ins;
                for (int p : l.inputs)
                {
                    ins.push_back(tensorValues(tensorOf(p)));
                }
                for (size_t k = 0; k < l.inputs.size(); ++k)
                {
                    size_t o = tensorOf(l.inputs[k]);
                    std::vector<char> touched(static_cast<size_t>(shape[o].x * shape[o].y), 0);
                    int64_t distinct = 0;
                    for (auto [x, y] : fresh)
                    {
                        ForEachTap(ops[t], x, y, shape[o].x, shape[o].y, [&](int64_t ix, int64_t iy, int64_t, int64_t) {
                            if (!available(o, ix, iy))
                            {
                                throw CacheMissError("layer " + std::to_string(l.base.id) + " reads (" +
                                                     std::to_string(ix) + ", " + std::to_string(iy) +
                                                     ") before it was produced");
                            }
                            char& m = touched[static_cast<size_t>(iy * shape[o].x + ix)];
                            distinct += m == 0;
                            m = 1;
                        });
                    }
                    const int64_t words = distinct * shape[o].c;
                    tally.Read(tally.gb, words);
                    if (tally.lbI != tally.gb)
                    {
                        tally.Write(tally.lbI, words);
                        tally.Read(tally.lbI, words);
                    }
                }
                for (auto [x, y] : fresh)
                {
                    ComputePosition(ops[t], ins, x, y, outs[li]);
                    ready[li][static_cast<size_t>(y * shape[t].x + x)] = 1;
                    produced[li].Add(x, y);
                    if (l.base.kind == LayerKind::Conv)
                    {
                        trace.executedMacs += MacsPerPosition(l.base, l.inChannels);
                    }
                    else
                    {
                        trace.executedOps += OpsPerPosition(l.base, l.outShape.c);
                    }
                }
                const int64_t outWords = static_cast<int64_t>(fresh.size()) * l.outShape.c;
                if (tally.lbO != tally.gb)
                {
                    tally.Write(tally.lbO, outWords);
                    tally.Read(tally.lbO, outWords);
                }
                tally.Write(tally.gb, outWords);
            }

            int64_t liveWords = 0;
            for (size_t t = 0; t < nt; ++t)
            {
                int64_t count = 0;
                for (size_t e = 0; e < first[t].size(); ++e)
                {
                    count += first[t][e] <= i && last[t][e] >= i;
                }
                liveWords += count * shape[t].c;
            }
            if (freshWords > localWords)
            {
                tally.Write(tally.gb, freshWords - localWords);
                tally.Read(tally.gb, freshWords - localWords);
            }
            if (liveWords > capWords)
            {
                tally.Write(tally.dram, liveWords - capWords);
                tally.Read(tally.dram, liveWords - capWords);
            }
            stackPeak = std::max(stackPeak, liveWords);
        }
        trace.stackPeakLiveBytes.push_back(BytesForWords(stackPeak, bits));
        trace.peakLiveBytes = std::max(trace.peakLiveBytes, BytesForWords(stackPeak, bits));
        if (s + 1 < stacks.size())
        {
            int lvl = candidate.dramSkip[s] ? tally.gb : tally.dram;
            const int64_t words = exitWords;
            trace.levels[static_cast<size_t>(lvl)].ioWrites += words;
            trace.levels[static_cast<size_t>(lvl)].ioReads += words;
        }
    }

    for (size_t li = 0; li < n; ++li)
    {
        if (!produced[li].Empty())
        {
            trace.producedRows[li] = { produced[li].y0, produced[li].y1 + 1 };
            trace.producedCols[li] = { produced[li].x0, produced[li].x1 + 1 };
        }
    }
    const int64_t frames = flat.framesPerInvocation;
    trace.executedMacs *= frames;
    trace.executedOps *= frames;
    for (auto& l : trace.levels)
    {
        l.ioReads *= frames;
        l.ioWrites *= frames;
    }
    return { std::move(outs.back()), std::move(trace) };
}

int64_t CountMacsExecuted(const ExecutionTrace& trace)
{
    return trace.executedMacs;
}

}   // namespace causalflow
