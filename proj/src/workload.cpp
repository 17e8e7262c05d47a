//
// Copyright © 2026 The causalflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "causalflow/workload.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace causalflow
{

using Json = nlohmann::ordered_json;

std::string_view ToString(LayerKind kind)
{
    switch (kind)
    {
        case LayerKind::Conv:
            return "conv";
        case LayerKind::Pool:
            return "pool";
        case LayerKind::ElementwiseAdd:
            return "add";
    }
    return "?";
}

int WorkloadGraph::IndexOf(int id) const
{
    for (size_t i = 0; i < layers.size(); ++i)
    {
        if (layers[i].id == id)
        {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::vector<std::vector<int>> WorkloadGraph::Consumers() const
{
    std::vector<std::vector<int>> consumers(layers.size());
    for (size_t i = 0; i < layers.size(); ++i)
    {
        for (int pred : layers[i].predecessors)
        {
            int p = IndexOf(pred);
            if (p >= 0)
            {
                consumers[p].push_back(static_cast<int>(i));
            }
        }
    }
    return consumers;
}

int WorkloadGraph::SinkIndex() const
{
    auto consumers = Consumers();
    int sink = -1;
    for (size_t i = 0; i < consumers.size(); ++i)
    {
        if (consumers[i].empty())
        {
            if (sink >= 0)
            {
                throw ConfigError("graph has more than one sink layer");
            }
            sink = static_cast<int>(i);
        }
    }
    if (sink < 0)
    {
        throw ConfigError("graph has no sink layer");
    }
    return sink;
}

int64_t SlidingOutputExtent(int64_t in, int64_t padLo, int64_t padHi, int64_t kernel, int64_t dilation,
                            int64_t stride)
{
    if (stride < 1)
    {
        return 0;
    }
    int64_t span = in + padLo + padHi - dilation * (kernel - 1) - 1;
    if (span < 0)
    {
        return 0;
    }
    return span / stride + 1;
}

namespace
{

[[noreturn]] void Fail(const std::string& msg)
{
    throw ConfigError(msg);
}

void CheckKeys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    if (!obj.is_object())
    {
        Fail(where + ": expected an object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it)
    {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
        {
            Fail(where + ": unknown key '" + it.key() + "'");
        }
    }
}

int64_t GetInt(const Json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key))
    {
        Fail(where + ": missing key '" + key + "'");
    }
    const Json& v = obj.at(key);
    if (!v.is_number_integer())
    {
        Fail(where + ": '" + key + "' must be an integer");
    }
    return v.get<int64_t>();
}

std::vector<int64_t> GetIntList(const Json& obj, const char* key, size_t n, std::vector<int64_t> fallback,
                                const std::string& where)
{
    if (!obj.contains(key))
    {
        return fallback;
    }
    const Json& v = obj.at(key);
    if (!v.is_array() || v.size() != n)
    {
        Fail(where + ": '" + key + "' must be a list of " + std::to_string(n) + " integers");
    }
    std::vector<int64_t> out;
    for (const auto& e : v)
    {
        if (!e.is_number_integer())
        {
            Fail(where + ": '" + key + "' must contain integers");
        }
        out.push_back(e.get<int64_t>());
    }
    return out;
}

LayerKind ParseKind(const std::string& kind, const std::string& where)
{
    std::string k = kind;
    std::transform(k.begin(), k.end(), k.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (k == "conv")
    {
        return LayerKind::Conv;
    }
    if (k == "pool")
    {
        return LayerKind::Pool;
    }
    if (k == "add")
    {
        return LayerKind::ElementwiseAdd;
    }
    if (k == "fc" || k == "dense" || k == "fully_connected" || k == "linear" || k == "gemm")
    {
        Fail(where + ": unsupported kernel kind '" + kind + "'");
    }
    Fail(where + ": unknown layer kind '" + kind + "'");
}

/// Kahn sort keeping the document order among ready layers.
std::vector<LayerSpec> TopoSort(std::vector<LayerSpec> layers)
{
    std::map<int, size_t> byId;
    for (size_t i = 0; i < layers.size(); ++i)
    {
        if (!byId.emplace(layers[i].id, i).second)
        {
            Fail("duplicate layer id " + std::to_string(layers[i].id));
        }
    }
    std::vector<int> pending(layers.size(), 0);
    for (size_t i = 0; i < layers.size(); ++i)
    {
        for (int p : layers[i].predecessors)
        {
            if (p == kNetworkInput)
            {
                continue;
            }
            if (byId.find(p) == byId.end())
            {
                Fail("layer " + std::to_string(layers[i].id) + ": unknown predecessor " + std::to_string(p));
            }
            ++pending[i];
        }
    }
    std::vector<LayerSpec> sorted;
    std::vector<bool> done(layers.size(), false);
    while (sorted.size() < layers.size())
    {
        bool progressed = false;
        for (size_t i = 0; i < layers.size(); ++i)
        {
            if (done[i] || pending[i] != 0)
            {
                continue;
            }
            done[i] = true;
            progressed = true;
            sorted.push_back(layers[i]);
            for (size_t j = 0; j < layers.size(); ++j)
            {
                for (int p : layers[j].predecessors)
                {
                    if (p == layers[i].id)
                    {
                        --pending[j];
                    }
                }
            }
            break;
        }
        if (!progressed)
        {
            Fail("cyclic dependency between layers");
        }
    }
    return sorted;
}

}   // namespace

WorkloadGraph ParseWorkload(std::string_view text)
{
    Json doc;
    try
    {
        doc = Json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        Fail(std::string("workload: ") + e.what());
    }
    CheckKeys(doc, { "input_shape", "bit_width", "layers" }, "workload");

    WorkloadGraph g;
    if (!doc.contains("input_shape"))
    {
        Fail("workload: missing key 'input_shape'");
    }
    const Json& in = doc.at("input_shape");
    CheckKeys(in, { "x", "y", "c" }, "input_shape");
    g.inputShape = { GetInt(in, "x", "input_shape"), GetInt(in, "y", "input_shape"), GetInt(in, "c", "input_shape") };

    if (doc.contains("bit_width"))
    {
        const Json& bw = doc.at("bit_width");
        CheckKeys(bw, { "weight", "activation" }, "bit_width");
        if (bw.contains("weight"))
        {
            g.weightBits = static_cast<int>(GetInt(bw, "weight", "bit_width"));
        }
        if (bw.contains("activation"))
        {
            g.activationBits = static_cast<int>(GetInt(bw, "activation", "bit_width"));
        }
    }

    if (!doc.contains("layers") || !doc.at("layers").is_array())
    {
        Fail("workload: 'layers' must be a list");
    }
    const Json& layers = doc.at("layers");
    if (layers.empty())
    {
        Fail("graph has no layers");
    }

    std::vector<LayerSpec> parsed;
    int previousId = kNetworkInput;
    for (size_t i = 0; i < layers.size(); ++i)
    {
        const Json& l = layers[i];
        std::string where = "layers[" + std::to_string(i) + "]";
        CheckKeys(l, { "id", "kind", "k", "kernel", "stride", "dilation", "padding", "predecessors", "interleave" },
                  where);
        LayerSpec spec;
        spec.id = static_cast<int>(GetInt(l, "id", where));
        if (!l.contains("kind") || !l.at("kind").is_string())
        {
            Fail(where + ": missing string key 'kind'");
        }
        spec.kind = ParseKind(l.at("kind").get<std::string>(), where);
        if (l.contains("k"))
        {
            spec.outChannels = GetInt(l, "k", where);
        }
        else if (spec.kind == LayerKind::Conv)
        {
            Fail(where + ": conv layer requires 'k'");
        }
        auto kernel = GetIntList(l, "kernel", 2, { 1, 1 }, where);
        auto stride = GetIntList(l, "stride", 2, { 1, 1 }, where);
        auto dilation = GetIntList(l, "dilation", 2, { 1, 1 }, where);
        auto padding = GetIntList(l, "padding", 4, { 0, 0, 0, 0 }, where);
        spec.kernelX = kernel[0];
        spec.kernelY = kernel[1];
        spec.strideX = stride[0];
        spec.strideY = stride[1];
        spec.dilationX = dilation[0];
        spec.dilationY = dilation[1];
        spec.padLeft = padding[0];
        spec.padRight = padding[1];
        spec.padTop = padding[2];
        spec.padBottom = padding[3];
        if (l.contains("predecessors"))
        {
            const Json& preds = l.at("predecessors");
            if (!preds.is_array())
            {
                Fail(where + ": 'predecessors' must be a list");
            }
            for (const auto& p : preds)
            {
                if (!p.is_number_integer())
                {
                    Fail(where + ": predecessor ids must be integers");
                }
                spec.predecessors.push_back(p.get<int>());
            }
        }
        else
        {
            spec.predecessors = { previousId };
        }
        if (l.contains("interleave"))
        {
            // Annotation written by the transform command; informational only.
            const Json& il = l.at("interleave");
            CheckKeys(il, { "in", "out" }, where + ".interleave");
        }
        previousId = spec.id;
        parsed.push_back(std::move(spec));
    }

    g.layers = TopoSort(std::move(parsed));
    auto diags = ValidateGraph(g);
    if (!diags.empty())
    {
        std::ostringstream os;
        os << "invalid workload:";
        for (const auto& d : diags)
        {
            os << "\n  layer " << d.layerId << " [" << d.rule << "] " << d.message;
        }
        Fail(os.str());
    }
    return g;
}

WorkloadGraph LoadWorkload(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
    {
        throw ConfigError("cannot open workload file '" + path + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return ParseWorkload(ss.str());
}

std::string SerializeWorkload(const WorkloadGraph& graph)
{
    Json doc;
    doc["input_shape"] = { { "x", graph.inputShape.x }, { "y", graph.inputShape.y }, { "c", graph.inputShape.c } };
    doc["bit_width"] = { { "weight", graph.weightBits }, { "activation", graph.activationBits } };
    Json layers = Json::array();
    for (const auto& l : graph.layers)
    {
        Json j;
        j["id"] = l.id;
        j["kind"] = std::string(ToString(l.kind));
        if (l.kind == LayerKind::Conv)
        {
            j["k"] = l.outChannels;
        }
        j["kernel"] = { l.kernelX, l.kernelY };
        j["stride"] = { l.strideX, l.strideY };
        j["dilation"] = { l.dilationX, l.dilationY };
        j["padding"] = { l.padLeft, l.padRight, l.padTop, l.padBottom };
        j["predecessors"] = l.predecessors;
        layers.push_back(std::move(j));
    }
    doc["layers"] = std::move(layers);
    return doc.dump(2) + "\n";
}

namespace
{

struct ShapePass
{
    std::vector<LayerShapes> shapes;
    std::vector<Diagnostic> diags;
};

ShapePass RunShapes(const WorkloadGraph& g)
{
    ShapePass pass;
    pass.shapes.resize(g.layers.size());
    std::vector<bool> ok(g.layers.size(), false);
    for (size_t i = 0; i < g.layers.size(); ++i)
    {
        const LayerSpec& l = g.layers[i];
        auto diag = [&](std::string rule, std::string msg) {
            pass.diags.push_back({ l.id, std::move(rule), std::move(msg) });
        };
        bool inputsOk = true;
        for (int p : l.predecessors)
        {
            if (p == kNetworkInput)
            {
                pass.shapes[i].inputs.push_back(g.inputShape);
                continue;
            }
            int pi = g.IndexOf(p);
            if (pi < 0 || pi >= static_cast<int>(i) || !ok[pi])
            {
                inputsOk = false;
                break;
            }
            pass.shapes[i].inputs.push_back(pass.shapes[pi].output);
        }
        if (!inputsOk)
        {
            continue;
        }
        if (l.kind == LayerKind::ElementwiseAdd)
        {
            if (pass.shapes[i].inputs.size() == 2 && pass.shapes[i].inputs[0] != pass.shapes[i].inputs[1])
            {
                diag("add-shape", "Add predecessors have different output shapes");
                continue;
            }
            pass.shapes[i].output = pass.shapes[i].inputs.front();
            ok[i] = true;
            continue;
        }
        const TensorShape& in = pass.shapes[i].inputs.front();
        TensorShape out;
        out.x = SlidingOutputExtent(in.x, l.padLeft, l.padRight, l.kernelX, l.dilationX, l.strideX);
        out.y = SlidingOutputExtent(in.y, l.padTop, l.padBottom, l.kernelY, l.dilationY, l.strideY);
        out.c = l.kind == LayerKind::Conv ? l.outChannels : in.c;
        if (out.x < 1 || out.y < 1)
        {
            diag("output-extent", "non-positive output extent (" + std::to_string(out.x) + "x" +
                                      std::to_string(out.y) + ")");
            continue;
        }
        pass.shapes[i].output = out;
        ok[i] = true;
    }
    return pass;
}

}   // namespace

std::vector<LayerShapes> InferShapes(const WorkloadGraph& graph)
{
    auto pass = RunShapes(graph);
    if (!pass.diags.empty())
    {
        const auto& d = pass.diags.front();
        throw ConfigError("layer " + std::to_string(d.layerId) + ": " + d.message);
    }
    return pass.shapes;
}

std::vector<Diagnostic> ValidateGraph(const WorkloadGraph& graph)
{
    std::vector<Diagnostic> diags;
    if (graph.layers.empty())
    {
        diags.push_back({ kNetworkInput, "non-empty", "graph has no layers" });
        return diags;
    }
    const TensorShape& in = graph.inputShape;
    if (in.x < 1 || in.y < 1 || in.c < 1)
    {
        diags.push_back({ kNetworkInput, "input-extent", "input extents must be >= 1" });
    }
    if (graph.weightBits < 1 || graph.activationBits < 1)
    {
        diags.push_back({ kNetworkInput, "bit-width", "bit widths must be >= 1" });
    }

    std::set<int> seen;
    bool structural = true;
    for (const auto& l : graph.layers)
    {
        auto diag = [&](std::string rule, std::string msg) {
            diags.push_back({ l.id, std::move(rule), std::move(msg) });
        };
        if (l.id < 0)
        {
            diag("id", "layer ids must be non-negative");
        }
        size_t expectedPreds = l.kind == LayerKind::ElementwiseAdd ? 2 : 1;
        if (l.predecessors.size() != expectedPreds)
        {
            diag("predecessors", std::string(ToString(l.kind)) + " expects " + std::to_string(expectedPreds) +
                                     " predecessor(s)");
            structural = false;
        }
        for (int p : l.predecessors)
        {
            if (p != kNetworkInput && seen.count(p) == 0)
            {
                diag("topological-order", "predecessor " + std::to_string(p) + " does not precede the layer");
                structural = false;
            }
        }
        if (!seen.insert(l.id).second)
        {
            diag("id", "duplicate layer id");
            structural = false;
        }
        if (l.strideX < 1 || l.strideY < 1)
        {
            diag("stride", "strides must be >= 1");
            structural = false;
        }
        if (l.dilationX < 1 || l.dilationY < 1)
        {
            diag("dilation", "dilations must be >= 1");
            structural = false;
        }
        if (l.kernelX < 1 || l.kernelY < 1)
        {
            diag("kernel", "kernel extents must be >= 1");
            structural = false;
        }
        if (l.padLeft < 0 || l.padRight < 0 || l.padTop < 0 || l.padBottom < 0)
        {
            diag("padding", "padding must be >= 0");
            structural = false;
        }
        if (l.kind == LayerKind::Conv && l.outChannels < 1)
        {
            diag("channels", "conv output channels must be >= 1");
            structural = false;
        }
        if (l.kind == LayerKind::ElementwiseAdd &&
            (l.kernelX != 1 || l.kernelY != 1 || l.strideX != 1 || l.strideY != 1 || l.dilationX != 1 ||
             l.dilationY != 1 || l.padLeft != 0 || l.padRight != 0 || l.padTop != 0 || l.padBottom != 0))
        {
            diag("add-geometry", "Add must use a unit window without padding");
            structural = false;
        }
    }
    if (!structural)
    {
        return diags;
    }
    int sinks = 0;
    for (const auto& c : graph.Consumers())
    {
        sinks += c.empty() ? 1 : 0;
    }
    if (sinks != 1)
    {
        diags.push_back({ graph.layers.back().id, "single-sink", "graph must have exactly one sink layer" });
    }
    auto pass = RunShapes(graph);
    diags.insert(diags.end(), pass.diags.begin(), pass.diags.end());
    return diags;
}

int64_t MacsPerPosition(const LayerSpec& layer, int64_t inChannels)
{
    if (layer.kind != LayerKind::Conv)
    {
        return 0;
    }
    return layer.outChannels * inChannels * layer.kernelX * layer.kernelY;
}

int64_t OpsPerPosition(const LayerSpec& layer, int64_t channels)
{
    switch (layer.kind)
    {
        case LayerKind::Conv:
            return 0;
        case LayerKind::Pool:
            return channels * layer.kernelX * layer.kernelY;
        case LayerKind::ElementwiseAdd:
            return channels;
    }
    return 0;
}

int64_t WeightWords(const LayerSpec& layer, int64_t inChannels)
{
    return MacsPerPosition(layer, inChannels);
}

int64_t MacCount(const WorkloadGraph& graph, const std::vector<TensorShape>& outputRegions)
{
    auto shapes = InferShapes(graph);
    int64_t total = 0;
    for (size_t i = 0; i < graph.layers.size(); ++i)
    {
        const TensorShape& r = outputRegions.at(i);
        total += r.x * r.y * MacsPerPosition(graph.layers[i], shapes[i].inputs.front().c);
    }
    return total;
}

int64_t MacCount(const WorkloadGraph& graph)
{
    auto shapes = InferShapes(graph);
    std::vector<TensorShape> regions;
    for (const auto& s : shapes)
    {
        regions.push_back(s.output);
    }
    return MacCount(graph, regions);
}

}   // namespace causalflow
