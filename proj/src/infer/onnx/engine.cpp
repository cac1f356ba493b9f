// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/infer/onnx_engine.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "onnx.pb.h"
#include "value.hpp"

namespace flakelens::infer {

namespace onnx_rt {

std::vector<std::int64_t> Value::as_ints() const {
    if (type == DType::i64) {
        return i;
    }
    std::vector<std::int64_t> r(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        r[k] = static_cast<std::int64_t>(f[k]);
    }
    return r;
}

std::vector<float> Value::as_floats() const {
    if (type == DType::f32) {
        return f;
    }
    return std::vector<float>(i.begin(), i.end());
}

void Node::fail(const std::string& message) const {
    throw InferenceError(op_type + " node '" + name + "': " + message);
}

}  // namespace onnx_rt

namespace {

using onnx_rt::DType;
using onnx_rt::Value;

template <class T>
std::vector<T> from_raw(const std::string& raw, std::size_t count) {
    if (raw.size() != count * sizeof(T)) {
        throw ModelLoadError("tensor raw_data has " + std::to_string(raw.size()) + " bytes, expected " +
                             std::to_string(count * sizeof(T)));
    }
    std::vector<T> v(count);
    if (count > 0) {
        std::memcpy(v.data(), raw.data(), raw.size());
    }
    return v;
}

Value to_value(const onnx::TensorProto& t) {
    if (t.data_location() == onnx::TensorProto::EXTERNAL) {
        throw ModelLoadError("tensor '" + t.name() + "' uses external data, which is not supported");
    }
    Shape shape(t.dims().begin(), t.dims().end());
    const auto count = static_cast<std::size_t>(element_count(shape));
    const bool raw = t.has_raw_data();
    auto check = [&](std::size_t got) {
        if (got != count) {
            throw ModelLoadError("tensor '" + t.name() + "' holds " + std::to_string(got) + " values for shape " +
                                 shape_string(shape));
        }
    };
    switch (t.data_type()) {
    case onnx::TensorProto::FLOAT: {
        std::vector<float> v = raw ? from_raw<float>(t.raw_data(), count)
                                   : std::vector<float>(t.float_data().begin(), t.float_data().end());
        check(v.size());
        return Value::floats(shape, std::move(v));
    }
    case onnx::TensorProto::DOUBLE: {
        const std::vector<double> d = raw ? from_raw<double>(t.raw_data(), count)
                                          : std::vector<double>(t.double_data().begin(), t.double_data().end());
        check(d.size());
        return Value::floats(shape, std::vector<float>(d.begin(), d.end()));
    }
    case onnx::TensorProto::INT64: {
        std::vector<std::int64_t> v = raw ? from_raw<std::int64_t>(t.raw_data(), count)
                                          : std::vector<std::int64_t>(t.int64_data().begin(), t.int64_data().end());
        check(v.size());
        return Value::ints(shape, std::move(v));
    }
    case onnx::TensorProto::INT32: {
        const std::vector<std::int32_t> d = raw ? from_raw<std::int32_t>(t.raw_data(), count)
                                                : std::vector<std::int32_t>(t.int32_data().begin(), t.int32_data().end());
        check(d.size());
        return Value::ints(shape, std::vector<std::int64_t>(d.begin(), d.end()));
    }
    case onnx::TensorProto::BOOL:
    case onnx::TensorProto::UINT8:
    case onnx::TensorProto::INT8: {
        std::vector<std::int64_t> v;
        if (raw) {
            const auto bytes = from_raw<std::uint8_t>(t.raw_data(), count);
            for (auto b : bytes) {
                v.push_back(t.data_type() == onnx::TensorProto::INT8 ? static_cast<std::int8_t>(b) : b);
            }
        } else {
            v.assign(t.int32_data().begin(), t.int32_data().end());
        }
        check(v.size());
        return Value::ints(shape, std::move(v));
    }
    default:
        throw ModelLoadError("tensor '" + t.name() + "' has unsupported element type " +
                             std::to_string(t.data_type()));
    }
}

onnx_rt::Attribute to_attribute(const onnx::AttributeProto& a, const std::string& node) {
    onnx_rt::Attribute r;
    switch (a.type()) {
    case onnx::AttributeProto::INT:
        r.i = a.i();
        break;
    case onnx::AttributeProto::FLOAT:
        r.f = a.f();
        break;
    case onnx::AttributeProto::STRING:
        r.s = a.s();
        break;
    case onnx::AttributeProto::INTS:
        r.ints.assign(a.ints().begin(), a.ints().end());
        break;
    case onnx::AttributeProto::FLOATS:
        r.floats.assign(a.floats().begin(), a.floats().end());
        break;
    case onnx::AttributeProto::TENSOR:
        r.tensor = to_value(a.t());
        break;
    default:
        throw ModelLoadError("node '" + node + "' attribute '" + a.name() + "' has unsupported type");
    }
    return r;
}

Tensor to_tensor(const Value& v) { return Tensor(v.shape, v.as_floats()); }

}  // namespace

struct OnnxEngine::Graph {
    struct InputSpec {
        std::string name;
        Shape dims;  // -1 for symbolic dimensions
    };
    std::vector<InputSpec> inputs;
    std::vector<std::string> outputs;
    std::vector<onnx_rt::Node> nodes;
    std::vector<const onnx_rt::Kernel*> kernels;
    std::unordered_map<std::string, Value> initializers;
    // Names whose value can be released after node k runs.
    std::vector<std::vector<std::string>> release_after;

    void load(const onnx::ModelProto& model) {
        int opset = 0;
        for (const auto& op : model.opset_import()) {
            if (op.domain().empty() || op.domain() == "ai.onnx") {
                opset = static_cast<int>(op.version());
            }
        }
        if (opset == 0) {
            throw ModelLoadError("model declares no default-domain opset");
        }
        if (opset < 7) {
            throw ModelLoadError("opset " + std::to_string(opset) + " is older than the supported minimum 7");
        }
        const auto& g = model.graph();
        for (const auto& t : g.initializer()) {
            initializers.emplace(t.name(), to_value(t));
        }
        std::set<std::string> available;
        for (const auto& [name, _] : initializers) {
            available.insert(name);
        }
        for (const auto& in : g.input()) {
            if (initializers.count(in.name())) {
                continue;
            }
            InputSpec spec{in.name(), {}};
            const auto& tt = in.type().tensor_type();
            for (const auto& d : tt.shape().dim()) {
                spec.dims.push_back(d.has_dim_value() ? d.dim_value() : -1);
            }
            inputs.push_back(std::move(spec));
            available.insert(in.name());
        }
        const auto& registry = onnx_rt::kernel_registry();
        std::set<std::string> unsupported;
        for (const auto& np : g.node()) {
            onnx_rt::Node n;
            n.op_type = np.op_type();
            n.name = np.name().empty() ? (np.output_size() > 0 ? np.output(0) : np.op_type()) : np.name();
            n.opset = opset;
            if (!np.domain().empty() && np.domain() != "ai.onnx") {
                unsupported.insert(np.domain() + "." + np.op_type());
                continue;
            }
            const auto it = registry.find(n.op_type);
            if (it == registry.end()) {
                unsupported.insert(n.op_type);
                continue;
            }
            n.inputs.assign(np.input().begin(), np.input().end());
            n.outputs.assign(np.output().begin(), np.output().end());
            for (const auto& in : n.inputs) {
                if (!in.empty() && !available.count(in)) {
                    throw ModelLoadError("node '" + n.name + "' consumes '" + in +
                                         "' before it is produced; graph is not topologically sorted");
                }
            }
            for (const auto& a : np.attribute()) {
                n.attributes.emplace(a.name(), to_attribute(a, n.name));
            }
            for (const auto& out : n.outputs) {
                if (!out.empty()) available.insert(out);
            }
            kernels.push_back(&it->second);
            nodes.push_back(std::move(n));
        }
        if (!unsupported.empty()) {
            std::string list;
            for (const auto& op : unsupported) {
                list += (list.empty() ? "" : ", ") + op;
            }
            throw ModelLoadError("unsupported operators: " + list);
        }
        for (const auto& out : g.output()) {
            if (!available.count(out.name())) {
                throw ModelLoadError("graph output '" + out.name() + "' is never produced");
            }
            outputs.push_back(out.name());
        }
        std::unordered_map<std::string, std::size_t> last_use;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            for (const auto& in : nodes[k].inputs) {
                if (!in.empty()) last_use[in] = k;
            }
        }
        const std::set<std::string> keep(outputs.begin(), outputs.end());
        release_after.assign(nodes.size(), {});
        for (const auto& [name, k] : last_use) {
            if (!keep.count(name) && !initializers.count(name)) {
                release_after[k].push_back(name);
            }
        }
    }

    std::map<std::string, Tensor> execute(std::unordered_map<std::string, Value> env) const {
        std::vector<const Value*> args;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const auto& n = nodes[k];
            args.clear();
            for (const auto& in : n.inputs) {
                if (in.empty()) {
                    args.push_back(nullptr);
                    continue;
                }
                if (const auto it = env.find(in); it != env.end()) {
                    args.push_back(&it->second);
                } else {
                    args.push_back(&initializers.at(in));
                }
            }
            std::vector<Value> results = (*kernels[k])(n, onnx_rt::Inputs(args.data(), args.size()));
            for (const auto& name : release_after[k]) {
                env.erase(name);
            }
            if (results.size() < n.outputs.size()) {
                n.fail("produced " + std::to_string(results.size()) + " outputs, graph expects " +
                       std::to_string(n.outputs.size()));
            }
            for (std::size_t o = 0; o < n.outputs.size(); ++o) {
                if (!n.outputs[o].empty()) {
                    env.insert_or_assign(n.outputs[o], std::move(results[o]));
                }
            }
        }
        std::map<std::string, Tensor> out;
        for (const auto& name : outputs) {
            if (const auto it = env.find(name); it != env.end()) {
                out.emplace(name, to_tensor(it->second));
            } else {
                out.emplace(name, to_tensor(initializers.at(name)));
            }
        }
        return out;
    }
};

OnnxEngine::OnnxEngine(const std::filesystem::path& model_path) {
    std::ifstream in(model_path, std::ios::binary);
    if (!in) {
        throw ModelLoadError("cannot open model file " + model_path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    graph_ = std::make_unique<Graph>();
    onnx::ModelProto model;
    if (bytes.empty() || !model.ParseFromString(bytes)) {
        throw ModelLoadError("model file " + model_path.string() + " is not a valid ONNX protobuf");
    }
    graph_->load(model);
}

OnnxEngine::OnnxEngine(const void* data, std::size_t size) : graph_(std::make_unique<Graph>()) {
    onnx::ModelProto model;
    if (size == 0 || !model.ParseFromArray(data, static_cast<int>(size))) {
        throw ModelLoadError("buffer is not a valid ONNX protobuf");
    }
    graph_->load(model);
}

OnnxEngine::~OnnxEngine() = default;
OnnxEngine::OnnxEngine(OnnxEngine&&) noexcept = default;
OnnxEngine& OnnxEngine::operator=(OnnxEngine&&) noexcept = default;

RawOutputs OnnxEngine::infer(const Tensor& input) {
    if (graph_->inputs.size() != 1) {
        throw InferenceError("model has " + std::to_string(graph_->inputs.size()) + " inputs; use run()");
    }
    return run({{graph_->inputs.front().name, input}});
}

RawOutputs OnnxEngine::run(const std::vector<std::pair<std::string, Tensor>>& inputs) {
    std::unordered_map<std::string, Value> env;
    for (const auto& spec : graph_->inputs) {
        const auto it = std::find_if(inputs.begin(), inputs.end(), [&](const auto& p) { return p.first == spec.name; });
        if (it == inputs.end()) {
            throw InferenceError("missing graph input '" + spec.name + "'");
        }
        const Shape& s = it->second.shape;
        bool ok = s.size() == spec.dims.size() || spec.dims.empty();
        for (std::size_t d = 0; ok && d < spec.dims.size(); ++d) {
            ok = spec.dims[d] < 0 || spec.dims[d] == s[d];
        }
        if (!ok) {
            throw InferenceError("input '" + spec.name + "' has shape " + shape_string(s) + ", model expects " +
                                 shape_string(spec.dims));
        }
        if (static_cast<std::int64_t>(it->second.values.size()) != element_count(s)) {
            throw InferenceError("input '" + spec.name + "' value count does not match its shape");
        }
        env.emplace(spec.name, Value::floats(s, it->second.values));
    }
    RawOutputs out;
    out.tensors = graph_->execute(std::move(env));
    return out;
}

std::vector<std::string> OnnxEngine::input_names() const {
    std::vector<std::string> r;
    for (const auto& in : graph_->inputs) r.push_back(in.name);
    return r;
}

std::vector<std::string> OnnxEngine::output_names() const { return graph_->outputs; }

std::vector<std::string> OnnxEngine::supported_ops() {
    std::vector<std::string> r;
    for (const auto& [name, _] : onnx_rt::kernel_registry()) r.push_back(name);
    return r;
}

Tensor load_tensor_proto(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ModelLoadError("cannot open tensor file " + path.string());
    }
    onnx::TensorProto t;
    if (!t.ParseFromIstream(&in)) {
        throw ModelLoadError("tensor file " + path.string() + " is not a valid TensorProto");
    }
    return to_tensor(to_value(t));
}

}  // namespace flakelens::infer
