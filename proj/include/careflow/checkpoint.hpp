#pragma once
// Model serialization. One flat parameter map keyed by path
// ({encoder|forward|backward|fusion|predictor}/.../layer{k}/{W|b}) plus a
// dims block that pins the architecture; doubles at 17 significant digits so
// a save/load round trip is bit-exact.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "careflow/jsonio.hpp"
#include "careflow/pipeline.hpp"

namespace careflow {

inline constexpr const char* kCheckpointFormat = "careflow-checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

// Visits every parameter block in the fixed serialization order.
template <typename Bundle, typename F>
void walk_checkpoint_params(Bundle& bundle, F&& f) {
    auto mlp = [&f](const std::string& prefix, auto& params) {
        for (std::size_t k = 0; k < params.layers.size(); ++k) {
            const std::string base = prefix + "/layer" + std::to_string(k) + "/";
            f(base + "W", params.layers[k].weight.data);
            f(base + "b", params.layers[k].bias);
        }
    };
    mlp("encoder/a", bundle.encoders[0]);
    mlp("encoder/v", bundle.encoders[1]);
    mlp("encoder/l", bundle.encoders[2]);
    mlp("forward/a2l", bundle.fwd_a2l.net);
    mlp("forward/v2l", bundle.fwd_v2l.net);
    mlp("backward/a2l", bundle.bwd_a2l.net);
    mlp("backward/v2l", bundle.bwd_v2l.net);
    mlp("fusion", bundle.fusion);
    mlp("predictor", bundle.predictor);
}

inline MlpParams shape_mlp(const std::vector<std::size_t>& dims,
                           const std::vector<Activation>& activations) {
    MlpParams params;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        Layer layer;
        layer.weight = Matrix(dims[k + 1], dims[k]);
        layer.bias.assign(dims[k + 1], 0.0);
        layer.activation = activations[k];
        params.layers.push_back(std::move(layer));
    }
    return params;
}

inline DriftModel shape_drift(std::size_t d, FlowDirection direction) {
    DriftModel model;
    model.feature_dim = d;
    model.embed_dim = (d % 2 == 0) ? d : d + 1;
    model.direction = direction;
    const std::size_t hidden = 2 * d;
    model.net = shape_mlp({d + model.embed_dim, hidden, hidden, d},
                          {Activation::Tanh, Activation::Tanh, Activation::Identity});
    return model;
}

}  // namespace detail

inline std::string save_checkpoint(const ModelBundle& bundle) {
    const std::size_t encoder_hidden = bundle.encoders[0].layers.front().weight.rows;
    const std::size_t fusion_hidden = bundle.fusion.layers.front().weight.rows;

    JsonWriter w;
    w.begin_object();
    w.key("format").value(kCheckpointFormat);
    w.key("version").value(kCheckpointVersion);
    w.key("dims");
    w.begin_object();
    w.key("d").value(bundle.d);
    w.key("out_dim").value(bundle.out_dim);
    w.key("task").value(task_name(bundle.task));
    w.key("raw_a").value(bundle.encoders[0].in_dim());
    w.key("raw_v").value(bundle.encoders[1].in_dim());
    w.key("raw_l").value(bundle.encoders[2].in_dim());
    w.key("encoder_hidden").value(encoder_hidden);
    w.key("fusion_hidden").value(fusion_hidden);
    w.end_object();
    w.key("params");
    w.begin_object();
    detail::walk_checkpoint_params(bundle, [&w](const std::string& key,
                                                const std::vector<double>& values) {
        w.key(key).value(values);
    });
    w.end_object();
    w.end_object();
    return w.str();
}

inline ModelBundle load_checkpoint(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("checkpoint: invalid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || doc.value("format", "") != kCheckpointFormat)
        throw ConfigError("checkpoint: missing or wrong format marker");
    if (doc.value("version", -1) != kCheckpointVersion)
        throw ConfigError("checkpoint: unsupported version");
    if (!doc.contains("dims") || !doc["dims"].is_object())
        throw ConfigError("checkpoint: missing dims block");
    if (!doc.contains("params") || !doc["params"].is_object())
        throw ConfigError("checkpoint: missing params block");

    const nlohmann::json& dims = doc["dims"];
    for (const char* key :
         {"d", "out_dim", "task", "raw_a", "raw_v", "raw_l", "encoder_hidden", "fusion_hidden"})
        if (!dims.contains(key)) throw ConfigError(std::string("checkpoint: dims missing ") + key);

    ModelBundle bundle;
    bundle.d = dims["d"].get<int>();
    bundle.out_dim = dims["out_dim"].get<int>();
    bundle.task = parse_task(dims["task"].get<std::string>());
    if (bundle.d < 1 || bundle.out_dim < 1)
        throw ConfigError("checkpoint: dims out of range");

    const std::size_t d = static_cast<std::size_t>(bundle.d);
    const std::size_t eh = dims["encoder_hidden"].get<std::size_t>();
    const std::size_t fh = dims["fusion_hidden"].get<std::size_t>();
    const std::size_t raws[3] = {dims["raw_a"].get<std::size_t>(),
                                 dims["raw_v"].get<std::size_t>(),
                                 dims["raw_l"].get<std::size_t>()};
    for (std::size_t m = 0; m < 3; ++m)
        bundle.encoders[m] =
            detail::shape_mlp({raws[m], eh, d}, {Activation::Tanh, Activation::Identity});
    bundle.fwd_a2l = detail::shape_drift(d, FlowDirection::Forward);
    bundle.fwd_v2l = detail::shape_drift(d, FlowDirection::Forward);
    bundle.bwd_a2l = detail::shape_drift(d, FlowDirection::Backward);
    bundle.bwd_v2l = detail::shape_drift(d, FlowDirection::Backward);
    bundle.fusion = detail::shape_mlp({3 * d, fh, d}, {Activation::Tanh, Activation::Identity});
    bundle.predictor = detail::shape_mlp({d, static_cast<std::size_t>(bundle.out_dim)},
                                         {Activation::Identity});

    const nlohmann::json& params = doc["params"];
    std::size_t visited = 0;
    detail::walk_checkpoint_params(bundle, [&](const std::string& key,
                                               std::vector<double>& dst) {
        if (!params.contains(key)) throw ConfigError("checkpoint: missing parameter " + key);
        const nlohmann::json& arr = params[key];
        if (!arr.is_array() || arr.size() != dst.size())
            throw ConfigError("checkpoint: parameter " + key + " has wrong length");
        for (std::size_t i = 0; i < dst.size(); ++i) {
            if (!arr[i].is_number())
                throw ConfigError("checkpoint: parameter " + key + " holds a non-number");
            dst[i] = arr[i].get<double>();
        }
        ++visited;
    });
    if (params.size() != visited)
        throw ConfigError("checkpoint: unexpected extra parameter keys (" +
                          std::to_string(params.size()) + " present, " + std::to_string(visited) +
                          " expected)");
    return bundle;
}

}  // namespace careflow
