#pragma once

// Versioned JSON checkpoints for the ensemble and the assignor. Detector
// weight vectors are stored sparsely (index/value pairs); doubles survive the
// JSON round trip bit-exactly via nlohmann's shortest-representation dump.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustens/assignor.hpp"
#include "robustens/common.hpp"
#include "robustens/detectors.hpp"

namespace robustens {

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json detector_to_json(const BaseDetector& det) {
    nlohmann::json j;
    j["hasher"] = {{"seed", det.hasher.seed},
                   {"mix", feature_mix_name(det.hasher.mix)},
                   {"bits", det.hasher.bits}};
    nlohmann::json idx = nlohmann::json::array();
    nlohmann::json val = nlohmann::json::array();
    for (std::size_t i = 0; i < det.params.weights.size(); ++i) {
        if (det.params.weights[i] != 0.0) {
            idx.push_back(i);
            val.push_back(det.params.weights[i]);
        }
    }
    j["weight_indices"] = std::move(idx);
    j["weight_values"] = std::move(val);
    j["bias"] = det.params.bias;
    return j;
}

inline BaseDetector detector_from_json(const nlohmann::json& j) {
    FeatureHasher hasher;
    hasher.seed = j.at("hasher").at("seed").get<std::uint64_t>();
    hasher.mix = feature_mix_from_name(j.at("hasher").at("mix").get<std::string>());
    hasher.bits = j.at("hasher").at("bits").get<std::uint32_t>();
    BaseDetector det(hasher);
    const auto& idx = j.at("weight_indices");
    const auto& val = j.at("weight_values");
    if (idx.size() != val.size())
        throw ValidationError("checkpoint: weight index/value arrays differ in length");
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const std::size_t pos = idx[i].get<std::size_t>();
        if (pos >= det.params.weights.size())
            throw ValidationError("checkpoint: weight index out of range");
        det.params.weights[pos] = val[i].get<double>();
    }
    det.params.bias = j.at("bias").get<double>();
    return det;
}

inline nlohmann::json assignor_to_json(AssignorParams& params) {
    nlohmann::json j;
    j["embed_dim"] = params.embed_dim;
    j["hidden_dim"] = params.hidden_dim;
    nlohmann::json tensors = nlohmann::json::object();
    for (const auto& t : params.tensors()) {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < t.size; ++i) arr.push_back(t.data[i]);
        tensors[t.name] = std::move(arr);
    }
    j["tensors"] = std::move(tensors);
    return j;
}

inline AssignorParams assignor_from_json(const nlohmann::json& j) {
    AssignorParams params(j.at("embed_dim").get<std::size_t>(),
                          j.at("hidden_dim").get<std::size_t>());
    const auto& tensors = j.at("tensors");
    for (auto& t : params.tensors()) {
        if (!tensors.contains(t.name))
            throw ValidationError("checkpoint: missing assignor tensor '" + t.name + "'");
        const auto& arr = tensors.at(t.name);
        if (arr.size() != t.size)
            throw ValidationError("checkpoint: assignor tensor '" + t.name + "' has wrong size");
        for (std::size_t i = 0; i < t.size; ++i) t.data[i] = arr[i].get<double>();
    }
    return params;
}

struct Checkpoint {
    std::vector<BaseDetector> detectors;
    AssignorParams assignor;
};

inline void save_checkpoint(Checkpoint& ckpt, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = kCheckpointVersion;
    nlohmann::json dets = nlohmann::json::array();
    for (const auto& det : ckpt.detectors) dets.push_back(detector_to_json(det));
    j["detectors"] = std::move(dets);
    j["assignor"] = assignor_to_json(ckpt.assignor);
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write checkpoint file: " + path);
    out << j.dump() << "\n";
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open checkpoint file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("checkpoint " + path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != kCheckpointVersion)
        throw ValidationError("checkpoint " + path + " has an unsupported format version");
    Checkpoint ckpt;
    for (const auto& d : j.at("detectors")) ckpt.detectors.push_back(detector_from_json(d));
    if (ckpt.detectors.empty()) throw ValidationError("checkpoint holds no detectors");
    ckpt.assignor = assignor_from_json(j.at("assignor"));
    return ckpt;
}

}  // namespace robustens
