#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ifslab/errors.hpp"
#include "ifslab/system.hpp"

namespace ifslab {

// System definition files are JSON documents:
//
// {
//   "dimension": 1,
//   "metric": "euclidean",
//   "maps": [{"matrix": [[0.5]], "offset": [0.0]}, ...],
//   "probabilities": [{"type": "constant", "value": 0.5}, ...],
//   "normalization": "exact",            // or "renormalize"; optional
//   "base_point": [0.0],
//   "domain_box": {"lo": [0.0], "hi": [1.0]}
// }
//
// Probability expressions:
//   {"type": "constant", "value": v}
//   {"type": "clipped_affine", "slope": [...], "intercept": b, "lo": l, "hi": h}
//   {"type": "softmax", "weights": [...], "bias": b}

namespace detail {

inline Vec vec_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("expected a numeric array");
    Vec v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw ConfigError("expected a numeric array");
        v.push_back(x.get<double>());
    }
    return v;
}

inline ProbExpr prob_expr_from_json(const nlohmann::json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "constant") return ProbExpr{ProbExpr::Constant{j.at("value").get<double>()}};
    if (type == "clipped_affine")
        return ProbExpr{ProbExpr::ClippedAffine{vec_from_json(j.at("slope")), j.at("intercept").get<double>(),
                                                j.at("lo").get<double>(), j.at("hi").get<double>()}};
    if (type == "softmax")
        return ProbExpr{ProbExpr::Softmax{vec_from_json(j.at("weights")), j.at("bias").get<double>()}};
    throw ConfigError("unknown probability expression type: " + type);
}

inline nlohmann::json prob_expr_to_json(const ProbExpr& e) {
    nlohmann::json j;
    if (const auto* c = std::get_if<ProbExpr::Constant>(&e.node)) {
        j["type"] = "constant";
        j["value"] = c->value;
    } else if (const auto* a = std::get_if<ProbExpr::ClippedAffine>(&e.node)) {
        j["type"] = "clipped_affine";
        j["slope"] = a->slope;
        j["intercept"] = a->intercept;
        j["lo"] = a->lo;
        j["hi"] = a->hi;
    } else {
        const auto& s = std::get<ProbExpr::Softmax>(e.node);
        j["type"] = "softmax";
        j["weights"] = s.weights;
        j["bias"] = s.bias;
    }
    return j;
}

}  // namespace detail

inline IfsSystem system_from_json(const nlohmann::json& j, const std::string& name = "") {
    try {
        IfsSystem s;
        s.name = name;
        s.dimension = j.at("dimension").get<std::size_t>();
        s.metric = metric_from_name(j.at("metric").get<std::string>());
        for (const auto& jm : j.at("maps")) {
            AffineMap m;
            const auto& rows = jm.at("matrix");
            for (const auto& row : rows)
                for (const auto& x : row) m.matrix.push_back(x.get<double>());
            m.offset = detail::vec_from_json(jm.at("offset"));
            s.maps.push_back(std::move(m));
        }
        for (const auto& jp : j.at("probabilities")) s.field.exprs.push_back(detail::prob_expr_from_json(jp));
        if (j.contains("normalization")) {
            std::string mode = j.at("normalization").get<std::string>();
            if (mode == "exact")
                s.field.normalization = ProbabilityField::Normalization::exact;
            else if (mode == "renormalize")
                s.field.normalization = ProbabilityField::Normalization::renormalize;
            else
                throw ConfigError("unknown normalization mode: " + mode);
        }
        s.base_point = detail::vec_from_json(j.at("base_point"));
        s.domain_box.lo = detail::vec_from_json(j.at("domain_box").at("lo"));
        s.domain_box.hi = detail::vec_from_json(j.at("domain_box").at("hi"));
        finalize(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed system definition: ") + e.what());
    }
}

inline nlohmann::json system_to_json(const IfsSystem& s) {
    nlohmann::json j;
    j["dimension"] = s.dimension;
    j["metric"] = metric_name(s.metric);
    j["maps"] = nlohmann::json::array();
    for (const auto& m : s.maps) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < s.dimension; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < s.dimension; ++c) row.push_back(m.matrix[i * s.dimension + c]);
            rows.push_back(row);
        }
        j["maps"].push_back({{"matrix", rows}, {"offset", m.offset}});
    }
    j["probabilities"] = nlohmann::json::array();
    for (const auto& e : s.field.exprs) j["probabilities"].push_back(detail::prob_expr_to_json(e));
    j["normalization"] = s.field.normalization == ProbabilityField::Normalization::exact ? "exact" : "renormalize";
    j["base_point"] = s.base_point;
    j["domain_box"] = {{"lo", s.domain_box.lo}, {"hi", s.domain_box.hi}};
    return j;
}

inline IfsSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open system file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cannot parse system file: ") + e.what());
    }
    std::string name = path;
    if (auto pos = name.find_last_of('/'); pos != std::string::npos) name = name.substr(pos + 1);
    if (auto pos = name.rfind(".json"); pos != std::string::npos) name = name.substr(0, pos);
    return system_from_json(j, name);
}

}  // namespace ifslab
