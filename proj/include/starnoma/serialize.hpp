// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ao.hpp"
#include "config.hpp"
#include "schemes.hpp"

namespace starnoma {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "starnoma 0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Fixed-precision decimal text; identical input bits give identical text.
inline std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline Json complex_json(const Cvec& v) {
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v(i).real());
        im.push_back(v(i).imag());
    }
    return Json{{"re", re}, {"im", im}};
}

inline Json plan_json(const ClusterPlan& p) {
    Json clusters = Json::array();
    for (const auto& c : p.clusters) {
        Json members = Json::array();
        for (int k : c)
            if (k >= 0) members.push_back(k);
        clusters.push_back(members);
    }
    return Json{{"clusters", clusters},
                {"decoding_order", p.decoding_order},
                {"state_feasible", p.state_feasible},
                {"correlation", p.correlation}};
}

inline Json report_json(const RateReport& r) {
    Json viol = Json::array();
    for (const auto& [k, i] : r.sic_violations) viol.push_back({k, i});
    return Json{{"sum_rate", r.sum_rate},
                {"per_user_rate", r.per_user_rate},
                {"per_user_sinr", r.per_user_sinr},
                {"qos_residuals", r.qos_residuals},
                {"sic_violations", viol}};
}

inline Json iterate_json(const AoIterate& it, bool timing) {
    Json j{{"iteration", it.iteration},
           {"sum_rate", it.sum_rate},
           {"continuous_sum_rate", it.continuous_sum_rate},
           {"quantization_gap", it.quantization_gap},
           {"active_accepted", it.active_accepted},
           {"passive_accepted", it.passive_accepted},
           {"active_infeasible", it.active_infeasible},
           {"passive_infeasible", it.passive_infeasible},
           {"min_qos_residual", it.min_qos_residual},
           {"qos_feasible", it.qos_feasible},
           {"qos_scale", it.qos_scale}};
    if (timing) j["wall_seconds"] = it.wall_seconds;
    return j;
}

/// One JSON object per line, one line per iteration.
inline std::string trace_jsonl(const AoTrace& tr, bool timing) {
    std::string out;
    for (const auto& it : tr.iterations) out += iterate_json(it, timing).dump() + "\n";
    return out;
}

inline Json trace_json(const AoTrace& tr, bool timing) {
    Json iters = Json::array();
    for (const auto& it : tr.iterations) iters.push_back(iterate_json(it, timing));
    Json beams = Json::array();
    for (const auto& w : tr.beams.w) beams.push_back(complex_json(w));
    Json profiles = Json::array();
    for (const auto& p : tr.beams.profile)
        profiles.push_back(Json{{"reflect", complex_json(p.reflect)}, {"transmit", complex_json(p.transmit)}});
    return Json{{"status", to_string(tr.status)},
                {"initial_sum_rate", tr.initial_sum_rate},
                {"sum_rate", tr.sum_rate},
                {"iterations", iters},
                {"plan", plan_json(tr.plan)},
                {"power", tr.resources.power},
                {"time", tr.resources.time},
                {"qos_feasible", tr.resources.feasible},
                {"qos_scale", tr.resources.qos_scale},
                {"order_violations", tr.order_violations},
                {"beamformers", beams},
                {"profiles", profiles},
                {"report", report_json(tr.report)},
                {"diagnostics", tr.diagnostics}};
}

inline Json scheme_json(const SchemeResult& r) {
    Json j{{"scheme", to_string(r.scheme)},
           {"sum_rate", r.sum_rate},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"qos_feasible", r.qos_feasible},
           {"unserved_users", r.unserved_users},
           {"plan", plan_json(r.plan)},
           {"power", r.resources.power},
           {"time", r.resources.time},
           {"report", report_json(r.report)},
           {"diagnostics", r.diagnostics}};
    if (!r.inter_cluster.empty()) j["inter_cluster"] = r.inter_cluster;
    return j;
}

inline Json manifest_json(const std::string& command, const SystemConfig& cfg, const Json& extra = Json::object()) {
    Json j{{"tool", kVersion},
           {"schema_version", kSchemaVersion},
           {"command", command},
           {"seed", cfg.seed},
           {"config_hash", hex64(config_hash(cfg))},
           {"config", to_text(cfg)}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace starnoma
