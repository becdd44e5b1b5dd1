#pragma once
// JSON conversions and a canonical dumper: object keys sorted, floating-point
// numbers printed with 17 significant digits, so identical inputs produce
// byte-identical output.

#include "loqs/fock.hpp"
#include "loqs/linear_optics.hpp"
#include "loqs/synthesis.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>

namespace loqs {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// canonical dump
// ---------------------------------------------------------------------------

namespace detail {

inline void dump_canonical_impl(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::null:
            out += "null";
            break;
        case Json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            break;
        case Json::value_t::number_integer:
            out += std::to_string(j.get<long long>());
            break;
        case Json::value_t::number_unsigned:
            out += std::to_string(j.get<unsigned long long>());
            break;
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) throw std::invalid_argument("dump_canonical: non-finite number");
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
            break;
        }
        case Json::value_t::string:
            out += Json(j.get<std::string>()).dump();  // reuse the escaping
            break;
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& item : j) {
                if (!first) out += ',';
                first = false;
                dump_canonical_impl(item, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // nlohmann keeps keys sorted
                if (!first) out += ',';
                first = false;
                out += Json(it.key()).dump();
                out += ':';
                dump_canonical_impl(it.value(), out);
            }
            out += '}';
            break;
        }
        default:
            throw std::invalid_argument("dump_canonical: unsupported value type");
    }
}

}  // namespace detail

inline std::string dump_canonical(const Json& j) {
    std::string out;
    detail::dump_canonical_impl(j, out);
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// value conversions
// ---------------------------------------------------------------------------

inline Json complex_to_json(const Complex& c) {
    return Json{{"re", c.real()}, {"im", c.imag()}};
}

inline Complex complex_from_json(const Json& j, const char* what = "complex value") {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_object() && j.contains("re")) {
        return Complex(j.at("re").get<double>(), j.value("im", 0.0));
    }
    throw std::invalid_argument(std::string(what) + ": expected a number or {re, im}");
}

inline Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v(i)));
    return arr;
}

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json params_to_json(const BeamSplitterParams& p) {
    return Json{{"T", complex_to_json(p.T)}, {"R", complex_to_json(p.R)}, {"P", complex_to_json(p.P)}};
}

inline BeamSplitterParams params_from_json(const Json& j) {
    BeamSplitterParams p;
    p.T = complex_from_json(j.at("T"), "params.T");
    p.R = complex_from_json(j.at("R"), "params.R");
    p.P = j.contains("P") ? complex_from_json(j.at("P"), "params.P") : Complex(1.0);
    return p;
}

inline Json monomial_to_json(const MonomialSpec& spec) {
    Json arr = Json::array();
    for (const auto& f : spec.factors) arr.push_back(Json::array({f.mode, f.dagger}));
    return arr;
}

inline MonomialSpec monomial_from_json(const Json& j) {
    MonomialSpec spec;
    if (!j.is_array()) throw std::invalid_argument("monomial: expected [[mode, dagger], ...]");
    for (const auto& f : j) {
        if (!f.is_array() || f.size() != 2) {
            throw std::invalid_argument("monomial: each factor is [mode, dagger]");
        }
        spec.factors.push_back({f.at(0).get<int>(), f.at(1).get<int>()});
    }
    return spec;
}

inline Json stage_to_json(const SynthesisStage& stage) {
    Json j;
    if (const auto* mono = std::get_if<MonomialSpec>(&stage.a)) {
        j["monomial"] = monomial_to_json(*mono);
    } else {
        const auto& prod = std::get<ShiftedNumberProduct>(stage.a);
        j["monomial"] = Json{{"shifted_number_product",
                              Json{{"modes", Json::array({prod.mode_a, prod.mode_b})},
                                   {"shift", complex_to_json(prod.shift)}}}};
    }
    j["beta"] = complex_to_json(stage.beta);
    j["alpha"] = complex_to_json(stage.alpha);
    j["gamma"] = complex_to_json(stage.gamma);
    Json powers = Json::array();
    for (const auto& [mode, power] : stage.t_powers) powers.push_back(Json::array({mode, power}));
    j["t_powers"] = std::move(powers);
    if (stage.device) {
        const StageDevice& d = *stage.device;
        Json dev;
        switch (d.kind) {
            case StageDeviceKind::General:
                dev["kind"] = "general";
                dev["z"] = complex_to_json(d.z);
                break;
            case StageDeviceKind::PhotonNumber:
                dev["kind"] = "photon_number";
                break;
            case StageDeviceKind::CrossKerr:
                dev["kind"] = "cross_kerr";
                dev["xi"] = complex_to_json(d.xi);
                break;
        }
        dev["T1"] = complex_to_json(d.T1);
        dev["R1"] = complex_to_json(d.R1);
        dev["T2"] = complex_to_json(d.T2);
        dev["R2"] = complex_to_json(d.R2);
        j["device_params"] = std::move(dev);
    } else {
        j["device_params"] = nullptr;
    }
    j["abstract"] = stage.abstract_stage;
    return j;
}

inline Json schedule_to_json(const SynthesisSchedule& schedule) {
    Json j;
    j["T1"] = complex_to_json(schedule.T1);
    j["requested_degree"] = schedule.requested_degree;
    j["stage_count"] = static_cast<int>(schedule.stages.size());
    Json coeffs = Json::array();
    for (const Complex& c : schedule.poly_coefficients) coeffs.push_back(complex_to_json(c));
    j["poly_coefficients"] = std::move(coeffs);
    Json stages = Json::array();
    for (const auto& stage : schedule.stages) stages.push_back(stage_to_json(stage));
    j["stages"] = std::move(stages);
    return j;
}

}  // namespace loqs
