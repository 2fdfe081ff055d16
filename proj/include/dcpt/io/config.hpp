#pragma once
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt::io {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where)
{
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ValidationError("config: unknown key '" + where + k + "'");
    }
}

template <class T>
void read_if(const json& j, const char* key, T& out, const std::string& where)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: key '" + where + key + "' has the wrong type");
    }
}

} // namespace detail

inline json config_to_json(const DlmConfig& c)
{
    json j;
    j["order"] = c.order;
    j["shrinkage"] = to_string(c.shrinkage);
    j["sv_noise"] = c.sv_noise;
    j["outlier_term"] = c.outlier_term;
    j["n_burn"] = c.n_burn;
    j["n_save"] = c.n_save;
    j["seed"] = c.seed;
    j["sv_priors"] = {{"mu_mean", c.sv_priors.mu_mean},           {"mu_var", c.sv_priors.mu_var},
                      {"phi_a", c.sv_priors.phi_a},               {"phi_b", c.sv_priors.phi_b},
                      {"sigma2_shape", c.sv_priors.sigma2_shape}, {"sigma2_rate", c.sv_priors.sigma2_rate}};
    j["alpha_prior_var"] = c.alpha_prior_var;
    j["initial_state_var"] = c.initial_state_var;
    j["log_offset"] = c.log_offset;
    j["outlier_global_scale"] = c.outlier_global_scale;
    json d;
    d["z_params"] = c.dsp.z_params;
    d["ar_mean_prior_mean"] = std::isnan(c.dsp.ar_mean_prior_mean) ? json(nullptr) : json(c.dsp.ar_mean_prior_mean);
    d["ar_mean_prior_var"] = c.dsp.ar_mean_prior_var;
    d["ar_persistence_a"] = c.dsp.ar_persistence_a;
    d["ar_persistence_b"] = c.dsp.ar_persistence_b;
    j["dsp"] = d;
    return j;
}

/// Overlays the keys present in j onto base; unknown keys are rejected.
inline DlmConfig config_from_json(const json& j, DlmConfig c = {})
{
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    detail::reject_unknown(j,
                           {"order", "D", "shrinkage", "sv_noise", "outlier_term", "n_burn", "n_save", "seed",
                            "sv_priors", "alpha_prior_var", "initial_state_var", "log_offset", "outlier_global_scale",
                            "dsp"},
                           "");
    detail::read_if(j, "order", c.order, "");
    detail::read_if(j, "D", c.order, "");
    if (j.contains("shrinkage")) {
        std::string s;
        detail::read_if(j, "shrinkage", s, "");
        c.shrinkage = shrinkage_from_string(s);
    }
    detail::read_if(j, "sv_noise", c.sv_noise, "");
    detail::read_if(j, "outlier_term", c.outlier_term, "");
    detail::read_if(j, "n_burn", c.n_burn, "");
    detail::read_if(j, "n_save", c.n_save, "");
    detail::read_if(j, "seed", c.seed, "");
    detail::read_if(j, "alpha_prior_var", c.alpha_prior_var, "");
    detail::read_if(j, "initial_state_var", c.initial_state_var, "");
    detail::read_if(j, "log_offset", c.log_offset, "");
    detail::read_if(j, "outlier_global_scale", c.outlier_global_scale, "");
    if (j.contains("sv_priors")) {
        const auto& s = j.at("sv_priors");
        if (!s.is_object()) throw ValidationError("config: sv_priors must be an object");
        detail::reject_unknown(s, {"mu_mean", "mu_var", "phi_a", "phi_b", "sigma2_shape", "sigma2_rate"}, "sv_priors.");
        detail::read_if(s, "mu_mean", c.sv_priors.mu_mean, "sv_priors.");
        detail::read_if(s, "mu_var", c.sv_priors.mu_var, "sv_priors.");
        detail::read_if(s, "phi_a", c.sv_priors.phi_a, "sv_priors.");
        detail::read_if(s, "phi_b", c.sv_priors.phi_b, "sv_priors.");
        detail::read_if(s, "sigma2_shape", c.sv_priors.sigma2_shape, "sv_priors.");
        detail::read_if(s, "sigma2_rate", c.sv_priors.sigma2_rate, "sv_priors.");
    }
    if (j.contains("dsp")) {
        const auto& d = j.at("dsp");
        if (!d.is_object()) throw ValidationError("config: dsp must be an object");
        detail::reject_unknown(d, {"z_params", "ar_mean_prior_mean", "ar_mean_prior_var", "ar_persistence_a", "ar_persistence_b"},
                               "dsp.");
        detail::read_if(d, "z_params", c.dsp.z_params, "dsp.");
        if (d.contains("ar_mean_prior_mean")) {
            if (d.at("ar_mean_prior_mean").is_null()) c.dsp.ar_mean_prior_mean = std::nan("");
            else detail::read_if(d, "ar_mean_prior_mean", c.dsp.ar_mean_prior_mean, "dsp.");
        }
        detail::read_if(d, "ar_mean_prior_var", c.dsp.ar_mean_prior_var, "dsp.");
        detail::read_if(d, "ar_persistence_a", c.dsp.ar_persistence_a, "dsp.");
        detail::read_if(d, "ar_persistence_b", c.dsp.ar_persistence_b, "dsp.");
    }
    c.check();
    return c;
}

inline DlmConfig read_config_file(const std::string& path, DlmConfig base = {})
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return config_from_json(j, base);
}

/// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
inline std::string hash_text(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

inline std::string config_hash(const json& j) { return hash_text(j.dump()); }

} // namespace dcpt::io
