#pragma once
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>
#include <dcpt/io/config.hpp>
#include <dcpt/io/csv.hpp>

namespace dcpt::io {

inline constexpr int artifact_format_version = 1;
inline constexpr Eigen::Index max_stored_draws = 5000;

/// Fitted posterior together with everything needed to rerun detection.
struct PosteriorArtifact
{
    std::string tool_version = io::tool_version;
    Dataset data;
    DlmConfig config;
    PosteriorDraws draws;
};

namespace detail {

inline json matrix_to_json(const Matrix& m, bool binary)
{
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    if (binary) {
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(m.size()) * sizeof(double));
        if (!bytes.empty()) std::memcpy(bytes.data(), m.data(), bytes.size());
        j["f64le"] = json::binary(std::move(bytes));
    } else {
        j["data"] = std::vector<double>(m.data(), m.data() + m.size());
    }
    return j;
}

inline Matrix matrix_from_json(const json& j)
{
    try {
        const auto r = j.at("rows").get<Eigen::Index>();
        const auto c = j.at("cols").get<Eigen::Index>();
        if (r < 0 || c < 0) throw ValidationError("artifact: negative matrix dimension");
        Matrix m(r, c);
        if (j.contains("f64le")) {
            const auto& b = j.at("f64le").get_binary();
            if (b.size() != static_cast<std::size_t>(m.size()) * sizeof(double)) {
                throw ValidationError("artifact: matrix payload size mismatch");
            }
            if (!b.empty()) std::memcpy(m.data(), b.data(), b.size());
        } else {
            const auto v = j.at("data").get<std::vector<double>>();
            if (v.size() != static_cast<std::size_t>(m.size())) throw ValidationError("artifact: matrix payload size mismatch");
            std::copy(v.begin(), v.end(), m.data());
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("artifact: malformed matrix: ") + e.what());
    }
}

inline bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace detail

/// Keeps every k-th draw so that at most `limit` remain; records the factor.
inline PosteriorDraws thin_draws(const PosteriorDraws& d, Eigen::Index limit = max_stored_draws)
{
    const auto S = d.draws();
    if (S <= limit) return d;
    const auto k = (S + limit - 1) / limit;
    const auto keep = (S + k - 1) / k;
    const auto take = [&](const Matrix& m) {
        Matrix out(m.rows(), keep);
        for (Eigen::Index i = 0; i < keep; ++i) out.col(i) = m.col(i * k);
        return out;
    };
    PosteriorDraws t;
    t.order = d.order;
    t.thin = d.thin * static_cast<int>(k);
    for (const auto& b : d.beta) t.beta.push_back(take(b));
    t.sigma2_eps = take(d.sigma2_eps);
    t.alpha = d.alpha.rows() > 0 ? take(d.alpha) : Matrix(0, keep);
    if (d.zeta) t.zeta = take(*d.zeta);
    for (const auto& h : d.log_evol_var) t.log_evol_var.push_back(take(h));
    return t;
}

inline json artifact_to_json(const PosteriorArtifact& a, bool binary)
{
    const auto cfg = config_to_json(a.config);
    json j;
    j["format"] = "dcpt-posterior";
    j["format_version"] = artifact_format_version;
    j["tool_version"] = a.tool_version;
    j["seed"] = a.config.seed;
    j["config"] = cfg;
    j["config_hash"] = config_hash(cfg);
    j["data"] = {{"y", detail::matrix_to_json(a.data.y(), binary)},
                 {"x", detail::matrix_to_json(a.data.x(), binary)},
                 {"zc", detail::matrix_to_json(a.data.zc(), binary)},
                 {"labels", a.data.labels()}};
    json d;
    d["order"] = a.draws.order;
    d["thin"] = a.draws.thin;
    d["beta"] = json::array();
    for (const auto& b : a.draws.beta) d["beta"].push_back(detail::matrix_to_json(b, binary));
    d["sigma2_eps"] = detail::matrix_to_json(a.draws.sigma2_eps, binary);
    d["alpha"] = detail::matrix_to_json(a.draws.alpha, binary);
    d["zeta"] = a.draws.zeta ? detail::matrix_to_json(*a.draws.zeta, binary) : json(nullptr);
    d["log_evol_var"] = json::array();
    for (const auto& h : a.draws.log_evol_var) d["log_evol_var"].push_back(detail::matrix_to_json(h, binary));
    j["draws"] = d;
    j["summary"] = {{"beta_mean", detail::matrix_to_json(a.draws.beta_mean(), false)},
                    {"sigma2_eps_mean", detail::matrix_to_json(a.draws.sigma2_eps.rowwise().mean(), false)},
                    {"alpha_mean", detail::matrix_to_json(a.draws.alpha_mean(), false)},
                    {"n_draws", a.draws.draws()}};
    return j;
}

inline PosteriorArtifact artifact_from_json(const json& j)
{
    if (!j.is_object() || j.value("format", std::string()) != "dcpt-posterior") {
        throw ValidationError("not a posterior artifact");
    }
    const int version = j.value("format_version", -1);
    if (version != artifact_format_version) {
        throw ValidationError("incompatible artifact version " + std::to_string(version) + " (expected " +
                              std::to_string(artifact_format_version) + ")");
    }
    try {
        PosteriorArtifact a;
        a.tool_version = j.at("tool_version").get<std::string>();
        a.config = config_from_json(j.at("config"));
        const auto& dj = j.at("data");
        const Matrix y = detail::matrix_from_json(dj.at("y"));
        a.data = Dataset(y.col(0), detail::matrix_from_json(dj.at("x")), detail::matrix_from_json(dj.at("zc")),
                         dj.at("labels").get<std::vector<std::string>>());
        const auto& d = j.at("draws");
        a.draws.order = d.at("order").get<int>();
        a.draws.thin = d.at("thin").get<int>();
        for (const auto& b : d.at("beta")) a.draws.beta.push_back(detail::matrix_from_json(b));
        a.draws.sigma2_eps = detail::matrix_from_json(d.at("sigma2_eps"));
        a.draws.alpha = detail::matrix_from_json(d.at("alpha"));
        if (!d.at("zeta").is_null()) a.draws.zeta = detail::matrix_from_json(d.at("zeta"));
        for (const auto& h : d.at("log_evol_var")) a.draws.log_evol_var.push_back(detail::matrix_from_json(h));
        a.draws.check();
        if (a.draws.n() != a.data.n() || a.draws.p() != a.data.p()) throw ValidationError("artifact: draws do not match data");
        return a;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("artifact: malformed content: ") + e.what());
    }
}

/// Writes CBOR, or JSON when the path ends in ".json".
inline void save_artifact(const PosteriorArtifact& a, const std::string& path)
{
    const bool as_json = detail::ends_with(path, ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    const auto j = artifact_to_json(a, !as_json);
    if (as_json) {
        out << j.dump() << "\n";
    } else {
        const auto bytes = json::to_cbor(j);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    if (!out) throw ValidationError("failed writing " + path);
}

inline PosteriorArtifact load_artifact(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json j;
    try {
        if (!bytes.empty() && (bytes[0] == '{' || bytes[0] == ' ' || bytes[0] == '\n')) j = json::parse(bytes);
        else j = json::from_cbor(bytes);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": unreadable artifact: " + e.what());
    }
    return artifact_from_json(j);
}

} // namespace dcpt::io
