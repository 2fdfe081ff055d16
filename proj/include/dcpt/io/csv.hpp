#pragma once
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <dcpt/core/error.hpp>
#include <dcpt/core/types.hpp>

namespace dcpt::io {

inline constexpr const char* tool_version = "0.1.0";

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline std::optional<double> parse_double(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = s.data() + (s[0] == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Index k of a column named prefix + k (k >= 1), or 0.
inline int numbered(const std::string& name, char prefix)
{
    if (name.size() < 2 || name[0] != prefix) return 0;
    int k = 0;
    const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
    return ec == std::errc() && ptr == name.data() + name.size() && k >= 1 ? k : 0;
}

} // namespace detail

/**
 * Reads a dataset from CSV with a header row. Required column: y. Optional:
 * t (time labels), x1..xp (predictors; default a single ones column),
 * z1..zl (static covariates). Lines starting with '#' and blank lines are
 * skipped. Errors name the 1-based line number.
 */
inline Dataset read_dataset(std::istream& in, const std::string& source = "input")
{
    std::string line;
    int lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        header = detail::split(t);
        break;
    }
    if (header.empty()) throw ValidationError(source + ": missing header row");
    if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0) header[0].erase(0, 3);

    int ycol = -1;
    int tcol = -1;
    std::map<int, int> xcols;
    std::map<int, int> zcols;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        const auto& h = header[static_cast<std::size_t>(c)];
        for (int e = 0; e < c; ++e) {
            if (header[static_cast<std::size_t>(e)] == h) throw ValidationError(source + ": duplicate column '" + h + "'");
        }
        if (h == "y") ycol = c;
        else if (h == "t") tcol = c;
        else if (int k = detail::numbered(h, 'x')) xcols[k] = c;
        else if (int k = detail::numbered(h, 'z')) zcols[k] = c;
        else throw ValidationError(source + ": unknown column '" + h + "' in header");
    }
    if (ycol < 0) throw ValidationError(source + ": required column 'y' not found");
    const auto contiguous = [&](const std::map<int, int>& m, char prefix) {
        int expect = 1;
        for (const auto& [k, c] : m) {
            if (k != expect++) {
                throw ValidationError(source + ": predictor columns must be numbered " + std::string(1, prefix) +
                                      "1.." + std::string(1, prefix) + std::to_string(m.size()));
            }
        }
    };
    contiguous(xcols, 'x');
    contiguous(zcols, 'z');

    std::vector<double> y;
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> z;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cells = detail::split(t);
        const std::string where = source + ": row at line " + std::to_string(lineno);
        if (cells.size() != header.size()) {
            throw ValidationError(where + " has " + std::to_string(cells.size()) + " fields, expected " +
                                  std::to_string(header.size()));
        }
        const auto num = [&](int c) {
            const auto& cell = cells[static_cast<std::size_t>(c)];
            const auto v = detail::parse_double(cell);
            if (!v) {
                throw ValidationError(where + ": " + (cell.empty() ? "missing value" : "cannot parse '" + cell + "'") +
                                      " in column " + header[static_cast<std::size_t>(c)]);
            }
            if (!std::isfinite(*v)) throw ValidationError(where + ": non-finite value in column " + header[static_cast<std::size_t>(c)]);
            return *v;
        };
        y.push_back(num(ycol));
        std::vector<double> xr;
        for (const auto& [k, c] : xcols) xr.push_back(num(c));
        x.push_back(std::move(xr));
        std::vector<double> zr;
        for (const auto& [k, c] : zcols) zr.push_back(num(c));
        z.push_back(std::move(zr));
        if (tcol >= 0) labels.push_back(cells[static_cast<std::size_t>(tcol)]);
    }
    const auto n = static_cast<Eigen::Index>(y.size());
    if (n == 0) throw ValidationError(source + ": no data rows");
    const auto p = static_cast<Eigen::Index>(xcols.size());
    const auto l = static_cast<Eigen::Index>(zcols.size());
    Vector yy = Eigen::Map<const Vector>(y.data(), n);
    Matrix xx = p == 0 ? Matrix(Matrix::Ones(n, 1)) : Matrix(n, p);
    Matrix zz(n, l);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index j = 0; j < p; ++j) xx(t, j) = x[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
        for (Eigen::Index k = 0; k < l; ++k) zz(t, k) = z[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
    }
    return Dataset(std::move(yy), std::move(xx), std::move(zz), std::move(labels));
}

inline Dataset read_dataset_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return read_dataset(in, path);
}

/// Shortest round-trip representation of a double.
inline std::string fmt(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

/// Writes the dataset with a t column (labels or 1-based index) and a comment stamp line.
inline void write_dataset(std::ostream& out, const Dataset& d, const std::string& stamp = {})
{
    if (!stamp.empty()) out << "# " << stamp << "\n";
    const bool ones = d.p() == 1 && (d.x().array() == 1.0).all();
    out << "t,y";
    if (!ones) {
        for (Eigen::Index j = 0; j < d.p(); ++j) out << ",x" << j + 1;
    }
    for (Eigen::Index k = 0; k < d.l(); ++k) out << ",z" << k + 1;
    out << "\n";
    for (Eigen::Index t = 0; t < d.n(); ++t) {
        out << d.label(t) << "," << fmt(d.y()[t]);
        if (!ones) {
            for (Eigen::Index j = 0; j < d.p(); ++j) out << "," << fmt(d.x()(t, j));
        }
        for (Eigen::Index k = 0; k < d.l(); ++k) out << "," << fmt(d.zc()(t, k));
        out << "\n";
    }
}

/// Minimal CSV table writer (values are never quoted; callers pass plain tokens).
class CsvWriter
{
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    CsvWriter& comment(const std::string& s)
    {
        out_ << "# " << s << "\n";
        return *this;
    }

    CsvWriter& row(const std::vector<std::string>& cells)
    {
        for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
        out_ << "\n";
        return *this;
    }

private:
    std::ostream& out_;
};

} // namespace dcpt::io
