// CSV / VTK field export, Matrix Market matrices and vectors, JSON
// solve reports. Floating-point output uses 17 significant digits so
// that every value round-trips exactly.
#pragma once

#include <algorithm>
#include <cctype>
#include <complex>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "field.hpp"
#include "solver.hpp"
#include "sparse.hpp"

namespace igarad {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kDigits = std::numeric_limits<double>::max_digits10; // 17

namespace detail {

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    os << std::setprecision(kDigits);
    return os;
}

inline std::ifstream open_in(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open '" + path + "' for reading");
    return is;
}

inline std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace detail

// ---- CSV ------------------------------------------------------------------

inline const char* const kFieldHeader = "xi,eta,x,y,re,im,abs";

inline void write_samples_csv(std::ostream& os, const std::vector<FieldSample>& samples)
{
    os << std::setprecision(kDigits) << kFieldHeader << '\n';
    for (const auto& s : samples)
        os << s.xi << ',' << s.eta << ',' << s.x << ',' << s.y << ',' << s.u.real() << ',' << s.u.imag() << ','
           << s.magnitude() << '\n';
}

inline void write_samples_csv(const std::string& path, const std::vector<FieldSample>& samples)
{
    auto os = detail::open_out(path);
    write_samples_csv(os, samples);
}

/// Inverse of write_samples_csv; the abs column is recomputed, not read.
inline std::vector<FieldSample> read_samples_csv(const std::string& path)
{
    auto is = detail::open_in(path);
    std::string line;
    if (!std::getline(is, line) || line != kFieldHeader)
        throw IoError(path + ": unexpected CSV header");
    std::vector<FieldSample> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double v[7];
        for (double& x : v)
            if (!(ls >> x))
                throw IoError(path + ":" + std::to_string(lineno) + ": malformed row");
        out.push_back({v[0], v[1], v[2], v[3], cplx(v[4], v[5])});
    }
    return out;
}

// ---- VTK ------------------------------------------------------------------

/// Legacy ASCII structured grid of a parametric sample grid (xi fastest).
inline void write_vtk_structured(const std::string& path, const std::vector<FieldSample>& samples, int res_xi,
                                 int res_eta)
{
    if (static_cast<int>(samples.size()) != res_xi * res_eta)
        throw IoError("write_vtk_structured: sample count does not match the grid");
    auto os = detail::open_out(path);
    os << "# vtk DataFile Version 3.0\nacoustic field\nASCII\nDATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << res_xi << ' ' << res_eta << " 1\n";
    os << "POINTS " << samples.size() << " double\n";
    for (const auto& s : samples)
        os << s.x << ' ' << s.y << " 0\n";
    os << "POINT_DATA " << samples.size() << '\n';
    auto scalar = [&](const char* name, auto&& get) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (const auto& s : samples)
            os << get(s) << '\n';
    };
    scalar("re", [](const FieldSample& s) { return s.u.real(); });
    scalar("im", [](const FieldSample& s) { return s.u.imag(); });
    scalar("abs", [](const FieldSample& s) { return s.magnitude(); });
}

// ---- Matrix Market ----------------------------------------------------------

template <typename T>
void write_matrix_market(const std::string& path, const CsrMatrix<T>& A)
{
    constexpr bool is_complex = !std::is_floating_point_v<T>;
    auto os = detail::open_out(path);
    os << "%%MatrixMarket matrix coordinate " << (is_complex ? "complex" : "real") << " general\n";
    os << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
    for (int r = 0; r < A.rows(); ++r)
        for (auto p = A.row_offsets()[r]; p < A.row_offsets()[r + 1]; ++p) {
            os << r + 1 << ' ' << A.col_indices()[p] + 1 << ' ';
            if constexpr (is_complex)
                os << A.values()[p].real() << ' ' << A.values()[p].imag() << '\n';
            else
                os << A.values()[p] << '\n';
        }
}

inline void write_matrix_market_vector(const std::string& path, const std::vector<cplx>& v)
{
    auto os = detail::open_out(path);
    os << "%%MatrixMarket matrix array complex general\n" << v.size() << " 1\n";
    for (const auto& x : v)
        os << x.real() << ' ' << x.imag() << '\n';
}

namespace detail {

struct MmHeader {
    bool coordinate = true;
    std::string field;    // real | complex | integer | pattern
    std::string symmetry; // general | symmetric | skew-symmetric | hermitian
};

inline MmHeader read_mm_header(std::istream& is, const std::string& path)
{
    std::string line;
    if (!std::getline(is, line))
        throw IoError(path + ": empty file");
    std::istringstream hs(line);
    std::string banner, object, format;
    MmHeader h;
    hs >> banner >> object >> format >> h.field >> h.symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        throw IoError(path + ": not a Matrix Market matrix");
    format = lower(format);
    h.field = lower(h.field);
    h.symmetry = lower(h.symmetry);
    if (format != "coordinate" && format != "array")
        throw IoError(path + ": unsupported format '" + format + "'");
    h.coordinate = format == "coordinate";
    if (h.field != "real" && h.field != "complex" && h.field != "integer" && h.field != "pattern")
        throw IoError(path + ": unsupported field '" + h.field + "'");
    return h;
}

inline std::string next_data_line(std::istream& is)
{
    std::string line;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '%')
            return line;
    throw IoError("unexpected end of Matrix Market data");
}

inline cplx read_value(std::istream& ls, const std::string& field)
{
    double re = 1.0, im = 0.0;
    if (field != "pattern" && !(ls >> re))
        throw IoError("malformed Matrix Market entry");
    if (field == "complex" && !(ls >> im))
        throw IoError("malformed Matrix Market entry");
    return {re, im};
}

} // namespace detail

/// Coordinate format, any field, general/symmetric/skew/hermitian storage.
inline SparseComplex read_matrix_market(const std::string& path)
{
    auto is = detail::open_in(path);
    const auto h = detail::read_mm_header(is, path);
    if (!h.coordinate)
        throw IoError(path + ": dense array format is only supported for vectors");
    std::istringstream sz(detail::next_data_line(is));
    long long rows = 0, cols = 0, nnz = 0;
    if (!(sz >> rows >> cols >> nnz))
        throw IoError(path + ": malformed size line");
    std::vector<Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(nnz) * (h.symmetry == "general" ? 1 : 2));
    for (long long e = 0; e < nnz; ++e) {
        std::istringstream ls(detail::next_data_line(is));
        long long i = 0, j = 0;
        if (!(ls >> i >> j))
            throw IoError(path + ": malformed entry");
        const cplx v = detail::read_value(ls, h.field);
        const int r = static_cast<int>(i - 1), c = static_cast<int>(j - 1);
        t.push_back({r, c, v});
        if (r != c) {
            if (h.symmetry == "symmetric")
                t.push_back({c, r, v});
            else if (h.symmetry == "skew-symmetric")
                t.push_back({c, r, -v});
            else if (h.symmetry == "hermitian")
                t.push_back({c, r, std::conj(v)});
        }
    }
    return SparseComplex::from_triplets(static_cast<int>(rows), static_cast<int>(cols), std::move(t));
}

/// Column vector in array or coordinate format.
inline std::vector<cplx> read_matrix_market_vector(const std::string& path)
{
    auto is = detail::open_in(path);
    const auto h = detail::read_mm_header(is, path);
    std::istringstream sz(detail::next_data_line(is));
    long long rows = 0, cols = 0, nnz = 0;
    if (!(sz >> rows >> cols) || cols != 1)
        throw IoError(path + ": expected a single column");
    std::vector<cplx> v(static_cast<std::size_t>(rows));
    if (h.coordinate) {
        if (!(sz >> nnz))
            throw IoError(path + ": malformed size line");
        for (long long e = 0; e < nnz; ++e) {
            std::istringstream ls(detail::next_data_line(is));
            long long i = 0, j = 0;
            if (!(ls >> i >> j))
                throw IoError(path + ": malformed entry");
            v[static_cast<std::size_t>(i - 1)] += detail::read_value(ls, h.field);
        }
    } else {
        for (auto& x : v) {
            std::istringstream ls(detail::next_data_line(is));
            x = detail::read_value(ls, h.field);
        }
    }
    return v;
}

// ---- JSON -----------------------------------------------------------------

inline nlohmann::json to_json(const SolveReport& r)
{
    return {{"method", r.method},
            {"converged", r.converged},
            {"outer_iterations", r.outer_iterations},
            {"inner_iterations", r.inner_iterations},
            {"preconditioned_residual", r.preconditioned_residual},
            {"true_residual", r.true_residual},
            {"seconds", r.seconds},
            {"residual_history", r.residual_history}};
}

inline void write_json(const std::string& path, const nlohmann::json& j)
{
    auto os = detail::open_out(path);
    os << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string& path)
{
    auto is = detail::open_in(path);
    try {
        return nlohmann::json::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
}

} // namespace igarad
