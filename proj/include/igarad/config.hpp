// RunConfig and its JSON schema.
//
// Every key is optional; missing keys keep the defaults below. theta may be
// a number (radians) or a string "pi/N" / "M*pi/N".
//
//   {
//     "frequency": 1.0e6, "sound_speed": 1500, "aperture": 0.01,
//     "radius_factor": 2, "theta": "pi/4", "amplitude": 1,
//     "order": [4, 4], "basis": [700, 600], "align_aperture": true,
//     "solver": "gmres",
//     "beta_factor": 0.3333333333333333,
//     "gmres": {"restart": 50, "tol": 1e-8, "max_outer": 50, "side": "left"},
//     "grid": [201, 201], "profile_samples": 1001,
//     "output": {"dir": "out", "field_csv": "field.csv", "axis_csv": "axis.csv",
// "bottom_csv": "bottom.csv", "report": "report.json",
// "vtk": "", "matrices": false}
//   }
#pragma once

#include <cmath>
#include <numbers>
#include <regex>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "geometry.hpp"
#include "solver.hpp"

namespace igarad {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SolverChoice { Gmres, Direct };

struct OutputConfig {
    std::string dir = "out";
    std::string field_csv = "field.csv";
    std::string axis_csv = "axis.csv";
    std::string bottom_csv = "bottom.csv";
    std::string report = "report.json";
    std::string vtk;          ///< empty: no VTK export
    bool matrices = false;    ///< dump A, S, M, E and b as Matrix Market
};

struct RunConfig {
    double frequency = 1.0e6;
    double sound_speed = 1500.0;
    double aperture = 0.01;   ///< half-aperture a
    double radius_factor = 2.0; ///< r = radius_factor * N_f
    double theta = std::numbers::pi / 4;
    double amplitude = 1.0;   ///< C
    int order_xi = 4, order_eta = 4;
    int n = 700, m = 600;
    bool align_aperture = true;
    SolverChoice solver = SolverChoice::Gmres;
    double beta_factor = 1.0 / 3.0;
    GmresConfig gmres;
    int grid_xi = 201, grid_eta = 201;
    int profile_samples = 1001;
    OutputConfig output;

    [[nodiscard]] double wavenumber() const { return 2.0 * std::numbers::pi * frequency / sound_speed; }
    [[nodiscard]] double wavelength() const { return sound_speed / frequency; }
    [[nodiscard]] double near_field() const { return aperture * aperture / wavelength(); }
    [[nodiscard]] double radius() const { return radius_factor * near_field(); }
    [[nodiscard]] double beta() const { return beta_factor / wavenumber(); }
    [[nodiscard]] long long dofs() const { return static_cast<long long>(n) * m; }

    [[nodiscard]] DomainConfig domain() const
    {
        DomainConfig d;
        d.a = aperture;
        d.r = radius();
        d.theta = theta;
        d.C = amplitude;
        d.c_sound = sound_speed;
        d.f = frequency;
        return d;
    }

    void validate() const
    {
        if (!(frequency > 0.0 && sound_speed > 0.0 && aperture > 0.0 && radius_factor > 0.0))
            throw ConfigError("frequency, sound_speed, aperture and radius_factor must be positive");
        if (!(radius() > aperture))
            throw ConfigError("radius r = radius_factor * a^2 / lambda = " + std::to_string(radius())
                              + " does not exceed the half-aperture; raise frequency or radius_factor");
        if (order_xi < 2 || order_eta < 2)
            throw ConfigError("spline orders must be >= 2");
        if (n < order_xi || m < order_eta)
            throw ConfigError("basis counts must be >= the spline order");
        if (!(beta_factor >= 0.0))
            throw ConfigError("beta_factor must be >= 0");
        if (grid_xi < 2 || grid_eta < 2 || profile_samples < 2)
            throw ConfigError("grid and profile resolutions must be >= 2");
        try {
            domain().validate();
            gmres.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

/// "pi/4", "3*pi/8", "0.785" or a plain number.
inline double parse_angle(const nlohmann::json& j)
{
    if (j.is_number())
        return j.get<double>();
    if (!j.is_string())
        throw ConfigError("theta must be a number or a string like \"pi/4\"");
    const std::string s = j.get<std::string>();
    static const std::regex re(R"(\s*(?:([0-9.eE+-]+)\s*\*\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*)");
    std::smatch m;
    if (std::regex_match(s, m, re)) {
        const double num = m[1].matched ? std::stod(m[1].str()) : 1.0;
        const double den = m[2].matched ? std::stod(m[2].str()) : 1.0;
        return num * std::numbers::pi / den;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("cannot parse angle '" + s + "'");
}

namespace detail {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

inline void take_pair(const nlohmann::json& j, const char* key, int& a, int& b)
{
    if (!j.contains(key))
        return;
    const auto& v = j.at(key);
    if (v.is_number_integer()) {
        a = b = v.get<int>();
    } else if (v.is_array() && v.size() == 2) {
        a = v[0].get<int>();
        b = v[1].get<int>();
    } else {
        throw ConfigError(std::string(key) + " must be an integer or a pair");
    }
}

} // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j)
{
    RunConfig c;
    try {
        detail::take(j, "frequency", c.frequency);
        detail::take(j, "sound_speed", c.sound_speed);
        detail::take(j, "aperture", c.aperture);
        detail::take(j, "radius_factor", c.radius_factor);
        if (j.contains("theta"))
            c.theta = parse_angle(j.at("theta"));
        detail::take(j, "amplitude", c.amplitude);
        detail::take_pair(j, "order", c.order_xi, c.order_eta);
        detail::take_pair(j, "basis", c.n, c.m);
        detail::take(j, "align_aperture", c.align_aperture);
        if (j.contains("solver")) {
            const auto s = j.at("solver").get<std::string>();
            if (s == "gmres")
                c.solver = SolverChoice::Gmres;
            else if (s == "direct")
                c.solver = SolverChoice::Direct;
            else
                throw ConfigError("solver must be \"gmres\" or \"direct\"");
        }
        detail::take(j, "beta_factor", c.beta_factor);
        if (j.contains("gmres")) {
            const auto& g = j.at("gmres");
            detail::take(g, "restart", c.gmres.restart);
            detail::take(g, "tol", c.gmres.tol);
            detail::take(g, "max_outer", c.gmres.max_outer);
            if (g.contains("side")) {
                const auto s = g.at("side").get<std::string>();
                if (s != "left" && s != "right")
                    throw ConfigError("gmres.side must be \"left\" or \"right\"");
                c.gmres.side = s == "left" ? PreconditionSide::Left : PreconditionSide::Right;
            }
        }
        detail::take_pair(j, "grid", c.grid_xi, c.grid_eta);
        detail::take(j, "profile_samples", c.profile_samples);
        if (j.contains("output")) {
            const auto& o = j.at("output");
            detail::take(o, "dir", c.output.dir);
            detail::take(o, "field_csv", c.output.field_csv);
            detail::take(o, "axis_csv", c.output.axis_csv);
            detail::take(o, "bottom_csv", c.output.bottom_csv);
            detail::take(o, "report", c.output.report);
            detail::take(o, "vtk", c.output.vtk);
            detail::take(o, "matrices", c.output.matrices);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline nlohmann::json to_json(const RunConfig& c)
{
    return {{"frequency", c.frequency},
            {"sound_speed", c.sound_speed},
            {"aperture", c.aperture},
            {"radius_factor", c.radius_factor},
            {"theta", c.theta},
            {"amplitude", c.amplitude},
            {"order", {c.order_xi, c.order_eta}},
            {"basis", {c.n, c.m}},
            {"align_aperture", c.align_aperture},
            {"solver", c.solver == SolverChoice::Gmres ? "gmres" : "direct"},
            {"beta_factor", c.beta_factor},
            {"gmres",
             {{"restart", c.gmres.restart},
              {"tol", c.gmres.tol},
              {"max_outer", c.gmres.max_outer},
              {"side", c.gmres.side == PreconditionSide::Left ? "left" : "right"}}},
            {"grid", {c.grid_xi, c.grid_eta}},
            {"profile_samples", c.profile_samples},
            {"output",
             {{"dir", c.output.dir},
              {"field_csv", c.output.field_csv},
              {"axis_csv", c.output.axis_csv},
              {"bottom_csv", c.output.bottom_csv},
              {"report", c.output.report},
              {"vtk", c.output.vtk},
              {"matrices", c.output.matrices}}}};
}

} // namespace igarad
