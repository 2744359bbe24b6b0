#pragma once

// File formats: JSON instance configs, JSON reports and trajectory CSV.
//
// Config schema:
//   {"hamiltonian": [[[re,im], ...], ...],          row-major n x n
//    "frame": [[[re,im], ...], ...]                 row-major n x k, or
//    "state": [[re,im], ...],                       length n
//    "tolerances": {"hermiticity_tol", "crossing_tol", "rank_tol",
//                   "optimizer": {"starts", "max_iterations", "rel_tol", "seed"}},
//    "label": "..."}

#include "subspace_qsl/bounds.hpp"
#include "subspace_qsl/dynamics.hpp"
#include "subspace_qsl/operators.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace subspace_qsl {

inline constexpr double kDefaultCrossingTol = 1e-9;

struct Tolerances {
    double hermiticity_tol = kHermiticityTol;
    double crossing_tol = kDefaultCrossingTol;
    double rank_tol = kRankTol;
    OptimizerSettings optimizer;
};

struct InstanceConfig {
    HermitianOperator hamiltonian;
    std::optional<Frame> frame;
    std::optional<StateVector> state;
    Tolerances tolerances;
    std::string label;

    /// The initial subspace: the frame, or the span of the state.
    Frame subspace() const { return frame ? *frame : state->as_frame(); }
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& what)
{
    throw Error(ErrorKind::ParseError, (path.empty() ? std::string("/") : path) + ": " + what);
}

inline double parse_real(const nlohmann::json& j, const std::string& path)
{
    if (!j.is_number())
        parse_fail(path, "expected a number");
    return j.get<double>();
}

inline cplx parse_complex(const nlohmann::json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 2)
        parse_fail(path, "expected a [re, im] pair");
    return {parse_real(j[0], path + "/0"), parse_real(j[1], path + "/1")};
}

inline Vector parse_vector(const nlohmann::json& j, const std::string& path)
{
    if (!j.is_array() || j.empty())
        parse_fail(path, "expected a non-empty array of [re, im] pairs");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Index>(i)) = parse_complex(j[i], path + "/" + std::to_string(i));
    return v;
}

inline Matrix parse_matrix(const nlohmann::json& j, const std::string& path)
{
    if (!j.is_array() || j.empty())
        parse_fail(path, "expected a non-empty array of rows");
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string row_path = path + "/" + std::to_string(i);
        if (!j[i].is_array() || j[i].empty() || !j[i][0].is_array())
            parse_fail(row_path, "expected a row of [re, im] pairs");
        rows.push_back(parse_vector(j[i], row_path));
        if (rows.back().size() != rows.front().size())
            parse_fail(row_path, "row length " + std::to_string(rows.back().size()) + " differs from " +
                                     std::to_string(rows.front().size()));
    }
    Matrix m(static_cast<Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        m.row(static_cast<Index>(i)) = rows[i].transpose();
    return m;
}

[[noreturn]] inline void validation_fail(const Error& e)
{
    throw Error(ErrorKind::ValidationError, e.what(), e.value());
}

inline nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

} // namespace detail

inline nlohmann::json matrix_to_json(const Matrix& m)
{
    auto rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(detail::complex_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json vector_to_json(const Vector& v)
{
    auto out = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(detail::complex_json(v(i)));
    return out;
}

inline InstanceConfig parse_config(const nlohmann::json& doc)
{
    using detail::parse_fail;
    if (!doc.is_object())
        parse_fail("", "config must be a JSON object");

    Tolerances tol;
    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        if (!t.is_object())
            parse_fail("/tolerances", "expected an object");
        if (t.contains("hermiticity_tol"))
            tol.hermiticity_tol = detail::parse_real(t["hermiticity_tol"], "/tolerances/hermiticity_tol");
        if (t.contains("crossing_tol"))
            tol.crossing_tol = detail::parse_real(t["crossing_tol"], "/tolerances/crossing_tol");
        if (t.contains("rank_tol"))
            tol.rank_tol = detail::parse_real(t["rank_tol"], "/tolerances/rank_tol");
        if (t.contains("optimizer")) {
            const auto& o = t["optimizer"];
            if (!o.is_object())
                parse_fail("/tolerances/optimizer", "expected an object");
            if (o.contains("starts"))
                tol.optimizer.starts =
                    static_cast<int>(detail::parse_real(o["starts"], "/tolerances/optimizer/starts"));
            if (o.contains("max_iterations"))
                tol.optimizer.max_iterations =
                    static_cast<int>(detail::parse_real(o["max_iterations"], "/tolerances/optimizer/max_iterations"));
            if (o.contains("rel_tol"))
                tol.optimizer.rel_tol = detail::parse_real(o["rel_tol"], "/tolerances/optimizer/rel_tol");
            if (o.contains("seed")) {
                if (!o["seed"].is_number_unsigned())
                    parse_fail("/tolerances/optimizer/seed", "expected a nonnegative integer");
                tol.optimizer.seed = o["seed"].get<std::uint64_t>();
            }
        }
    }

    if (!doc.contains("hamiltonian"))
        parse_fail("/hamiltonian", "missing");
    const Matrix hm = detail::parse_matrix(doc["hamiltonian"], "/hamiltonian");

    std::optional<HermitianOperator> h;
    try {
        h = HermitianOperator::validate(hm, tol.hermiticity_tol);
    } catch (const Error& e) {
        detail::validation_fail(e);
    }

    const bool has_frame = doc.contains("frame");
    const bool has_state = doc.contains("state");
    if (has_frame == has_state)
        parse_fail("", "exactly one of \"frame\" and \"state\" must be present");

    InstanceConfig cfg{*h, std::nullopt, std::nullopt, tol, ""};
    if (doc.contains("label")) {
        if (!doc["label"].is_string())
            parse_fail("/label", "expected a string");
        cfg.label = doc["label"].get<std::string>();
    }

    try {
        if (has_frame) {
            const Matrix f = detail::parse_matrix(doc["frame"], "/frame");
            if (f.rows() != hm.rows())
                throw Error(ErrorKind::DimensionMismatch, "frame has " + std::to_string(f.rows()) +
                                                              " rows, Hamiltonian dimension is " +
                                                              std::to_string(hm.rows()));
            cfg.frame = orthonormalize(f, tol.rank_tol);
        } else {
            const Vector v = detail::parse_vector(doc["state"], "/state");
            if (v.size() != hm.rows())
                throw Error(ErrorKind::DimensionMismatch, "state has length " + std::to_string(v.size()) +
                                                              ", Hamiltonian dimension is " +
                                                              std::to_string(hm.rows()));
            cfg.state = StateVector::normalized(v);
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ParseError)
            throw;
        detail::validation_fail(e);
    }
    return cfg;
}

inline InstanceConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    return parse_config(doc);
}

inline nlohmann::json config_to_json(const InstanceConfig& cfg)
{
    nlohmann::json doc;
    doc["label"] = cfg.label;
    doc["hamiltonian"] = matrix_to_json(cfg.hamiltonian.matrix());
    if (cfg.frame)
        doc["frame"] = matrix_to_json(cfg.frame->columns());
    else
        doc["state"] = vector_to_json(cfg.state->entries());
    const auto& t = cfg.tolerances;
    doc["tolerances"] = {{"hermiticity_tol", t.hermiticity_tol},
                         {"crossing_tol", t.crossing_tol},
                         {"rank_tol", t.rank_tol},
                         {"optimizer",
                          {{"starts", t.optimizer.starts},
                           {"max_iterations", t.optimizer.max_iterations},
                           {"rel_tol", t.optimizer.rel_tol},
                           {"seed", t.optimizer.seed}}}};
    return doc;
}

/// Two-level system H = diag(e1, e2) with P0 projecting on (e_1 + e_2)/sqrt 2.
inline InstanceConfig make_two_level(double e1, double e2)
{
    if (e1 == e2)
        throw Error(ErrorKind::DegenerateLevels, "the two levels must differ");
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = e1;
    h(1, 1) = e2;
    Matrix f(2, 1);
    f << 1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2;
    std::ostringstream label;
    label << "two-level E1=" << e1 << " E2=" << e2;
    return InstanceConfig{HermitianOperator::validate(h), Frame::from_columns(f), std::nullopt, {}, label.str()};
}

// ---- trajectory CSV ------------------------------------------------------

inline constexpr const char* kTrajectoryHeader = "t,norm_diff,theta,v_bound,dispersion_bound";

/// Locale-independent, 17 significant digits; round-trips exactly.
inline std::string format_double(double x)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

inline void write_trajectory_csv(std::ostream& os, const AngleTrajectory& tr)
{
    os << kTrajectoryHeader << '\n';
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        os << format_double(tr.times[i]) << ',' << format_double(tr.norm_diff[i]) << ','
           << format_double(tr.theta[i]) << ',' << format_double(tr.v_bound[i]) << ','
           << format_double(tr.dispersion_bound[i]) << '\n';
}

inline AngleTrajectory read_trajectory_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != kTrajectoryHeader)
        throw Error(ErrorKind::ParseError, "trajectory CSV: bad header");
    AngleTrajectory tr;
    std::vector<double>* columns[] = {&tr.times, &tr.norm_diff, &tr.theta, &tr.v_bound, &tr.dispersion_bound};
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t c = 0; c < 5; ++c) {
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc{})
                throw Error(ErrorKind::ParseError, "trajectory CSV line " + std::to_string(lineno) + ": bad number");
            columns[c]->push_back(v);
            p = res.ptr;
            if (c < 4) {
                if (p == end || *p != ',')
                    throw Error(ErrorKind::ParseError,
                                "trajectory CSV line " + std::to_string(lineno) + ": expected 5 columns");
                ++p;
            }
        }
        if (p != end)
            throw Error(ErrorKind::ParseError, "trajectory CSV line " + std::to_string(lineno) + ": trailing data");
    }
    return tr;
}

// ---- report JSON ---------------------------------------------------------

/// Angles are radians internally; degrees only change the emitted numbers.
inline double display_angle(double radians, bool degrees) { return degrees ? radians * 180.0 / std::numbers::pi : radians; }

inline nlohmann::json optional_time(const std::optional<double>& t)
{
    return t ? nlohmann::json(*t) : nlohmann::json("never");
}

inline nlohmann::json bounds_report_to_json(const BoundsReport& r, bool degrees = false)
{
    nlohmann::json j;
    j["angle_unit"] = degrees ? "degrees" : "radians";
    j["v_speed"] = r.v_speed;
    j["subspace_dispersion"] = r.subspace_dispersion;
    j["dispersion_converged"] = r.dispersion_converged;
    j["spectral_halfwidth"] = r.spectral_halfwidth;
    j["e_min"] = r.e_min;
    j["e_max"] = r.e_max;
    j["omega"] = r.omega;
    auto rows = nlohmann::json::array();
    for (const auto& tb : r.per_theta)
        rows.push_back({{"theta", display_angle(tb.theta, degrees)},
                        {"t_bound_v", optional_time(tb.t_bound_v)},
                        {"t_bound_dispersion", optional_time(tb.t_bound_dispersion)},
                        {"t_brachistochrone", optional_time(tb.t_brachistochrone)}});
    j["per_theta"] = std::move(rows);
    return j;
}

inline nlohmann::json crossing_to_json(const CrossingResult& r, bool degrees = false)
{
    nlohmann::json j;
    j["angle_unit"] = degrees ? "degrees" : "radians";
    j["attained"] = r.attained;
    j["t_theta"] = r.t_theta ? nlohmann::json(*r.t_theta) : nlohmann::json(nullptr);
    j["theta_target"] = display_angle(r.theta_target, degrees);
    j["sup_angle_observed"] = display_angle(r.sup_angle_observed, degrees);
    j["horizon"] = r.horizon;
    j["evaluations"] = r.evaluations;
    return j;
}

} // namespace subspace_qsl
