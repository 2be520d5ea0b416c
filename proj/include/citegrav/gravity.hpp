#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "citegrav/error.hpp"
#include "citegrav/flows.hpp"

namespace citegrav {

inline constexpr std::string_view kConstCol = "const";
inline constexpr std::string_view kMiCol = "ln_Mi";
inline constexpr std::string_view kMjCol = "ln_Mj";
inline constexpr std::string_view kDistCol = "ln_d";

// Distance bands; the first interval [0, breakpoints[0]) is the reference
// category and carries the all-zero dummy vector. Distances at or beyond the
// last breakpoint fall outside every band.
struct BandSpec {
    std::vector<double> breakpoints{50.0, 400.0, 800.0, 1200.0};

    void validate() const {
        if (breakpoints.empty()) throw ConfigError("band spec needs at least one breakpoint");
        double prev = 0.0;
        for (double b : breakpoints) {
            if (!(b > prev))
                throw ConfigError("band breakpoints must be positive and strictly increasing");
            prev = b;
        }
    }

    // 0 = reference band, k = [breakpoints[k-1], breakpoints[k]); nullopt
    // when d lies at or beyond the last breakpoint.
    std::optional<std::size_t> band_index(double d) const {
        if (d < 0.0 || d >= breakpoints.back()) return std::nullopt;
        std::size_t k = 0;
        while (d >= breakpoints[k]) ++k;
        return k;
    }

    std::size_t dummy_count() const { return breakpoints.size() - 1; }

    // One-hot dummy vector per the table convention: reference maps to all
    // zeros, band k to a 1 in position k-1.
    std::optional<std::vector<int>> dummies(double d) const {
        auto k = band_index(d);
        if (!k) return std::nullopt;
        std::vector<int> v(dummy_count(), 0);
        if (*k > 0) v[*k - 1] = 1;
        return v;
    }

    std::string column_name(std::size_t dummy) const {
        return "band_" + format_double(breakpoints[dummy]) + "_" +
               format_double(breakpoints[dummy + 1]);
    }

    std::string interval_label(std::size_t dummy) const {
        return format_double(breakpoints[dummy]) + "-" + format_double(breakpoints[dummy + 1]) +
               " km";
    }
};

// What to do with zero-distance pairs in the continuous specification, where
// ln d is undefined. Bands never need this; their reference interval admits
// zero.
struct ZeroDistancePolicy {
    enum class Kind { Exclude, Floor };
    Kind kind = Kind::Exclude;
    double floor_km = 0.0;

    static ZeroDistancePolicy parse(std::string_view s) {
        std::string n = normalize_name(s);
        if (n == "exclude") return {};
        if (n.rfind("floor:", 0) == 0) {
            ZeroDistancePolicy p;
            p.kind = Kind::Floor;
            try {
                p.floor_km = std::stod(n.substr(6));
            } catch (const std::exception&) {
                throw ConfigError("bad distance floor '" + std::string(s) + "'");
            }
            if (!(p.floor_km > 0.0)) throw ConfigError("distance floor must be positive");
            return p;
        }
        throw ConfigError("unknown zero-distance policy '" + std::string(s) + "'");
    }

    std::string describe() const {
        return kind == Kind::Exclude ? "exclude" : "floor:" + format_double(floor_km);
    }
};

struct DesignOptions {
    bool bands = false;
    BandSpec band_spec;
    ZeroDistancePolicy zero_distance;

    std::string form() const { return bands ? "bands" : "continuous"; }
};

// Log-transformed regression inputs. Column 0 is the intercept; the response
// is ln C. Rows are kept in edge order.
struct DesignMatrix {
    std::vector<std::string> columns;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    DropLedger exclusions;
    DesignOptions options;

    std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
};

// Builds the estimation sample from flow edges and mass tables. Edges with
// C < 1 or a mass below one are excluded and ledgered; so are zero-distance
// edges (continuous spec, exclude policy) and distances beyond the last
// band. A territory without a mass entry is a data error, not an exclusion.
inline DesignMatrix build_design(const std::vector<FlowEdge>& edges, const MassTable& cited_masses,
                                 const MassTable& citing_masses, const DesignOptions& opt) {
    if (opt.bands) opt.band_spec.validate();
    DesignMatrix out;
    out.options = opt;
    out.columns.emplace_back(kConstCol);
    out.columns.emplace_back(kMiCol);
    out.columns.emplace_back(kMjCol);
    if (opt.bands)
        for (std::size_t k = 0; k < opt.band_spec.dummy_count(); ++k)
            out.columns.push_back(opt.band_spec.column_name(k));
    else
        out.columns.emplace_back(kDistCol);

    const std::size_t p = out.columns.size();
    std::vector<double> ys;
    std::vector<double> xs;  // row-major staging
    for (const FlowEdge& e : edges) {
        if (!(e.citations >= 1.0)) {
            out.exclusions.add("citations below one");
            continue;
        }
        double mi = cited_masses.at(e.cited_id);
        double mj = citing_masses.at(e.citing_id);
        if (!(mi >= 1.0)) {
            out.exclusions.add("cited mass below one");
            continue;
        }
        if (!(mj >= 1.0)) {
            out.exclusions.add("citing mass below one");
            continue;
        }
        double d = e.distance_km;
        std::optional<std::vector<int>> dummies;
        if (opt.bands) {
            dummies = opt.band_spec.dummies(d);
            if (!dummies) {
                out.exclusions.add("beyond last band");
                continue;
            }
        } else {
            if (opt.zero_distance.kind == ZeroDistancePolicy::Kind::Floor)
                d = std::max(d, opt.zero_distance.floor_km);
            if (!(d > 0.0)) {
                out.exclusions.add("zero distance");
                continue;
            }
        }
        ys.push_back(std::log(e.citations));
        xs.push_back(1.0);
        xs.push_back(std::log(mi));
        xs.push_back(std::log(mj));
        if (opt.bands)
            for (int v : *dummies) xs.push_back(static_cast<double>(v));
        else
            xs.push_back(std::log(d));
    }

    const std::size_t n = ys.size();
    out.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    out.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        out.y(static_cast<Eigen::Index>(i)) = ys[i];
        for (std::size_t j = 0; j < p; ++j)
            out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i * p + j];
    }
    return out;
}

// HC1 sandwich: (X'X)^-1 X' diag(e^2) X (X'X)^-1, scaled by n/(n-p).
inline Eigen::MatrixXd robust_covariance(const DesignMatrix& design,
                                         const Eigen::VectorXd& residuals) {
    const auto n = design.X.rows();
    const auto p = design.X.cols();
    if (residuals.rows() != n) throw EstimationError("residual vector does not match design");
    if (n <= p) throw EstimationError("too few rows for a robust covariance");
    Eigen::MatrixXd xtx = design.X.transpose() * design.X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    if (ldlt.info() != Eigen::Success) throw EstimationError("X'X is not invertible");
    Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd meat =
        design.X.transpose() * residuals.array().square().matrix().asDiagonal() * design.X;
    Eigen::MatrixXd cov = bread * meat * bread *
                          (static_cast<double>(n) / static_cast<double>(n - p));
    return 0.5 * (cov + cov.transpose());
}

// Two-sided normal test thresholds for the 1% / 5% / 10% star convention.
inline constexpr double kZ01 = 2.5758293035489004;
inline constexpr double kZ05 = 1.959963984540054;
inline constexpr double kZ10 = 1.6448536269514722;

inline std::string significance_stars(double coef, double se) {
    if (!(se > 0.0)) return coef == 0.0 ? "" : "***";  // zero-residual degenerate fits
    double z = std::fabs(coef / se);
    if (z >= kZ01) return "***";
    if (z >= kZ05) return "**";
    if (z >= kZ10) return "*";
    return "";
}

// Coefficients are stored in estimation convention: the fitted slope on ln d
// (and on each band dummy) is typically negative. Report rendering negates
// distance terms into decay magnitudes; nothing else does.
struct GravityFit {
    std::vector<std::string> columns;
    Eigen::VectorXd coef;
    Eigen::VectorXd robust_se;
    Eigen::MatrixXd robust_cov;
    Eigen::VectorXd residuals;
    double r2 = 0.0;
    std::size_t n_obs = 0;
    std::vector<std::string> stars;
    DesignOptions options;
    DropLedger exclusions;

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        return std::nullopt;
    }

    double coef_of(std::string_view name) const {
        auto i = column(name);
        if (!i) throw EstimationError("no coefficient named '" + std::string(name) + "'");
        return coef(static_cast<Eigen::Index>(*i));
    }
};

inline GravityFit ols_fit(const DesignMatrix& design) {
    const auto n = design.X.rows();
    const auto p = design.X.cols();
    if (n <= p)
        throw EstimationError("too few observations: " + std::to_string(n) + " rows for " +
                              std::to_string(p) + " coefficients");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
    if (qr.rank() < p) {
        auto perm = qr.colsPermutation().indices();
        std::string cols;
        for (Eigen::Index k = qr.rank(); k < p; ++k) {
            if (!cols.empty()) cols += ", ";
            cols += design.columns[static_cast<std::size_t>(perm(k))];
        }
        throw EstimationError("design matrix is rank deficient; collinear columns: " + cols);
    }
    GravityFit fit;
    fit.columns = design.columns;
    fit.options = design.options;
    fit.exclusions = design.exclusions;
    fit.n_obs = static_cast<std::size_t>(n);
    fit.coef = qr.solve(design.y);
    fit.residuals = design.y - design.X * fit.coef;
    double mean = design.y.mean();
    double sst = (design.y.array() - mean).square().sum();
    double ssr = fit.residuals.squaredNorm();
    if (!(sst > 0.0)) throw EstimationError("response has zero variance; R^2 undefined");
    fit.r2 = 1.0 - ssr / sst;
    fit.robust_cov = robust_covariance(design, fit.residuals);
    fit.robust_se = fit.robust_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.stars.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j)
        fit.stars.push_back(significance_stars(fit.coef(j), fit.robust_se(j)));
    return fit;
}

// Expected flow for a continuous-spec fit, or for a band-spec fit when the
// distance falls inside a band.
inline double predict(const GravityFit& fit, double mass_i, double mass_j, double distance_km) {
    if (!(mass_i > 0.0) || !(mass_j > 0.0))
        throw EstimationError("prediction needs positive masses");
    double lp = fit.coef_of(kConstCol) + fit.coef_of(kMiCol) * std::log(mass_i) +
                fit.coef_of(kMjCol) * std::log(mass_j);
    if (!fit.options.bands) {
        if (!(distance_km > 0.0)) throw EstimationError("prediction needs a positive distance");
        lp += fit.coef_of(kDistCol) * std::log(distance_km);
        return std::exp(lp);
    }
    auto band = fit.options.band_spec.band_index(distance_km);
    if (!band)
        throw EstimationError("unsupported prediction form: distance " +
                              format_double(distance_km) + " km maps to no band");
    if (*band > 0) lp += fit.coef_of(fit.options.band_spec.column_name(*band - 1));
    return std::exp(lp);
}

namespace detail {

inline bool is_distance_column(std::string_view name) {
    return name == kDistCol || name.rfind("band_", 0) == 0;
}

// Display value: distance terms flip sign so they read as decay magnitudes.
inline double display_coef(std::string_view name, double value) {
    return is_distance_column(name) ? -value : value;
}

inline std::string display_label(const GravityFit& fit, std::size_t j) {
    const std::string& c = fit.columns[j];
    if (c == kConstCol) return "Constant";
    if (c == kMiCol) return "Cited mass (ln M_i)";
    if (c == kMjCol) return "Citing mass (ln M_j)";
    if (c == kDistCol) return "Distance decay (gamma)";
    for (std::size_t k = 0; k < fit.options.band_spec.dummy_count(); ++k)
        if (c == fit.options.band_spec.column_name(k))
            return "Distance " + fit.options.band_spec.interval_label(k) + " (decay)";
    return c;
}

}  // namespace detail

// JSON fit report. Coefficients follow the display convention (decay
// magnitudes positive); sign_note says so. Key order is fixed so identical
// fits serialize byte-identically.
inline nlohmann::ordered_json fit_report_json(const GravityFit& fit) {
    nlohmann::ordered_json coefs, ses, stars;
    for (std::size_t j = 0; j < fit.columns.size(); ++j) {
        const std::string& c = fit.columns[j];
        coefs[c] = detail::display_coef(c, fit.coef(static_cast<Eigen::Index>(j)));
        ses[c] = fit.robust_se(static_cast<Eigen::Index>(j));
        stars[c] = fit.stars[j];
    }
    nlohmann::ordered_json spec;
    spec["form"] = fit.options.form();
    if (fit.options.bands)
        spec["breakpoints"] = fit.options.band_spec.breakpoints;
    else
        spec["zero_distance"] = fit.options.zero_distance.describe();
    nlohmann::ordered_json exclusions = nlohmann::ordered_json::object();
    for (const auto& [reason, count] : fit.exclusions.reasons) exclusions[reason] = count;
    nlohmann::ordered_json out;
    out["coefficients"] = std::move(coefs);
    out["robust_se"] = std::move(ses);
    out["stars"] = std::move(stars);
    out["r2"] = fit.r2;
    out["n_obs"] = fit.n_obs;
    out["spec"] = std::move(spec);
    out["exclusions"] = std::move(exclusions);
    out["sign_note"] =
        "distance coefficients are decay magnitudes; the fitted slope is their negative";
    return out;
}

// Aligned text table in the shape of the published regressions: one row per
// coefficient, then R^2 and observation count.
inline std::string fit_report_text(const GravityFit& fit, std::string_view title) {
    std::ostringstream os;
    os << title << " (" << fit.options.form() << " specification)\n";
    os << std::left << std::setw(34) << "" << std::right << std::setw(12) << "Coef"
       << std::setw(12) << "Robust SE" << "  Sig\n";
    os << std::setprecision(3) << std::fixed;
    for (std::size_t j = 0; j < fit.columns.size(); ++j) {
        double shown =
            detail::display_coef(fit.columns[j], fit.coef(static_cast<Eigen::Index>(j)));
        os << std::left << std::setw(34) << detail::display_label(fit, j) << std::right
           << std::setw(12) << shown << std::setw(12)
           << fit.robust_se(static_cast<Eigen::Index>(j)) << "  " << fit.stars[j] << '\n';
    }
    os << std::left << std::setw(34) << "R^2" << std::right << std::setw(12) << fit.r2 << '\n';
    os << std::left << std::setw(34) << "Obs" << std::right << std::setw(12) << fit.n_obs << '\n';
    os << "Sig: *** 1%, ** 5%, * 10% (two-sided normal test on robust SE)\n";
    os << "Distance rows show decay magnitudes; fitted slopes are their negatives.\n";
    return os.str();
}

}  // namespace citegrav
