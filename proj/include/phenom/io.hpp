#pragma once

// Wire formats. JSON carries phenomena, hypothesis models, CDFs, and run
// reports; CSV carries tables meant for plotting. Conventions:
//   exact backend - scalars are strings: "1/3", "22/249", "1"
//   float backend - scalars are JSON numbers, rounded to the caller's precision
// A document's "backend" tag must match the requested backend; mixing is an
// error, not a coercion, so exactness never silently degrades.

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phenom/errors.hpp"
#include "phenom/limitdist.hpp"
#include "phenom/mixtures.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/sampler.hpp"
#include "phenom/scalar.hpp"

namespace phenom {

using json = nlohmann::ordered_json;

namespace detail {

// precision < 0 or >= 17 means "leave the double alone" (shortest
// round-trip form); used for documents meant to be fed back in.
inline double round_to(double v, int precision) {
    if (precision < 0 || precision >= 17) return v;
    const double scale = std::pow(10.0, precision);
    return std::round(v * scale) / scale;
}

template <backend_scalar T>
json scalar_to_json(const T& v, int precision) {
    if constexpr (scalar_traits<T>::is_exact)
        return scalar_traits<T>::repr(v);
    else
        return round_to(v, precision);
}

// Decimal rendering of any scalar; exact values are rounded half away from
// zero at `precision` places, matching how the reference tables print.
template <backend_scalar T>
double scalar_to_decimal(const T& v, int precision) {
    if constexpr (scalar_traits<T>::is_exact) {
        using boost::multiprecision::pow;
        const BigInt scale = pow(BigInt(10), static_cast<unsigned>(precision));
        Rational scaled = v * Rational(scale);
        BigInt twice = numerator(scaled) * 2 + denominator(scaled) * (scaled < 0 ? -1 : 1);
        BigInt units = twice / (denominator(scaled) * 2);
        return Rational(units, scale).template convert_to<double>();
    } else {
        return round_to(v, precision);
    }
}

template <backend_scalar T>
T scalar_from_json(const json& node) {
    if constexpr (scalar_traits<T>::is_exact) {
        if (!node.is_string())
            throw mixed_backend("exact documents carry scalars as strings like \"2/3\"; got " +
                                node.dump());
        return scalar_traits<T>::parse(node.get<std::string>());
    } else {
        if (node.is_number()) return node.get<double>();
        if (node.is_string()) return scalar_traits<T>::parse(node.get<std::string>());
        throw parse_error("expected a number, got " + node.dump());
    }
}

template <backend_scalar T>
void check_backend_tag(const json& doc) {
    if (!doc.contains("backend") || !doc["backend"].is_string())
        throw parse_error("document is missing its \"backend\" tag");
    const std::string tag = doc["backend"].get<std::string>();
    if (tag != scalar_traits<T>::backend_name)
        throw mixed_backend("document backend \"" + tag + "\" does not match requested \"" +
                            scalar_traits<T>::backend_name + "\"");
}

template <backend_scalar T>
std::string format_scalar(const T& v, int precision) {
    if constexpr (scalar_traits<T>::is_exact) {
        return scalar_traits<T>::repr(v);
    } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", precision, v);
        return buf;
    }
}

}  // namespace detail

// Phenomenon documents round-trip: on the float backend scalars keep their
// full shortest-round-trip form so feeding the document back reconstructs
// bit-identical values (rounded values could fail re-validation).
template <backend_scalar T>
json phenomenon_to_json(const Phenomenon<T>& ph) {
    json doc;
    if (ph.is_atomic()) {
        doc["kind"] = "atoms";
        doc["backend"] = scalar_traits<T>::backend_name;
        json atoms = json::array();
        for (const Atom<T>& a : ph.atomic().atoms()) {
            json entry;
            entry["p"] = detail::scalar_to_json(a.p, -1);
            entry["w"] = detail::scalar_to_json(a.weight, -1);
            atoms.push_back(std::move(entry));
        }
        doc["atoms"] = std::move(atoms);
    } else {
        doc["kind"] = "moments";
        doc["backend"] = scalar_traits<T>::backend_name;
        json values = json::array();
        for (const T& v : ph.moment_sequence().values())
            values.push_back(detail::scalar_to_json(v, -1));
        doc["values"] = std::move(values);
    }
    return doc;
}

template <backend_scalar T>
Phenomenon<T> phenomenon_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string())
        throw parse_error("phenomenon document needs a \"kind\" field");
    detail::check_backend_tag<T>(doc);
    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "moments") {
        if (!doc.contains("values") || !doc["values"].is_array())
            throw parse_error("moments document needs a \"values\" array");
        std::vector<T> values;
        for (const json& node : doc["values"])
            values.push_back(detail::scalar_from_json<T>(node));
        return Phenomenon<T>(MomentSequence<T>(std::move(values)));
    }
    if (kind == "atoms") {
        if (!doc.contains("atoms") || !doc["atoms"].is_array())
            throw parse_error("atoms document needs an \"atoms\" array");
        std::vector<Atom<T>> atoms;
        for (const json& node : doc["atoms"]) {
            if (!node.is_object() || !node.contains("p") || !node.contains("w"))
                throw parse_error("each atom needs \"p\" and \"w\" fields");
            atoms.push_back(Atom<T>{detail::scalar_from_json<T>(node["p"]),
                                    detail::scalar_from_json<T>(node["w"])});
        }
        return Phenomenon<T>(AtomicMixture<T>(std::move(atoms)));
    }
    throw parse_error("unknown phenomenon kind \"" + kind + "\"");
}

template <backend_scalar T>
json model_to_json(const HypothesisModel<T>& model) {
    json doc;
    doc["kind"] = "hypotheses";
    json comps = json::array();
    for (const auto& c : model.components()) {
        json entry;
        entry["label"] = c.label;
        entry["prior"] = detail::scalar_to_json(c.prior, -1);
        entry["phenomenon"] = phenomenon_to_json(c.phenomenon);
        comps.push_back(std::move(entry));
    }
    doc["components"] = std::move(comps);
    return doc;
}

template <backend_scalar T>
HypothesisModel<T> model_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("kind") || doc["kind"] != "hypotheses")
        throw parse_error("hypothesis document needs kind \"hypotheses\"");
    if (!doc.contains("components") || !doc["components"].is_array())
        throw parse_error("hypothesis document needs a \"components\" array");
    std::vector<HypothesisComponent<T>> comps;
    for (const json& node : doc["components"]) {
        if (!node.is_object() || !node.contains("label") || !node.contains("prior") ||
            !node.contains("phenomenon"))
            throw parse_error("each component needs \"label\", \"prior\", \"phenomenon\"");
        comps.push_back(HypothesisComponent<T>{node["label"].get<std::string>(),
                                               detail::scalar_from_json<T>(node["prior"]),
                                               phenomenon_from_json<T>(node["phenomenon"])});
    }
    return HypothesisModel<T>(std::move(comps));
}

// "WWBWB" -> outcome flags, W = success, B = failure.
inline std::vector<bool> parse_evidence(std::string_view text) {
    std::vector<bool> out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == 'W')
            out.push_back(true);
        else if (c == 'B')
            out.push_back(false);
        else
            throw parse_error(std::string("evidence strings use only W and B; got '") + c + "'");
    }
    return out;
}

template <backend_scalar T>
json occupancy_row_to_json(const OccupancyRow<T>& row, int precision = 6) {
    json doc;
    doc["kind"] = "occupancy";
    doc["backend"] = scalar_traits<T>::backend_name;
    doc["n"] = row.trials;
    json probs = json::array();
    for (const T& v : row.probs) probs.push_back(detail::scalar_to_json(v, precision));
    doc["probs"] = std::move(probs);
    return doc;
}

template <backend_scalar T>
std::string occupancy_row_to_csv(const OccupancyRow<T>& row, int precision = 6) {
    std::string out = "h,omega\n";
    for (std::size_t h = 0; h < row.probs.size(); ++h) {
        out += std::to_string(h);
        out += ',';
        out += detail::format_scalar(row.probs[h], precision);
        out += '\n';
    }
    return out;
}

template <backend_scalar T>
std::string cdf_grid_to_csv(const std::vector<std::pair<T, T>>& points, int precision = 6) {
    std::string out = "xi,phi\n";
    for (const auto& [xi, phi] : points) {
        out += detail::format_scalar(xi, precision);
        out += ',';
        out += detail::format_scalar(phi, precision);
        out += '\n';
    }
    return out;
}

template <backend_scalar T>
json limit_cdf_to_json(const LimitCdf<T>& cdf, int precision = 6) {
    json doc;
    doc["kind"] = "limit_cdf";
    doc["backend"] = scalar_traits<T>::backend_name;
    if (cdf.is_atomic()) {
        doc["representation"] = "atomic";
        json atoms = json::array();
        for (const Atom<T>& a : cdf.mixture().atoms()) {
            json entry;
            entry["p"] = detail::scalar_to_json(a.p, precision);
            entry["w"] = detail::scalar_to_json(a.weight, precision);
            atoms.push_back(std::move(entry));
        }
        doc["atoms"] = std::move(atoms);
    } else {
        doc["representation"] = "sampled";
        doc["n"] = cdf.sample_horizon();
        json pts = json::array();
        for (const auto& [xi, phi] : cdf.points())
            pts.push_back(json::array({detail::scalar_to_json(xi, precision),
                                       detail::scalar_to_json(phi, precision)}));
        doc["points"] = std::move(pts);
    }
    return doc;
}

template <backend_scalar T>
json report_to_json(const MonteCarloReport<T>& report, int precision = 6) {
    json doc;
    doc["seed"] = report.seed;
    doc["n"] = report.length;
    doc["trials"] = report.trials;
    doc["empirical"] = detail::round_to(report.empirical, precision);
    doc["exact"] = detail::scalar_to_json(report.exact, precision);
    doc["stderr"] = detail::round_to(report.standard_error, precision);
    return doc;
}

inline json error_to_json(const error& e) {
    json doc;
    doc["error"] = {{"kind", e.kind()}, {"message", e.what()}};
    return doc;
}

}  // namespace phenom
