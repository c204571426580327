#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "clv/errors.hpp"

namespace clv {

using Rational = boost::multiprecision::cpp_rational;

// Parses "123", "-4", "2.5" or "7/2" into an exact rational. Returns nullopt
// for anything else (callers then fall back to floating point).
inline std::optional<Rational> parse_rational(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const auto is_int = [](const std::string& s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    using boost::multiprecision::cpp_int;
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
        if (!is_int(num) || !is_int(den)) return std::nullopt;
        const Rational d{cpp_int{den}};
        if (d == 0) return std::nullopt;
        return Rational{Rational{cpp_int{num}} / d};
    }
    const auto dot = text.find('.');
    if (dot != std::string::npos) {
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        const std::size_t frac_digits = text.size() - dot - 1;
        if (!is_int(digits) || frac_digits == 0) return std::nullopt;
        cpp_int den = 1;
        for (std::size_t i = 0; i < frac_digits; ++i) den *= 10;
        return Rational{Rational{cpp_int{digits}} / Rational{den}};
    }
    if (!is_int(text)) return std::nullopt;
    return Rational{cpp_int{text}};
}

// Route tags for the nonexistence verdicts.
enum class LiouvilleRoute {
    positive_source,             // strictly positive separable source: no solutions
    translated_positive_source,  // single-zero shift reduces to a positive source
    exponent_condition,          // growth exponents meet the critical inequality
    liminf_constraint,           // solutions force vanishing liminf and infima
    infimum_is_zero_of_source,   // infimum must be a zero of the source
    parabolic_constancy,         // exponent >= homogeneous dimension
    inconclusive,
};

inline const char* route_name(LiouvilleRoute r) {
    switch (r) {
        case LiouvilleRoute::positive_source: return "positive-source";
        case LiouvilleRoute::translated_positive_source: return "translated-positive-source";
        case LiouvilleRoute::exponent_condition: return "exponent-condition";
        case LiouvilleRoute::liminf_constraint: return "liminf-constraint";
        case LiouvilleRoute::infimum_is_zero_of_source: return "infimum-is-zero-of-source";
        case LiouvilleRoute::parabolic_constancy: return "parabolic-constancy";
        case LiouvilleRoute::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct LiouvilleVerdict {
    double Q = 0, p = 0, q = 0, a = 0, b = 0;
    double lhs_terms[2] = {0, 0};  // the two min-arguments
    double rhs = 0;                // Q (p-1)(q-1) / (a b)
    bool condition_holds = false;
    bool exact = false;     // evaluated in exact rational arithmetic
    bool boundary = false;  // decided within the 1e-9 band (float path only)
    double margin = 0;      // rhs - min(lhs_terms)
    bool general_operators = false;  // reached through the (p1, p2) operator form
    LiouvilleRoute route = LiouvilleRoute::inconclusive;
    std::string claim;
    std::vector<std::string> notes;
};

namespace detail {

inline void validate_exponents(double Q, double p, double q, double a, double b) {
    if (!(p > 1.0) || !(q > 1.0)) throw ConfigError("exponents p, q must be > 1");
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("growth exponents a, b must be positive");
    if (!(Q > 0.0)) throw ConfigError("homogeneous dimension Q must be positive");
}

}  // namespace detail

// min{ Q-p-(p-1)q/b, Q-q-(q-1)p/a } <= Q (p-1)(q-1)/(a b), evaluated in
// floating point with the boundary band flagged.
inline LiouvilleVerdict hyp_condition(double Q, double p, double q, double a, double b) {
    detail::validate_exponents(Q, p, q, a, b);
    LiouvilleVerdict v;
    v.Q = Q;
    v.p = p;
    v.q = q;
    v.a = a;
    v.b = b;
    if (Q <= std::max(p, q)) {
        v.route = LiouvilleRoute::parabolic_constancy;
        v.condition_holds = true;
        v.claim = "nonnegative supersolutions with exponent >= Q are constant";
        v.notes.push_back("critical-exponent arithmetic not evaluated for p or q >= Q");
        return v;
    }
    v.lhs_terms[0] = Q - p - (p - 1.0) * q / b;
    v.lhs_terms[1] = Q - q - (q - 1.0) * p / a;
    v.rhs = Q * (p - 1.0) * (q - 1.0) / (a * b);
    const double lhs = std::min(v.lhs_terms[0], v.lhs_terms[1]);
    v.margin = v.rhs - lhs;
    v.condition_holds = lhs <= v.rhs;
    v.boundary = std::abs(lhs - v.rhs) < 1e-9;
    v.route = LiouvilleRoute::exponent_condition;
    v.claim = v.condition_holds
                  ? "no weak solution pair with both essential infima zero"
                  : "exponent condition fails; nonexistence not implied by this route";
    return v;
}

// Exact-arithmetic evaluation of the same condition for rational inputs.
inline LiouvilleVerdict hyp_condition_exact(const Rational& Q, const Rational& p,
                                            const Rational& q, const Rational& a,
                                            const Rational& b) {
    detail::validate_exponents(static_cast<double>(Q), static_cast<double>(p),
                               static_cast<double>(q), static_cast<double>(a),
                               static_cast<double>(b));
    LiouvilleVerdict v;
    v.Q = static_cast<double>(Q);
    v.p = static_cast<double>(p);
    v.q = static_cast<double>(q);
    v.a = static_cast<double>(a);
    v.b = static_cast<double>(b);
    v.exact = true;
    if (Q <= std::max(p, q, [](const Rational& x, const Rational& y) { return x < y; })) {
        v.route = LiouvilleRoute::parabolic_constancy;
        v.condition_holds = true;
        v.claim = "nonnegative supersolutions with exponent >= Q are constant";
        return v;
    }
    const Rational one(1);
    const Rational t1 = Q - p - (p - one) * q / b;
    const Rational t2 = Q - q - (q - one) * p / a;
    const Rational rhs = Q * (p - one) * (q - one) / (a * b);
    const Rational lhs = std::min(t1, t2);
    v.lhs_terms[0] = static_cast<double>(t1);
    v.lhs_terms[1] = static_cast<double>(t2);
    v.rhs = static_cast<double>(rhs);
    v.margin = static_cast<double>(rhs - lhs);
    v.condition_holds = lhs <= rhs;
    v.boundary = lhs == rhs;
    v.route = LiouvilleRoute::exponent_condition;
    v.claim = v.condition_holds
                  ? "no weak solution pair with both essential infima zero"
                  : "exponent condition fails; nonexistence not implied by this route";
    return v;
}

// Product form: max{ abp + aq(p-1), abq + bp(q-1) } >= Q (ab - (p-1)(q-1)).
inline bool hyp2_condition(double Q, double p, double q, double a, double b) {
    detail::validate_exponents(Q, p, q, a, b);
    const double lhs = std::max(a * b * p + a * q * (p - 1.0), a * b * q + b * p * (q - 1.0));
    return lhs >= Q * (a * b - (p - 1.0) * (q - 1.0));
}

// Equal-exponent form (p = q):
// max{ a+p-1, b+p-1 } >= (Q-p)/(p(p-1)) (ab - (p-1)^2).
inline bool hypp_condition(double Q, double p, double a, double b) {
    detail::validate_exponents(Q, p, p, a, b);
    const double lhs = std::max(a, b) + p - 1.0;
    return lhs >= (Q - p) / (p * (p - 1.0)) * (a * b - (p - 1.0) * (p - 1.0));
}

// Laplacian form (p = q = 2): max{ a+1, b+1 } >= (Q-2)/2 (ab - 1).
inline bool hypp2_condition(double Q, double a, double b) {
    detail::validate_exponents(Q, 2.0, 2.0, a, b);
    return std::max(a, b) + 1.0 >= 0.5 * (Q - 2.0) * (a * b - 1.0);
}

// Declarative description of one separable source term (f as a function of v,
// or g as a function of u). Hypothesis checking is decidable on this shape;
// empirical liminf scans may feed it but stay labeled empirical.
struct SourceShape {
    bool separable = false;   // depends only on the other unknown
    bool continuous = true;   // on [0, infinity)
    bool positive = false;    // > 0 on [0, infinity) (liminf at 0 may be +infinity)
    bool positive_away_from_zeros = true;
    std::vector<double> zeros;       // known zero set in [0, infinity)
    bool zeros_periodic = false;     // zeros form zeros[0] + period * Z
    double zero_period = 0.0;
    std::optional<double> growth_exponent;  // liminf_{t->0} f(z+t)/t^alpha > 0 at the zero
    // Lower bound for the source once the other unknown is >= its forced
    // infimum (e.g. v^delta + h >= 1 once v >= 1).
    std::optional<double> positive_floor_after_shift;
};

struct SystemShape {
    double Q = 0, p = 0, q = 0;
    SourceShape f;  // source of the p-equation, as a function of v
    SourceShape g;  // source of the q-equation, as a function of u
};

// Applies the strongest matching nonexistence route to a declared system
// shape. Only the single-isolated-zero (or periodic-lattice) translation
// pattern is automated; anything else is reported out of pattern.
inline LiouvilleVerdict classify_system(const SystemShape& shape) {
    const double Q = shape.Q, p = shape.p, q = shape.q;
    if (!(p > 1.0) || !(q > 1.0)) throw ConfigError("classify_system: p, q must be > 1");
    if (!(Q >= 1.0)) throw ConfigError("classify_system: Q must be >= 1");

    LiouvilleVerdict v;
    v.Q = Q;
    v.p = p;
    v.q = q;

    if (p >= Q || q >= Q) {
        v.route = LiouvilleRoute::parabolic_constancy;
        v.condition_holds = true;
        v.claim = "every nonnegative supersolution component with exponent >= Q is constant";
        if (p >= Q) v.notes.push_back("p >= Q forces u constant");
        if (q >= Q) v.notes.push_back("q >= Q forces v constant");
        return v;
    }

    const auto positive_source = [&](const SourceShape& s) {
        return s.separable && s.continuous && s.positive && s.zeros.empty();
    };
    if (positive_source(shape.f) || positive_source(shape.g)) {
        v.route = LiouvilleRoute::positive_source;
        v.condition_holds = true;
        v.claim = "no weak solutions";
        v.notes.push_back(positive_source(shape.f)
                              ? "source of the p-equation is strictly positive"
                              : "source of the q-equation is strictly positive");
        return v;
    }

    // Single isolated zero on one side plus a positive floor on the other:
    // the infimum of the coupled unknown is forced onto the zero, and the
    // shifted system has a strictly positive source.
    const auto shifted_positive = [&](const SourceShape& zero_side, const SourceShape& floor_side,
                                      const char* note) -> bool {
        if (!(zero_side.separable && zero_side.continuous && zero_side.zeros.size() == 1 &&
              !zero_side.zeros_periodic))
            return false;
        if (!floor_side.positive_floor_after_shift ||
            !(*floor_side.positive_floor_after_shift > 0.0))
            return false;
        v.route = LiouvilleRoute::translated_positive_source;
        v.condition_holds = true;
        v.claim = "no weak solutions";
        v.notes.push_back(note);
        v.notes.push_back("infimum forced to the isolated zero; shifted source has a positive floor");
        return true;
    };
    if (shifted_positive(shape.f, shape.g,
                         "zero of the p-equation source pins ess inf v; shifted q-equation source "
                         "is uniformly positive"))
        return v;
    if (shifted_positive(shape.g, shape.f,
                         "zero of the q-equation source pins ess inf u; shifted p-equation source "
                         "is uniformly positive"))
        return v;

    const auto translatable = [](const SourceShape& s) {
        return s.separable && s.continuous && s.positive_away_from_zeros &&
               (s.zeros.size() == 1 || (s.zeros_periodic && s.zero_period > 0.0));
    };
    if (translatable(shape.f) && translatable(shape.g)) {
        const bool zeros_at_origin_only = shape.f.zeros == std::vector<double>{0.0} &&
                                          shape.g.zeros == std::vector<double>{0.0} &&
                                          !shape.f.zeros_periodic && !shape.g.zeros_periodic;
        std::vector<std::string> missing;
        if (!shape.f.growth_exponent) missing.push_back("growth exponent of the p-equation source");
        if (!shape.g.growth_exponent) missing.push_back("growth exponent of the q-equation source");
        if (!missing.empty()) {
            if (zeros_at_origin_only) {
                v.route = LiouvilleRoute::liminf_constraint;
                v.claim =
                    "any weak solution has both essential infima zero; growth exponents are "
                    "needed to decide nonexistence";
            } else {
                v.route = LiouvilleRoute::inconclusive;
                v.claim = "incomplete description";
            }
            for (const auto& m : missing) v.notes.push_back("missing: " + m);
            return v;
        }
        const double a = *shape.f.growth_exponent;
        const double b = *shape.g.growth_exponent;
        LiouvilleVerdict cond = hyp_condition(Q, p, q, a, b);
        cond.notes = v.notes;
        if (cond.condition_holds) {
            cond.route = LiouvilleRoute::exponent_condition;
            cond.claim = zeros_at_origin_only ? "no weak solutions"
                                              : "no nonconstant weak solutions";
            cond.notes.push_back(
                "infima are forced onto the zero sets; after translation both infima vanish and "
                "the exponent condition applies");
        } else {
            cond.route = LiouvilleRoute::inconclusive;
            cond.claim = "exponent condition fails; try the counterexample search";
        }
        return cond;
    }

    // Partial information: a separable continuous source still pins the
    // infimum of the coupled unknown to its zero set.
    if (shape.f.separable && shape.f.continuous) {
        v.route = LiouvilleRoute::infimum_is_zero_of_source;
        v.condition_holds = false;
        v.claim = "ess inf v must be a zero of the p-equation source; nonexistence undecided";
        return v;
    }
    if (shape.g.separable && shape.g.continuous) {
        v.route = LiouvilleRoute::infimum_is_zero_of_source;
        v.condition_holds = false;
        v.claim = "ess inf u must be a zero of the q-equation source; nonexistence undecided";
        return v;
    }

    v.route = LiouvilleRoute::inconclusive;
    v.claim = "out of pattern";
    v.notes.push_back("missing: separable source with declared positivity or zero structure");
    return v;
}

}  // namespace clv
