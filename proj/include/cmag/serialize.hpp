#ifndef CMAG_SERIALIZE_HPP
#define CMAG_SERIALIZE_HPP

// Structured-text (JSON) forms of series, solutions, reports and field files.
// Doubles are written with round-trip precision; NaN and infinities become
// null and read back as NaN.

#include <json.hpp>

#include <cmag/cseries.hpp>
#include <cmag/fieldmodel.hpp>
#include <cmag/wkb.hpp>

namespace cmag
{

using json = nlohmann::json;

json to_json(cplx c);
cplx cplx_from_json(const json &j);

// {"cap", "center": [[re, im], [re, im]], "truncated", "terms": [[alpha, beta, re, im], ...]}
json to_json(const UniSeries &a);
json to_json(const BiSeries &a);
UniSeries uniseries_from_json(const json &j);
BiSeries biseries_from_json(const json &j);

json to_json(const WKBSolution &sol);
WKBSolution wkb_from_json(const json &j);
json to_json(const BoundFit &fit);
json to_json(const GammaReport &r);
json to_json(const ConditionVerdict &v);
json to_json(const TrendVerdict &v);
json to_json(const HypothesisReport &r);

// Field file: {"builtin": "oscillating" | "miller_simon" | "exponential" | "polynomial", ...}
// or {"A1": [[i, j, re, im], ...], "A2": [...], "name": ...} for polynomial potentials.
// Optional "gauge": [[i, j, re, im], ...] adds grad g to A. Throws ConfigError.
FieldPtr field_from_json(const json &j);
Poly2 poly_from_json(const json &j);

} // namespace cmag

#endif
