#pragma once

#include <json.hpp>

#include "garnier/okamoto.hpp"
#include "garnier/polynomial.hpp"
#include "garnier/quantize.hpp"
#include "garnier/schlesinger.hpp"

namespace garnier::io {

using nlohmann::json;

/// Complex numbers are [re, im] pairs.
json cx_to_json(Cx z);
Cx cx_from_json(const json& j, const std::string& field);

json mat_to_json(const Mat2& m);
Mat2 mat_from_json(const json& j, const std::string& field);

json theta_go_to_json(const schlesinger::ThetaGO& th);
schlesinger::ThetaGO theta_go_from_json(const json& j);

json schlesinger_to_json(const schlesinger::SchlesingerState& s);
/// Rejects B states whose residues violate tr = 0 or det = -theta^2/4 beyond 1e-9.
schlesinger::SchlesingerState schlesinger_from_json(const json& j);

json go_to_json(const okamoto::GOState& g);

json theta_pg_to_json(const polynomial::ThetaPG& th);
/// thinf2 may be omitted and is then completed from the Fuchs relation;
/// otherwise violations above 1e-12 are rejected.
polynomial::ThetaPG theta_pg_from_json(const json& j);

json pg_to_json(const polynomial::PGState& s);
polynomial::PGState pg_from_json(const json& j);

json fd_to_json(const FDScheme& fd);
json report_to_json(const quantize::ResidualReport& r);

}  // namespace garnier::io
