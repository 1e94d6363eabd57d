#pragma once

#include <glamer/select.hpp>

#include <json.hpp>

#include <string>

namespace glamer {

using Json = nlohmann::ordered_json;

/// Partition model keyed by level names:
///   [{"name": ..., "kind": "categorical", "clusters": [{"levels": [...], "reference": true}, ...]},
///    {"name": ..., "kind": "continuous", "present": true}, ...]
Json partition_to_json(const Schema& schema, const PartitionModel& model);
PartitionModel partition_from_json(const Schema& schema, const Json& j);

/// Model file. `settings` carries the run configuration (lambda grid,
/// linkage, criterion, seed, ...) and is stored verbatim.
Json model_to_json(const GlamerFit& fit, const Json& settings);
GlamerFit model_from_json(const Json& j);

std::string save_model(const GlamerFit& fit, const Json& settings);
/// Throws DataError on a malformed model file.
GlamerFit load_model(const std::string& text);

} // namespace glamer
