#pragma once

#include <json.hpp>

#include "corex/analysis.hpp"
#include "corex/geometry.hpp"
#include "corex/ilp.hpp"

namespace corex {

using nlohmann::json;

json to_json(const SignedConcept& c);
json to_json(const Literal& literal);
json to_json(const Clause& clause, std::size_t index, const std::string& class_name, const ConceptLabels& labels);
json to_json(const Theory& theory, const std::string& class_name, const ConceptLabels& labels = {});
json to_json(const ConstraintSet& constraints);
json to_json(const LearnConfig& cfg);
json to_json(const EvaluationReport& report);
json to_json(const ConceptPartition& partition);
json to_json(const ClusterMap& clusters);
json to_json(const RankReport& report);
json to_json(const ContrastiveReport& report);
json to_json(const ConceptRegion& region);
json to_json(const MaskSpec& spec);

/// Accepts {"predicate","subject","object"} objects or clause-body text such
/// as "right_of(A, pos(A,c30), pos(A,c9))".
Literal literal_from_json(const json& j);
Literal parse_literal_text(std::string_view text);

/// Relations may be given as "left_of", "contains/3" or a bare "contains"
/// (both arities).
ConstraintSet constraints_from_json(const json& j);
LearnConfig learn_config_from_json(const json& j, LearnConfig base = {});
MaskSpec mask_spec_from_json(const json& j);

/// Writes `j` as 2-space indented text with a trailing newline.
std::string dump(const json& j);

}  // namespace corex
