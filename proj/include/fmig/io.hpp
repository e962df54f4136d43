#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fmig/cotrain.hpp"
#include "fmig/distributions.hpp"
#include "fmig/mechanisms.hpp"
#include "fmig/mig.hpp"
#include "fmig/prioranalysis.hpp"
#include "fmig/psgain.hpp"

namespace fmig {

using json = nlohmann::json;

std::string version();

/// FNV-1a over the compact dump of the document, as 16 hex digits. Object
/// keys are sorted by the json type, so key order in the source is irrelevant.
std::string config_hash(const json& doc);

/// Throws std::invalid_argument naming the first key of `obj` not in `allowed`.
void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where);

json to_json(const Simplex& s);
json to_json(const Hypothesis& h);
json to_json(const TripletPrior& prior);
json to_json(const OptimizerConfig& cfg);
json to_json(const CotrainResult& r);
json to_json(const LikelihoodTable& v);
json to_json(const PsGainResult& r);
json to_json(const StabilityReport& r);
json to_json(const WellDefinedReport& r);
json to_json(const TruthfulnessReport& r);
json to_json(const FocalReport& r);

/// Strict parse: the required keys must be present and nothing else.
TripletPrior prior_from_json(const json& doc);
/// Missing keys keep their defaults; unknown keys are rejected.
OptimizerConfig optimizer_config_from_json(const json& doc);
Hypothesis hypothesis_from_json(const json& doc);

json read_json_file(const std::filesystem::path& path);
/// Pretty-printed, trailing newline.
void write_json_file(const std::filesystem::path& path, const json& doc);

TripletPrior read_prior_file(const std::filesystem::path& path);

/// Columns task_id,x_a,x_b; absent signals are empty fields. Lines starting
/// with '#' are comments.
SampleSet read_samples_csv(std::istream& in);
SampleSet read_samples_csv(const std::filesystem::path& path);
void write_samples_csv(std::ostream& out, const SampleSet& samples, const std::string& provenance);

/// "# fmig <version> config <hash>"
std::string provenance_line(const std::string& hash);

/// Shortest round-trip text for a double.
std::string format_double(double x);

}  // namespace fmig
