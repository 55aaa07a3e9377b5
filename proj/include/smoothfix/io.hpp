#ifndef SMOOTHFIX_IO_HPP
#define SMOOTHFIX_IO_HPP

#include <string>

#include <json.hpp>

#include "smoothfix/criteria.hpp"
#include "smoothfix/estimate.hpp"
#include "smoothfix/lst.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/montecarlo.hpp"
#include "smoothfix/pitmanyor.hpp"
#include "smoothfix/tails.hpp"

namespace smoothfix::io {

using nlohmann::json;

// model descriptions: {"kind": "...", parameters...}
models::WeightModel model_from_json(const json& j);
json model_to_json(const models::WeightModel& model);

pitmanyor::PitmanYorProblem problem_from_json(const json& j);

json estimate_to_json(const Estimate& e);
json criteria_report_to_json(const criteria::CriteriaReport& rep);
json tail_report_to_json(const tails::TailReport& rep);
json moment_report_to_json(const tails::MomentReport& rep);

json lst_to_json(const lst::LstGrid& g);

// bulk numeric data
void write_lst_csv(const lst::LstGrid& g, const std::string& path);
void write_loglog_csv(const lst::LstGrid& g, const std::string& path); // (s, 1 - phi) pairs
// samples go to a single-column CSV plus a .meta.json sidecar with the seed
// lineage and truncation diagnostics
void write_samples_csv(const mc::EmpiricalDist& dist, const std::string& path);
mc::EmpiricalDist read_samples_csv(const std::string& path);
void write_plateau_csv(const tails::TailReport& rep, const std::string& path);

std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& content);
json read_json_file(const std::string& path);

} // namespace smoothfix::io

#endif
