#ifndef DRMIL_RUN_IO_HPP
#define DRMIL_RUN_IO_HPP

#include <string>
#include <vector>

#include "drmil/driver.hpp"
#include "json.hpp"

namespace drmil {

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);
std::string source_name(QuerySource s);

// step,cumulative_queries,train_map,test_map with 7 significant digits.
void write_curve(const ALCurve& curve, const std::string& path);

// step,bag_id,instance_index,source,score,entropy.
void write_query_log(const std::vector<QueryLogRow>& log,
                     const std::string& path);

// epoch,drbl,bce,total.
void write_train_log(const std::vector<TrainLogRow>& log,
                     const std::string& path);

nlohmann::json config_to_json(const ALConfig& cfg);

void write_manifest(const nlohmann::json& manifest, const std::string& path);

}  // namespace drmil

#endif  // DRMIL_RUN_IO_HPP
