#pragma once

#include "mrp/allocation.hpp"
#include "mrp/analysis.hpp"
#include "mrp/redundancy.hpp"

#include <string>

namespace mrp {

// Report documents are emitted through these fixed-layout writers so that a
// rerun with the same config and seed is byte-identical: keys appear in
// schema order and every float is printed with %.9g.

std::string format_g9(double v);
std::string json_escape(const std::string& s);

std::string plan_to_json(const SparsityPlan& plan);
std::string trace_to_json(const MrpTrace& trace, const SparsityPlan& final_plan);
std::string redundancy_to_json(const RedundancyProfile& profile);

// "block,<value_header>" followed by one row per block.
std::string profile_to_csv(const std::vector<double>& values, const std::string& value_header);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Writes plan.json, trace.json, lrl.csv, lps.csv, masks.bin and masks.json
// under out_dir. The model provides the masks.
void export_report(const BlockStack& model, const SparsityPlan& plan, const MrpTrace& trace,
                   const RedundancyProfile& lrl, const LpsProfile& lps,
                   const std::string& out_dir);

} // namespace mrp
