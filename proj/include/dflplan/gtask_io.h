#ifndef DFLPLAN_GTASK_IO_H
#define DFLPLAN_GTASK_IO_H

#include <string>

#include "dflplan/strips.h"

namespace dflplan {

// Grounded-task file format (.gtask, JSON):
//   {"propositions": ["name", ...],
//    "actions": [{"name": str, "pre": [int], "add": [int], "del": [int]}, ...],
//    "init": [int], "goal": [int]}
// Action order in the file defines the fixed action ordering.

GroundedTask parse_gtask(const std::string& json_text);
GroundedTask load_gtask(const std::string& path);

std::string gtask_to_json(const GroundedTask& task);
void save_gtask(const GroundedTask& task, const std::string& path);

}  // namespace dflplan

#endif
