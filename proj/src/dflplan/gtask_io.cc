#include "dflplan/gtask_io.h"

#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "dflplan/common.h"

using nlohmann::json;

namespace dflplan {

namespace {

const json& require_field(const json& obj, const std::string& key,
                          const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw TaskFormatError(where + ": missing field \"" + key + "\"");
    }
    return *it;
}

std::vector<int> parse_id_array(const json& arr, const std::string& where) {
    if (!arr.is_array()) {
        throw TaskFormatError(where + ": expected an array of proposition ids");
    }
    std::vector<int> ids;
    ids.reserve(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) {
        const json& elem = arr[i];
        if (!elem.is_number_integer()) {
            throw TaskFormatError(where + "[" + std::to_string(i) +
                                  "]: expected an integer proposition id");
        }
        ids.push_back(elem.get<int>());
    }
    return ids;
}

}  // namespace

GroundedTask parse_gtask(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw TaskFormatError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw TaskFormatError("top level: expected a JSON object");
    }

    const json& props = require_field(doc, "propositions", "top level");
    if (!props.is_array()) {
        throw TaskFormatError("propositions: expected an array of strings");
    }
    std::vector<std::string> prop_names;
    prop_names.reserve(props.size());
    for (size_t i = 0; i < props.size(); ++i) {
        if (!props[i].is_string()) {
            throw TaskFormatError("propositions[" + std::to_string(i) +
                                  "]: expected a string");
        }
        prop_names.push_back(props[i].get<std::string>());
    }

    const json& actions = require_field(doc, "actions", "top level");
    if (!actions.is_array()) {
        throw TaskFormatError("actions: expected an array of objects");
    }
    std::vector<ActionSpec> specs;
    specs.reserve(actions.size());
    for (size_t i = 0; i < actions.size(); ++i) {
        const std::string where = "actions[" + std::to_string(i) + "]";
        const json& act = actions[i];
        if (!act.is_object()) {
            throw TaskFormatError(where + ": expected an object");
        }
        const json& name = require_field(act, "name", where);
        if (!name.is_string()) {
            throw TaskFormatError(where + ".name: expected a string");
        }
        ActionSpec spec;
        spec.name = name.get<std::string>();
        spec.pre = parse_id_array(require_field(act, "pre", where), where + ".pre");
        spec.add = parse_id_array(require_field(act, "add", where), where + ".add");
        spec.del = parse_id_array(require_field(act, "del", where), where + ".del");
        specs.push_back(std::move(spec));
    }

    std::vector<int> init =
        parse_id_array(require_field(doc, "init", "top level"), "init");
    std::vector<int> goal =
        parse_id_array(require_field(doc, "goal", "top level"), "goal");

    return make_task(prop_names, specs, init, goal);
}

GroundedTask load_gtask(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw TaskFormatError("cannot open task file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_gtask(buf.str());
}

std::string gtask_to_json(const GroundedTask& task) {
    json doc;
    doc["propositions"] = json::array();
    for (const Proposition& p : task.propositions) {
        doc["propositions"].push_back(p.name);
    }
    doc["actions"] = json::array();
    for (const GroundedAction& a : task.actions) {
        json act;
        act["name"] = a.name;
        act["pre"] = a.pre;
        act["add"] = a.add;
        act["del"] = a.del;
        doc["actions"].push_back(std::move(act));
    }
    json init = json::array();
    for (int p = 0; p < task.num_propositions(); ++p) {
        if (task.init.test(p)) init.push_back(p);
    }
    doc["init"] = std::move(init);
    doc["goal"] = task.goal;
    return doc.dump(2);
}

void save_gtask(const GroundedTask& task, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw TaskFormatError("cannot open output file: " + path);
    }
    out << gtask_to_json(task) << "\n";
}

}  // namespace dflplan
