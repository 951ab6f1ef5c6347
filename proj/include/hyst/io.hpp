#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hyst/model.hpp"

namespace hyst {

// Text form of a model. parse(serialize(m)) is structurally equal to m and
// serialize is a fixed point on its own output.
std::string serialize_model(const Model& m);
Model parse_model(std::istream& in);
Model parse_model_string(const std::string& text);
Model load_model(const std::string& path);
void save_model(const Model& m, const std::string& path);

// Two-column CSV `u,w` holding samples of a nondecreasing curve; u strictly
// increasing. Returns the interpolating curve.
MonotoneCurve load_curve_csv(const std::string& path);

// Flat key = value document with [section] headers. Section names mirror
// subcommands; keys mirror flag names.
using ConfigSection = std::map<std::string, std::string>;
using Config = std::map<std::string, ConfigSection>;
Config parse_config(std::istream& in);
Config load_config(const std::string& path);

// 17 significant digits: value round-trips exactly.
std::string fmt17(double v);
// 6 significant digits: human summaries.
std::string fmt6(double v);

// Writes rows of preformatted cells under a header line.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace hyst
