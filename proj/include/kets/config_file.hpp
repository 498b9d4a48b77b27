#ifndef KETS_CONFIG_FILE_HPP
#define KETS_CONFIG_FILE_HPP

#include <string>

#include "kets/experiment.hpp"

namespace kets {

// Applies one `key = value` pair onto a config. Unknown keys and type
// mismatches raise ConfigError naming the key (and line, when nonzero).
void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      int line = 0);

// Flat key = value file, '#' comments, no sections. Every knob is optional;
// the result is validated before being returned.
ExperimentConfig parse_config(const std::string& path);

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

}  // namespace kets

#endif  // KETS_CONFIG_FILE_HPP
