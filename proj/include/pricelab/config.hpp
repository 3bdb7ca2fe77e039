#pragma once

#include <stdexcept>
#include <string>

#include "pricelab/harness.hpp"

namespace pricelab {

// configuration problems exit the CLI with status 2
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name);
ExperimentConfig parse_config_file(const std::string& path);

// canonical serialization; parse_config_text(config_echo(c)) == c
std::string config_echo(const ExperimentConfig& config);

}  // namespace pricelab
