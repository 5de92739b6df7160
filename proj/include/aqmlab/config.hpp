#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "aqmlab/topology.hpp"

namespace aqmlab {

// Sectioned key-value config text:
//   [scenario]   duration_s seed packet_size_bytes buffer_bytes
//   [bottleneck] rate_mbps delay_ms aqm
//   [flows]      count stagger_ms
//   [aqm.red]    w_q max_p min_th max_th
//   [aqm.rem]    gamma phi alpha target_backlog update_period_s
//   [aqm.sfq]    n_buckets perturb_period_s
// Unknown sections or keys are rejected; omitted keys keep the defaults.

class ConfigError : public std::runtime_error {
  public:
    ConfigError(int line_no, const std::string& what)
        : std::runtime_error("config line " + std::to_string(line_no) + ": " + what),
          line_no_(line_no) {}
    int line_no() const { return line_no_; }

  private:
    int line_no_;
};

ScenarioConfig parse_config_text(std::string_view text);
ScenarioConfig load_config_file(const std::string& path);

// Canonical text for a config; dump(parse(dump(c))) == dump(c).
std::string dump_config(const ScenarioConfig& config);

} // namespace aqmlab
