#pragma once

#include <string>
#include <vector>

namespace pricelab {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int jobs);
int cmd_audit(const std::string& config_path, const std::string& kind,
              const std::string& out_dir);
int cmd_plot_data(const std::string& in_path, const std::string& out_path);

// full argv-style dispatch (args exclude the program name);
// returns the process exit status: 0 ok, 1 runtime failure, 2 config error
int cli_main(const std::vector<std::string>& args);

}  // namespace pricelab
