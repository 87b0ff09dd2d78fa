#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace kgconc::app {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_config = 2, exit_construction = 3, exit_assert = 4 };

struct OutputOptions {
    std::filesystem::path dir = ".";
    bool csv = true;
    bool json = true;
    bool assert_mode = false;  ///< report threshold failures through the exit status
};

const std::vector<std::string>& command_names();

/// Runs one subcommand, writes its artifacts and returns the exit status. Errors are reported on
/// `log`; thresholds are always evaluated and listed in the report.
int run_command(const std::string& name, const RunConfig& cfg, const OutputOptions& out, std::ostream& log);

/// Field export shared by `boost` (writer) and `verify` (reader): t,x,y,z,re_psi,im_psi,phi.
void write_field_csv(std::ostream& os, const FieldFrame& f);
FieldFrame read_field_csv(std::istream& is, int dim, const PhysParams& par);

}  // namespace kgconc::app
