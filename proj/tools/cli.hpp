// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef NLSWIPT_TOOLS_CLI_HPP
#define NLSWIPT_TOOLS_CLI_HPP

#include "nlswipt/channel_model.hpp"
#include "nlswipt/mc_oracle.hpp"
#include "nlswipt/optimizer.hpp"
#include "nlswipt/power_model.hpp"
#include "nlswipt/rp_sweep.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nlswipt::cli
{

enum ExitCode : int
{
    kOk = 0,
    kValidation = 1,
    kSolver = 2,
    kCheckFailed = 3,
};

struct KktSection
{
    std::string solution;            ///< path to a solution JSON
    std::optional<double> lambda1;   ///< estimated from the solution when absent
    std::optional<double> lambda2;
};

struct OracleCheckSection
{
    std::string input = "zero";      ///< zero | waterfill | wpt | file
    std::string solution;            ///< used when input = file
    std::uint64_t moment_samples = 0; ///< 0 skips the moment-identity report
    double z_threshold = 3.0;
};

struct GradcheckSection
{
    int cases = 20;
    double step = 1e-5;
    double rel_tol = 1e-6;
};

struct RunConfig
{
    std::optional<ChannelSpec> channel;
    DiodeModel diode;
    std::optional<double> p_a;
    std::optional<double> p_d;
    OptConfig optimizer;
    OracleConfig oracle;
    std::vector<Family> families{Family::ANG, Family::SNG, Family::ZG, Family::ZGL};
    SweepConfig sweep;
    std::vector<int> n_list;
    NSweepConfig n_sweep;
    std::vector<int> flat_wpt_n_list;
    KktSection kkt;
    OracleCheckSection oracle_check;
    GradcheckSection gradcheck;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;
};

/**
 * Parses YAML text after applying `section.key=value` overrides (values are parsed as YAML,
 * so lists work too). Unknown sections or keys throw InvalidArgument naming the key.
 */
RunConfig parse_config(const std::string &yaml_text, const std::vector<std::string> &overrides = {});

/// Full command line: subcommand, --config, --set, --output-dir, --seed, --threads.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace nlswipt::cli

#endif
