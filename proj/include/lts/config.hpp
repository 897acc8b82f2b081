#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

// Run configuration: every tunable with its default, a flat key=value config
// file loader, and the run.log writer that records the resolved settings.

namespace lts::config {

struct DidlConfig {
    double lr = 0.0001;
    int batch = 3000;
    int first_epochs = 120;
    int later_epochs = 30;
    int iterations = 4;
    double init_fraction = 0.1;
};

struct SbrConfig {
    double lr = 0.00001;
    double weight_bg = 0.2;
    double weight_fg = 0.8;
    std::array<int, 3> batches{512, 2048, 8192};  // for scales 64, 32, 16
    std::array<int, 3> scales{16, 32, 64};
    int l = 32;
    int epochs = 30;
};

struct RunConfig {
    int bins = 201;       // structural, not settable
    double delta = 0.01;  // structural, not settable
    double tau = 0.7;
    DidlConfig didl;
    SbrConfig sbr;
    double threshold = 0.5;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string precision = "f32";
};

using KeyValues = std::map<std::string, std::string>;

// Flat key=value lines; '#' starts a comment; blank lines ignored.
KeyValues parse_config_file(const std::string& path);

// Applies recognized keys onto the config. Unknown keys or unparsable values
// throw std::invalid_argument.
void apply(RunConfig& cfg, const KeyValues& kv);

// Range checks; throws std::invalid_argument with a one-line message.
void validate(const RunConfig& cfg);

std::string render_run_log(const RunConfig& cfg, const std::string& command);
void write_run_log(const RunConfig& cfg, const std::string& command,
                   const std::string& path = "run.log");

}  // namespace lts::config
