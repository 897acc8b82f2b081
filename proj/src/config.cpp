#include "lts/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lts::config {

KeyValues parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                     ": empty key");
        kv[key] = value;
    }
    return kv;
}

namespace {

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad value for " + key + ": " + v);
    return d;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad value for " + key + ": " + v);
    return i;
}

}  // namespace

void apply(RunConfig& cfg, const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "tau")
            cfg.tau = to_double(key, value);
        else if (key == "threshold")
            cfg.threshold = to_double(key, value);
        else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "threads")
            cfg.threads = static_cast<int>(to_int(key, value));
        else if (key == "precision")
            cfg.precision = value;
        else if (key == "didl.lr")
            cfg.didl.lr = to_double(key, value);
        else if (key == "didl.batch")
            cfg.didl.batch = static_cast<int>(to_int(key, value));
        else if (key == "didl.first_epochs")
            cfg.didl.first_epochs = static_cast<int>(to_int(key, value));
        else if (key == "didl.later_epochs")
            cfg.didl.later_epochs = static_cast<int>(to_int(key, value));
        else if (key == "didl.iterations")
            cfg.didl.iterations = static_cast<int>(to_int(key, value));
        else if (key == "didl.init_fraction")
            cfg.didl.init_fraction = to_double(key, value);
        else if (key == "sbr.lr")
            cfg.sbr.lr = to_double(key, value);
        else if (key == "sbr.weight_bg")
            cfg.sbr.weight_bg = to_double(key, value);
        else if (key == "sbr.weight_fg")
            cfg.sbr.weight_fg = to_double(key, value);
        else if (key == "sbr.l")
            cfg.sbr.l = static_cast<int>(to_int(key, value));
        else if (key == "sbr.epochs")
            cfg.sbr.epochs = static_cast<int>(to_int(key, value));
        else if (key == "sbr.batch64")
            cfg.sbr.batches[0] = static_cast<int>(to_int(key, value));
        else if (key == "sbr.batch32")
            cfg.sbr.batches[1] = static_cast<int>(to_int(key, value));
        else if (key == "sbr.batch16")
            cfg.sbr.batches[2] = static_cast<int>(to_int(key, value));
        else
            throw std::invalid_argument("unknown config key: " + key);
    }
}

void validate(const RunConfig& cfg) {
    if (cfg.tau < 0) throw std::invalid_argument("tau must be >= 0");
    if (cfg.threshold < 0 || cfg.threshold > 1)
        throw std::invalid_argument("threshold must be in [0,1]");
    if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (cfg.precision != "f32" && cfg.precision != "f64")
        throw std::invalid_argument("precision must be f32 or f64");
    if (cfg.didl.lr <= 0) throw std::invalid_argument("didl.lr must be > 0");
    if (cfg.didl.batch < 1) throw std::invalid_argument("didl.batch must be >= 1");
    if (cfg.didl.first_epochs < 0 || cfg.didl.later_epochs < 0)
        throw std::invalid_argument("epoch counts must be >= 0");
    if (cfg.didl.iterations < 1) throw std::invalid_argument("didl.iterations must be >= 1");
    if (cfg.didl.init_fraction <= 0 || cfg.didl.init_fraction > 1)
        throw std::invalid_argument("didl.init_fraction must be in (0,1]");
    if (cfg.sbr.lr <= 0) throw std::invalid_argument("sbr.lr must be > 0");
    if (cfg.sbr.weight_bg <= 0 || cfg.sbr.weight_fg <= 0)
        throw std::invalid_argument("class weights must be > 0");
    if (cfg.sbr.l < 0) throw std::invalid_argument("sbr.l must be >= 0");
    if (cfg.sbr.epochs < 0) throw std::invalid_argument("sbr.epochs must be >= 0");
    for (int b : cfg.sbr.batches)
        if (b < 1) throw std::invalid_argument("sbr batch sizes must be >= 1");
}

std::string render_run_log(const RunConfig& cfg, const std::string& command) {
    std::ostringstream os;
    os << "command=" << command << "\n";
    os << "bins=" << cfg.bins << "\n";
    os << "delta=" << cfg.delta << "\n";
    os << "tau=" << cfg.tau << "\n";
    os << "didl.lr=" << cfg.didl.lr << "\n";
    os << "didl.batch=" << cfg.didl.batch << "\n";
    os << "didl.first_epochs=" << cfg.didl.first_epochs << "\n";
    os << "didl.later_epochs=" << cfg.didl.later_epochs << "\n";
    os << "didl.iterations=" << cfg.didl.iterations << "\n";
    os << "didl.init_fraction=" << cfg.didl.init_fraction << "\n";
    os << "sbr.lr=" << cfg.sbr.lr << "\n";
    os << "sbr.weight_bg=" << cfg.sbr.weight_bg << "\n";
    os << "sbr.weight_fg=" << cfg.sbr.weight_fg << "\n";
    os << "sbr.batch64=" << cfg.sbr.batches[0] << "\n";
    os << "sbr.batch32=" << cfg.sbr.batches[1] << "\n";
    os << "sbr.batch16=" << cfg.sbr.batches[2] << "\n";
    os << "sbr.scales=16,32,64\n";
    os << "sbr.l=" << cfg.sbr.l << "\n";
    os << "sbr.epochs=" << cfg.sbr.epochs << "\n";
    os << "threshold=" << cfg.threshold << "\n";
    os << "seed=" << cfg.seed << "\n";
    os << "threads=" << cfg.threads << "\n";
    os << "precision=" << cfg.precision << "\n";
    return os.str();
}

void write_run_log(const RunConfig& cfg, const std::string& command, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write run log: " + path);
    out << render_run_log(cfg, command);
}

}  // namespace lts::config
