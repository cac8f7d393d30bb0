#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tldram/errors.hpp"
#include "tldram/simulator.hpp"

namespace {

std::vector<uint32_t> parse_csv_list(const std::string& s) {
    std::vector<uint32_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(static_cast<uint32_t>(std::stoul(item)));
    }
    return out;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw tldram::ConfigError("cannot open output file: " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tldram-sim: trace-driven simulator for segmented-bitline DRAM"};
    app.require_subcommand(1);

    std::string config_path, config_b_path, trace_path, out_path;
    std::string near_sizes_csv, cells_csv;

    auto* run_cmd = app.add_subcommand("run", "simulate one configuration");
    run_cmd->add_option("--config", config_path, "config file")->required();
    run_cmd->add_option("--trace", trace_path, "trace file (overrides config)");
    run_cmd->add_option("--out", out_path, "report output file (default stdout)");

    auto* sweep_cmd = app.add_subcommand("sweep", "sweep the near-segment size");
    sweep_cmd->add_option("--config", config_path, "config file")->required();
    sweep_cmd->add_option("--near-sizes", near_sizes_csv, "comma-separated near sizes")->required();
    sweep_cmd->add_option("--out", out_path, "CSV output file (default stdout)");

    auto* compare_cmd = app.add_subcommand("compare", "compare two configurations (a = baseline)");
    compare_cmd->add_option("--a", config_path, "baseline config file")->required();
    compare_cmd->add_option("--b", config_b_path, "candidate config file")->required();
    compare_cmd->add_option("--out", out_path, "report output file (default stdout)");

    auto* tradeoff_cmd = app.add_subcommand("tradeoff", "bitline length latency/die-size table");
    tradeoff_cmd->add_option("--cells", cells_csv, "comma-separated cells-per-bitline list")
        ->required();
    tradeoff_cmd->add_option("--out", out_path, "CSV output file (default stdout)");

    auto* profile_cmd = app.add_subcommand("profile", "emit per-row access counts for a config");
    profile_cmd->add_option("--config", config_path, "config file")->required();
    profile_cmd->add_option("--out", out_path, "profile output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            tldram::RunConfig cfg = tldram::RunConfig::load_file(config_path);
            if (!trace_path.empty()) {
                cfg.trace_kind = tldram::TraceKind::FILE;
                cfg.trace_file = trace_path;
            }
            write_output(out_path, tldram::run(cfg).report.body());
        } else if (sweep_cmd->parsed()) {
            tldram::RunConfig cfg = tldram::RunConfig::load_file(config_path);
            auto rows = tldram::sweep_near_size(cfg, parse_csv_list(near_sizes_csv));
            write_output(out_path, tldram::sweep_csv(rows));
        } else if (compare_cmd->parsed()) {
            tldram::RunConfig a = tldram::RunConfig::load_file(config_path);
            tldram::RunConfig b = tldram::RunConfig::load_file(config_b_path);
            write_output(out_path, tldram::compare(a, b).body());
        } else if (tradeoff_cmd->parsed()) {
            write_output(out_path, tldram::tradeoff_csv(parse_csv_list(cells_csv)));
        } else if (profile_cmd->parsed()) {
            tldram::RunConfig cfg = tldram::RunConfig::load_file(config_path);
            std::ostringstream out;
            tldram::write_profile(out, tldram::profile_counts(cfg));
            write_output(out_path, out.str());
        }
    } catch (const tldram::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const tldram::WorkloadError& e) {
        std::cerr << "workload error: " << e.what() << '\n';
        return 1;
    } catch (const tldram::ProtocolError& e) {
        std::cerr << "internal protocol error: " << e.what() << '\n';
        return 2;
    } catch (const tldram::InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
