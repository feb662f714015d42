#pragma once

// CSV and JSON emission of run records.

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rimk/errors.hpp"
#include "rimk/harness/experiment.hpp"
#include "rimk/solver.hpp"

namespace rimk {

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_output_format(std::string_view name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw UsageError("unknown output format '" + std::string(name) + "'");
}

/// Measured writes wall-clock seconds; Zeroed writes 0 so output is byte-reproducible.
enum class Timing { Measured, Zeroed };

inline constexpr std::string_view kCsvHeader = "trial,iteration,rse,elapsed_seconds";

/// Shortest decimal string that parses back to the same double.
inline std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& out, const std::vector<RunRecord>& records, Timing timing = Timing::Measured) {
    out << kCsvHeader << '\n';
    for (std::size_t t = 0; t < records.size(); ++t) {
        const auto& r = records[t];
        for (std::size_t k = 0; k < r.rse.size(); ++k) {
            const double elapsed = timing == Timing::Measured ? r.elapsed_seconds[k] : 0.0;
            out << t << ',' << k << ',' << shortest(r.rse[k]) << ',' << shortest(elapsed) << '\n';
        }
    }
}

inline nlohmann::json config_to_json(const SolverConfig& c) {
    nlohmann::json j;
    j["memory"] = c.memory == kUnboundedMemory ? nlohmann::json("inf") : nlohmann::json(c.memory);
    j["block_size"] = c.block_size;
    j["sketch"] = std::string(to_string(c.sketch));
    j["tolerance"] = c.tolerance;
    j["max_iterations"] = c.max_iterations;
    j["seed"] = c.seed;
    return j;
}

inline nlohmann::json record_to_json(const RunRecord& r, std::size_t trial, Timing timing = Timing::Measured) {
    nlohmann::json j;
    j["trial"] = trial;
    j["seed"] = r.seed;
    j["solver"] = r.solver;
    j["termination"] = std::string(to_string(r.termination));
    j["iterations"] = r.iterations;
    j["restarts"] = r.restarts;
    j["final_residual"] = r.final_residual;
    j["flops"] = r.flops;
    j["rse"] = r.rse;
    j["elapsed_seconds"] = timing == Timing::Measured ? r.elapsed_seconds
                                                      : std::vector<double>(r.elapsed_seconds.size(), 0.0);
    j["config"] = config_to_json(r.config);
    return j;
}

inline nlohmann::json to_json(const std::vector<RunRecord>& records, Timing timing = Timing::Measured) {
    if (records.empty()) throw UsageError("emit: no records");
    nlohmann::json j;
    j["config"] = config_to_json(records.front().config);
    j["records"] = nlohmann::json::array();
    for (std::size_t t = 0; t < records.size(); ++t) j["records"].push_back(record_to_json(records[t], t, timing));
    const auto s = summarize(records);
    j["summary"] = {{"min", s.min}, {"q25", s.q25}, {"median", s.median}, {"q75", s.q75}, {"max", s.max},
                    {"median_iterations", median_iterations(records)}};
    return j;
}

inline void write(std::ostream& out, const std::vector<RunRecord>& records, OutputFormat format,
                  Timing timing = Timing::Measured) {
    if (records.empty()) throw UsageError("emit: no records");
    if (format == OutputFormat::Csv) {
        write_csv(out, records, timing);
    } else {
        out << to_json(records, timing).dump(2) << '\n';
    }
}

/// Writes records to path.
inline void emit(const std::vector<RunRecord>& records, OutputFormat format, const std::string& path,
                 Timing timing = Timing::Measured) {
    if (records.empty()) throw UsageError("emit: no records");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write(out, records, format, timing);
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace rimk
