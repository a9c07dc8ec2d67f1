#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "xsched/engine.hpp"

namespace xsched::cli {

enum Exit { ok = 0, unsafe = 1, usage = 2 };

std::string csv_header();
// One summary row; counts and metrics come from the result itself.
std::string csv_row(const SimResult& res);

struct RunOptions {
    std::string config_path;  // empty means defaults
    std::optional<std::uint64_t> seed;
    std::string policy = "two_stage";
    std::string out_path = "-";
    std::string trajectories_path;  // piecewise dump, optional
};

struct SweepOptions {
    std::string config_path;
    // Comma-separated axis values; an unset axis keeps the base config value.
    std::optional<std::string> A, W, lambda_coop, lambda_noncoop;
    std::string policy = "two_stage";
    std::size_t replications = 1;
    std::uint64_t seed = 1;
    std::string out_path = "-";
    unsigned jobs = 0;  // 0 means hardware concurrency
};

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& suite, std::uint64_t seed, std::size_t n, std::ostream& out,
               std::ostream& err);

}  // namespace xsched::cli
