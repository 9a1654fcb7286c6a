#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace pvlab::cli {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    std::optional<double> epsilon;
    bool geometry = false;  ///< exact2d: dump the cells of the first realization
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSelftest = 3;

int simulate(const CommonFlags& flags);
int variance_sweep(const CommonFlags& flags);
int clt_test(const CommonFlags& flags);
int kernel_scan(const CommonFlags& flags);
int f2_probe(const CommonFlags& flags);
int exact2d(const CommonFlags& flags);
int small_body(const CommonFlags& flags);
int selftest(const CommonFlags& flags);

}  // namespace pvlab::cli
