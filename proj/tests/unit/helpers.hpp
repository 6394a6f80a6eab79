#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "nsmax/core_types.hpp"
#include "nsmax/rng.hpp"

namespace testing {

inline std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto dir = std::filesystem::temp_directory_path() / "nsmax_tests";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p) << contents;
    return p;
}

inline nsmax::SiteSet random_sites(std::size_t k, std::uint64_t seed, double extent = 300.0) {
    nsmax::Engine rng(seed);
    std::uniform_real_distribution<double> xy(0.0, extent), alt(0.0, 1.5);
    std::vector<std::vector<double>> c(k), v(k);
    for (std::size_t i = 0; i < k; ++i) {
        c[i] = {xy(rng), xy(rng)};
        v[i] = {alt(rng)};
    }
    return nsmax::SiteSet(c, v);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
