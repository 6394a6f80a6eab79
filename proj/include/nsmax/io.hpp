#pragma once

#include <array>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsmax/core_types.hpp"

namespace nsmax::io {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr const char* kMissingSentinel = "NA";

struct LonLat {
    double lon;
    double lat;
};

// Local equirectangular projection about `reference`, output in km.
std::vector<std::array<double, 2>> project_coordinates(std::span<const LonLat> points, LonLat reference);

struct SiteRecord {
    std::string id;
    LonLat position;
    double altitude_km;
};

// Reads `site_id,lon,lat,alt_m`; altitude converted to km.
std::vector<SiteRecord> read_site_metadata(const std::filesystem::path& path);

// Projects about the lon/lat centroid; covariate = altitude in km.
SiteSet sites_from_records(std::span<const SiteRecord> records);

// Reads the panel and metadata CSVs. Rows sorted by year, columns by site id
// (numerically when every id is an integer). Margin state is Raw.
std::pair<SiteSet, BlockMaximaPanel> load_panel(const std::filesystem::path& panel_csv,
                                                const std::filesystem::path& site_meta_csv);

// Reads only the panel CSV; returns the column ids in file order.
BlockMaximaPanel read_panel_csv(const std::filesystem::path& panel_csv, std::vector<std::string>& ids,
                                MarginState state = MarginState::Raw);

// Writes `year,<ids...>` with shortest round-trip formatting and `NA` for missing cells.
void write_panel_csv(std::ostream& os, const BlockMaximaPanel& panel, std::span<const std::string> ids);

std::string format_double(double v);

}  // namespace nsmax::io
