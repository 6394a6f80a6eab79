#include "nsmax/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "nsmax/errors.hpp"

namespace nsmax::io {

namespace {

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || b == e) return std::nullopt;
    return v;
}

std::optional<long> parse_long(const std::string& s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IngestError("cannot open " + p.string());
    return in;
}

bool all_integer(const std::vector<std::string>& ids) {
    return std::all_of(ids.begin(), ids.end(), [](const auto& s) { return parse_long(s).has_value(); });
}

}  // namespace

std::vector<std::array<double, 2>> project_coordinates(std::span<const LonLat> points, LonLat reference) {
    if (!(std::abs(reference.lat) <= 89.0))
        throw ProjectionError("reference latitude too close to a pole: " + std::to_string(reference.lat));
    const double coslat = std::cos(deg2rad(reference.lat));
    std::vector<std::array<double, 2>> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (!(p.lat > -90.0 && p.lat < 90.0))
            throw ProjectionError("latitude outside (-90, 90): " + std::to_string(p.lat));
        out.push_back({kEarthRadiusKm * coslat * deg2rad(p.lon - reference.lon),
                       kEarthRadiusKm * deg2rad(p.lat - reference.lat)});
    }
    return out;
}

std::vector<SiteRecord> read_site_metadata(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw IngestError("empty site metadata file " + path.string(), 1);
    ++lineno;
    const auto header = split_csv(line);
    if (header != std::vector<std::string>{"site_id", "lon", "lat", "alt_m"})
        throw IngestError("site metadata header must be 'site_id,lon,lat,alt_m'", lineno);
    std::vector<SiteRecord> out;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4) throw IngestError("expected 4 fields", lineno);
        const auto lon = parse_double(f[1]);
        const auto lat = parse_double(f[2]);
        const auto alt = parse_double(f[3]);
        if (f[0].empty() || !lon || !lat || !alt) throw IngestError("malformed site record", lineno);
        if (!ids.insert(f[0]).second) throw IngestError("duplicate site id '" + f[0] + "'", lineno);
        out.push_back({f[0], {*lon, *lat}, *alt / 1000.0});
    }
    if (out.empty()) throw IngestError("no site records in " + path.string());
    return out;
}

SiteSet sites_from_records(std::span<const SiteRecord> records) {
    LonLat centroid{0.0, 0.0};
    std::vector<LonLat> pts;
    for (const auto& r : records) {
        centroid.lon += r.position.lon;
        centroid.lat += r.position.lat;
        pts.push_back(r.position);
    }
    centroid.lon /= static_cast<double>(records.size());
    centroid.lat /= static_cast<double>(records.size());

    std::set<std::pair<double, double>> seen;
    for (const auto& r : records) {
        if (!seen.insert({r.position.lon, r.position.lat}).second)
            throw ValidationError("duplicate site coordinates for site " + r.id);
    }
    const auto xy = project_coordinates(pts, centroid);
    std::vector<std::vector<double>> coords, covs;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < records.size(); ++i) {
        coords.push_back({xy[i][0], xy[i][1]});
        covs.push_back({records[i].altitude_km});
        ids.push_back(records[i].id);
    }
    return SiteSet(std::move(coords), std::move(covs), std::move(ids));
}

BlockMaximaPanel read_panel_csv(const std::filesystem::path& panel_csv, std::vector<std::string>& ids,
                                MarginState state) {
    auto in = open_or_throw(panel_csv);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw IngestError("empty panel file " + panel_csv.string(), 1);
    ++lineno;
    auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "year")
        throw IngestError("panel header must be 'year,<site_id_1>,...'", lineno);
    ids.assign(header.begin() + 1, header.end());
    if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size())
        throw IngestError("duplicate site column in panel header", lineno);

    struct Row {
        long year;
        std::vector<double> v;
        std::vector<bool> miss;
    };
    std::vector<Row> rows;
    std::set<long> years;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size())
            throw IngestError("expected " + std::to_string(header.size()) + " fields, got " +
                                  std::to_string(f.size()),
                              lineno);
        const auto year = parse_long(f[0]);
        if (!year) throw IngestError("malformed year '" + f[0] + "'", lineno);
        if (!years.insert(*year).second) throw IngestError("duplicate year " + f[0], lineno);
        Row r{*year, {}, {}};
        for (std::size_t c = 1; c < f.size(); ++c) {
            if (f[c] == kMissingSentinel) {
                r.v.push_back(0.0);
                r.miss.push_back(true);
                continue;
            }
            const auto v = parse_double(f[c]);
            if (!v || !std::isfinite(*v)) throw IngestError("non-numeric cell '" + f[c] + "'", lineno);
            r.v.push_back(*v);
            r.miss.push_back(false);
        }
        rows.push_back(std::move(r));
    }
    if (rows.size() < 2) throw IngestError("panel needs at least two year rows");
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.year < b.year; });

    const auto n = static_cast<long>(rows.size());
    const auto k = static_cast<long>(ids.size());
    Eigen::MatrixXd vals(n, k);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> miss(n, k);
    std::vector<long> ylabels;
    for (long m = 0; m < n; ++m) {
        ylabels.push_back(rows[m].year);
        for (long c = 0; c < k; ++c) {
            vals(m, c) = rows[m].v[c];
            miss(m, c) = rows[m].miss[c];
        }
    }
    try {
        return BlockMaximaPanel(std::move(vals), state, std::move(miss), std::move(ylabels));
    } catch (const ValidationError& e) {
        throw IngestError(e.what());
    }
}

std::pair<SiteSet, BlockMaximaPanel> load_panel(const std::filesystem::path& panel_csv,
                                                const std::filesystem::path& site_meta_csv) {
    std::vector<std::string> ids;
    auto panel = read_panel_csv(panel_csv, ids);
    const auto records = read_site_metadata(site_meta_csv);
    std::map<std::string, const SiteRecord*> by_id;
    for (const auto& r : records) by_id[r.id] = &r;

    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (all_integer(ids)) {
        std::sort(order.begin(), order.end(),
                  [&](auto a, auto b) { return *parse_long(ids[a]) < *parse_long(ids[b]); });
    } else {
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
    }

    std::vector<SiteRecord> used;
    for (std::size_t c : order) {
        auto it = by_id.find(ids[c]);
        if (it == by_id.end()) throw IngestError("panel column '" + ids[c] + "' has no site metadata");
        used.push_back(*it->second);
    }
    return {sites_from_records(used), panel.permuted_sites(order)};
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_panel_csv(std::ostream& os, const BlockMaximaPanel& panel, std::span<const std::string> ids) {
    if (ids.size() != panel.n_sites()) throw ValidationError("id count does not match panel columns");
    os << "year";
    for (const auto& id : ids) os << ',' << id;
    os << '\n';
    for (std::size_t m = 0; m < panel.n_blocks(); ++m) {
        os << panel.years()[m];
        for (std::size_t i = 0; i < panel.n_sites(); ++i) {
            os << ',';
            if (panel.missing(m, i))
                os << kMissingSentinel;
            else
                os << format_double(panel.value(m, i));
        }
        os << '\n';
    }
}

}  // namespace nsmax::io
