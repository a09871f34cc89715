#pragma once

#include <cstdint>
#include <vector>

namespace irdrop {

constexpr int kDefaultCellNm = 1000;  // 1 um x 1 um cells

enum class Unit : std::uint8_t {
    Amps = 0,
    Micrometers = 1,
    PerMicrometer = 2,
    Ohms = 3,
    Volts = 4,
    Count = 5,
    OhmsPerCell = 6,
};

const char* unit_name(Unit u);

// Die extent anchored at the origin (coordinates are nonnegative nm).
struct Extent {
    std::int64_t x_nm = 0;
    std::int64_t y_nm = 0;
};

// Grid geometry. Row r covers y in [r*cell, (r+1)*cell); points on the die's
// far boundary fall into the last row/column. Always at least 1x1.
struct GridSpec {
    int cell_nm = kDefaultCellNm;
    int h = 1;
    int w = 1;

    static GridSpec from_extent(Extent extent, int cell_nm);
    int row_of(std::int64_t y_nm) const;
    int col_of(std::int64_t x_nm) const;
};

struct FeatureMap {
    int h = 0;
    int w = 0;
    int cell_nm = kDefaultCellNm;
    Unit unit = Unit::Count;
    std::vector<double> data;  // row-major h*w

    static FeatureMap zeros(const GridSpec& grid, Unit unit);

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * w + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * w + c]; }
    std::size_t size() const { return data.size(); }
};

// Channels aligned cell-for-cell; all share h, w and cell size.
struct MapStack {
    std::vector<FeatureMap> channels;

    int c() const { return static_cast<int>(channels.size()); }
    int h() const { return channels.empty() ? 0 : channels.front().h; }
    int w() const { return channels.empty() ? 0 : channels.front().w; }
    int cell_nm() const { return channels.empty() ? kDefaultCellNm : channels.front().cell_nm; }

    // Throws ShapeError unless every channel shares h, w and cell size.
    void check_aligned() const;
};

}  // namespace irdrop
