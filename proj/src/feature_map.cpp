#include "irdrop/feature_map.hpp"

#include <algorithm>

#include "irdrop/errors.hpp"

namespace irdrop {

const char* unit_name(Unit u) {
    switch (u) {
        case Unit::Amps: return "A";
        case Unit::Micrometers: return "um";
        case Unit::PerMicrometer: return "1/um";
        case Unit::Ohms: return "ohm";
        case Unit::Volts: return "V";
        case Unit::Count: return "count";
        case Unit::OhmsPerCell: return "ohm/cell";
    }
    return "?";
}

GridSpec GridSpec::from_extent(Extent extent, int cell_nm) {
    if (cell_nm <= 0) throw ShapeError("cell size must be positive");
    if (extent.x_nm < 0 || extent.y_nm < 0) throw ShapeError("extent must be nonnegative");
    GridSpec g;
    g.cell_nm = cell_nm;
    g.w = static_cast<int>(std::max<std::int64_t>(1, (extent.x_nm + cell_nm - 1) / cell_nm));
    g.h = static_cast<int>(std::max<std::int64_t>(1, (extent.y_nm + cell_nm - 1) / cell_nm));
    return g;
}

int GridSpec::row_of(std::int64_t y_nm) const {
    return static_cast<int>(std::min<std::int64_t>(y_nm / cell_nm, h - 1));
}

int GridSpec::col_of(std::int64_t x_nm) const {
    return static_cast<int>(std::min<std::int64_t>(x_nm / cell_nm, w - 1));
}

FeatureMap FeatureMap::zeros(const GridSpec& grid, Unit unit) {
    FeatureMap m;
    m.h = grid.h;
    m.w = grid.w;
    m.cell_nm = grid.cell_nm;
    m.unit = unit;
    m.data.assign(static_cast<std::size_t>(grid.h) * grid.w, 0.0);
    return m;
}

void MapStack::check_aligned() const {
    for (const FeatureMap& ch : channels) {
        if (ch.h != h() || ch.w != w() || ch.cell_nm != cell_nm())
            throw ShapeError("map stack channels are not aligned");
    }
}

}  // namespace irdrop
