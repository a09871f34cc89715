#include "irdrop/irfm.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "irdrop/errors.hpp"

namespace irdrop {

namespace {

constexpr char kMagic[4] = {'I', 'R', 'F', 'M'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

void write_irfm(const MapStack& stack, const std::string& path) {
    stack.check_aligned();
    if (stack.c() == 0) throw ShapeError("write_irfm: empty stack");

    std::string out;
    out.append(kMagic, 4);
    put_u16(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(stack.c()));
    put_u32(out, static_cast<std::uint32_t>(stack.h()));
    put_u32(out, static_cast<std::uint32_t>(stack.w()));
    put_u32(out, static_cast<std::uint32_t>(stack.cell_nm()));
    for (const FeatureMap& ch : stack.channels)
        out.push_back(static_cast<char>(ch.unit));
    for (const FeatureMap& ch : stack.channels) {
        const std::size_t off = out.size();
        out.resize(off + ch.data.size() * 4);
        float* dst = reinterpret_cast<float*>(out.data() + off);
        for (std::size_t i = 0; i < ch.data.size(); ++i)
            dst[i] = static_cast<float>(ch.data[i]);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write: " + path);
}

MapStack read_irfm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    const std::string buf = ss.str();

    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (pos + n > buf.size()) throw IoError("irfm file truncated: " + path);
    };
    auto u16 = [&] {
        need(2);
        std::uint16_t v = static_cast<std::uint8_t>(buf[pos]) |
                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[pos + 1])) << 8);
        pos += 2;
        return v;
    };
    auto u32 = [&] {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    };

    need(4);
    if (std::memcmp(buf.data(), kMagic, 4) != 0) throw IoError("bad irfm magic: " + path);
    pos += 4;
    if (u16() != kVersion) throw IoError("unsupported irfm version: " + path);
    const std::uint32_t c = u32(), h = u32(), w = u32(), cell = u32();
    if (c == 0 || h == 0 || w == 0 || cell == 0) throw IoError("bad irfm header: " + path);

    MapStack stack;
    stack.channels.resize(c);
    need(c);
    for (std::uint32_t i = 0; i < c; ++i) {
        const std::uint8_t tag = static_cast<std::uint8_t>(buf[pos + i]);
        if (tag > static_cast<std::uint8_t>(Unit::OhmsPerCell))
            throw IoError("bad unit tag in irfm: " + path);
        stack.channels[i].unit = static_cast<Unit>(tag);
    }
    pos += c;

    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::uint32_t i = 0; i < c; ++i) {
        FeatureMap& ch = stack.channels[i];
        ch.h = static_cast<int>(h);
        ch.w = static_cast<int>(w);
        ch.cell_nm = static_cast<int>(cell);
        ch.data.resize(plane);
        need(plane * 4);
        const float* src = reinterpret_cast<const float*>(buf.data() + pos);
        for (std::size_t j = 0; j < plane; ++j) ch.data[j] = src[j];
        pos += plane * 4;
    }
    if (pos != buf.size()) throw IoError("trailing bytes in irfm: " + path);
    return stack;
}

void write_csv(const FeatureMap& map, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    char buf[32];
    for (int r = 0; r < map.h; ++r) {
        for (int c = 0; c < map.w; ++c) {
            // Values are stored as f32 in IRFM; format that exact value.
            const float v = static_cast<float>(map.at(r, c));
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
            (void)ec;
            f.write(buf, ptr - buf);
            if (c + 1 < map.w) f.put(',');
        }
        f.put('\n');
    }
    if (!f) throw IoError("short write: " + path);
}

FeatureMap read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    FeatureMap map;
    std::string line;
    std::vector<double> values;
    int w = -1;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        int cols = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            const char* comma = static_cast<const char*>(std::memchr(p, ',', end - p));
            const char* stop = comma ? comma : end;
            float v = 0.0f;
            auto [ptr, ec] = std::from_chars(p, stop, v);
            if (ec != std::errc{} || ptr != stop)
                throw IoError("bad csv value in " + path);
            values.push_back(v);
            ++cols;
            p = comma ? comma + 1 : end;
        }
        if (w < 0)
            w = cols;
        else if (cols != w)
            throw IoError("ragged csv rows in " + path);
        ++map.h;
    }
    if (map.h == 0 || w <= 0) throw IoError("empty csv: " + path);
    map.w = w;
    map.data = std::move(values);
    return map;
}

}  // namespace irdrop
