#include "irdrop/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "irdrop/errors.hpp"

namespace irdrop {

bool operator==(const Resistor& a, const Resistor& b) {
    return a.name == b.name && a.node_a == b.node_a && a.node_b == b.node_b && a.ohms == b.ohms;
}

bool operator==(const CurrentSource& a, const CurrentSource& b) {
    return a.name == b.name && a.node == b.node && a.amps == b.amps;
}

bool operator==(const VoltageSource& a, const VoltageSource& b) {
    return a.name == b.name && a.node == b.node && a.volts == b.volts;
}

bool operator==(const PdnNetlist& a, const PdnNetlist& b) {
    return a.resistors == b.resistors && a.current_sources == b.current_sources &&
           a.voltage_sources == b.voltage_sources;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

double parse_value(std::string_view tok, int line_no, std::string_view line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError(line_no, "line " + std::to_string(line_no) + ": bad numeric value '" +
                                      std::string(tok) + "' in: " + std::string(line));
    }
    return v;
}

[[noreturn]] void fail(int line_no, std::string_view line, const std::string& why) {
    throw ParseError(line_no,
                     "line " + std::to_string(line_no) + ": " + why + ": " + std::string(line));
}

std::string format_value(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

PdnNetlist parse_netlist(std::string_view text) {
    PdnNetlist out;
    std::unordered_set<std::string> r_names, i_names, v_names;

    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        if (pos == text.size()) break;
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
        ++line_no;
        out.line_count = line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks[0].front() == '*') continue;
        if (iequals(toks[0], ".end")) break;

        char head = static_cast<char>(std::tolower(static_cast<unsigned char>(toks[0].front())));
        if (head != 'r' && head != 'i' && head != 'v')
            fail(line_no, line, std::string("unknown element letter '") + std::string(1, toks[0].front()) + "'");
        if (toks.size() != 4) fail(line_no, line, "expected 4 fields (name node node value)");

        std::string name(toks[0]);
        if (head == 'r') {
            if (!r_names.insert(name).second) fail(line_no, line, "duplicate resistor name");
            double ohms = parse_value(toks[3], line_no, line);
            if (ohms < 0.0) fail(line_no, line, "negative resistance");
            out.resistors.push_back({name, std::string(toks[1]), std::string(toks[2]), ohms, line_no});
        } else if (head == 'i') {
            if (!i_names.insert(name).second) fail(line_no, line, "duplicate current source name");
            if (toks[2] != "0") fail(line_no, line, "current source must sink to ground node 0");
            if (toks[1] == "0") fail(line_no, line, "current source attached to ground");
            double amps = parse_value(toks[3], line_no, line);
            if (amps < 0.0) fail(line_no, line, "negative current");
            out.current_sources.push_back({name, std::string(toks[1]), amps, line_no});
        } else {
            if (!v_names.insert(name).second) fail(line_no, line, "duplicate voltage source name");
            if (toks[2] != "0") fail(line_no, line, "voltage source must reference ground node 0");
            if (toks[1] == "0") fail(line_no, line, "voltage source attached to ground");
            double volts = parse_value(toks[3], line_no, line);
            if (volts <= 0.0) fail(line_no, line, "voltage source value must be positive");
            out.voltage_sources.push_back({name, std::string(toks[1]), volts, line_no});
        }
    }
    return out;
}

PdnNetlist parse_netlist_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open netlist file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_netlist(ss.str());
}

std::string to_text(const PdnNetlist& netlist) {
    struct Ref {
        int line;
        int kind;  // 0=R 1=I 2=V
        std::size_t idx;
    };
    std::vector<Ref> order;
    order.reserve(netlist.element_count());
    for (std::size_t i = 0; i < netlist.resistors.size(); ++i)
        order.push_back({netlist.resistors[i].line, 0, i});
    for (std::size_t i = 0; i < netlist.current_sources.size(); ++i)
        order.push_back({netlist.current_sources[i].line, 1, i});
    for (std::size_t i = 0; i < netlist.voltage_sources.size(); ++i)
        order.push_back({netlist.voltage_sources[i].line, 2, i});
    std::stable_sort(order.begin(), order.end(), [](const Ref& a, const Ref& b) {
        return a.line < b.line;
    });

    std::string out;
    for (const Ref& r : order) {
        switch (r.kind) {
            case 0: {
                const Resistor& e = netlist.resistors[r.idx];
                out += e.name + " " + e.node_a + " " + e.node_b + " " + format_value(e.ohms) + "\n";
                break;
            }
            case 1: {
                const CurrentSource& e = netlist.current_sources[r.idx];
                out += e.name + " " + e.node + " 0 " + format_value(e.amps) + "\n";
                break;
            }
            default: {
                const VoltageSource& e = netlist.voltage_sources[r.idx];
                out += e.name + " " + e.node + " 0 " + format_value(e.volts) + "\n";
                break;
            }
        }
    }
    out += ".end\n";
    return out;
}

NodeLoc parse_node_name(const std::string& token) {
    if (token == "0") return NodeLoc{token, NodeKind::Ground, 0, 0, 0};
    if (token.empty()) throw ParseError("empty node name");

    std::vector<std::string_view> parts;
    std::string_view sv(token);
    std::size_t start = 0;
    while (true) {
        std::size_t us = sv.find('_', start);
        parts.push_back(sv.substr(start, us == std::string_view::npos ? us : us - start));
        if (us == std::string_view::npos) break;
        start = us + 1;
    }
    if (parts.size() < 3)
        throw ParseError("node name '" + token + "' does not match <...>_m<layer>_<x>_<y>");

    auto parse_int = [&](std::string_view p, const char* what) -> std::int64_t {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
        if (ec != std::errc{} || ptr != p.data() + p.size())
            throw ParseError("node name '" + token + "': bad " + std::string(what) + " token '" +
                             std::string(p) + "'");
        return v;
    };

    std::int64_t x = parse_int(parts[parts.size() - 2], "x coordinate");
    std::int64_t y = parse_int(parts[parts.size() - 1], "y coordinate");
    if (x < 0 || y < 0) throw ParseError("node name '" + token + "': negative coordinate");

    int layer = -1;
    for (std::size_t i = 0; i + 2 < parts.size(); ++i) {
        std::string_view p = parts[i];
        if (p.size() < 2) continue;
        if (p[0] != 'm' && p[0] != 'M') continue;
        bool digits = true;
        for (std::size_t j = 1; j < p.size(); ++j)
            if (!std::isdigit(static_cast<unsigned char>(p[j]))) digits = false;
        if (!digits) continue;
        if (layer >= 0)
            throw ParseError("node name '" + token + "': multiple layer tokens");
        layer = static_cast<int>(parse_int(p.substr(1), "layer"));
    }
    if (layer < 0) throw ParseError("node name '" + token + "': no layer token m<int>");
    if (layer < 1) throw ParseError("node name '" + token + "': layer must be >= 1");

    return NodeLoc{token, NodeKind::Internal, layer, x, y};
}

}  // namespace irdrop
