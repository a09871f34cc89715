#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace irdrop {

// Parsed PDN SPICE elements. `line` is the 1-based source line, kept for
// diagnostics and for reconstructing file order; it does not take part in
// equality (canonical re-serialization renumbers lines).
struct Resistor {
    std::string name;
    std::string node_a;
    std::string node_b;
    double ohms = 0.0;
    int line = 0;
};

struct CurrentSource {
    std::string name;
    std::string node;
    double amps = 0.0;  // drawn from node to ground
    int line = 0;
};

struct VoltageSource {
    std::string name;
    std::string node;
    double volts = 0.0;  // node fixed at this potential vs ground
    int line = 0;
};

bool operator==(const Resistor& a, const Resistor& b);
bool operator==(const CurrentSource& a, const CurrentSource& b);
bool operator==(const VoltageSource& a, const VoltageSource& b);

struct PdnNetlist {
    std::vector<Resistor> resistors;
    std::vector<CurrentSource> current_sources;
    std::vector<VoltageSource> voltage_sources;
    // Lines scanned, including blanks/comments and the `.end` line.
    // Diagnostic only, excluded from equality.
    int line_count = 0;

    std::size_t element_count() const {
        return resistors.size() + current_sources.size() + voltage_sources.size();
    }
};

bool operator==(const PdnNetlist& a, const PdnNetlist& b);

// Parses a line-oriented PDN netlist:
//   * comment            -> skipped
//   R<name> <n1> <n2> <ohms>
//   I<name> <n>  0  <amps>
//   V<name> <n>  0  <volts>
//   .end                 -> stop
// Element letters are case-insensitive; whitespace runs collapse; values
// accept scientific notation. Throws ParseError with the first offending
// 1-based line number and the line text.
PdnNetlist parse_netlist(std::string_view text);
PdnNetlist parse_netlist_file(const std::string& path);

// Canonical serialization: one line per element in original file order,
// shortest round-trip value formatting, terminated by ".end". Re-parsing
// the result yields an equal PdnNetlist.
std::string to_text(const PdnNetlist& netlist);

enum class NodeKind { Internal, Ground };

// Decoded geometric node name. Grammar: "0" is ground; otherwise the name is
// underscore-separated with exactly one layer token `m<int>` and the final
// two tokens are the x and y coordinates in nm, e.g. "n1_m1_4800_2400".
struct NodeLoc {
    std::string raw;
    NodeKind kind = NodeKind::Internal;
    int layer = 0;          // metal index, >= 1 for internal nodes
    std::int64_t x_nm = 0;
    std::int64_t y_nm = 0;
};

NodeLoc parse_node_name(const std::string& token);

}  // namespace irdrop
