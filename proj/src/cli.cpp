#include "irdrop/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "irdrop/augment.hpp"
#include "irdrop/errors.hpp"
#include "irdrop/features.hpp"
#include "irdrop/irfm.hpp"
#include "irdrop/metrics.hpp"
#include "irdrop/model.hpp"
#include "irdrop/netlist.hpp"
#include "irdrop/solver.hpp"

namespace irdrop {

namespace {

namespace fs = std::filesystem;

// All sources must sit on one rail; its value is the analysis vdd. Netlists
// without voltage sources fall back to the 1.1 V default (they fail later in
// the solve anyway).
double derive_vdd(const PdnNetlist& netlist) {
    if (netlist.voltage_sources.empty()) return kDefaultVdd;
    const double vdd = netlist.voltage_sources.front().volts;
    for (const VoltageSource& v : netlist.voltage_sources)
        if (std::abs(v.volts - vdd) > 1e-9)
            throw GraphError("netlist mixes voltage source values " + std::to_string(vdd) +
                             " and " + std::to_string(v.volts));
    return vdd;
}

PdnGraph load_graph(const std::string& netlist_path) {
    PdnNetlist netlist = parse_netlist_file(netlist_path);
    return build_graph(netlist, derive_vdd(netlist));
}

MapStack single(FeatureMap map) {
    MapStack s;
    s.channels.push_back(std::move(map));
    return s;
}

void emit(bool json, const nlohmann::json& obj, const std::string& text) {
    if (json)
        std::cout << obj.dump() << "\n";
    else
        std::cout << text;
}

int cmd_inspect(const std::string& netlist_path, bool json) {
    PdnGraph graph = load_graph(netlist_path);
    Diagnostics d = validate(graph);
    if (json) {
        std::cout << d.to_json() << "\n";
    } else {
        std::cout << "nodes " << d.node_count << ", edges " << d.edge_count << ", instances "
                  << d.instance_count << ", vsources " << d.vsource_count << "\n"
                  << "components " << d.components << " (floating " << d.floating_components
                  << "), max degree " << d.max_degree << "\n";
        if (d.degree_over_6)
            std::cerr << "warning: max degree exceeds the typical PDN bound of 6\n";
    }
    return 0;
}

int cmd_solve(const std::string& netlist_path, const std::string& out, double tol, int cell_nm,
              bool json) {
    PdnGraph graph = load_graph(netlist_path);
    LinearSystem sys = assemble_system(graph);
    CgStats stats;
    NodeVoltages v = solve_cg(sys, CgOptions{tol, -1}, &stats);
    FeatureMap truth = ir_drop_map(graph, v, cell_nm);
    write_irfm(single(truth), out);

    double max_drop = 0.0;
    for (double d : truth.data) max_drop = std::max(max_drop, d);
    emit(json,
         {{"out", out},
          {"unknowns", sys.dim},
          {"iterations", stats.iterations},
          {"residual", stats.rel_residual},
          {"h", truth.h},
          {"w", truth.w},
          {"max_drop_mv", max_drop * 1000.0}},
         "solved " + std::to_string(sys.dim) + " unknowns in " +
             std::to_string(stats.iterations) + " iterations; wrote " + out + " (max drop " +
             std::to_string(max_drop * 1000.0) + " mV)\n");
    return 0;
}

int cmd_extract(const std::string& netlist_path, const std::string& out_dir, int cell_nm,
                bool with_truth, double tol, bool csv, bool json) {
    PdnGraph graph = load_graph(netlist_path);
    ExtractOptions opts;
    opts.cell_nm = cell_nm;
    opts.with_truth = with_truth;
    opts.solve_tol = tol;
    MapStack stack = extract_all(graph, opts);

    fs::create_directories(out_dir);
    nlohmann::json files = nlohmann::json::array();
    for (int c = 0; c < stack.c(); ++c) {
        const std::string base = std::string(kChannelNames[c]);
        const std::string path = (fs::path(out_dir) / (base + ".irfm")).string();
        write_irfm(single(stack.channels[c]), path);
        files.push_back(path);
        if (csv) {
            const std::string cpath = (fs::path(out_dir) / (base + ".csv")).string();
            write_csv(stack.channels[c], cpath);
            files.push_back(cpath);
        }
    }
    const std::string stack_path = (fs::path(out_dir) / "stack.irfm").string();
    write_irfm(stack, stack_path);
    files.push_back(stack_path);

    emit(json,
         {{"channels", stack.c()}, {"h", stack.h()}, {"w", stack.w()}, {"files", files}},
         "extracted " + std::to_string(stack.c()) + " channels (" + std::to_string(stack.h()) +
             "x" + std::to_string(stack.w()) + ") into " + out_dir + "\n");
    return 0;
}

int cmd_adjust(const std::string& in, int size, const std::string& method_name,
               std::uint64_t seed, const std::string& out, bool json) {
    MapStack stack = read_irfm(in);
    AdjustMethod method = parse_adjust_method(method_name);
    SplitMix64 rng(seed);
    MapStack adjusted = adjust(stack, size, method, rng);
    write_irfm(adjusted, out);
    emit(json, {{"out", out}, {"size", size}, {"method", method_name}},
         "adjusted to " + std::to_string(size) + "x" + std::to_string(size) + "; wrote " + out +
             "\n");
    return 0;
}

int cmd_predict(const std::string& in, const std::string& weights, std::uint64_t seed,
                const std::string& out, bool json) {
    MapStack stack = read_irfm(in);

    Model model = weights.empty() ? build_model(ModelConfig{}, seed) : load_weights(weights);
    const int in_c = model.config.in_channels;
    if (stack.c() < in_c)
        throw ShapeError("predict: stack has " + std::to_string(stack.c()) +
                         " channels, model expects " + std::to_string(in_c));

    const int h = stack.h(), w = stack.w();
    const int ph = (h + 15) / 16 * 16;
    const int pw = (w + 15) / 16 * 16;

    // Zero-pad top-left aligned up to the next multiple of 16, crop back after.
    nn::Tensor input = nn::Tensor::zeros({in_c, ph, pw});
    for (int c = 0; c < in_c; ++c)
        for (int r = 0; r < h; ++r)
            for (int x = 0; x < w; ++x)
                input.at(c, r, x) = static_cast<float>(stack.channels[c].at(r, x));

    nn::Tensor pred = forward(model, input);

    FeatureMap map;
    map.h = h;
    map.w = w;
    map.cell_nm = stack.cell_nm();
    map.unit = Unit::Volts;
    map.data.resize(static_cast<std::size_t>(h) * w);
    for (int r = 0; r < h; ++r)
        for (int x = 0; x < w; ++x) map.at(r, x) = pred.at(0, r, x);
    write_irfm(single(map), out);

    emit(json, {{"out", out}, {"h", h}, {"w", w}, {"padded_h", ph}, {"padded_w", pw}},
         "prediction (" + std::to_string(h) + "x" + std::to_string(w) + ") written to " + out +
             "\n");
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path, bool json) {
    MapStack pred = read_irfm(pred_path);
    MapStack truth = read_irfm(truth_path);
    if (pred.c() != 1 || truth.c() != 1)
        throw ShapeError("eval expects single-channel IR-drop maps");
    EvalReport r = evaluate(pred.channels[0], truth.channels[0]);
    if (json) {
        std::cout << r.to_json() << "\n";
    } else {
        std::cout << "MAE " << r.mae_mv << " mV, F1 " << r.f1 << " (P " << r.precision << ", R "
                  << r.recall << ")\n"
                  << "W_IR " << r.w_ir_mv << " mV, W_IR error " << r.w_ir_error_mv << " mV ("
                  << r.w_ir_error_pct << "%), max error " << r.max_ir_error_mv << " mV\n";
    }
    return 0;
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
    CLI::App app{"Static IR-drop toolkit: golden solve, feature extraction, "
                 "spatial adjustment, forward inference and contest metrics"};
    app.require_subcommand(1);

    std::string netlist, out, in, weights, pred, truth, method = "pad-corner-tl";
    int cell_nm = kDefaultCellNm;
    int size = 512;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    bool json = false, with_truth = false, csv = false;

    app.add_flag("--json", json, "machine-readable JSON on stdout");

    CLI::App* c_inspect = app.add_subcommand("inspect", "parse a netlist and report diagnostics");
    c_inspect->add_option("--netlist", netlist)->required();

    CLI::App* c_solve = app.add_subcommand("solve", "solve G*V=J and write the IR-drop map");
    c_solve->add_option("--netlist", netlist)->required();
    c_solve->add_option("--out", out)->required();
    c_solve->add_option("--tol", tol);
    c_solve->add_option("--cell-nm", cell_nm);

    CLI::App* c_extract = app.add_subcommand("extract", "compute the seven feature maps");
    c_extract->add_option("--netlist", netlist)->required();
    c_extract->add_option("--out", out)->required();
    c_extract->add_option("--cell-nm", cell_nm);
    c_extract->add_option("--tol", tol);
    c_extract->add_flag("--with-truth", with_truth, "append the golden IR-drop channel");
    c_extract->add_flag("--csv", csv, "also export one CSV per channel");

    CLI::App* c_adjust = app.add_subcommand("adjust", "pad/crop a stack to size x size");
    c_adjust->add_option("--in", in)->required();
    c_adjust->add_option("--size", size);
    c_adjust->add_option("--method", method, "e.g. pad-corner-tl, crop-edge-left, crop-random");
    c_adjust->add_option("--seed", seed);
    c_adjust->add_option("--out", out)->required();

    CLI::App* c_predict = app.add_subcommand("predict", "run the forward pass on a feature stack");
    c_predict->add_option("--in", in)->required();
    c_predict->add_option("--weights", weights, "weights file; omitted -> seeded random weights");
    c_predict->add_option("--seed", seed);
    c_predict->add_option("--out", out)->required();

    CLI::App* c_eval = app.add_subcommand("eval", "contest metrics: pred vs truth");
    c_eval->add_option("--pred", pred)->required();
    c_eval->add_option("--truth", truth)->required();

    // Let --json appear before or after the subcommand.
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_inspect->parsed()) return cmd_inspect(netlist, json);
        if (c_solve->parsed()) return cmd_solve(netlist, out, tol, cell_nm, json);
        if (c_extract->parsed())
            return cmd_extract(netlist, out, cell_nm, with_truth, tol, csv, json);
        if (c_adjust->parsed()) return cmd_adjust(in, size, method, seed, out, json);
        if (c_predict->parsed()) return cmd_predict(in, weights, seed, out, json);
        if (c_eval->parsed()) return cmd_eval(pred, truth, json);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace irdrop
