// fdi: design, attack, simulate, report and sweep-pole driven by one config.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "fdi/fdi.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3 };

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output;
    std::string trace_name = "trace.csv";
    std::vector<double> poles;
};

class InfeasibleDesign : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

void print_error(const char* kind, const std::string& field, const std::string& message) {
    std::cerr << "error: kind=" << kind << " field=" << (field.empty() ? "-" : field) << " message=" << quote(message)
              << '\n';
}

json to_json(const fdi::Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json to_json(const fdi::RowVector& v) { return to_json(fdi::Vector(v.transpose())); }

fs::path output_dir(const Options& opt, const fdi::RunConfig& cfg) {
    fs::path dir;
    if (!opt.output.empty()) {
        dir = opt.output;
    } else if (const char* env = std::getenv("FDI_OUTPUT_DIR"); env && *env) {
        dir = env;
    } else if (!cfg.output_dir.empty()) {
        dir = cfg.output_dir;
    } else {
        dir = "out";
    }
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_trace(const fs::path& path, const fdi::Session& s, const fdi::SimulationTrace& t,
                 const std::string& label, std::optional<double> pole = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    fdi::TraceCsvOptions opt;
    opt.include_states = s.config.include_states;
    opt.metadata = fdi::trace_metadata(s, label, pole);
    fdi::write_trace_csv(out, t, opt);
}

fdi::Session open_session(const Options& opt) {
    fdi::RunConfig cfg = opt.config_path.empty() ? fdi::load_config_text("", opt.overrides)
                                                 : fdi::load_config(opt.config_path, opt.overrides);
    return fdi::prepare_session(cfg);
}

json design_report(const fdi::Session& s) {
    const auto& d = s.design.design;
    json j;
    j["kind"] = fdi::to_string(d.kind);
    j["degree"] = d.degree;
    j["eta"] = s.config.design.eta;
    j["pole"] = d.pole;
    j["gamma"] = d.gamma;
    j["n_r"] = d.n_r;
    j["free_parameters"] = s.design.basis.free_parameters();
    j["decoupling_residual"] = fdi::max_abs(d.nbar.transpose() * s.design.hbar);
    j["nbar_inf_norm"] = fdi::max_abs(d.nbar);
    j["diagnostic"] = d.diagnostic;
    j["wall_ms"] = s.design.wall_ms;
    if (d.winner) j["winner"] = {{"index", d.winner->index}, {"block", d.winner->block}, {"sign", d.winner->sign}};
    j["lps"] = json::array();
    for (const auto& r : d.lps) {
        j["lps"].push_back({{"index", r.slot.index},
                            {"block", r.slot.block},
                            {"sign", r.slot.sign},
                            {"status", fdi::to_string(r.status)},
                            {"gamma", r.gamma},
                            {"iterations", r.iterations},
                            {"wall_ms", r.wall_ms}});
    }
    j["nbar"] = to_json(d.nbar);
    j[d.kind == fdi::DesignKind::Robust ? "lambda" : "z"] = to_json(d.multiplier);
    return j;
}

json filter_json(const fdi::Session& s) {
    const auto filter = fdi::realize_filter(s.design.design, s.model.dae.l);
    json j;
    j["pole"] = filter.pole();
    j["degree"] = filter.degree();
    j["denominator"] = to_json(filter.denominator());
    j["numerator"] = json::array();
    for (const auto& row : filter.numerator()) j["numerator"].push_back(to_json(row));
    j["measurement_labels"] = s.model.discrete.measurement_labels;
    return j;
}

void require_positive(const fdi::Session& s) {
    if (!(s.design.design.gamma > 0.0)) throw InfeasibleDesign(s.design.design.diagnostic);
}

int cmd_design(const Options& opt) {
    const fdi::Session s = open_session(opt);
    const fs::path dir = output_dir(opt, s.config);
    write_json(dir / "design_report.json", design_report(s));
    write_json(dir / "filter.json", filter_json(s));
    std::cout << "gamma=" << fdi::format_number(s.design.design.gamma) << " kind=" << fdi::to_string(s.design.design.kind)
              << " lps=" << s.design.design.lps.size() << " out=" << dir.string() << '\n';
    require_positive(s);
    return kOk;
}

json attack_json(const fdi::Session& s, const fdi::ResolvedAttack& a) {
    json j;
    j["labels"] = s.space.labels;
    j["f"] = to_json(a.f);
    if (a.alpha.size() > 0) {
        j["alpha"] = to_json(a.alpha);
        j["in_polytope"] = fdi::in_polytope(s.space, a.alpha, 1e-9);
        j["payoff"] = a.payoff;
    }
    j["worst_case"] = a.worst_case;
    j["stealth_residual"] = fdi::stealth_residual(a.f, s.model.discrete.c, s.model.discrete.df);
    j["gamma"] = s.design.design.gamma;
    return j;
}

int cmd_attack(const Options& opt) {
    const fdi::Session s = open_session(opt);
    const fs::path dir = output_dir(opt, s.config);
    const auto a = fdi::resolve_attack(s.space, s.design, s.config.attack);
    write_json(dir / "attack.json", attack_json(s, a));
    std::cout << "f=";
    for (Eigen::Index i = 0; i < a.f.size(); ++i) std::cout << (i ? "," : "") << fdi::format_number(a.f[i]);
    std::cout << " out=" << dir.string() << '\n';
    return kOk;
}

int cmd_simulate(const Options& opt) {
    const fdi::Session s = open_session(opt);
    const fs::path dir = output_dir(opt, s.config);
    std::optional<fdi::Vector> f;
    if (s.config.inject) f = fdi::resolve_attack(s.space, s.design, s.config.attack).f;
    const auto sc = fdi::make_scenario(s, f, s.config.noisy);
    const auto trace = fdi::run_scenario(s, sc);
    write_trace(dir / opt.trace_name, s, trace, s.config.inject ? "attack" : "no-attack");
    std::cout << "records=" << trace.records.size() << " out=" << (dir / opt.trace_name).string() << '\n';
    return kOk;
}

void write_panels(const fs::path& dir, const std::string& stem, const fdi::SimulationTrace& t,
                  const fdi::Session& s) {
    fdi::CsvTable load, rs, rd;
    load.header = {"t"};
    for (const auto& l : t.disturbance_labels) load.header.push_back(l);
    for (const auto& l : t.attack_labels) load.header.push_back("f_" + l);
    rs.header = {"t", "rS_inf"};
    rd.header = {"t", "r_D"};
    for (auto* table : {&load, &rs, &rd}) {
        table->metadata["case"] = stem;
        table->metadata["seed"] = std::to_string(s.config.seed);
        table->metadata["warmup_samples"] = std::to_string(t.warmup_samples);
    }
    for (const auto& r : t.records) {
        std::vector<double> row{r.t};
        row.insert(row.end(), r.d.data(), r.d.data() + r.d.size());
        row.insert(row.end(), r.f.data(), r.f.data() + r.f.size());
        load.rows.push_back(std::move(row));
        rs.rows.push_back({r.t, r.rs_inf});
        rd.rows.push_back({r.t, r.r_d});
    }
    auto save = [&](const std::string& name, const fdi::CsvTable& table) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
        fdi::write_csv(out, table);
    };
    save(stem + "_load_attack.csv", load);
    save(stem + "_rs.csv", rs);
    save(stem + "_rd.csv", rd);
}

int cmd_report(const Options& opt) {
    const fdi::Session s = open_session(opt);
    const fs::path dir = output_dir(opt, s.config);
    json summary;
    summary["gamma"] = s.design.design.gamma;
    const std::size_t onset = static_cast<std::size_t>(std::llround(s.config.onset / s.config.sample_time));
    for (const auto& [name, choice] : {std::pair{"basic", s.config.report_basic}, std::pair{"stealthy", s.config.report_stealthy}}) {
        const auto a = fdi::resolve_attack(s.space, s.design, choice);
        summary[name]["f"] = to_json(a.f);
        if (a.alpha.size() > 0) summary[name]["alpha"] = to_json(a.alpha);
        for (const bool noisy : {true, false}) {
            const std::string mode = noisy ? "noisy" : "ideal";
            const auto trace = fdi::run_scenario(s, fdi::make_scenario(s, a.f, noisy));
            write_panels(dir, std::string(name) + "_" + mode, trace, s);
            const auto st = fdi::phase_stats(trace, onset);
            summary[name][mode] = {{"pre_rs_mean", st.pre_rs_mean},
                                   {"post_rs_mean", st.post_rs_mean},
                                   {"pre_rd_rms", st.pre_rd_rms},
                                   {"post_rd_mean", st.post_rd_mean}};
        }
    }
    write_json(dir / "report_summary.json", summary);
    std::cout << "panels=12 out=" << dir.string() << '\n';
    return kOk;
}

int cmd_sweep(const Options& opt) {
    const fdi::Session s = open_session(opt);
    const fs::path dir = output_dir(opt, s.config);
    const std::vector<double> poles = opt.poles.empty() ? s.config.sweep_poles : opt.poles;
    for (double p : poles) {
        if (!(p > 0.0 && p < 1.0)) throw fdi::ConfigError("--poles", "every pole must lie in (0, 1)");
    }
    std::optional<fdi::Vector> f;
    if (s.config.inject) f = fdi::resolve_attack(s.space, s.design, s.config.attack).f;
    const auto sc = fdi::make_scenario(s, f, s.config.noisy);
    std::vector<std::future<void>> jobs;
    for (double p : poles) {
        jobs.push_back(std::async(std::launch::async, [&, p] {
            const auto trace = fdi::run_scenario(s, sc, p);
            write_trace(dir / ("trace_pole_" + fdi::format_number(p) + ".csv"), s, trace, "sweep", p);
        }));
    }
    for (auto& j : jobs) j.get();
    std::cout << "traces=" << poles.size() << " out=" << dir.string() << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic diagnosis filter for stealthy multivariate attacks on multi-area AGC"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opt.config_path, "YAML configuration file (built-in defaults if omitted)");
        sub->add_option("--set", opt.overrides, "Override a config value, e.g. design.pole=0.6")->take_all();
        sub->add_option("-o,--output", opt.output, "Output directory (else $FDI_OUTPUT_DIR, output.dir, out)");
    };
    int (*handler)(const Options&) = nullptr;
    auto* design = app.add_subcommand("design", "Solve the filter design LPs; write design_report.json and filter.json");
    add_common(design);
    design->callback([&] { handler = cmd_design; });
    auto* attack = app.add_subcommand("attack", "Resolve the attack vector; write attack.json");
    add_common(attack);
    attack->callback([&] { handler = cmd_attack; });
    auto* simulate = app.add_subcommand("simulate", "Simulate one scenario; write a trace CSV");
    add_common(simulate);
    simulate->add_option("--trace", opt.trace_name, "Trace file name inside the output directory");
    simulate->callback([&] { handler = cmd_simulate; });
    auto* report = app.add_subcommand("report", "Per-panel CSVs for basic/stealthy attacks, noisy and ideal");
    add_common(report);
    report->callback([&] { handler = cmd_report; });
    auto* sweep = app.add_subcommand("sweep-pole", "Repeat simulate over a list of filter poles");
    add_common(sweep);
    sweep->add_option("--poles", opt.poles, "Pole list (default from sweep.poles)")->delimiter(',');
    sweep->callback([&] { handler = cmd_sweep; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        return handler(opt);
    } catch (const fdi::ConfigError& e) {
        print_error("config", e.field(), e.message());
        return kConfig;
    } catch (const InfeasibleDesign& e) {
        print_error("infeasible", "design", e.what());
        return kInfeasible;
    } catch (const fdi::EmptyAttackSetError& e) {
        print_error("infeasible", "attack.polytope", e.what());
        return kInfeasible;
    } catch (const fdi::ValidationError& e) {
        print_error("config", "model", e.what());
        return kConfig;
    } catch (const fdi::DimensionError& e) {
        print_error("config", "dimensions", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        print_error("runtime", "", e.what());
        return kFailure;
    }
}
