#include "specbox/experiment.hpp"

#include "specbox/averaging.hpp"
#include "specbox/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace specbox {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kReportSchema = "specbox-report-1";
constexpr const char* kEnsembleSchema = "specbox-ensemble-1";
constexpr const char* kSeriesSchema = "specbox-series-1";

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool wants(const ExperimentConfig& cfg, const char* fmt) {
    for (const auto& f : cfg.output.formats)
        if (f == fmt) return true;
    return false;
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << body;
}

std::string horizon_tag(double h) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", h);
    return buf;
}

ordered_json verdict_json(const BoundVerdict& b) {
    return ordered_json{
        {"ok", b.ok}, {"slack", b.slack}, {"bound", b.bound}, {"value", b.worst_value}};
}

} // namespace

std::string resolve_output_dir(const ExperimentConfig& config) {
    const char* root = std::getenv("SPECBOX_OUTPUT_ROOT");
    if (root && *root) return (fs::path(root) / config.output.directory).string();
    return config.output.directory;
}

int run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
    try {
        auto lattice = make_lattice(config.grid);
        SolverConfig sc = config.build_solver_config(lattice);
        {
            auto violations = sc.validate();
            if (!violations.empty()) throw ConfigError(std::move(violations));
        }
        fs::create_directories(out_dir);
        const std::string config_echo = config.to_json();
        const double F = sc.forcing.uloc_norm(std::max(2.0, config.t_end + 1.0));

        std::string csv;
        csv += std::string("# ") + kSeriesSchema + "\n";
        csv += "t,energy,grad_sq,work_rate,f_dual_sq\n";

        TimeAverager averager(lattice);
        std::vector<ReynoldsAggregate> aggregates;
        std::vector<ReynoldsReport> reports;
        std::size_t next_horizon = 0;

        std::vector<SampleObserver> observers;
        observers.push_back([&](const Sample& s) {
            csv += fmt17(s.scalars.t) + "," + fmt17(s.scalars.energy) + "," +
                   fmt17(s.scalars.grad_sq) + "," + fmt17(s.scalars.work_rate) + "," +
                   fmt17(s.scalars.f_dual_sq) + "\n";
            averager.accumulate(s);
            if (next_horizon < config.horizons.size() &&
                std::abs(s.scalars.t - config.horizons[next_horizon]) <
                    1e-9 * std::max(1.0, config.horizons[next_horizon])) {
                auto agg = averager.finalize(config.viscosity);
                auto rep = make_report(agg, F);
                rep.mt_bounds = averager.mt_operator_bound_check(F, config.viscosity);
                if (wants(config, "checkpoint"))
                    write_checkpoint((fs::path(out_dir) /
                                      ("checkpoint_t" + horizon_tag(s.scalars.t) + ".chk"))
                                         .string(),
                                     s.state, config.grid, config_echo);
                aggregates.push_back(std::move(agg));
                reports.push_back(std::move(rep));
                ++next_horizon;
            }
        });

        auto result = run(sc, observers);

        if (wants(config, "csv")) write_text(fs::path(out_dir) / "series.csv", csv);

        if (wants(config, "json")) {
            ordered_json j;
            j["schema_version"] = kReportSchema;
            j["config_echo"] = ordered_json::parse(config_echo);
            j["uloc_norm"] = F;

            const double v0_sq = result.series.rows.front().energy;
            auto apriori = verify_apriori_bounds(result.series, F, config.viscosity,
                                                 config.grid.poincare_constant(), v0_sq);
            j["apriori"] = {{"energy", verdict_json(apriori.energy)},
                            {"dissipation", verdict_json(apriori.dissipation)},
                            {"window", verdict_json(apriori.window)}};

            double max_resid_rate = 0.0;
            if (result.series.rows.size() >= 2) {
                const double h = result.series.dt;
                for (double r : energy_residual(result.series, config.viscosity))
                    max_resid_rate = std::max(max_resid_rate, std::abs(r) / h);
            }
            j["energy_residual_max_per_unit_time"] = max_resid_rate;

            j["horizons"] = config.horizons;
            j["averaging_not_applicable"] = reports.empty();
            j["per_horizon"] = ordered_json::array();
            for (const auto& rep : reports)
                j["per_horizon"].push_back(ordered_json::parse(report_to_json(rep)));

            ordered_json diag;
            diag["mean_cauchy_increments"] = mean_convergence_increments(aggregates);
            std::vector<double> flux, rho, rr_rel;
            for (const auto& rep : reports) {
                flux.push_back(rep.dissipation.flux_turb);
                rho.push_back(rep.dissipation.rho);
                rr_rel.push_back(rep.reynolds_residual_scale > 0.0
                                     ? rep.reynolds_residual_norm / rep.reynolds_residual_scale
                                     : 0.0);
            }
            diag["flux_turb_by_horizon"] = flux;
            diag["rho_by_horizon"] = rho;
            diag["reynolds_residual_rel_by_horizon"] = rr_rel;
            j["diagnostics"] = diag;

            write_text(fs::path(out_dir) / "report.json", j.dump(2) + "\n");
        }
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kConfigError;
    } catch (const BlowUpError& e) {
        std::cerr << e.what() << "\n";
        return kBlowUp;
    }
}

int run_ensemble_experiment(const ExperimentConfig& config, const std::string& out_dir) {
    try {
        if (!config.ensemble.enabled)
            throw ConfigError(std::vector<ConfigViolation>{
                {"ensemble.enabled", "must be true for ensemble runs"}});
        auto lattice = make_lattice(config.grid);
        EnsembleConfig ec = config.build_ensemble_config(lattice);
        fs::create_directories(out_dir);

        auto result = run_ensemble(ec);

        for (std::size_t k = 0; k < result.realization_reports.size(); ++k) {
            char name[32];
            std::snprintf(name, sizeof name, "realization_%02zu", k);
            const fs::path sub = fs::path(out_dir) / name;
            fs::create_directories(sub);
            ordered_json jr;
            jr["schema_version"] = kReportSchema;
            jr["realization"] = k;
            jr["horizons"] = {result.realization_reports[k].t};
            jr["per_horizon"] = ordered_json::array();
            jr["per_horizon"].push_back(
                ordered_json::parse(report_to_json(result.realization_reports[k])));
            write_text(sub / "report.json", jr.dump(2) + "\n");
        }

        ordered_json j;
        j["schema_version"] = kEnsembleSchema;
        j["config_echo"] = ordered_json::parse(config.to_json());
        j["report"] = ordered_json::parse(ensemble_to_json(result.report));
        write_text(fs::path(out_dir) / "ensemble.json", j.dump(2) + "\n");
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kConfigError;
    } catch (const EnsembleError& e) {
        std::cerr << e.what() << "\n";
        return kBlowUp;
    } catch (const BlowUpError& e) {
        std::cerr << e.what() << "\n";
        return kBlowUp;
    }
}

namespace {

struct Verifier {
    std::vector<std::string> failures;
    bool any_report = false;

    void check(bool ok, const std::string& name, const std::string& detail = "") {
        if (ok) {
            std::cout << "PASS " << name << "\n";
        } else {
            std::cout << "FAIL " << name << (detail.empty() ? "" : " (" + detail + ")") << "\n";
            failures.push_back(name);
        }
    }
};

void verify_one_report(Verifier& v, const json& j, const std::string& label) {
    if (!j.contains("schema_version") || j.at("schema_version") != kReportSchema) {
        v.check(false, label + ": schema version", "unknown or missing");
        return;
    }
    v.check(true, label + ": schema version");

    if (j.contains("apriori")) {
        bool ok = true;
        std::string bad;
        for (const char* key : {"energy", "dissipation", "window"}) {
            const auto& b = j.at("apriori").at(key);
            if (!b.at("ok").get<bool>() || b.at("slack").get<double>() < 0.0) {
                ok = false;
                bad = key;
            }
        }
        v.check(ok, label + ": a-priori bounds", bad);
    }

    if (!j.contains("per_horizon")) return;
    for (const auto& h : j.at("per_horizon")) {
        const std::string hl = label + " t=" + horizon_tag(h.at("t").get<double>());
        const auto& d = h.at("dissipation");
        const double margin = d.at("stress_work").get<double>() +
                              d.at("flux_turb").get<double>() + d.at("rho").get<double>() -
                              d.at("eps").get<double>();
        const double tol = h.at("tol_identity").get<double>();
        v.check(std::abs(margin - d.at("margin").get<double>()) <=
                        1e-12 * std::max(1.0, std::abs(margin)) &&
                    std::abs(margin) <= tol,
                hl + ": dissipation closure eps = stress_work + flux_turb + rho");

        const auto& ck = h.at("identity_checks");
        bool ids = true;
        std::string bad;
        for (const char* key : {"reynolds_decomposition", "orthogonality", "flux_decomposition",
                                "f_equals_div_r", "integration_by_parts"})
            if (ck.at(key).get<double>() > 1e-10) {
                ids = false;
                bad = key;
            }
        v.check(ids, hl + ": finite-t identities", bad);

        const double min_eig = ck.at("psd_min_eig").get<double>();
        const double max_abs = ck.at("psd_max_abs").get<double>();
        v.check(min_eig >= -1e-10 * std::max(max_abs, 1e-30), hl + ": Reynolds stress PSD");

        v.check(std::abs(h.at("mean_energy_balance").at("residual").get<double>()) <=
                    std::max(tol, 1e-12),
                hl + ": mean energy balance");

        const auto& mt = h.at("mt_bounds");
        if (mt.at("applicable").get<bool>()) {
            bool ok = true;
            for (const char* key : {"mean_force", "mean_gradient", "mean_force_sq", "mean_work"})
                if (!mt.at(key).at("ok").get<bool>() ||
                    mt.at(key).at("slack").get<double>() < 0.0)
                    ok = false;
            v.check(ok, hl + ": averaged-operator bounds");
        }
    }
}

void verify_ensemble(Verifier& v, const json& j, const std::string& label) {
    if (!j.contains("schema_version") || j.at("schema_version") != kEnsembleSchema) {
        v.check(false, label + ": schema version", "unknown or missing");
        return;
    }
    v.check(true, label + ": schema version");
    const auto& r = j.at("report");
    v.check(r.at("realizations_closed").get<bool>(), label + ": realizations closed");
    v.check(r.at("force_bound_ok").get<bool>(), label + ": uniform force bound");
    v.check(r.at("dissipativity_margin").get<double>() >= -r.at("tol_sign").get<double>(),
            label + ": ensemble dissipativity margin");
    v.check(r.at("vbar_v_worst").get<double>() <= r.at("vbar_v_bound").get<double>(),
            label + ": uniform bound on realization means");
}

} // namespace

int verify_reports(const std::string& dir, std::vector<std::string>* failures) {
    Verifier v;
    bool found = false;
    std::vector<fs::path> report_files;
    if (fs::exists(dir)) {
        const fs::path top_report = fs::path(dir) / "report.json";
        if (fs::exists(top_report)) report_files.push_back(top_report);
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_directory() && fs::exists(entry.path() / "report.json"))
                report_files.push_back(entry.path() / "report.json");
        std::sort(report_files.begin(), report_files.end());
        for (const auto& p : report_files) {
            found = true;
            std::ifstream in(p);
            json j;
            try {
                in >> j;
            } catch (const std::exception& e) {
                v.check(false, p.string() + ": parse", e.what());
                continue;
            }
            verify_one_report(v, j, p.parent_path().filename().string());
        }
        const fs::path ens = fs::path(dir) / "ensemble.json";
        if (fs::exists(ens)) {
            found = true;
            std::ifstream in(ens);
            json j;
            try {
                in >> j;
                verify_ensemble(v, j, "ensemble");
            } catch (const std::exception& e) {
                v.check(false, "ensemble.json: parse", e.what());
            }
        }
    }
    if (!found) v.check(false, "reports present", "no reports found");
    if (failures) *failures = v.failures;
    return v.failures.empty() ? kOk : kVerifyFailure;
}

int cli_main(const std::vector<std::string>& args) {
    auto usage = []() {
        std::cerr << "usage: specbox run <config.json> [--output-dir DIR]\n"
                     "       specbox ensemble <config.json> [--output-dir DIR]\n"
                     "       specbox verify <dir>\n"
                     "       specbox checkpoint-info <file>\n";
        return kConfigError;
    };
    if (args.empty()) return usage();
    const std::string& cmd = args[0];

    auto load_config = [&](const std::string& path, ExperimentConfig& cfg) -> int {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            std::cerr << "cannot open config: " << path << "\n";
            return kConfigError;
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
            cfg = parse_config(text);
        } catch (const ConfigError& e) {
            std::cerr << e.what() << "\n";
            return kConfigError;
        }
        return kOk;
    };

    auto out_dir_arg = [&](std::size_t start) -> std::string {
        for (std::size_t i = start; i + 1 < args.size(); ++i)
            if (args[i] == "--output-dir") return args[i + 1];
        return "";
    };

    if (cmd == "run" || cmd == "ensemble") {
        if (args.size() < 2) return usage();
        ExperimentConfig cfg;
        if (int rc = load_config(args[1], cfg); rc != kOk) return rc;
        std::string out = out_dir_arg(2);
        if (out.empty()) out = resolve_output_dir(cfg);
        return cmd == "run" ? run_experiment(cfg, out) : run_ensemble_experiment(cfg, out);
    }
    if (cmd == "verify") {
        if (args.size() < 2) return usage();
        return verify_reports(args[1]);
    }
    if (cmd == "checkpoint-info") {
        if (args.size() < 2) return usage();
        try {
            const auto info = read_checkpoint_info(args[1]);
            std::cout << "version " << info.version << "\n";
            std::cout << "t " << fmt17(info.t) << " step " << info.step << "\n";
            std::cout << "grid " << info.grid.dimension << "d N=" << info.grid.resolution
                      << " L=" << fmt17(info.grid.period) << "\n";
            std::cout << "dissipation_integral " << fmt17(info.integrals.dissipation) << "\n";
            std::cout << "work_integral " << fmt17(info.integrals.work) << "\n";
            std::cout << "values " << info.value_count << "\n";
            std::cout << "config " << info.config_echo << "\n";
            return kOk;
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return kConfigError;
        }
    }
    return usage();
}

} // namespace specbox
