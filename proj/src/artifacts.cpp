#include "edlab/error.hpp"
#include "edlab/experiments.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <initializer_list>

namespace edlab {

namespace {

using nlohmann::ordered_json;

std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error{"cannot open " + path.string() + " for writing"};
    out << text;
    if (!out.flush()) throw Error{"write failed: " + path.string()};
}

class CsvWriter {
public:
    explicit CsvWriter(std::span<const std::string> columns) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) text_ += ',';
            text_ += columns[i];
        }
        text_ += '\n';
    }

    void row(std::span<const double> values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) text_ += ',';
            text_ += format_cell(values[i]);
        }
        text_ += '\n';
    }

    const std::string& text() const { return text_; }

private:
    std::string text_;
};

const std::vector<std::string> kMomentColumns{"t",      "mean_x", "var_x",  "mean_pd",  "mean_po",  "mean_pc",  "mean_pq", "var_pd",
                                              "var_po", "var_pc", "var_pq", "cov_x_pd", "cov_x_po", "cov_x_pc", "cov_x_pq"};
const std::vector<std::string> kUrColumns{"t", "slack_osmotic", "slack_drift", "slack_schrodinger", "slack_heisenberg",
                                          "decomposition_residual"};
const std::vector<std::string> kEnergyColumns{"t", "E"};
const std::vector<std::string> kEnsembleColumns{"t", "ks", "tv", "sample_mean", "sample_var"};

std::vector<double> moment_row(const MomentReport& m) {
    return {m.t,      m.mean_x, m.var_x,  m.mean_pd,  m.mean_po,  m.mean_pc,  m.mean_pq, m.var_pd,
            m.var_po, m.var_pc, m.var_pq, m.cov_x_pd, m.cov_x_po, m.cov_x_pc, m.cov_x_pq};
}

std::vector<double> ur_row(const URReport& u) {
    return {u.t, u.slack_osmotic, u.slack_drift, u.slack_schrodinger, u.slack_heisenberg, u.decomposition_residual};
}

bool uses_sampler(ExperimentKind kind) {
    return kind == ExperimentKind::hybrid_static || kind == ExperimentKind::ensemble_consistency;
}

ordered_json series(std::span<const std::string> columns, const std::vector<std::vector<double>>& rows) {
    ordered_json out = ordered_json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        ordered_json col = ordered_json::array();
        for (const auto& r : rows) col.push_back(r[c]);
        out[columns[c]] = std::move(col);
    }
    return out;
}

ordered_json summary(const RunArtifacts& run, const std::vector<std::vector<double>>& moments,
                     const std::vector<std::vector<double>>& ur, const std::vector<std::vector<double>>& energy,
                     const std::vector<std::vector<double>>& ensemble) {
    ordered_json j;
    j["run_id"] = run.run_id;
    j["experiment"] = std::string{experiment_name(run.kind)};
    j["passed"] = run.passed();
    j["aborted"] = run.aborted;
    if (run.aborted) j["abort_message"] = run.abort_message;
    ordered_json config = ordered_json::object();
    for (const auto& [key, value] : run.config) config[key] = value;
    j["config"] = std::move(config);

    ordered_json verdicts = ordered_json::array();
    for (const auto& v : run.verdicts) {
        ordered_json e;
        e["id"] = v.id;
        e["criterion"] = v.criterion;
        e["description"] = v.description;
        e["passed"] = v.passed;
        e["measured"] = v.measured;
        e["relation"] = v.relation;
        e["threshold"] = v.threshold;
        if (v.relation == "within") e["target"] = v.target;
        verdicts.push_back(std::move(e));
    }
    j["verdicts"] = std::move(verdicts);

    ordered_json diagnostics = ordered_json::array();
    for (const auto& d : run.diagnostics) diagnostics.push_back({{"id", d.id}, {"description", d.description}, {"value", d.value}});
    j["diagnostics"] = std::move(diagnostics);
    j["excised_walker_steps"] = run.excised_walker_steps;

    j["moments"] = series(kMomentColumns, moments);
    j["uncertainty"] = series(kUrColumns, ur);
    j["energy"] = series(kEnergyColumns, energy);
    if (uses_sampler(run.kind)) j["ensemble"] = series(kEnsembleColumns, ensemble);
    ordered_json tables = ordered_json::object();
    for (const auto& t : run.tables) tables[t.name] = series(t.columns, t.rows);
    j["tables"] = std::move(tables);
    return j;
}

} // namespace

std::vector<std::filesystem::path> write_artifacts(const RunArtifacts& run, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error{"cannot create " + out_dir.string() + ": " + ec.message()};

    std::vector<std::vector<double>> moments, ur, energy, ensemble;
    for (const auto& m : run.moments) moments.push_back(moment_row(m));
    for (const auto& u : run.uncertainty) ur.push_back(ur_row(u));
    for (const auto& e : run.energy) energy.push_back({e.t, e.E});
    for (const auto& s : run.ensemble) ensemble.push_back({s.t, s.ks, s.tv, s.sample_mean, s.sample_var});

    std::vector<std::filesystem::path> paths;
    const auto emit = [&](const std::string& name, std::span<const std::string> columns,
                          const std::vector<std::vector<double>>& rows) {
        CsvWriter csv{columns};
        for (const auto& r : rows) csv.row(r);
        paths.push_back(out_dir / (name + ".csv"));
        write_text(paths.back(), csv.text());
    };

    paths.push_back(out_dir / "summary.json");
    write_text(paths.back(), summary(run, moments, ur, energy, ensemble).dump(2) + "\n");
    emit("moments", kMomentColumns, moments);
    emit("ur", kUrColumns, ur);
    emit("energy", kEnergyColumns, energy);
    if (uses_sampler(run.kind)) emit("ensemble", kEnsembleColumns, ensemble);
    for (const auto& t : run.tables) emit(t.name, t.columns, t.rows);
    return paths;
}

} // namespace edlab
