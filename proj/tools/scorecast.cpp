#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "scorecast/scorecast.hpp"

namespace sc = scorecast;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Configuration: defaults, file overrides, canonical hash.

json default_config() {
    return json{
        {"model", "garch"},
        {"calibration_scores", json::array({"LS"})},
        {"evaluation_scores", json::array()},
        {"var_levels", json::array({0.01, 0.025, 0.05, 0.10})},
        {"initial_window", 1000},
        {"holdout", 0},
        {"reestimation_stride", 1},
        {"seed", 1},
        {"simulate",
         {{"scenario", "gaussian_garch"},
          {"nu", 12.0},
          {"shape", 0.0},
          {"length", 6000},
          {"burn_in", 1000}}},
        {"search",
         {{"initial_step", 0.25},
          {"diameter_tol", 1e-6},
          {"max_iterations", 2000},
          {"restarts", 1}}},
        {"murphy",
         {{"level", 0.05},
          {"grid_size", 201},
          {"bootstrap_reps", 1000},
          {"block_length", 0},
          {"ci_level", 0.95}}},
        {"trade",
         {{"rule", "probability"},
          {"hedge_weight", 0.05},
          {"prob_threshold", 0.5},
          {"percentile", 0.80},
          {"level_threshold", 40.0},
          {"non_signal", "cash"},
          {"annualization", 252.0}}},
    };
}

void reject_unknown_keys(const json& given, const json& allowed, const std::string& where) {
    for (auto it = given.begin(); it != given.end(); ++it) {
        if (!allowed.contains(it.key())) {
            throw std::runtime_error("config: unknown key '" + where + it.key() + "'");
        }
        if (it.value().is_object() && allowed.at(it.key()).is_object()) {
            reject_unknown_keys(it.value(), allowed.at(it.key()), where + it.key() + ".");
        }
    }
}

json merge_config(json base, const json& overrides, const std::string& where = "") {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
            base[it.key()] = merge_config(base[it.key()], it.value(), where + it.key() + ".");
        } else {
            base[it.key()] = it.value();
        }
    }
    return base;
}

json load_config(const std::string& path) {
    json cfg = default_config();
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json user;
    try {
        in >> user;
    } catch (const json::exception& e) {
        throw std::runtime_error("config: " + path + ": " + e.what());
    }
    if (!user.is_object()) throw std::runtime_error("config: top level must be an object");
    reject_unknown_keys(user, cfg, "");
    return merge_config(cfg, user);
}

// Canonical serialization (nlohmann keeps object keys sorted) hashed into
// every output so files are traceable to the exact settings.
std::uint64_t config_hash(const json& cfg) { return sc::fnv1a64(cfg.dump()); }

std::vector<sc::ScoreSpec> parse_score_list(const json& arr, const std::string& what) {
    std::vector<sc::ScoreSpec> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw std::runtime_error("config: " + what + " must be strings");
        out.push_back(sc::parse_score(v.get<std::string>()));
    }
    return out;
}

sc::ModelKind parse_model(const std::string& name) {
    if (name == "garch") return sc::ModelKind::Garch;
    if (name == "har_garch") return sc::ModelKind::HarGarch;
    throw std::runtime_error("config: unknown model '" + name + "' (garch, har_garch)");
}

sc::Scenario parse_scenario(const std::string& name) {
    if (name == "gaussian_garch") return sc::Scenario::GaussianGarch;
    if (name == "student_t_garch") return sc::Scenario::StudentTGarch;
    if (name == "skew_normal_sv") return sc::Scenario::SkewNormalSv;
    throw std::runtime_error("config: unknown scenario '" + name +
                             "' (gaussian_garch, student_t_garch, skew_normal_sv)");
}

sc::NelderMeadOptions parse_search(const json& j) {
    sc::NelderMeadOptions o;
    o.initial_step = j.at("initial_step").get<double>();
    o.diameter_tol = j.at("diameter_tol").get<double>();
    o.max_iterations = j.at("max_iterations").get<std::size_t>();
    o.restarts = j.at("restarts").get<std::size_t>();
    return o;
}

sc::BacktestConfig parse_backtest(const json& cfg) {
    sc::BacktestConfig bt;
    bt.model = parse_model(cfg.at("model").get<std::string>());
    bt.calibration_scores = parse_score_list(cfg.at("calibration_scores"), "calibration_scores");
    bt.evaluation_scores = parse_score_list(cfg.at("evaluation_scores"), "evaluation_scores");
    bt.var_levels = cfg.at("var_levels").get<std::vector<double>>();
    bt.initial_window = cfg.at("initial_window").get<std::size_t>();
    bt.holdout = cfg.at("holdout").get<std::size_t>();
    bt.reestimation_stride = cfg.at("reestimation_stride").get<std::size_t>();
    bt.search = parse_search(cfg.at("search"));
    return bt;
}

// ---------------------------------------------------------------------------
// Output helpers.

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

// Shortest round-trip decimal, e.g. 0.05 rather than 0.050000000000000003.
std::string level_tag(double p) { return fmt::format("{}", p); }

std::string file_tag(const std::string& s) {
    std::string tag = s;
    for (char& c : tag) {
        if (c == '.') c = 'p';
    }
    return tag;
}

std::string synthetic_date(std::size_t i) {
    return fmt::format("{:04}-{:02}-{:02}", 2000 + i / 372, 1 + i / 31 % 12, 1 + i % 31);
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

json params_to_json(const sc::ModelParams& p) {
    if (const auto* g = std::get_if<sc::GarchParams>(&p)) {
        return {{"mu", g->mu}, {"alpha0", g->alpha0}, {"alpha1", g->alpha1}, {"beta1", g->beta1}};
    }
    const auto& h = std::get<sc::HarGarchParams>(p);
    return {{"beta0", h.beta0},   {"beta1", h.beta1},   {"beta2", h.beta2}, {"beta3", h.beta3},
            {"alpha0", h.alpha0}, {"alpha1", h.alpha1}, {"alpha2", h.alpha2}};
}

// ---------------------------------------------------------------------------
// Backtest records on disk. One CSV per calibration score; cells for dates
// without a usable predictive stay empty.

struct RecordsFile {
    std::string score;
    std::vector<double> var_levels;
    std::vector<std::string> eval_names;
    std::vector<sc::BacktestRecord> records;
    std::vector<std::string> dates;
};

std::string records_filename(const std::string& score_name) {
    return "records_" + file_tag(score_name) + ".csv";
}

void write_records(const std::string& path, std::uint64_t hash, const sc::BacktestResult& res,
                   const sc::ScoreTrack& track, const std::vector<std::string>& dates) {
    std::vector<std::string> header = {"t", "date", "score", "realized", "mean", "sd"};
    for (double p : res.config.var_levels) header.push_back("var_" + level_tag(p));
    for (double p : res.config.var_levels) header.push_back("es_" + level_tag(p));
    for (const auto& s : res.config.evaluation_scores) header.push_back("eval_" + s.name());
    for (const char* flag : {"recalibrated", "converged", "boundary_warning",
                             "calibration_failed", "valid"}) {
        header.push_back(flag);
    }

    std::vector<std::vector<std::string>> rows;
    rows.reserve(track.records.size());
    for (const auto& r : track.records) {
        std::vector<std::string> row = {std::to_string(r.t), dates[r.t], track.score.name(),
                                        sc::fmt_g17(r.realized)};
        if (r.valid) {
            row.push_back(sc::fmt_g17(r.mean));
            row.push_back(sc::fmt_g17(r.sd));
            for (double v : r.var) row.push_back(sc::fmt_g17(v));
            for (double v : r.es) row.push_back(sc::fmt_g17(v));
            for (double v : r.eval_scores) row.push_back(sc::fmt_g17(v));
        } else {
            const std::size_t blanks =
                2 + 2 * res.config.var_levels.size() + res.config.evaluation_scores.size();
            row.insert(row.end(), blanks, "");
        }
        for (bool b : {r.recalibrated, r.converged, r.boundary_warning, r.calibration_failed,
                       r.valid}) {
            row.push_back(b ? "1" : "0");
        }
        rows.push_back(std::move(row));
    }
    sc::write_table_csv(path, hash, header, rows);
}

RecordsFile read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    RecordsFile out;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    std::size_t flags_at = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = sc::detail::split_csv(line);
        if (header.empty()) {
            header = fields;
            if (header.size() < 11 || header[0] != "t" || header[1] != "date" ||
                header[2] != "score" || header[3] != "realized") {
                throw std::runtime_error(path + ": not a backtest records file");
            }
            for (const auto& h : header) {
                if (h.rfind("var_", 0) == 0) {
                    out.var_levels.push_back(std::stod(h.substr(4)));
                } else if (h.rfind("eval_", 0) == 0) {
                    out.eval_names.push_back(h.substr(5));
                }
            }
            flags_at = header.size() - 5;
            continue;
        }
        if (fields.size() != header.size()) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": wrong field count");
        }
        if (out.score.empty()) out.score = fields[2];
        sc::BacktestRecord r;
        r.t = static_cast<std::size_t>(std::stoull(fields[0]));
        out.dates.push_back(fields[1]);
        r.realized = sc::detail::parse_number(fields[3], path, lineno);
        r.valid = fields[flags_at + 4] == "1";
        if (r.valid) {
            r.mean = sc::detail::parse_number(fields[4], path, lineno);
            r.sd = sc::detail::parse_number(fields[5], path, lineno);
            std::size_t col = 6;
            for (std::size_t k = 0; k < out.var_levels.size(); ++k) {
                r.var.push_back(sc::detail::parse_number(fields[col++], path, lineno));
            }
            for (std::size_t k = 0; k < out.var_levels.size(); ++k) {
                r.es.push_back(sc::detail::parse_number(fields[col++], path, lineno));
            }
            for (std::size_t k = 0; k < out.eval_names.size(); ++k) {
                r.eval_scores.push_back(sc::detail::parse_number(fields[col++], path, lineno));
            }
        }
        r.recalibrated = fields[flags_at] == "1";
        r.converged = fields[flags_at + 1] == "1";
        r.boundary_warning = fields[flags_at + 2] == "1";
        r.calibration_failed = fields[flags_at + 3] == "1";
        out.records.push_back(std::move(r));
    }
    if (out.records.empty()) throw std::runtime_error(path + ": no records");
    return out;
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_simulate(const json& cfg, const std::string& out_dir) {
    const auto& s = cfg.at("simulate");
    sc::DgpSpec spec;
    spec.scenario = parse_scenario(s.at("scenario").get<std::string>());
    spec.nu = s.at("nu").get<double>();
    spec.shape = s.at("shape").get<double>();
    spec.length = s.at("length").get<std::size_t>();
    spec.burn_in = s.at("burn_in").get<std::size_t>();
    spec.seed = cfg.at("seed").get<std::uint64_t>();

    const std::vector<double> y = sc::simulate(spec);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        rows.push_back({synthetic_date(i), sc::fmt_g17(y[i])});
    }
    const std::string path = out_path(out_dir, "series.csv");
    sc::write_table_csv(path, config_hash(cfg), {"date", "value"}, rows);
    fmt::print("wrote {} ({} observations)\n", path, y.size());
    return 0;
}

int cmd_returns(const json& cfg, const std::string& series_path, const std::string& out_dir) {
    const sc::TimeSeries levels = sc::load_series(series_path);
    if (levels.size() < 2) throw std::runtime_error("returns: need at least 2 level observations");
    std::vector<std::vector<std::string>> rows;
    rows.reserve(levels.size() - 1);
    for (std::size_t t = 1; t < levels.size(); ++t) {
        if (!(levels.values[t] > 0.0) || !(levels.values[t - 1] > 0.0)) {
            throw std::runtime_error("returns: levels must be positive (date " +
                                     levels.dates[t] + ")");
        }
        const double r = 100.0 * std::log(levels.values[t] / levels.values[t - 1]);
        rows.push_back({levels.dates[t], sc::fmt_g17(r)});
    }
    const std::string path = out_path(out_dir, "returns.csv");
    sc::write_table_csv(path, config_hash(cfg), {"date", "value"}, rows);
    fmt::print("wrote {} ({} returns)\n", path, rows.size());
    return 0;
}

int cmd_calibrate(const json& cfg, const std::string& series_path, const std::string& out_dir) {
    const sc::TimeSeries ts = sc::load_series(series_path);
    const sc::ModelKind model = parse_model(cfg.at("model").get<std::string>());
    const auto scores = parse_score_list(cfg.at("calibration_scores"), "calibration_scores");
    if (scores.empty()) throw std::runtime_error("config: calibration_scores is empty");
    const auto search = parse_search(cfg.at("search"));

    std::vector<std::string> header = {"score", "criterion", "iterations", "converged",
                                       "boundary_warning"};
    const std::vector<std::string> param_names =
        model == sc::ModelKind::Garch
            ? std::vector<std::string>{"mu", "alpha0", "alpha1", "beta1"}
            : std::vector<std::string>{"beta0", "beta1", "beta2", "beta3",
                                       "alpha0", "alpha1", "alpha2"};
    header.insert(header.end(), param_names.begin(), param_names.end());

    std::vector<std::vector<std::string>> rows;
    for (const auto& spec : scores) {
        sc::CalibrationProblem problem;
        problem.model = model;
        problem.score = spec;
        problem.window = ts.values;
        problem.search = search;
        const sc::CalibrationResult res = sc::calibrate(problem);
        std::vector<std::string> row = {spec.name(), sc::fmt_g17(res.criterion),
                                        std::to_string(res.iterations),
                                        res.converged ? "1" : "0",
                                        res.boundary_warning ? "1" : "0"};
        const json pj = params_to_json(res.params);
        for (const auto& name : param_names) row.push_back(sc::fmt_g17(pj.at(name).get<double>()));
        rows.push_back(std::move(row));
        fmt::print("{}: criterion {} ({})\n", spec.name(), res.criterion,
                   res.converged ? "converged" : "iteration cap");
    }
    const std::string path = out_path(out_dir, "calibration.csv");
    sc::write_table_csv(path, config_hash(cfg), header, rows);
    fmt::print("wrote {}\n", path);
    return 0;
}

int cmd_backtest(const json& cfg, const std::string& series_path, const std::string& out_dir,
                 std::size_t threads) {
    const sc::TimeSeries ts = sc::load_series(series_path);
    const sc::BacktestConfig bt = parse_backtest(cfg);
    const sc::BacktestResult res = sc::run_backtest(bt, ts.values, threads);
    const std::uint64_t hash = config_hash(cfg);

    json summary;
    summary["config"] = cfg;
    summary["config_hash"] = sc::hash_hex(hash);
    summary["n_observations"] = ts.size();
    summary["holdout"] = res.config.holdout;
    json tracks = json::array();
    for (const auto& track : res.tracks) {
        const std::string path = out_path(out_dir, records_filename(track.score.name()));
        write_records(path, hash, res, track, ts.dates);
        fmt::print("wrote {}\n", path);

        json tj;
        tj["score"] = track.score.name();
        tj["records_file"] = records_filename(track.score.name());
        std::size_t n_valid = 0;
        for (const auto& r : track.records) n_valid += r.valid;
        tj["valid_records"] = n_valid;
        json avg;
        for (std::size_t j = 0; j < res.config.evaluation_scores.size(); ++j) {
            avg[res.config.evaluation_scores[j].name()] = track.avg_eval_scores[j];
        }
        tj["avg_eval_scores"] = avg;
        if (track.final_params) tj["final_params"] = params_to_json(*track.final_params);
        json rates;
        for (std::size_t k = 0; k < res.config.var_levels.size(); ++k) {
            if (n_valid > 0) {
                rates[level_tag(res.config.var_levels[k])] =
                    sc::exceedance_rate(track.records, k);
            }
        }
        tj["exceedance_rates"] = rates;
        tracks.push_back(std::move(tj));
    }
    summary["tracks"] = tracks;
    const std::string spath = out_path(out_dir, "summary.json");
    write_json(spath, summary);
    fmt::print("wrote {}\n", spath);
    return 0;
}

int cmd_evaluate(const json& cfg, const std::vector<std::string>& record_paths,
                 const std::string& out_dir) {
    if (record_paths.empty()) {
        throw std::runtime_error("evaluate: pass at least one --records file");
    }
    std::vector<RecordsFile> files;
    files.reserve(record_paths.size());
    for (const auto& p : record_paths) files.push_back(read_records(p));
    const std::uint64_t hash = config_hash(cfg);

    // Coverage table, optimizer rows by VaR level columns: exceedance
    // proportions first, conditional coverage p-values alongside.
    const std::vector<double>& levels = files[0].var_levels;
    for (const auto& f : files) {
        if (f.var_levels != levels) {
            throw std::runtime_error("evaluate: records files disagree on VaR levels");
        }
    }
    std::vector<std::string> cov_header = {"score"};
    for (double p : levels) cov_header.push_back("exceed_" + level_tag(p));
    for (double p : levels) cov_header.push_back("p_cc_" + level_tag(p));
    std::vector<std::vector<std::string>> cov_rows;
    for (const auto& f : files) {
        std::vector<std::string> row = {f.score};
        std::vector<std::string> pvals;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const auto hits = sc::exceedances(f.records, k);
            if (hits.size() < 2) {
                row.push_back("");
                pvals.push_back("");
                continue;
            }
            const auto cc = sc::christoffersen_cc(hits, levels[k]);
            row.push_back(sc::fmt_g17(cc.hit_rate));
            pvals.push_back(sc::fmt_g17(cc.p_cc));
        }
        row.insert(row.end(), pvals.begin(), pvals.end());
        cov_rows.push_back(std::move(row));
    }
    const std::string cov_path = out_path(out_dir, "coverage.csv");
    sc::write_table_csv(cov_path, hash, cov_header, cov_rows);
    fmt::print("wrote {}\n", cov_path);

    // Pairwise equal-predictive-accuracy tests on every shared evaluation
    // score, restricted to dates both tracks could forecast.
    std::vector<std::vector<std::string>> epa_rows;
    for (std::size_t a = 0; a < files.size(); ++a) {
        for (std::size_t b = a + 1; b < files.size(); ++b) {
            for (std::size_t ja = 0; ja < files[a].eval_names.size(); ++ja) {
                const auto& name = files[a].eval_names[ja];
                const auto itb = std::find(files[b].eval_names.begin(),
                                           files[b].eval_names.end(), name);
                if (itb == files[b].eval_names.end()) continue;
                const std::size_t jb =
                    static_cast<std::size_t>(itb - files[b].eval_names.begin());
                std::map<std::size_t, double> sb;
                for (const auto& r : files[b].records) {
                    if (r.valid) sb[r.t] = r.eval_scores[jb];
                }
                std::vector<double> da, db;
                for (const auto& r : files[a].records) {
                    if (!r.valid) continue;
                    const auto hit = sb.find(r.t);
                    if (hit == sb.end()) continue;
                    if (!std::isfinite(r.eval_scores[ja]) || !std::isfinite(hit->second)) continue;
                    da.push_back(r.eval_scores[ja]);
                    db.push_back(hit->second);
                }
                if (da.size() < 2) continue;
                const auto gw = sc::gw_test(da, db);
                epa_rows.push_back({name, files[a].score, files[b].score,
                                    sc::fmt_g17(gw.mean_diff), sc::fmt_g17(gw.hac_se),
                                    sc::fmt_g17(gw.statistic), sc::fmt_g17(gw.p_value),
                                    std::to_string(gw.lags), std::to_string(gw.n)});
            }
        }
    }
    const std::string epa_path = out_path(out_dir, "epa.csv");
    sc::write_table_csv(epa_path, hash,
                        {"eval_score", "track_a", "track_b", "mean_diff", "hac_se", "statistic",
                         "p_value", "lags", "n"},
                        epa_rows);
    fmt::print("wrote {}\n", epa_path);

    // Murphy diagrams for every pair of tracks at the configured level.
    const auto& mj = cfg.at("murphy");
    const double level = mj.at("level").get<double>();
    std::size_t level_idx = levels.size();
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] == level) level_idx = k;
    }
    if (level_idx == levels.size()) {
        throw std::runtime_error("evaluate: murphy.level " + level_tag(level) +
                                 " is not one of the records' VaR levels");
    }
    sc::MurphyOptions mopt;
    mopt.grid_size = mj.at("grid_size").get<std::size_t>();
    mopt.bootstrap_reps = mj.at("bootstrap_reps").get<std::size_t>();
    mopt.block_length = mj.at("block_length").get<std::size_t>();
    mopt.ci_level = mj.at("ci_level").get<double>();
    mopt.seed = cfg.at("seed").get<std::uint64_t>();

    for (std::size_t a = 0; a < files.size(); ++a) {
        for (std::size_t b = a + 1; b < files.size(); ++b) {
            std::map<std::size_t, const sc::BacktestRecord*> rb;
            for (const auto& r : files[b].records) {
                if (r.valid) rb[r.t] = &r;
            }
            std::vector<sc::VarEsPair> fa, fb;
            std::vector<double> realized;
            for (const auto& r : files[a].records) {
                if (!r.valid) continue;
                const auto hit = rb.find(r.t);
                if (hit == rb.end()) continue;
                fa.push_back({r.var[level_idx], r.es[level_idx]});
                fb.push_back({hit->second->var[level_idx], hit->second->es[level_idx]});
                realized.push_back(r.realized);
            }
            if (realized.size() < 2) continue;
            const sc::MurphyCurve curve = sc::murphy_diagram(fa, fb, realized, level, mopt);
            std::vector<std::vector<std::string>> rows;
            rows.reserve(curve.eta.size());
            for (std::size_t k = 0; k < curve.eta.size(); ++k) {
                rows.push_back({sc::fmt_g17(curve.eta[k]), sc::fmt_g17(curve.mean_a[k]),
                                sc::fmt_g17(curve.mean_b[k]), sc::fmt_g17(curve.diff[k]),
                                sc::fmt_g17(curve.ci_lower[k]), sc::fmt_g17(curve.ci_upper[k])});
            }
            const std::string name =
                "murphy_" + file_tag(files[a].score) + "_vs_" + file_tag(files[b].score) + ".csv";
            const std::string mpath = out_path(out_dir, name);
            sc::write_table_csv(mpath, hash,
                                {"eta", "mean_a", "mean_b", "diff", "ci_lower", "ci_upper"},
                                rows);
            fmt::print("wrote {}\n", mpath);
        }
    }
    return 0;
}

int cmd_trade(const json& cfg, const std::string& market_path, const std::string& out_dir,
              std::size_t threads) {
    const sc::MarketData md = sc::load_market(market_path);
    const auto& tj = cfg.at("trade");
    sc::StrategySpec spec;
    spec.hedge_weight = tj.at("hedge_weight").get<double>();
    spec.prob_threshold = tj.at("prob_threshold").get<double>();
    spec.percentile = tj.at("percentile").get<double>();
    spec.level_threshold = tj.at("level_threshold").get<double>();
    spec.annualization = tj.at("annualization").get<double>();
    const std::string ns = tj.at("non_signal").get<std::string>();
    if (ns == "cash") {
        spec.non_signal = sc::NonSignalMode::Cash;
    } else if (ns == "full_stock") {
        spec.non_signal = sc::NonSignalMode::FullStock;
    } else {
        throw std::runtime_error("config: trade.non_signal must be cash or full_stock");
    }
    const std::string rule = tj.at("rule").get<std::string>();
    if (rule != "probability" && rule != "percentile" && rule != "static") {
        throw std::runtime_error("config: trade.rule must be probability, percentile or static");
    }

    // Volatility signals come from score-calibrated predictives of the log
    // index level.
    sc::BacktestConfig bt = parse_backtest(cfg);
    std::vector<double> log_vix(md.size());
    for (std::size_t i = 0; i < md.size(); ++i) log_vix[i] = std::log(md.vix[i]);
    const sc::BacktestResult res = sc::run_backtest(bt, log_vix, threads);
    const std::uint64_t hash = config_hash(cfg);

    const std::size_t first = res.config.initial_window;
    const std::size_t holdout = res.config.holdout;
    std::vector<double> rf_slice, stock_slice;
    for (std::size_t i = 0; i < holdout; ++i) {
        rf_slice.push_back(md.rf_return[first + i]);
        stock_slice.push_back(md.stock_return[first + i]);
    }
    sc::MarketData held;
    held.dates.assign(md.dates.begin() + static_cast<std::ptrdiff_t>(first),
                      md.dates.begin() + static_cast<std::ptrdiff_t>(first + holdout));
    held.vix.assign(md.vix.begin() + static_cast<std::ptrdiff_t>(first),
                    md.vix.begin() + static_cast<std::ptrdiff_t>(first + holdout));
    held.futures_open.assign(md.futures_open.begin() + static_cast<std::ptrdiff_t>(first),
                             md.futures_open.begin() + static_cast<std::ptrdiff_t>(first + holdout));
    held.futures_close.assign(
        md.futures_close.begin() + static_cast<std::ptrdiff_t>(first),
        md.futures_close.begin() + static_cast<std::ptrdiff_t>(first + holdout));
    held.stock_return = stock_slice;
    held.rf_return = rf_slice;

    std::vector<std::string> sum_header = {"strategy", "annualized_return", "annualized_vol",
                                           "sharpe", "degenerate", "signal_days"};
    std::vector<std::vector<std::string>> sum_rows;
    auto add_summary = [&](const std::string& name, const std::vector<double>& returns,
                           std::size_t signal_days) {
        const auto stats = sc::portfolio_stats(returns, rf_slice, spec.annualization);
        sum_rows.push_back({name, sc::fmt_g17(stats.annualized_return),
                            sc::fmt_g17(stats.annualized_vol), sc::fmt_g17(stats.sharpe),
                            stats.degenerate ? "1" : "0", std::to_string(signal_days)});
    };

    for (const auto& track : res.tracks) {
        std::vector<bool> signals(holdout, false);
        std::size_t n_signal = 0;
        for (std::size_t i = 0; i < holdout; ++i) {
            const auto& r = track.records[i];
            if (!r.valid) continue;
            bool on = false;
            if (rule == "static") {
                on = true;
            } else if (rule == "probability") {
                on = sc::prob_up_signal({r.mean, r.sd}, md.vix[r.t - 1], spec.prob_threshold);
            } else {
                on = sc::percentile_level_signal({r.mean, r.sd}, spec.percentile,
                                                 spec.level_threshold);
            }
            signals[i] = on;
            n_signal += on;
        }
        const std::vector<double> returns = sc::run_strategy(held, signals, spec);

        std::vector<std::vector<std::string>> rows;
        rows.reserve(holdout);
        for (std::size_t i = 0; i < holdout; ++i) {
            rows.push_back({held.dates[i], track.score.name(), signals[i] ? "1" : "0",
                            sc::fmt_g17(returns[i])});
        }
        const std::string name = "trade_returns_" + file_tag(track.score.name()) + ".csv";
        const std::string rpath = out_path(out_dir, name);
        sc::write_table_csv(rpath, hash, {"date", "score", "signal", "return"}, rows);
        fmt::print("wrote {}\n", rpath);
        add_summary(track.score.name() + "_" + rule, returns, n_signal);
    }

    // Reference legs: the hedge always on, and no hedge at all.
    add_summary("always_hedged",
                sc::run_strategy(held, std::vector<bool>(holdout, true), spec), holdout);
    add_summary("stock_only", stock_slice, 0);

    const std::string spath = out_path(out_dir, "trade_summary.csv");
    sc::write_table_csv(spath, hash, sum_header, sum_rows);
    fmt::print("wrote {}\n", spath);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Score-calibrated density forecasting and risk evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", series_path, market_path;
    std::vector<std::string> record_paths;
    std::optional<std::uint64_t> seed_override;
    std::size_t threads = 1;

    app.add_option("--config", config_path, "JSON experiment configuration");
    app.add_option("--out-dir", out_dir, "output directory (created if missing)");
    app.add_option("--seed", seed_override, "root seed override");
    // Worker count never changes results, so it stays out of the config hash.
    app.add_option("--threads", threads, "worker threads for backtests")
        ->check(CLI::Range(std::size_t{1}, std::size_t{64}));

    auto* sim = app.add_subcommand("simulate", "generate a synthetic series");
    auto* cal = app.add_subcommand("calibrate", "fit score-optimal parameters to a series");
    cal->add_option("--series", series_path, "date,value CSV")->required();
    auto* bt = app.add_subcommand("backtest", "expanding-window forecast backtest");
    bt->add_option("--series", series_path, "date,value CSV")->required();
    auto* ev = app.add_subcommand("evaluate", "coverage, accuracy and Murphy reports");
    ev->add_option("--records", record_paths, "records CSV from a backtest run")->required();
    auto* tr = app.add_subcommand("trade", "volatility-hedged strategy backtest");
    tr->add_option("--market", market_path, "six-column market CSV")->required();
    auto* ret = app.add_subcommand("returns", "levels to continuously compounded returns");
    ret->add_option("--series", series_path, "date,value CSV of levels")->required();
    for (auto* sub : {sim, cal, bt, ev, tr, ret}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = load_config(config_path);
        if (seed_override) cfg["seed"] = *seed_override;

        if (sim->parsed()) return cmd_simulate(cfg, out_dir);
        if (cal->parsed()) return cmd_calibrate(cfg, series_path, out_dir);
        if (bt->parsed()) return cmd_backtest(cfg, series_path, out_dir, threads);
        if (ev->parsed()) return cmd_evaluate(cfg, record_paths, out_dir);
        if (tr->parsed()) return cmd_trade(cfg, market_path, out_dir, threads);
        if (ret->parsed()) return cmd_returns(cfg, series_path, out_dir);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
