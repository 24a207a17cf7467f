// fedlab command-line front-end: run strategy comparisons, extract metric
// sidecars, aggregate checkpoint directories offline, compare run summaries,
// and render terminal sparklines from round logs.
//
// Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedlab/errors.hpp"
#include "fedlab/experiment_config.hpp"
#include "fedlab/fedsim.hpp"
#include "fedlab/model_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kAccuracyThreshold = 0.85;
constexpr int kSummaryVersion = 1;
constexpr char kCsvHeader[] =
    "round,strategy,accuracy,loss,client_macs,server_macs,wall_seconds";

// Locale-independent fixed-point formatting, 6 decimal places.
std::string fixed6(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::fixed, 6);
    return std::string(buf, res.ptr);
}

fedlab::HealthTermMode health_mode_from_name(const std::string& name) {
    if (name == "bounded") return fedlab::HealthTermMode::Bounded;
    if (name == "literal") return fedlab::HealthTermMode::LiteralGuarded;
    throw fedlab::ConfigError("--health-mode must be 'bounded' or 'literal'");
}

void require_fresh_or_overwrite(const fs::path& path, bool overwrite) {
    if (!overwrite && fs::exists(path)) {
        throw fedlab::IoError("refusing to overwrite " + path.string() +
                              " (pass --overwrite to replace it)");
    }
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fedlab::IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw fedlab::IoError("read failed for " + path.string());
    return std::move(buf).str();
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw fedlab::IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw fedlab::IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> rounds;
    std::optional<std::string> strategy;
    std::optional<std::string> health_mode;
    bool timing = false;
    bool overwrite = false;
};

std::string rounds_csv_text(const std::vector<fedlab::ExperimentResult>& results) {
    std::string csv = std::string(kCsvHeader) + "\n";
    for (const fedlab::ExperimentResult& result : results) {
        for (const fedlab::RoundRecord& rec : result.rounds) {
            csv += std::to_string(rec.round);
            csv += ',';
            csv += fedlab::strategy_name(rec.strategy);
            csv += ',';
            csv += fixed6(rec.accuracy);
            csv += ',';
            csv += fixed6(rec.loss);
            csv += ',';
            csv += std::to_string(rec.client_macs);
            csv += ',';
            csv += std::to_string(rec.server_macs);
            csv += ',';
            csv += fixed6(rec.wall_seconds);
            csv += '\n';
        }
    }
    return csv;
}

json summary_json(const fedlab::ExperimentResult& result,
                  const fedlab::ExperimentConfig& cfg) {
    double best_accuracy = result.final_eval.accuracy;
    double final_accuracy = result.final_eval.accuracy;
    double final_loss = result.final_eval.loss;
    long long total_client = 0;
    long long total_server = 0;
    std::optional<int> rounds_to_threshold;
    for (const fedlab::RoundRecord& rec : result.rounds) {
        best_accuracy = std::max(best_accuracy, rec.accuracy);
        final_accuracy = rec.accuracy;
        final_loss = rec.loss;
        total_client += rec.client_macs;
        total_server += rec.server_macs;
        if (!rounds_to_threshold && rec.accuracy >= kAccuracyThreshold) {
            rounds_to_threshold = rec.round;
        }
    }

    json j;
    j["format_version"] = kSummaryVersion;
    j["strategy"] = fedlab::strategy_name(result.strategy);
    j["seed"] = cfg.seed;
    j["rounds"] = static_cast<int>(result.rounds.size());
    j["final_accuracy"] = final_accuracy;
    j["best_accuracy"] = best_accuracy;
    j["final_loss"] = final_loss;
    j["rounds_to_threshold"]["threshold"] = kAccuracyThreshold;
    j["rounds_to_threshold"]["rounds"] =
        rounds_to_threshold ? json(*rounds_to_threshold) : json(nullptr);
    j["total_client_macs"] = total_client;
    j["total_server_macs"] = total_server;
    j["wall_seconds_total"] = result.total_wall_seconds;
    return j;
}

// Artifact self-check: every file the command wrote must parse back with the
// promised schema before the process may exit 0.
void validate_rounds_csv(const fs::path& path, std::size_t expected_rows) {
    const std::string text = read_text_file(path);
    std::istringstream lines(text);
    std::string line;
    if (!std::getline(lines, line) || line != kCsvHeader) {
        throw fedlab::Error("artifact check: " + path.string() + " has a bad header");
    }
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string cell;
        int column = 0;
        while (std::getline(cells, cell, ',')) ++column;
        if (column != 7) {
            throw fedlab::Error("artifact check: " + path.string() +
                                " row has " + std::to_string(column) + " columns");
        }
        ++rows;
    }
    if (rows != expected_rows) {
        throw fedlab::Error("artifact check: " + path.string() + " has " +
                            std::to_string(rows) + " rows, expected " +
                            std::to_string(expected_rows));
    }
}

json parse_summary_file(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw fedlab::Error("summary " + path.string() + " is not valid JSON: " + e.what());
    }
    const char* number_keys[] = {"final_accuracy", "best_accuracy", "final_loss",
                                 "wall_seconds_total"};
    const char* integer_keys[] = {"format_version", "rounds", "total_client_macs",
                                  "total_server_macs", "seed"};
    for (const char* key : number_keys) {
        if (!j.contains(key) || !j[key].is_number()) {
            throw fedlab::Error("summary " + path.string() + " missing numeric key '" +
                                key + "'");
        }
    }
    for (const char* key : integer_keys) {
        if (!j.contains(key) || !j[key].is_number_integer()) {
            throw fedlab::Error("summary " + path.string() + " missing integer key '" +
                                key + "'");
        }
    }
    if (!j.contains("strategy") || !j["strategy"].is_string()) {
        throw fedlab::Error("summary " + path.string() + " missing string key 'strategy'");
    }
    if (!j.contains("rounds_to_threshold") || !j["rounds_to_threshold"].is_object() ||
        !j["rounds_to_threshold"].contains("rounds")) {
        throw fedlab::Error("summary " + path.string() + " missing rounds_to_threshold");
    }
    if (j["format_version"].get<int>() != kSummaryVersion) {
        throw fedlab::Error("summary " + path.string() + " has unsupported format_version");
    }
    return j;
}

int cmd_simulate(const SimulateArgs& args) {
    fedlab::LoadedConfig loaded;
    if (!args.config_path.empty()) {
        loaded = fedlab::load_experiment_config(args.config_path);
    }
    fedlab::ExperimentConfig& cfg = loaded.experiment;
    if (args.seed) cfg.seed = *args.seed;
    if (args.rounds) cfg.rounds = *args.rounds;
    if (args.strategy) cfg.strategies = {fedlab::strategy_from_name(*args.strategy)};
    if (args.health_mode) {
        cfg.fitness_weights.health_term_mode = health_mode_from_name(*args.health_mode);
    }
    if (args.timing) cfg.timing = true;
    cfg.validate();

    std::string out_name = args.out_dir;
    if (out_name.empty() && loaded.out_dir) out_name = *loaded.out_dir;
    if (out_name.empty()) {
        throw fedlab::ConfigError("simulate needs an output directory (--out DIR)");
    }
    const fs::path out(out_name);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) {
        throw fedlab::IoError("cannot create output directory " + out.string());
    }

    const fs::path csv_path = out / "rounds.csv";
    require_fresh_or_overwrite(csv_path, args.overwrite);
    std::vector<fs::path> summary_paths;
    for (fedlab::StrategyKind kind : cfg.strategies) {
        const fs::path p = out / ("summary_" + fedlab::strategy_name(kind) + ".json");
        require_fresh_or_overwrite(p, args.overwrite);
        summary_paths.push_back(p);
    }

    std::vector<fedlab::ExperimentResult> results;
    for (fedlab::StrategyKind kind : cfg.strategies) {
        std::cerr << "[fedlab] running " << fedlab::strategy_name(kind) << " for "
                  << cfg.rounds << " rounds (seed " << cfg.seed << ")\n";
        results.push_back(fedlab::run_experiment(cfg, kind));
    }

    write_text_file(csv_path, rounds_csv_text(results));
    std::size_t total_rows = 0;
    for (const fedlab::ExperimentResult& r : results) total_rows += r.rounds.size();

    for (std::size_t i = 0; i < results.size(); ++i) {
        write_text_file(summary_paths[i], summary_json(results[i], cfg).dump(2) + "\n");
    }

    validate_rounds_csv(csv_path, total_rows);
    for (const fs::path& p : summary_paths) parse_summary_file(p);

    for (const fedlab::ExperimentResult& r : results) {
        const json s = summary_json(r, cfg);
        std::cout << fedlab::strategy_name(r.strategy)
                  << ": final_accuracy " << fixed6(s["final_accuracy"].get<double>())
                  << ", final_loss " << fixed6(s["final_loss"].get<double>())
                  << ", rounds_to_" << fixed6(kAccuracyThreshold) << " "
                  << (s["rounds_to_threshold"]["rounds"].is_null()
                          ? std::string("never")
                          : std::to_string(s["rounds_to_threshold"]["rounds"].get<int>()))
                  << "\n";
    }
    std::cout << "wrote " << csv_path.string() << " and " << summary_paths.size()
              << " summaries\n";
    return 0;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
    std::string checkpoint;
    std::string prev;
    double sigma_target = 0.1;
    double zero_tolerance = 1e-12;
    bool overwrite = false;
};

int cmd_extract(const ExtractArgs& args) {
    fedlab::MetricConfig metric_cfg;
    metric_cfg.sigma_target = args.sigma_target;
    metric_cfg.zero_tolerance = args.zero_tolerance;
    metric_cfg.validate();

    std::optional<fs::path> prev;
    if (!args.prev.empty()) prev = fs::path(args.prev);

    const fedlab::MetadataSidecar sidecar = fedlab::extract_metadata(
        fs::path(args.checkpoint), prev, metric_cfg, args.overwrite);

    std::cout << "sparsity " << fixed6(sidecar.genotype.sparsity) << "\n"
              << "stability " << fixed6(sidecar.genotype.stability) << "\n"
              << "health " << fixed6(sidecar.genotype.health) << "\n"
              << "stability_assumed "
              << (sidecar.genotype.stability_assumed ? "true" : "false") << "\n";
    std::cout << "wrote " << fedlab::sidecar_path(args.checkpoint).string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// aggregate

struct AggregateArgs {
    std::string directory;
    std::string strategy;
    std::string out;
    std::uint64_t seed = 0;
    std::optional<std::string> health_mode;
    std::optional<int> elite_count;
    std::optional<int> generations;
    bool overwrite = false;
};

int cmd_aggregate(const AggregateArgs& args) {
    const fedlab::StrategyKind kind = fedlab::strategy_from_name(args.strategy);
    if (kind == fedlab::StrategyKind::FedSgd) {
        throw fedlab::ConfigError(
            "aggregate works on stored weights; fedsgd needs live gradients");
    }

    fedlab::MetricConfig metric_cfg;
    const std::vector<fedlab::Phenotype> population =
        fedlab::ingest_population(args.directory, metric_cfg);

    // Output architecture comes from the first checkpoint (ingestion already
    // guarantees equal element counts).
    const std::vector<fs::path> paths = fedlab::list_checkpoints(args.directory);
    const fedlab::Checkpoint first = fedlab::read_checkpoint(paths.front());
    fedlab::MlpArch arch;
    arch.dims = first.manifest.layer_dims;

    fedlab::WeightVector global;
    if (kind == fedlab::StrategyKind::FedAvg) {
        // Stored checkpoints carry no sample counts, so every model gets
        // equal importance.
        std::vector<fedlab::ClientUpdate> updates;
        for (const fedlab::Phenotype& p : population) {
            fedlab::ClientUpdate u;
            u.client_id = p.id;
            u.payload_kind = fedlab::ClientUpdate::Payload::Weights;
            u.payload = p.weights;
            u.num_samples = 1;
            updates.push_back(std::move(u));
        }
        global = fedlab::fedavg_aggregate(updates);
    } else {
        fedlab::EvolutionConfig evo;
        if (args.elite_count) evo.elites = fedlab::EliteSpec::from_count(*args.elite_count);
        if (args.generations) evo.generations = *args.generations;
        evo.rng_seed = args.seed;
        evo.validate();

        fedlab::FitnessWeights fitness;
        if (args.health_mode) {
            fitness.health_term_mode = health_mode_from_name(*args.health_mode);
        }
        fitness.validate();

        fedlab::SeededRng rng(evo.rng_seed);
        global = fedlab::run_evolution(population, evo, fitness, metric_cfg, rng)
                     .global_model;
    }

    require_fresh_or_overwrite(args.out, args.overwrite);
    std::string model_id = fs::path(args.out).stem().string();
    if (model_id.empty() ||
        !std::all_of(model_id.begin(), model_id.end(), [](char c) {
            return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                   (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        })) {
        model_id = "aggregate";
    }
    fedlab::write_checkpoint(global, arch, model_id, args.out, args.overwrite);
    fedlab::extract_metadata(args.out, std::nullopt, metric_cfg, true);

    // Self-check both artifacts before claiming success.
    fedlab::read_checkpoint(args.out);
    fedlab::read_sidecar(fedlab::sidecar_path(args.out));

    std::cout << "aggregated " << population.size() << " models (" << args.strategy
              << ") into " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareValue {
    double value = 0.0;
    bool missing = false;  // rounds_to_threshold can be null
};

int cmd_compare(const std::vector<std::string>& files) {
    std::vector<json> summaries;
    std::vector<std::string> labels;
    for (const std::string& file : files) {
        if (!fs::exists(file)) {
            throw fedlab::ConfigError("compare: no such file " + file);
        }
        json j;
        try {
            j = parse_summary_file(file);
        } catch (const fedlab::Error& e) {
            // A malformed summary is a usage problem for compare.
            throw fedlab::ConfigError(e.what());
        }
        labels.push_back(j["strategy"].get<std::string>());
        summaries.push_back(std::move(j));
    }

    struct Metric {
        std::string name;
        bool higher_is_better;
        bool integer;
    };
    const std::vector<Metric> metrics = {
        {"final_accuracy", true, false},
        {"final_loss", false, false},
        {"rounds_to_threshold", false, true},
        {"total_client_macs", false, true},
        {"total_server_macs", false, true},
    };

    const auto metric_value = [](const json& j, const std::string& name) {
        CompareValue v;
        if (name == "rounds_to_threshold") {
            const json& r = j["rounds_to_threshold"]["rounds"];
            if (r.is_null()) {
                v.missing = true;
            } else {
                v.value = r.get<double>();
            }
        } else {
            v.value = j[name].get<double>();
        }
        return v;
    };
    const auto render = [](const CompareValue& v, bool integer) -> std::string {
        if (v.missing) return "never";
        return integer ? std::to_string(static_cast<long long>(v.value)) : fixed6(v.value);
    };

    std::size_t width = 14;
    for (const std::string& label : labels) width = std::max(width, label.size() + 2);

    std::ostringstream table;
    table << std::left;
    table.width(22);
    table << "metric";
    for (const std::string& label : labels) {
        table.width(static_cast<std::streamsize>(width));
        table << label;
    }
    if (summaries.size() == 2) table << "delta";
    table << "\n";

    std::vector<std::string> verdicts;
    for (const Metric& m : metrics) {
        table.width(22);
        table << m.name;
        std::vector<CompareValue> values;
        for (const json& j : summaries) values.push_back(metric_value(j, m.name));
        for (const CompareValue& v : values) {
            table.width(static_cast<std::streamsize>(width));
            table << render(v, m.integer);
        }
        if (summaries.size() == 2) {
            if (values[0].missing || values[1].missing) {
                table << "n/a";
            } else if (m.integer) {
                table << std::to_string(static_cast<long long>(values[1].value) -
                                        static_cast<long long>(values[0].value));
            } else {
                table << fixed6(values[1].value - values[0].value);
            }
        }
        table << "\n";

        // Verdict: best value wins; a missing value never wins; equal best is
        // a tie.
        std::size_t best = 0;
        bool tie = false;
        bool any = false;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i].missing) continue;
            if (!any) {
                best = i;
                any = true;
                continue;
            }
            const double a = values[i].value;
            const double b = values[best].value;
            if (a == b) {
                tie = true;
            } else if (m.higher_is_better ? a > b : a < b) {
                best = i;
                tie = false;
            }
        }
        if (!any) {
            verdicts.push_back("verdict " + m.name + ": none reached");
        } else if (tie) {
            verdicts.push_back("verdict " + m.name + ": tie (" +
                               render(values[best], m.integer) + ")");
        } else {
            verdicts.push_back("verdict " + m.name + ": " + labels[best] + " (" +
                               render(values[best], m.integer) + ")");
        }
    }

    std::cout << table.str();
    for (const std::string& v : verdicts) std::cout << v << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// spark

int cmd_spark(const std::string& csv_file, const std::string& metric) {
    const int column = metric == "accuracy" ? 2 : 3;
    const std::string text = read_text_file(csv_file);
    std::istringstream lines(text);
    std::string line;
    if (!std::getline(lines, line) || line != kCsvHeader) {
        throw fedlab::Error(csv_file + " is not a rounds.csv file");
    }

    std::map<std::string, std::vector<double>> series;
    std::vector<std::string> order;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string cell;
        std::vector<std::string> row;
        while (std::getline(cells, cell, ',')) row.push_back(cell);
        if (row.size() != 7) throw fedlab::Error(csv_file + ": malformed row '" + line + "'");
        if (series.find(row[1]) == series.end()) order.push_back(row[1]);
        try {
            series[row[1]].push_back(std::stod(row[column]));
        } catch (const std::exception&) {
            throw fedlab::Error(csv_file + ": non-numeric " + metric + " in '" + line + "'");
        }
    }
    if (order.empty()) {
        std::cout << "no data rows\n";
        return 0;
    }

    double lo = series[order.front()].front();
    double hi = lo;
    for (const auto& [name, values] : series) {
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }

    const std::string ramp = " .:-=+*#%@";
    for (const std::string& name : order) {
        std::string bar;
        for (double v : series[name]) {
            const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
            const std::size_t idx = std::min(
                ramp.size() - 1,
                static_cast<std::size_t>(t * static_cast<double>(ramp.size() - 1) + 0.5));
            bar.push_back(ramp[idx]);
        }
        std::cout << std::left;
        std::cout.width(10);
        std::cout << name;
        std::cout << metric << " |" << bar << "|  [" << fixed6(lo) << ", " << fixed6(hi)
                  << "]\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated aggregation laboratory"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "run federated experiments and write round logs + summaries");
    simulate->add_option("--config", sim.config_path, "experiment config JSON");
    simulate->add_option("--out", sim.out_dir, "output directory");
    std::uint64_t seed_value = 0;
    bool seed_given = false;
    simulate->add_option("--seed", seed_value, "override run seed")
        ->each([&](const std::string&) { seed_given = true; });
    int rounds_value = 0;
    bool rounds_given = false;
    simulate->add_option("--rounds", rounds_value, "override round count")
        ->each([&](const std::string&) { rounds_given = true; });
    std::string strategy_value;
    simulate->add_option("--strategy", strategy_value,
                         "run a single strategy (fedavg|fedsgd|fedavgen)");
    std::string health_value;
    simulate->add_option("--health-mode", health_value,
                         "fitness health term mode (bounded|literal)");
    simulate->add_flag("--timing", sim.timing,
                       "record wall-clock seconds in the round log");
    simulate->add_flag("--overwrite", sim.overwrite, "replace existing artifacts");

    ExtractArgs ext;
    CLI::App* extract = app.add_subcommand(
        "extract", "compute a checkpoint's metric sidecar");
    extract->add_option("checkpoint", ext.checkpoint, "checkpoint file")->required();
    extract->add_option("--prev", ext.prev, "previous checkpoint for the stability metric");
    extract->add_option("--sigma-target", ext.sigma_target, "health target std");
    extract->add_option("--zero-tolerance", ext.zero_tolerance, "near-zero band");
    extract->add_flag("--overwrite", ext.overwrite, "replace an existing sidecar");

    AggregateArgs agg;
    CLI::App* aggregate = app.add_subcommand(
        "aggregate", "aggregate a directory of checkpoints into one model");
    aggregate->add_option("directory", agg.directory, "checkpoint directory")->required();
    aggregate->add_option("--strategy", agg.strategy, "fedavg|fedavgen")->required();
    aggregate->add_option("--out", agg.out, "output checkpoint path")->required();
    aggregate->add_option("--seed", agg.seed, "evolution seed");
    std::string agg_health;
    aggregate->add_option("--health-mode", agg_health, "bounded|literal");
    int agg_elites = 0;
    bool agg_elites_given = false;
    aggregate->add_option("--elite-count", agg_elites, "elite set size")
        ->each([&](const std::string&) { agg_elites_given = true; });
    int agg_generations = 0;
    bool agg_generations_given = false;
    aggregate->add_option("--generations", agg_generations, "evolution generations")
        ->each([&](const std::string&) { agg_generations_given = true; });
    aggregate->add_flag("--overwrite", agg.overwrite, "replace existing output");

    std::vector<std::string> compare_files;
    CLI::App* compare = app.add_subcommand(
        "compare", "side-by-side report over two or more run summaries");
    compare->add_option("summaries", compare_files, "summary JSON files")
        ->expected(2, -1);

    std::string spark_file;
    std::string spark_metric = "accuracy";
    CLI::App* spark = app.add_subcommand(
        "spark", "render terminal sparklines from a rounds.csv");
    spark->add_option("csv", spark_file, "rounds.csv path")->required();
    spark->add_option("--metric", spark_metric, "accuracy|loss")
        ->check(CLI::IsMember({"accuracy", "loss"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return 2;
    }

    try {
        if (simulate->parsed()) {
            if (seed_given) sim.seed = seed_value;
            if (rounds_given) sim.rounds = rounds_value;
            if (!strategy_value.empty()) sim.strategy = strategy_value;
            if (!health_value.empty()) sim.health_mode = health_value;
            return cmd_simulate(sim);
        }
        if (extract->parsed()) {
            return cmd_extract(ext);
        }
        if (aggregate->parsed()) {
            if (!agg_health.empty()) agg.health_mode = agg_health;
            if (agg_elites_given) agg.elite_count = agg_elites;
            if (agg_generations_given) agg.generations = agg_generations;
            return cmd_aggregate(agg);
        }
        if (compare->parsed()) {
            return cmd_compare(compare_files);
        }
        if (spark->parsed()) {
            return cmd_spark(spark_file, spark_metric);
        }
    } catch (const fedlab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fedlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
