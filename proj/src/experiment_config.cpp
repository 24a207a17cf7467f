#include "fedlab/experiment_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "fedlab/errors.hpp"

namespace fedlab {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key_path, const std::string& why) {
    throw ConfigError("config: " + key_path + " " + why);
}

// One object level of the document. Getters leave the target untouched when
// the key is absent; finish() rejects any key no getter asked about, so
// typos fail loudly instead of silently running defaults.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "document" : path_, "must be an object");
    }

    std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void get_int(const std::string& key, int& target) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(key_path(key), "must be an integer");
            target = v->get<int>();
        }
    }

    void get_u64(const std::string& key, std::uint64_t& target) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() ||
                (!v->is_number_unsigned() && v->get<long long>() < 0)) {
                fail(key_path(key), "must be a non-negative integer");
            }
            target = v->get<std::uint64_t>();
        }
    }

    void get_number(const std::string& key, double& target) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(key_path(key), "must be a number");
            target = v->get<double>();
        }
    }

    void get_bool(const std::string& key, bool& target) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(key_path(key), "must be a boolean");
            target = v->get<bool>();
        }
    }

    void get_string(const std::string& key, std::string& target) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(key_path(key), "must be a string");
            target = v->get<std::string>();
        }
    }

    void get_int_array(const std::string& key, std::vector<int>& target) {
        if (const json* v = find(key)) {
            if (!v->is_array()) fail(key_path(key), "must be an array of integers");
            std::vector<int> values;
            for (const json& item : *v) {
                if (!item.is_number_integer()) {
                    fail(key_path(key), "must be an array of integers");
                }
                values.push_back(item.get<int>());
            }
            target = std::move(values);
        }
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (seen_.find(item.key()) == seen_.end()) {
                fail(key_path(item.key()), "is not a recognized key");
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

int line_of_byte(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + end, '\n'));
}

HealthTermMode parse_health_mode(const std::string& name, const std::string& key_path) {
    if (name == "bounded") return HealthTermMode::Bounded;
    if (name == "literal") return HealthTermMode::LiteralGuarded;
    fail(key_path, "must be 'bounded' or 'literal'");
}

}  // namespace

LoadedConfig parse_experiment_config(const std::string& text,
                                     const std::string& source_name) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source_name + ":" + std::to_string(line_of_byte(text, e.byte)) +
                          ": " + e.what());
    }

    LoadedConfig loaded;
    ExperimentConfig& cfg = loaded.experiment;
    Section doc(root, "");

    if (const json* sec = doc.find("federation")) {
        Section s(*sec, "federation");
        s.get_int("clients", cfg.clients);
        s.get_int("samples_per_client", cfg.samples_per_client);
        s.get_int("dim", cfg.dim);
        s.get_int("num_classes", cfg.num_classes);
        s.get_number("skew", cfg.skew);
        s.get_int("holdout_samples", cfg.holdout_samples);
        s.get_number("center_radius", cfg.center_radius);
        s.get_number("spread", cfg.spread);
        s.finish();
    }

    if (const json* sec = doc.find("training")) {
        Section s(*sec, "training");
        s.get_int_array("hidden", cfg.hidden);
        s.get_number("learning_rate", cfg.learning_rate);
        s.get_int("batch_size", cfg.batch_size);
        s.get_int("local_epochs", cfg.local_epochs);
        s.finish();
    }

    if (const json* sec = doc.find("federated")) {
        Section s(*sec, "federated");
        s.get_number("participation_fraction", cfg.participation_fraction);
        s.get_number("server_learning_rate", cfg.server_learning_rate);
        s.get_int("fedsgd_gradient_batch", cfg.fedsgd_gradient_batch);
        s.finish();
    }

    if (const json* sec = doc.find("evolution")) {
        Section s(*sec, "evolution");
        const json* count = s.find("elite_count");
        const json* fraction = s.find("elite_fraction");
        if (count != nullptr && fraction != nullptr) {
            fail("evolution", "takes elite_count or elite_fraction, not both");
        }
        if (count != nullptr) {
            if (!count->is_number_integer()) {
                fail("evolution.elite_count", "must be an integer");
            }
            cfg.evolution.elites = EliteSpec::from_count(count->get<int>());
        }
        if (fraction != nullptr) {
            if (!fraction->is_number()) {
                fail("evolution.elite_fraction", "must be a number");
            }
            cfg.evolution.elites = EliteSpec::from_fraction(fraction->get<double>());
        }
        s.get_number("mutation_rate", cfg.evolution.mutation_rate);
        s.get_number("mutation_noise_scale", cfg.evolution.mutation_noise_scale);
        s.get_int("generations", cfg.evolution.generations);
        s.finish();
    }

    if (const json* sec = doc.find("fitness")) {
        Section s(*sec, "fitness");
        s.get_number("epsilon", cfg.fitness_weights.epsilon);
        s.get_number("beta", cfg.fitness_weights.beta);
        s.get_number("gamma", cfg.fitness_weights.gamma);
        std::string mode;
        s.get_string("health_mode", mode);
        if (!mode.empty()) {
            cfg.fitness_weights.health_term_mode =
                parse_health_mode(mode, "fitness.health_mode");
        }
        s.finish();
    }

    if (const json* sec = doc.find("metrics")) {
        Section s(*sec, "metrics");
        s.get_number("sigma_target", cfg.metrics.sigma_target);
        s.get_number("zero_tolerance", cfg.metrics.zero_tolerance);
        s.finish();
    }

    if (const json* sec = doc.find("run")) {
        Section s(*sec, "run");
        s.get_int("rounds", cfg.rounds);
        s.get_u64("seed", cfg.seed);
        s.get_bool("timing", cfg.timing);
        if (const json* v = s.find("strategies")) {
            if (!v->is_array() || v->empty()) {
                fail("run.strategies", "must be a nonempty array of strategy names");
            }
            std::vector<StrategyKind> kinds;
            for (const json& item : *v) {
                if (!item.is_string()) {
                    fail("run.strategies", "must be a nonempty array of strategy names");
                }
                kinds.push_back(strategy_from_name(item.get<std::string>()));
            }
            cfg.strategies = std::move(kinds);
        }
        std::string out;
        s.get_string("out", out);
        if (!out.empty()) loaded.out_dir = out;
        s.finish();
    }

    doc.finish();
    cfg.validate();
    return loaded;
}

LoadedConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for config file " + path.string());
    return parse_experiment_config(buf.str(), path.string());
}

}  // namespace fedlab
