#include "fedlab/model_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "fedlab/errors.hpp"
#include "fedlab/log.hpp"

namespace fedlab {
namespace {

using nlohmann::json;

constexpr char kMagic[] = "fedlab-checkpoint";
constexpr int kCheckpointVersion = 1;
constexpr int kSidecarVersion = 1;

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t n = 0; n < 256; ++n) {
        std::uint32_t c = n;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        }
        table[n] = c;
    }
    return table;
}

bool valid_model_id(const std::string& id) {
    if (id.empty()) return false;
    for (char ch : id) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                        (ch >= '0' && ch <= '9') || ch == '.' || ch == '_' || ch == '-';
        if (!ok) return false;
    }
    return true;
}

void append_f32le(std::string& out, float f) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &f, sizeof bits);
    out.push_back(static_cast<char>(bits & 0xFFu));
    out.push_back(static_cast<char>((bits >> 8) & 0xFFu));
    out.push_back(static_cast<char>((bits >> 16) & 0xFFu));
    out.push_back(static_cast<char>((bits >> 24) & 0xFFu));
}

float parse_f32le(const unsigned char* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    float f = 0.0f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
}

// Writes content to path via a temp file in the same directory plus an
// atomic rename, so readers never observe a partial file. The overwrite
// check happens before any byte is written.
void atomic_write(const std::filesystem::path& path, const std::string& content,
                  bool overwrite) {
    std::error_code ec;
    if (!overwrite && std::filesystem::exists(path, ec)) {
        throw IoError("refusing to overwrite existing file " + path.string() +
                      " (pass the overwrite flag to replace it)");
    }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move temp file onto " + path.string());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path.string());
    return std::move(buf).str();
}

long long parse_ll(const std::string& text, const std::filesystem::path& path,
                   const char* key) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size() || v < 0) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw CorruptCheckpoint(path.string() + ": bad " + key + " value '" + text + "'");
    }
}

std::vector<int> parse_dims(const std::string& text, const std::filesystem::path& path) {
    std::vector<int> dims;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        dims.push_back(static_cast<int>(parse_ll(part, path, "layer_dims")));
    }
    if (dims.size() < 2) {
        throw CorruptCheckpoint(path.string() + ": layer_dims needs at least two entries");
    }
    return dims;
}

std::string dims_to_string(const std::vector<int>& dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(dims[i]);
    }
    return out;
}

std::size_t dims_param_count(const std::vector<int>& dims) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        n += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
    }
    return n;
}

}  // namespace

std::uint32_t crc32_bytes(const unsigned char* data, std::size_t len) {
    static const std::array<std::uint32_t, 256> table = make_crc_table();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) {
        crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    }
    return crc ^ 0xFFFFFFFFu;
}

std::string crc32_hex(std::uint32_t crc) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc);
    return buf;
}

CheckpointManifest write_checkpoint(const WeightVector& w,
                                    const MlpArch& arch,
                                    const std::string& model_id,
                                    const std::filesystem::path& path,
                                    bool overwrite) {
    arch.validate();
    if (w.empty()) throw DimensionError("write_checkpoint: empty weight vector");
    if (w.size() != arch.param_count()) {
        throw DimensionError("write_checkpoint: vector has " + std::to_string(w.size()) +
                             " elements, architecture needs " +
                             std::to_string(arch.param_count()));
    }
    if (!valid_model_id(model_id)) {
        throw ConfigError("write_checkpoint: model_id must be nonempty [A-Za-z0-9._-]");
    }

    std::string blob;
    blob.reserve(w.size() * 4);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const float f = static_cast<float>(w[i]);
        if (!std::isfinite(f)) {
            throw NumericError("write_checkpoint: element " + std::to_string(i) +
                               " overflows 32-bit float");
        }
        append_f32le(blob, f);
    }

    CheckpointManifest manifest;
    manifest.model_id = model_id;
    manifest.layer_dims = arch.dims;
    manifest.element_count = w.size();
    manifest.crc32 = crc32_bytes(reinterpret_cast<const unsigned char*>(blob.data()),
                                 blob.size());

    std::string content;
    content += std::string(kMagic) + " " + std::to_string(kCheckpointVersion) + "\n";
    content += "model_id: " + model_id + "\n";
    content += "layer_dims: " + dims_to_string(arch.dims) + "\n";
    content += "element_count: " + std::to_string(w.size()) + "\n";
    content += "scalar: f32le\n";
    content += "blob_bytes: " + std::to_string(blob.size()) + "\n";
    content += "crc32: " + crc32_hex(manifest.crc32) + "\n";
    content += "\n";
    content += blob;

    atomic_write(path, content, overwrite);
    return manifest;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    const std::string content = read_file(path);

    const std::size_t split = content.find("\n\n");
    if (split == std::string::npos) {
        throw CorruptCheckpoint(path.string() + ": no manifest/blob separator");
    }
    const std::string header = content.substr(0, split + 1);
    const std::size_t blob_start = split + 2;

    std::istringstream lines(header);
    std::string first;
    std::getline(lines, first);
    {
        std::istringstream fl(first);
        std::string magic;
        int version = -1;
        fl >> magic >> version;
        if (magic != kMagic) {
            throw CorruptCheckpoint(path.string() + ": not a checkpoint file");
        }
        if (version != kCheckpointVersion) {
            throw VersionError(path.string() + ": unsupported checkpoint version " +
                               std::to_string(version));
        }
    }

    std::map<std::string, std::string> fields;
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const std::size_t colon = line.find(": ");
        if (colon == std::string::npos) {
            throw CorruptCheckpoint(path.string() + ": malformed manifest line '" + line + "'");
        }
        const std::string key = line.substr(0, colon);
        if (!fields.emplace(key, line.substr(colon + 2)).second) {
            throw CorruptCheckpoint(path.string() + ": duplicate manifest key '" + key + "'");
        }
    }
    for (const char* key :
         {"model_id", "layer_dims", "element_count", "scalar", "blob_bytes", "crc32"}) {
        if (fields.find(key) == fields.end()) {
            throw CorruptCheckpoint(path.string() + ": manifest missing key '" +
                                    std::string(key) + "'");
        }
    }

    CheckpointManifest manifest;
    manifest.model_id = fields["model_id"];
    if (!valid_model_id(manifest.model_id)) {
        throw CorruptCheckpoint(path.string() + ": invalid model_id");
    }
    manifest.layer_dims = parse_dims(fields["layer_dims"], path);
    manifest.element_count =
        static_cast<std::size_t>(parse_ll(fields["element_count"], path, "element_count"));
    manifest.scalar = fields["scalar"];
    if (manifest.scalar != "f32le") {
        throw VersionError(path.string() + ": unsupported scalar encoding '" +
                           manifest.scalar + "'");
    }
    const std::size_t blob_bytes =
        static_cast<std::size_t>(parse_ll(fields["blob_bytes"], path, "blob_bytes"));
    {
        const std::string& hex = fields["crc32"];
        if (hex.size() != 8 ||
            !std::all_of(hex.begin(), hex.end(), [](unsigned char c) {
                return std::isxdigit(c) != 0;
            })) {
            throw CorruptCheckpoint(path.string() + ": bad crc32 field");
        }
        manifest.crc32 = static_cast<std::uint32_t>(std::stoul(hex, nullptr, 16));
    }

    if (manifest.element_count * 4 != blob_bytes) {
        throw CorruptCheckpoint(path.string() + ": element_count disagrees with blob_bytes");
    }
    if (dims_param_count(manifest.layer_dims) != manifest.element_count) {
        throw CorruptCheckpoint(path.string() + ": layer_dims disagree with element_count");
    }
    const std::size_t actual_blob = content.size() - blob_start;
    if (actual_blob < blob_bytes) {
        throw CorruptCheckpoint(path.string() + ": blob truncated (" +
                                std::to_string(actual_blob) + " of " +
                                std::to_string(blob_bytes) + " bytes)");
    }
    if (actual_blob > blob_bytes) {
        throw CorruptCheckpoint(path.string() + ": trailing bytes after blob");
    }

    const unsigned char* blob =
        reinterpret_cast<const unsigned char*>(content.data()) + blob_start;
    if (crc32_bytes(blob, blob_bytes) != manifest.crc32) {
        throw CorruptCheckpoint(path.string() + ": crc32 mismatch");
    }

    std::vector<double> values;
    values.reserve(manifest.element_count);
    for (std::size_t i = 0; i < manifest.element_count; ++i) {
        values.push_back(static_cast<double>(parse_f32le(blob + i * 4)));
    }
    return Checkpoint{WeightVector(std::move(values)), std::move(manifest)};
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint_path) {
    return checkpoint_path.string() + ".meta.json";
}

void write_sidecar(const MetadataSidecar& sidecar,
                   const std::filesystem::path& path,
                   bool overwrite) {
    json extensions;
    try {
        extensions = json::parse(sidecar.extensions_json);
    } catch (const json::parse_error&) {
        throw ConfigError("write_sidecar: extensions_json is not valid JSON");
    }
    if (!extensions.is_object()) {
        throw ConfigError("write_sidecar: extensions_json must be a JSON object");
    }

    const TrainingMeta& t = sidecar.genotype.training;
    json j;
    j["accuracy"] = t.accuracy ? json(*t.accuracy) : json(nullptr);
    j["batch_size"] = t.batch_size;
    j["epochs_trained"] = t.epochs_trained;
    j["extensions"] = extensions;
    j["format_version"] = sidecar.format_version;
    j["health"] = sidecar.genotype.health;
    j["learning_rate"] = t.learning_rate;
    j["loss"] = t.loss ? json(*t.loss) : json(nullptr);
    j["optimizer"] = sidecar.optimizer;
    j["sigma_target"] = sidecar.sigma_target;
    j["source_crc32"] = sidecar.source_crc32;
    j["sparsity"] = sidecar.genotype.sparsity;
    j["stability"] = sidecar.genotype.stability;
    j["stability_assumed"] = sidecar.genotype.stability_assumed;

    atomic_write(path, j.dump(2) + "\n", overwrite);
}

MetadataSidecar read_sidecar(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw CorruptCheckpoint(path.string() + ": sidecar is not valid JSON (" +
                                e.what() + ")");
    }
    if (!j.is_object()) {
        throw CorruptCheckpoint(path.string() + ": sidecar root must be an object");
    }

    const auto require = [&](const char* key) -> const json& {
        auto it = j.find(key);
        if (it == j.end()) {
            throw CorruptCheckpoint(path.string() + ": sidecar missing key '" +
                                    std::string(key) + "'");
        }
        return *it;
    };
    const auto number = [&](const char* key) {
        const json& v = require(key);
        if (!v.is_number()) {
            throw CorruptCheckpoint(path.string() + ": sidecar key '" + std::string(key) +
                                    "' must be a number");
        }
        return v.get<double>();
    };

    const json& version = require("format_version");
    if (!version.is_number_integer()) {
        throw CorruptCheckpoint(path.string() + ": format_version must be an integer");
    }
    if (version.get<int>() != kSidecarVersion) {
        throw VersionError(path.string() + ": unsupported sidecar version " +
                           std::to_string(version.get<int>()));
    }

    MetadataSidecar s;
    s.format_version = version.get<int>();
    s.genotype.sparsity = number("sparsity");
    s.genotype.stability = number("stability");
    s.genotype.health = number("health");
    {
        const json& v = require("stability_assumed");
        if (!v.is_boolean()) {
            throw CorruptCheckpoint(path.string() + ": stability_assumed must be a boolean");
        }
        s.genotype.stability_assumed = v.get<bool>();
    }
    s.sigma_target = number("sigma_target");
    {
        const json& v = require("optimizer");
        if (!v.is_string()) {
            throw CorruptCheckpoint(path.string() + ": optimizer must be a string");
        }
        s.optimizer = v.get<std::string>();
    }
    {
        const json& v = require("source_crc32");
        if (!v.is_string()) {
            throw CorruptCheckpoint(path.string() + ": source_crc32 must be a string");
        }
        s.source_crc32 = v.get<std::string>();
    }

    TrainingMeta& t = s.genotype.training;
    {
        const json& v = require("accuracy");
        if (v.is_null()) {
            t.accuracy.reset();
        } else if (v.is_number()) {
            t.accuracy = v.get<double>();
        } else {
            throw CorruptCheckpoint(path.string() + ": accuracy must be a number or null");
        }
    }
    {
        const json& v = require("loss");
        if (v.is_null()) {
            t.loss.reset();
        } else if (v.is_number()) {
            t.loss = v.get<double>();
        } else {
            throw CorruptCheckpoint(path.string() + ": loss must be a number or null");
        }
    }
    {
        const json& v = require("epochs_trained");
        if (!v.is_number_integer()) {
            throw CorruptCheckpoint(path.string() + ": epochs_trained must be an integer");
        }
        t.epochs_trained = v.get<int>();
    }
    t.learning_rate = number("learning_rate");
    {
        const json& v = require("batch_size");
        if (!v.is_number_integer()) {
            throw CorruptCheckpoint(path.string() + ": batch_size must be an integer");
        }
        t.batch_size = v.get<int>();
    }

    auto ext = j.find("extensions");
    if (ext != j.end()) {
        if (!ext->is_object()) {
            throw CorruptCheckpoint(path.string() + ": extensions must be an object");
        }
        s.extensions_json = ext->dump();
    }
    return s;
}

MetadataSidecar extract_metadata(const std::filesystem::path& curr_path,
                                 const std::optional<std::filesystem::path>& prev_path,
                                 const MetricConfig& metric_cfg,
                                 bool overwrite) {
    metric_cfg.validate();
    const Checkpoint curr = read_checkpoint(curr_path);

    std::optional<Checkpoint> prev;
    if (prev_path) {
        prev = read_checkpoint(*prev_path);
        if (prev->weights.size() != curr.weights.size()) {
            throw ArchitectureMismatch(
                "extract_metadata: " + curr_path.string() + " has " +
                std::to_string(curr.weights.size()) + " elements but " +
                prev_path->string() + " has " + std::to_string(prev->weights.size()));
        }
    }

    MetadataSidecar sidecar;
    sidecar.genotype = genotype_of(curr.weights, prev ? &prev->weights : nullptr,
                                   metric_cfg, TrainingMeta{});
    sidecar.sigma_target = metric_cfg.sigma_target;
    sidecar.source_crc32 = crc32_hex(curr.manifest.crc32);
    write_sidecar(sidecar, sidecar_path(curr_path), overwrite);
    return sidecar;
}

std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw IoError(dir.string() + " is not a readable directory");
    }
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ckpt") {
            paths.push_back(entry.path());
        }
    }
    if (ec) throw IoError("cannot list directory " + dir.string());
    std::sort(paths.begin(), paths.end(),
              [](const std::filesystem::path& a, const std::filesystem::path& b) {
                  return a.filename().string() < b.filename().string();
              });
    return paths;
}

std::vector<Phenotype> ingest_population(const std::filesystem::path& dir,
                                         const MetricConfig& metric_cfg) {
    metric_cfg.validate();
    const std::vector<std::filesystem::path> paths = list_checkpoints(dir);
    if (paths.empty()) {
        throw EmptyPopulation("no .ckpt files in " + dir.string());
    }

    std::vector<Phenotype> population;
    std::size_t element_count = 0;
    for (const std::filesystem::path& path : paths) {
        Checkpoint ckpt = read_checkpoint(path);
        if (population.empty()) {
            element_count = ckpt.weights.size();
        } else if (ckpt.weights.size() != element_count) {
            throw ArchitectureMismatch(path.string() + " has " +
                                       std::to_string(ckpt.weights.size()) +
                                       " elements, population has " +
                                       std::to_string(element_count));
        }

        const std::string crc_hex = crc32_hex(ckpt.manifest.crc32);
        MetadataSidecar sidecar;
        const std::filesystem::path sp = sidecar_path(path);
        if (!std::filesystem::exists(sp)) {
            log::warn("model-io: missing sidecar for " + path.string() + ", regenerating");
            sidecar = extract_metadata(path, std::nullopt, metric_cfg);
        } else {
            sidecar = read_sidecar(sp);
            if (sidecar.source_crc32 != crc_hex) {
                // The sidecar describes some other checkpoint; recompute in
                // memory and leave the stale file for the user to inspect.
                log::warn("model-io: sidecar " + sp.string() + " links crc32 " +
                          sidecar.source_crc32 + " but checkpoint is " + crc_hex +
                          "; recomputing metrics");
                sidecar.genotype = genotype_of(ckpt.weights, nullptr, metric_cfg,
                                               sidecar.genotype.training);
            } else {
                // Sidecars are caches: verify against a fresh recomputation
                // and trust the weights when they disagree.
                const Genotype fresh =
                    genotype_of(ckpt.weights, nullptr, metric_cfg, sidecar.genotype.training);
                if (std::abs(fresh.sparsity - sidecar.genotype.sparsity) > 1e-9) {
                    log::warn("model-io: " + sp.string() + " cached sparsity " +
                              std::to_string(sidecar.genotype.sparsity) +
                              " != recomputed " + std::to_string(fresh.sparsity) +
                              "; using recomputed value");
                    sidecar.genotype.sparsity = fresh.sparsity;
                }
                if (std::abs(fresh.health - sidecar.genotype.health) > 1e-9) {
                    log::warn("model-io: " + sp.string() + " cached health " +
                              std::to_string(sidecar.genotype.health) +
                              " != recomputed " + std::to_string(fresh.health) +
                              "; using recomputed value");
                    sidecar.genotype.health = fresh.health;
                }
            }
        }

        Phenotype p;
        p.id = ckpt.manifest.model_id;
        p.weights = std::move(ckpt.weights);
        p.genotype = sidecar.genotype;
        population.push_back(std::move(p));
    }

    std::stable_sort(population.begin(), population.end(),
                     [](const Phenotype& a, const Phenotype& b) { return a.id < b.id; });
    return population;
}

}  // namespace fedlab
