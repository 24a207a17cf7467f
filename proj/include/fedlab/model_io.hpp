#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedlab/evolution.hpp"
#include "fedlab/metrics.hpp"
#include "fedlab/mlp.hpp"
#include "fedlab/weights.hpp"

namespace fedlab {

// CRC-32 (reflected, polynomial 0xEDB88320) of a byte range.
std::uint32_t crc32_bytes(const unsigned char* data, std::size_t len);

// crc as 8 lowercase hex digits, the form used in manifests and sidecars.
std::string crc32_hex(std::uint32_t crc);

/**
 * Parsed checkpoint header. On disk a checkpoint is a UTF-8 manifest
 * followed by a blank line and the raw weight blob:
 *
 *   fedlab-checkpoint 1
 *   model_id: <id>
 *   layer_dims: 16,32,3
 *   element_count: 643
 *   scalar: f32le
 *   blob_bytes: 2572
 *   crc32: 9ae0daaf
 *
 * The blob holds element_count IEEE-754 binary32 values, little-endian, in
 * the canonical flatten order; crc32 covers the blob bytes only.
 */
struct CheckpointManifest {
    int format_version = 1;
    std::string model_id;
    std::vector<int> layer_dims;
    std::size_t element_count = 0;
    std::string scalar = "f32le";
    std::uint32_t crc32 = 0;
};

struct Checkpoint {
    WeightVector weights;
    CheckpointManifest manifest;
};

/**
 * Serializes w (quantized to 32-bit floats) under the given architecture.
 * The write is atomic: a temp file in the target directory is renamed over
 * path, so failures never leave a partial file. An existing path is an
 * IoError unless overwrite is set. Throws DimensionError on an empty vector
 * or when w does not fit arch, NumericError when a value overflows binary32.
 */
CheckpointManifest write_checkpoint(const WeightVector& w,
                                    const MlpArch& arch,
                                    const std::string& model_id,
                                    const std::filesystem::path& path,
                                    bool overwrite = false);

// Throws IoError (missing/unreadable), CorruptCheckpoint (malformed
// manifest, truncated or trailing blob bytes, checksum mismatch),
// VersionError (unrecognized format version or scalar encoding).
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// A checkpoint's sidecar lives next to it: <checkpoint path> + ".meta.json".
std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint_path);

/**
 * Metric metadata describing exactly one checkpoint, linked to it by the
 * checkpoint blob's crc32. Serialized as JSON with sorted keys; the
 * extensions object is reserved for forward-compatible annotations and is
 * preserved verbatim through read/write.
 */
struct MetadataSidecar {
    int format_version = 1;
    Genotype genotype;
    double sigma_target = 0.1;
    std::string optimizer = "adam";
    std::string source_crc32;
    std::string extensions_json = "{}";
};

// Atomic like write_checkpoint; existing path needs overwrite.
void write_sidecar(const MetadataSidecar& sidecar,
                   const std::filesystem::path& path,
                   bool overwrite = false);

// Throws IoError (missing), CorruptCheckpoint (unparsable or wrong-typed
// fields), VersionError (unknown format_version).
MetadataSidecar read_sidecar(const std::filesystem::path& path);

/**
 * Computes the metric triple for the checkpoint at curr_path (stability
 * against prev_path when given, otherwise assumed 1.0 and flagged) and
 * writes the sidecar next to curr_path. Metrics are computed from the
 * stored 32-bit weights, so a later recomputation from the file agrees
 * exactly. Throws ArchitectureMismatch when prev has a different element
 * count; an existing sidecar needs overwrite.
 */
MetadataSidecar extract_metadata(const std::filesystem::path& curr_path,
                                 const std::optional<std::filesystem::path>& prev_path,
                                 const MetricConfig& metric_cfg,
                                 bool overwrite = false);

// All *.ckpt files directly inside dir, sorted by filename.
// Throws IoError when dir is not a readable directory.
std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& dir);

/**
 * Loads every *.ckpt in dir into a Phenotype population ordered by model_id.
 *
 * A missing sidecar is regenerated (with a warning) via extract_metadata.
 * Sidecar metrics are caches, never authorities: sparsity and health are
 * recomputed from the weights, and a sidecar disagreeing beyond 1e-9 or
 * linking a different crc32 is overridden by the recomputation with a
 * warning. Throws EmptyPopulation when dir holds no checkpoints and
 * ArchitectureMismatch when element counts differ.
 */
std::vector<Phenotype> ingest_population(const std::filesystem::path& dir,
                                         const MetricConfig& metric_cfg);

}  // namespace fedlab
