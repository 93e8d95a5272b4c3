#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "corex/core.hpp"

namespace corex {

// CRM1 tensor file, little-endian:
//   "CRM1" | u32 version=1 | u32 H | u32 W | u32 C | C x u32 concept_id | C x (H*W float32, row-major)
inline constexpr char kTensorMagic[4] = {'C', 'R', 'M', '1'};
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr int kManifestVersion = 1;

struct ManifestEntry {
    std::string sample_id;
    Label ground_truth = Label::unknown;
    Label model_truth = Label::negative;
    std::string tensor_file;  // relative to the manifest directory

    bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
    int format_version = kManifestVersion;
    std::string class_name;
    std::string contrast_class_name;
    std::string layer_id;
    std::vector<ManifestEntry> samples;

    bool operator==(const Manifest&) const = default;
};

struct ReferenceRanking {
    ConceptId concept_id = 0;
    std::vector<std::pair<std::string, double>> ranked_samples;
};

std::vector<std::uint8_t> encode_tensor(std::span<const RelevanceGrid> grids);
std::vector<RelevanceGrid> decode_tensor(std::span<const std::uint8_t> bytes, const std::string& layer_id);

Manifest read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& manifest_path);

/// Loads a manifest plus its tensor files. Sample ids are normalized to
/// lowercase identifiers; the result is in canonical order.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes manifest.json and one <sample_id>.crm file per sample into `dir`.
Manifest save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Top-k samples by signed concept relevance sum, descending, ties by
/// ascending sample id.
ReferenceRanking reference_samples(const Dataset& dataset, ConceptId concept_id, std::size_t k = 8);

}  // namespace corex
