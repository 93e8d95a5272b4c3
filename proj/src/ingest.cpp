#include "corex/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <numeric>

#include <json.hpp>

namespace corex {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[offset + static_cast<std::size_t>(i)];
    return v;
}

std::vector<std::uint8_t> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::io, "read failed on '" + path.string() + "'");
    return bytes;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io, "write failed on '" + path.string() + "'");
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(std::span<const RelevanceGrid> grids)
{
    const std::uint32_t h = grids.empty() ? 0 : grids.front().height;
    const std::uint32_t w = grids.empty() ? 0 : grids.front().width;
    const std::size_t plane = std::size_t{h} * w;

    std::vector<std::uint8_t> out;
    out.reserve(20 + 4 * grids.size() + 4 * plane * grids.size());
    out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
    put_u32(out, kTensorVersion);
    put_u32(out, h);
    put_u32(out, w);
    put_u32(out, static_cast<std::uint32_t>(grids.size()));
    for (const auto& g : grids) put_u32(out, g.concept_id);
    for (const auto& g : grids) {
        if (g.height != h || g.width != w || g.values.size() != plane)
            throw Error(ErrorCode::format, "grids passed to encode_tensor disagree in shape");
        for (float v : g.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

std::vector<RelevanceGrid> decode_tensor(std::span<const std::uint8_t> bytes, const std::string& layer_id)
{
    if (bytes.size() < 20) throw Error(ErrorCode::format, "tensor file shorter than its header");
    if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0) throw Error(ErrorCode::format, "bad tensor magic");
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kTensorVersion)
        throw Error(ErrorCode::format, "unsupported tensor version " + std::to_string(version));
    const std::uint32_t h = get_u32(bytes, 8);
    const std::uint32_t w = get_u32(bytes, 12);
    const std::uint32_t c = get_u32(bytes, 16);
    const std::size_t plane = std::size_t{h} * w;
    const std::size_t expected = 20 + std::size_t{4} * c + std::size_t{4} * plane * c;
    if (bytes.size() != expected)
        throw Error(ErrorCode::format, "tensor file holds " + std::to_string(bytes.size()) + " bytes, layout needs " +
                                           std::to_string(expected));
    if (c > 0 && plane == 0) throw Error(ErrorCode::format, "tensor declares grids with a zero dimension");

    std::vector<RelevanceGrid> grids(c);
    std::size_t offset = 20;
    for (auto& g : grids) {
        g.concept_id = get_u32(bytes, offset);
        g.layer_id = layer_id;
        g.height = h;
        g.width = w;
        offset += 4;
    }
    for (auto& g : grids) {
        g.values.resize(plane);
        for (auto& v : g.values) {
            v = std::bit_cast<float>(get_u32(bytes, offset));
            offset += 4;
        }
    }
    return grids;
}

Manifest read_manifest(const fs::path& manifest_path)
{
    const auto bytes = read_file(manifest_path);
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, "manifest '" + manifest_path.string() + "' is not valid JSON: " + e.what());
    }
    Manifest m;
    try {
        m.format_version = doc.at("format_version").get<int>();
        if (m.format_version != kManifestVersion)
            throw Error(ErrorCode::format, "unsupported manifest format_version " + std::to_string(m.format_version));
        m.class_name = doc.at("class_name").get<std::string>();
        m.contrast_class_name = doc.at("contrast_class_name").get<std::string>();
        m.layer_id = doc.at("layer_id").get<std::string>();
        for (const auto& s : doc.at("samples")) {
            ManifestEntry e;
            e.sample_id = s.at("sample_id").get<std::string>();
            e.ground_truth = parse_label(s.at("ground_truth").get<std::string>());
            e.model_truth = parse_label(s.at("model_truth").get<std::string>());
            if (e.model_truth == Label::unknown)
                throw Error(ErrorCode::format, "model_truth of '" + e.sample_id + "' must be positive or negative");
            e.tensor_file = s.at("tensor_file").get<std::string>();
            m.samples.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, "manifest '" + manifest_path.string() + "': " + e.what());
    }
    return m;
}

void write_manifest(const Manifest& manifest, const fs::path& manifest_path)
{
    json doc;
    doc["format_version"] = manifest.format_version;
    doc["class_name"] = manifest.class_name;
    doc["contrast_class_name"] = manifest.contrast_class_name;
    doc["layer_id"] = manifest.layer_id;
    doc["samples"] = json::array();
    for (const auto& e : manifest.samples) {
        doc["samples"].push_back({{"sample_id", e.sample_id},
                                  {"ground_truth", to_string(e.ground_truth)},
                                  {"model_truth", to_string(e.model_truth)},
                                  {"tensor_file", e.tensor_file}});
    }
    const std::string text = doc.dump(2) + "\n";
    write_file(manifest_path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

Dataset load_dataset(const fs::path& manifest_path)
{
    const Manifest manifest = read_manifest(manifest_path);
    const fs::path base = manifest_path.parent_path();

    Dataset dataset;
    dataset.class_name = manifest.class_name;
    dataset.contrast_class_name = manifest.contrast_class_name;
    dataset.layer_id = manifest.layer_id;
    dataset.samples.resize(manifest.samples.size());

    // Tensor files are independent; the first failure (in manifest order) wins.
    std::vector<std::exception_ptr> failures(manifest.samples.size());
    const auto n = static_cast<long>(manifest.samples.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto& entry = manifest.samples[static_cast<std::size_t>(i)];
        auto& sample = dataset.samples[static_cast<std::size_t>(i)];
        try {
            sample.sample_id = normalize_sample_id(entry.sample_id);
            sample.ground_truth = entry.ground_truth;
            sample.model_truth = entry.model_truth;
            const auto bytes = read_file(base / entry.tensor_file);
            sample.grids = decode_tensor(bytes, manifest.layer_id);
            validate(sample);
        } catch (...) {
            failures[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
    return canonical_order(std::move(dataset));
}

Manifest save_dataset(const Dataset& dataset, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());

    Manifest manifest;
    manifest.class_name = dataset.class_name;
    manifest.contrast_class_name = dataset.contrast_class_name;
    manifest.layer_id = dataset.layer_id;
    for (const auto& sample : dataset.samples) {
        ManifestEntry e{sample.sample_id, sample.ground_truth, sample.model_truth, sample.sample_id + ".crm"};
        write_file(dir / e.tensor_file, encode_tensor(sample.grids));
        manifest.samples.push_back(std::move(e));
    }
    write_manifest(manifest, dir / "manifest.json");
    return manifest;
}

ReferenceRanking reference_samples(const Dataset& dataset, ConceptId concept_id, std::size_t k)
{
    ReferenceRanking ranking{concept_id, {}};
    for (const auto& sample : dataset.samples) {
        if (const auto* grid = sample.find(concept_id)) {
            const double sum = std::accumulate(grid->values.begin(), grid->values.end(), 0.0);
            ranking.ranked_samples.emplace_back(sample.sample_id, sum);
        }
    }
    if (ranking.ranked_samples.empty())
        throw Error(ErrorCode::unknown_concept, "concept c" + std::to_string(concept_id) + " occurs in no sample");
    std::sort(ranking.ranked_samples.begin(), ranking.ranked_samples.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranking.ranked_samples.size() > k) ranking.ranked_samples.resize(k);
    return ranking;
}

}  // namespace corex
