// Small builders shared by the test binaries.
#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "corex/core.hpp"

namespace fixture {

inline corex::RelevanceGrid grid(corex::ConceptId id, std::uint32_t h, std::uint32_t w, std::vector<float> values)
{
    return {id, "layer", h, w, std::move(values)};
}

inline corex::RelevanceGrid constant(corex::ConceptId id, std::uint32_t h, std::uint32_t w, float v)
{
    return grid(id, h, w, std::vector<float>(std::size_t{h} * w, v));
}

/// One grid per given sum: a single pixel at (0,0) carries the whole value.
inline corex::SampleRecord sample_with_sums(const std::string& id, const std::vector<double>& sums,
                                            corex::Label model = corex::Label::positive)
{
    corex::SampleRecord s;
    s.sample_id = id;
    s.ground_truth = model;
    s.model_truth = model;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        auto g = constant(static_cast<corex::ConceptId>(i), 2, 2, 0.0f);
        g.values[0] = static_cast<float>(sums[i]);
        s.grids.push_back(g);
    }
    return s;
}

inline corex::Dataset random_dataset(std::uint64_t seed, std::size_t samples, std::size_t concepts, std::uint32_t h,
                                     std::uint32_t w)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> val(0.0f, 1.0f);
    corex::Dataset d{{}, "cls", "other", "layer"};
    for (std::size_t i = 0; i < samples; ++i) {
        corex::SampleRecord s;
        s.sample_id = "r" + std::to_string(1000 + i);
        s.ground_truth = i % 3 == 0 ? corex::Label::unknown : (i % 2 ? corex::Label::positive : corex::Label::negative);
        s.model_truth = i % 2 ? corex::Label::positive : corex::Label::negative;
        for (std::size_t c = 0; c < concepts; ++c) {
            auto g = constant(static_cast<corex::ConceptId>(c * 3), h, w, 0.0f);
            for (auto& v : g.values) v = val(rng);
            s.grids.push_back(std::move(g));
        }
        d.samples.push_back(std::move(s));
    }
    return d;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("corex_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace fixture
