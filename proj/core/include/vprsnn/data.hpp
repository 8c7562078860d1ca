#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vprsnn/signal.hpp"

namespace vprsnn {

struct ManifestEntry
{
    std::filesystem::path path;
    std::size_t label = 0;
    std::string traverse;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

enum class ManifestRole
{
    reference,
    query,
};

/// A manifest together with its decoded images (same order as entries).
struct Dataset
{
    ManifestRole role = ManifestRole::query;
    std::vector<ManifestEntry> entries;
    std::vector<ImageGray> images;

    std::size_t size() const noexcept { return entries.size(); }
    /// One past the largest label.
    std::size_t n_labels() const noexcept;
    std::vector<std::size_t> labels() const;
    /// Traverse ids in first-appearance order.
    std::vector<std::string> traverses() const;
};

/// Parses a `path,label,traverse` CSV. Relative paths resolve against the
/// manifest's directory. Does not load images.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Writes a manifest; paths are written relative to the manifest directory
/// when possible.
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Checks that reference labels are contiguous from 0 and that every
/// traverse contains every label. Throws ValidationError naming the gap or
/// the missing (traverse, label) pair.
void validate_reference(std::span<const ManifestEntry> entries);

/// Reads one or more manifests, validates them for `role` and loads every
/// image.
Dataset load_manifests(std::span<const std::filesystem::path> paths, ManifestRole role);
Dataset load_manifest(const std::filesystem::path& path, ManifestRole role);

/// Synthetic traverse generator parameters. Intensities in 0..255 units.
struct SynthSpec
{
    std::size_t places = 20;
    std::size_t traverses = 2;
    int width = 56;
    int height = 56;
    double noise_sigma = 10.0;
    int brightness_jitter = 16;
    int max_shift = 0;
    int blur_radius = 2;
    std::uint64_t seed = 1;

    void validate() const;
    std::string to_json() const;
    static SynthSpec from_json(const std::string& text);
};

/// Reference traverses (one Dataset each) plus one query traverse. Image
/// paths are relative names under `images/`.
struct SyntheticDataset
{
    std::vector<Dataset> references;
    Dataset query;
    /// Noise-free per-place patterns.
    std::vector<ImageGray> bases;
};

/// Per place, a contrast-stretched box-blurred uniform noise pattern; per
/// traverse, each place image is that pattern shifted by an integer offset,
/// offset in brightness and corrupted with Gaussian noise.
SyntheticDataset generate_synthetic(const SynthSpec& spec);

/// Writes images, `reference_<k>.csv`, `query.csv` and `spec.json` under
/// `dir`, returning the paths of the reference manifests.
std::vector<std::filesystem::path> write_synthetic(const SyntheticDataset& data,
                                                   const SynthSpec& spec,
                                                   const std::filesystem::path& dir);

/// Merges several datasets into one (entries and images concatenated).
Dataset concat(std::span<const Dataset> parts, ManifestRole role);

}  // namespace vprsnn
