#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vprsnn/snn.hpp"

namespace vprsnn {

/// 8-bit grayscale image, row-major.
struct ImageGray
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    ImageGray() = default;
    ImageGray(int w, int h, std::uint8_t fill = 0);
    ImageGray(int w, int h, std::vector<std::uint8_t> pixels);

    std::size_t size() const noexcept { return data.size(); }
    std::uint8_t& at(int x, int y) noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const noexcept
    {
        return data[static_cast<std::size_t>(y) * width + x];
    }

    friend bool operator==(const ImageGray&, const ImageGray&) = default;
};

/// Rate-coding parameters. Rates in Hz, times in ms.
struct EncodingConfig
{
    double max_rate = 63.75;
    double t_present = 350.0;
    double t_rest = 150.0;
    double dt = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Rounds half-up and clamps to [0, 255].
std::uint8_t to_pixel(double v) noexcept;

/// Luminance conversion of interleaved 8-bit RGB (0.299 R + 0.587 G + 0.114 B).
ImageGray to_grayscale(std::span<const std::uint8_t> rgb, int width, int height);

/// Area-averaging when shrinking an axis, bilinear when enlarging it.
ImageGray resize(const ImageGray& img, int out_w, int out_h);

/// Per-patch z-scores before the global rescale, row-major like the image.
/// Patches with zero variance produce zeros.
std::vector<double> patch_zscores(const ImageGray& img, int patch_w, int patch_h);

/// Per-patch standardization followed by a global min-max rescale to
/// [0, 255]. A flat result (every z-score equal) maps to an all-zero image.
ImageGray patch_normalize(const ImageGray& img, int patch_w, int patch_h);

/// Firing rate (Hz) of each pixel: intensity / 255 * max_rate.
std::vector<double> pixel_rates(const ImageGray& img, double max_rate);

/// Bernoulli-per-step approximation of independent Poisson trains, one per
/// pixel. Each pixel draws from its own stream keyed by (seed, pixel), so a
/// pixel's train does not depend on any other pixel's intensity.
/// `rate_boost` (Hz) is added to max_rate, used by the silent-retry loop.
SpikeTrain encode_poisson(const ImageGray& img, const EncodingConfig& cfg,
                          std::uint64_t presentation_seed, double rate_boost = 0.0);

/// Binary (P5) 8-bit PGM.
ImageGray read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const ImageGray& img);

}  // namespace vprsnn
