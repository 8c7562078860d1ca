#include "vprsnn/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vprsnn/error.hpp"
#include "vprsnn/random.hpp"

namespace vprsnn {

ImageGray::ImageGray(int w, int h, std::uint8_t fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill)
{
    if (w < 0 || h < 0) {
        throw ValidationError("image: negative dimensions");
    }
}

ImageGray::ImageGray(int w, int h, std::vector<std::uint8_t> pixels)
    : width(w), height(h), data(std::move(pixels))
{
    if (w < 0 || h < 0 || data.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
        throw ValidationError("image: pixel count does not match " + std::to_string(w) + "x" +
                              std::to_string(h));
    }
}

void EncodingConfig::validate() const
{
    if (!(max_rate > 0) || !std::isfinite(max_rate)) {
        throw ValidationError("encoding.max_rate: must be > 0");
    }
    if (!(t_present > 0)) {
        throw ValidationError("encoding.t_present: must be > 0");
    }
    if (!(t_rest >= 0)) {
        throw ValidationError("encoding.t_rest: must be >= 0");
    }
    if (!(dt > 0)) {
        throw ValidationError("encoding.dt: must be > 0");
    }
    if (max_rate * dt / 1000.0 > 1.0) {
        throw ValidationError("encoding: max_rate * dt exceeds one spike per step");
    }
}

std::uint8_t to_pixel(double v) noexcept
{
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

ImageGray to_grayscale(std::span<const std::uint8_t> rgb, int width, int height)
{
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (rgb.size() != 3 * n) {
        throw ValidationError("to_grayscale: buffer is not width*height*3 bytes");
    }
    ImageGray out(width, height);
    for (std::size_t p = 0; p < n; ++p) {
        const double y = 0.299 * rgb[3 * p] + 0.587 * rgb[3 * p + 1] + 0.114 * rgb[3 * p + 2];
        out.data[p] = to_pixel(y);
    }
    return out;
}

namespace {

struct Tap
{
    int src;
    double weight;
};

// Resampling taps for one axis, one list per output coordinate.
std::vector<std::vector<Tap>> axis_taps(int in, int out)
{
    std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
    if (out <= in) {
        const double scale = static_cast<double>(in) / out;
        for (int o = 0; o < out; ++o) {
            const double lo = o * scale;
            const double hi = (o + 1) * scale;
            for (int s = static_cast<int>(std::floor(lo)); s < in && s < hi; ++s) {
                const double overlap = std::min<double>(s + 1, hi) - std::max<double>(s, lo);
                if (overlap > 0) {
                    taps[o].push_back({s, overlap / scale});
                }
            }
        }
    } else {
        const double scale = static_cast<double>(in) / out;
        for (int o = 0; o < out; ++o) {
            double pos = (o + 0.5) * scale - 0.5;
            pos = std::clamp(pos, 0.0, static_cast<double>(in - 1));
            const int i0 = static_cast<int>(std::floor(pos));
            const int i1 = std::min(i0 + 1, in - 1);
            const double frac = pos - i0;
            taps[o].push_back({i0, 1.0 - frac});
            if (frac > 0) {
                taps[o].push_back({i1, frac});
            }
        }
    }
    return taps;
}

}  // namespace

ImageGray resize(const ImageGray& img, int out_w, int out_h)
{
    if (out_w < 1 || out_h < 1) {
        throw ValidationError("resize: output dimensions must be >= 1");
    }
    if (img.width < 1 || img.height < 1) {
        throw ValidationError("resize: empty input image");
    }
    if (out_w == img.width && out_h == img.height) {
        return img;
    }
    const auto xt = axis_taps(img.width, out_w);
    const auto yt = axis_taps(img.height, out_h);

    std::vector<double> horiz(static_cast<std::size_t>(out_w) * img.height, 0.0);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (auto [s, w] : xt[x]) {
                acc += w * img.at(s, y);
            }
            horiz[static_cast<std::size_t>(y) * out_w + x] = acc;
        }
    }
    ImageGray out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (auto [s, w] : yt[y]) {
                acc += w * horiz[static_cast<std::size_t>(s) * out_w + x];
            }
            out.at(x, y) = to_pixel(acc);
        }
    }
    return out;
}

std::vector<double> patch_zscores(const ImageGray& img, int patch_w, int patch_h)
{
    if (patch_w < 1 || patch_h < 1 || img.width % patch_w != 0 || img.height % patch_h != 0) {
        throw ValidationError("patch_normalize: patch " + std::to_string(patch_w) + "x" +
                              std::to_string(patch_h) + " does not tile a " +
                              std::to_string(img.width) + "x" + std::to_string(img.height) +
                              " image");
    }
    std::vector<double> z(img.size(), 0.0);
    const double n = static_cast<double>(patch_w) * patch_h;
    for (int py = 0; py < img.height; py += patch_h) {
        for (int px = 0; px < img.width; px += patch_w) {
            double sum = 0.0;
            for (int y = py; y < py + patch_h; ++y) {
                for (int x = px; x < px + patch_w; ++x) {
                    sum += img.at(x, y);
                }
            }
            const double mean = sum / n;
            double var = 0.0;
            for (int y = py; y < py + patch_h; ++y) {
                for (int x = px; x < px + patch_w; ++x) {
                    const double d = img.at(x, y) - mean;
                    var += d * d;
                }
            }
            const double sd = std::sqrt(var / n);
            if (sd == 0.0) {
                continue;
            }
            for (int y = py; y < py + patch_h; ++y) {
                for (int x = px; x < px + patch_w; ++x) {
                    z[static_cast<std::size_t>(y) * img.width + x] = (img.at(x, y) - mean) / sd;
                }
            }
        }
    }
    return z;
}

ImageGray patch_normalize(const ImageGray& img, int patch_w, int patch_h)
{
    const auto z = patch_zscores(img, patch_w, patch_h);
    ImageGray out(img.width, img.height);
    if (z.empty()) {
        return out;
    }
    const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    if (range <= 0.0) {
        return out;
    }
    for (std::size_t p = 0; p < z.size(); ++p) {
        out.data[p] = to_pixel((z[p] - lo) / range * 255.0);
    }
    return out;
}

std::vector<double> pixel_rates(const ImageGray& img, double max_rate)
{
    std::vector<double> rates(img.size());
    for (std::size_t p = 0; p < img.size(); ++p) {
        rates[p] = img.data[p] / 255.0 * max_rate;
    }
    return rates;
}

SpikeTrain encode_poisson(const ImageGray& img, const EncodingConfig& cfg,
                          std::uint64_t presentation_seed, double rate_boost)
{
    cfg.validate();
    const double peak = cfg.max_rate + rate_boost;
    if (peak * cfg.dt / 1000.0 > 1.0) {
        throw ValidationError("encoding: boosted rate exceeds one spike per step");
    }
    const std::size_t n_steps = steps_for(cfg.t_present, cfg.dt);
    const auto rates = pixel_rates(img, peak);

    // (step, pixel) events; pixels are visited in order so each step's list
    // comes out sorted after the counting sort below.
    std::vector<std::uint32_t> event_step;
    std::vector<std::uint32_t> event_pixel;
    std::vector<std::size_t> per_step(n_steps + 1, 0);
    for (std::size_t p = 0; p < rates.size(); ++p) {
        const double prob = rates[p] * cfg.dt / 1000.0;
        if (prob <= 0.0) {
            continue;
        }
        Rng rng(mix_seed({cfg.seed, presentation_seed, static_cast<std::uint64_t>(p)}));
        auto emit = [&](std::size_t s) {
            event_step.push_back(static_cast<std::uint32_t>(s));
            event_pixel.push_back(static_cast<std::uint32_t>(p));
            ++per_step[s + 1];
        };
        if (prob >= 1.0) {
            for (std::size_t s = 0; s < n_steps; ++s) {
                emit(s);
            }
            continue;
        }
        // Each 64-bit draw supplies two 32-bit uniforms.
        const auto threshold = static_cast<std::uint64_t>(std::ldexp(prob, 32));
        for (std::size_t s = 0; s < n_steps; s += 2) {
            const std::uint64_t bits = rng();
            if ((bits & 0xffffffffULL) < threshold) {
                emit(s);
            }
            if (s + 1 < n_steps && (bits >> 32) < threshold) {
                emit(s + 1);
            }
        }
    }
    for (std::size_t s = 0; s < n_steps; ++s) {
        per_step[s + 1] += per_step[s];
    }
    std::vector<std::uint32_t> sorted(event_pixel.size());
    auto cursor = per_step;
    for (std::size_t e = 0; e < event_pixel.size(); ++e) {
        sorted[cursor[event_step[e]]++] = event_pixel[e];
    }

    SpikeTrainBuilder builder(img.size());
    for (std::size_t s = 0; s < n_steps; ++s) {
        builder.push_step(std::span<const std::uint32_t>(sorted.data() + per_step[s],
                                                         per_step[s + 1] - per_step[s]));
    }
    return std::move(builder).finish();
}

}  // namespace vprsnn
