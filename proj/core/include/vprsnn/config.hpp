#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vprsnn/assignment.hpp"
#include "vprsnn/signal.hpp"
#include "vprsnn/snn.hpp"

namespace vprsnn {

/// Everything needed to train and query a network.
struct RunConfig
{
    NeuronParams exc = NeuronParams::excitatory();
    NeuronParams inh = NeuronParams::inhibitory();
    SynapseParams syn;
    EncodingConfig enc;

    int image_width = 28;
    int image_height = 28;
    int patch_width = 7;
    int patch_height = 7;

    std::size_t n_exc = 400;
    std::size_t epochs = 60;
    std::size_t label_passes = 1;
    /// Training presentations with fewer spikes are repeated with boosted rates.
    std::size_t min_spikes = 5;
    double rate_boost = 32.0;
    std::size_t max_retries = 10;

    double gamma = 0.02;
    Scheme scheme = Scheme::weighted_prob;
    std::uint64_t seed = 0;

    std::size_t n_inputs() const noexcept
    {
        return static_cast<std::size_t>(image_width) * static_cast<std::size_t>(image_height);
    }

    /// Throws ValidationError naming the first invalid key.
    void validate() const;
};

/// Every configuration key, in canonical order.
std::vector<std::string> config_keys();

/// Sets one dotted key from its textual value. Throws ValidationError on
/// unknown keys or unparsable values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

/// Parses `key = value` lines. `[section]` headers prefix the keys that
/// follow with `section.`; `#` and `;` start comments.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form: one `key = value` line per key, loadable by
/// parse_config.
std::string dump_config(const RunConfig& cfg);

}  // namespace vprsnn
