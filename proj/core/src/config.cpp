#include "vprsnn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "vprsnn/error.hpp"

namespace vprsnn {

namespace {

struct ConfigField
{
    std::string key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want)
{
    throw ValidationError(std::string(key) + ": cannot parse '" + std::string(value) + "' as " +
                          std::string(want));
}

template <typename T>
T parse_value(std::string_view key, std::string_view text)
{
    text = trim(text);
    if constexpr (std::is_same_v<T, Scheme>) {
        return parse_scheme(text);
    } else {
        T out{};
        const auto* first = text.data();
        const auto* last = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc{} || ptr != last) {
            bad_value(key, text, std::is_floating_point_v<T> ? "a number" : "an integer");
        }
        return out;
    }
}

template <typename T>
std::string format_value(const T& v)
{
    if constexpr (std::is_same_v<T, Scheme>) {
        return std::string(to_string(v));
    } else {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, ptr);
    }
}

template <typename Access>
ConfigField field(std::string key, Access access)
{
    using T = std::remove_cvref_t<decltype(access(std::declval<RunConfig&>()))>;
    return {key,
            [access, key](RunConfig& c, std::string_view v) { access(c) = parse_value<T>(key, v); },
            [access](const RunConfig& c) { return format_value<T>(access(c)); }};
}

void add_neuron_fields(std::vector<ConfigField>& out, const std::string& prefix,
                       NeuronParams RunConfig::*which)
{
    auto f = [&](const char* name, double NeuronParams::*member) {
        out.push_back(field(prefix + name, [which, member](auto& c) -> auto& {
            return (c.*which).*member;
        }));
    };
    f("tau_mem", &NeuronParams::tau_mem);
    f("e_rest", &NeuronParams::e_rest);
    f("e_exc", &NeuronParams::e_exc);
    f("e_inh", &NeuronParams::e_inh);
    f("v_reset", &NeuronParams::v_reset);
    f("v_thresh", &NeuronParams::v_thresh);
    f("t_refrac", &NeuronParams::t_refrac);
    f("theta_plus", &NeuronParams::theta_plus);
    f("tau_theta", &NeuronParams::tau_theta);
}

const std::vector<ConfigField>& fields()
{
    static const std::vector<ConfigField> table = [] {
        std::vector<ConfigField> t;
        add_neuron_fields(t, "neuron.exc.", &RunConfig::exc);
        add_neuron_fields(t, "neuron.inh.", &RunConfig::inh);
        auto syn = [&](const char* name, double SynapseParams::*member) {
            t.push_back(field(std::string("synapse.") + name,
                              [member](auto& c) -> auto& { return c.syn.*member; }));
        };
        syn("tau_ge", &SynapseParams::tau_ge);
        syn("tau_gi", &SynapseParams::tau_gi);
        syn("eta", &SynapseParams::eta);
        syn("x_tar", &SynapseParams::x_tar);
        syn("tau_xpre", &SynapseParams::tau_xpre);
        syn("w_max", &SynapseParams::w_max);
        syn("mu", &SynapseParams::mu);
        syn("w_norm_target", &SynapseParams::w_norm_target);
        syn("w_exc_inh", &SynapseParams::w_exc_inh);
        syn("w_inh_exc", &SynapseParams::w_inh_exc);
        syn("init_fraction", &SynapseParams::init_fraction);
        t.push_back(field("encoding.max_rate", [](auto& c) -> auto& { return c.enc.max_rate; }));
        t.push_back(field("encoding.t_present", [](auto& c) -> auto& { return c.enc.t_present; }));
        t.push_back(field("encoding.t_rest", [](auto& c) -> auto& { return c.enc.t_rest; }));
        t.push_back(field("encoding.dt", [](auto& c) -> auto& { return c.enc.dt; }));
        t.push_back(field("image.width", [](auto& c) -> auto& { return c.image_width; }));
        t.push_back(field("image.height", [](auto& c) -> auto& { return c.image_height; }));
        t.push_back(field("image.patch_width", [](auto& c) -> auto& { return c.patch_width; }));
        t.push_back(field("image.patch_height", [](auto& c) -> auto& { return c.patch_height; }));
        t.push_back(field("network.n_exc", [](auto& c) -> auto& { return c.n_exc; }));
        t.push_back(field("train.epochs", [](auto& c) -> auto& { return c.epochs; }));
        t.push_back(field("train.label_passes", [](auto& c) -> auto& { return c.label_passes; }));
        t.push_back(field("train.min_spikes", [](auto& c) -> auto& { return c.min_spikes; }));
        t.push_back(field("train.rate_boost", [](auto& c) -> auto& { return c.rate_boost; }));
        t.push_back(field("train.max_retries", [](auto& c) -> auto& { return c.max_retries; }));
        t.push_back(field("assign.gamma", [](auto& c) -> auto& { return c.gamma; }));
        t.push_back(field("assign.scheme", [](auto& c) -> auto& { return c.scheme; }));
        t.push_back(field("seed", [](auto& c) -> auto& { return c.seed; }));
        return t;
    }();
    return table;
}

const ConfigField& find_field(std::string_view key)
{
    for (const auto& f : fields()) {
        if (f.key == key) {
            return f;
        }
    }
    throw ValidationError("unknown configuration key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::validate() const
{
    exc.validate("neuron.exc");
    inh.validate("neuron.inh");
    syn.validate();
    enc.validate();
    if (image_width < 1) throw ValidationError("image.width: must be >= 1");
    if (image_height < 1) throw ValidationError("image.height: must be >= 1");
    if (patch_width < 1 || image_width % patch_width != 0)
        throw ValidationError("image.patch_width: must divide image.width");
    if (patch_height < 1 || image_height % patch_height != 0)
        throw ValidationError("image.patch_height: must divide image.height");
    if (n_exc < 1) throw ValidationError("network.n_exc: must be >= 1");
    if (epochs < 1) throw ValidationError("train.epochs: must be >= 1");
    if (label_passes < 1) throw ValidationError("train.label_passes: must be >= 1");
    if (!(rate_boost >= 0)) throw ValidationError("train.rate_boost: must be >= 0");
    if (!(gamma > 0 && gamma <= 1)) throw ValidationError("assign.gamma: must lie in (0, 1]");
    const double fastest = std::min({exc.tau_mem, inh.tau_mem, syn.tau_ge, syn.tau_gi, syn.tau_xpre});
    if (enc.dt > fastest / 2.0) {
        throw ValidationError("encoding.dt: must not exceed half the smallest time constant");
    }
    if ((enc.max_rate + rate_boost * static_cast<double>(max_retries)) * enc.dt / 1000.0 > 1.0) {
        throw ValidationError("train.rate_boost: boosted rates exceed one spike per step");
    }
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const auto& f : fields()) {
        keys.push_back(f.key);
    }
    return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value)
{
    find_field(key).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, std::string_view key)
{
    return find_field(key).get(cfg);
}

RunConfig parse_config(std::string_view text)
{
    RunConfig cfg;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto c = line.find_first_of("#;"); c != std::string_view::npos) {
            line = line.substr(0, c);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ValidationError("config line " + std::to_string(line_no) +
                                      ": unterminated section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
        }
        std::string key(trim(line.substr(0, eq)));
        if (!section.empty()) {
            key = section + "." + key;
        }
        set_config_value(cfg, key, line.substr(eq + 1));
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg)
{
    std::string out;
    for (const auto& f : fields()) {
        out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

}  // namespace vprsnn
