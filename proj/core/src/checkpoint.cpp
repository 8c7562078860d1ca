#include "vprsnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vprsnn/error.hpp"

namespace vprsnn {

namespace {

constexpr std::string_view kMagic = "VPRSNN1\n";

void put_u64(std::string& out, std::uint64_t v)
{
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
    }
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos)
{
    if (pos + 8 > in.size()) {
        throw ValidationError("checkpoint: truncated");
    }
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
    }
    pos += 8;
    return v;
}

void put_doubles(std::string& out, const std::vector<double>& values)
{
    for (double v : values) {
        put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
}

std::vector<double> get_doubles(const std::string& in, std::size_t& pos, std::size_t n)
{
    std::vector<double> out(n);
    for (auto& v : out) {
        v = std::bit_cast<double>(get_u64(in, pos));
    }
    return out;
}

nlohmann::json config_json(const RunConfig& cfg)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& key : config_keys()) {
        j[key] = get_config_value(cfg, key);
    }
    return j;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt)
{
    nlohmann::json header;
    header["format"] = "vprsnn-checkpoint";
    header["version"] = 1;
    header["config"] = config_json(ckpt.config);
    header["n_inputs"] = ckpt.weights.rows();
    header["n_exc"] = ckpt.weights.cols();
    header["n_labels"] = ckpt.counts.cols();
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : ckpt.assignment.label) {
        labels.push_back(l ? static_cast<std::int64_t>(*l) : -1);
    }
    header["assignment"] = labels;
    header["meta"] = {{"epochs_completed", ckpt.meta.epochs_completed},
                      {"presentations", ckpt.meta.presentations},
                      {"retries", ckpt.meta.retries}};
    header["layout"] = {"weights", "theta", "counts"};

    const std::string text = header.dump();
    std::string out(kMagic);
    put_u64(out, text.size());
    out += text;
    put_doubles(out, ckpt.weights.data());
    put_doubles(out, ckpt.theta);
    put_doubles(out, ckpt.counts.data());
    return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes)
{
    if (bytes.compare(0, kMagic.size(), kMagic) != 0) {
        throw ValidationError("checkpoint: bad magic (expected VPRSNN1)");
    }
    std::size_t pos = kMagic.size();
    const auto header_len = get_u64(bytes, pos);
    if (pos + header_len > bytes.size()) {
        throw ValidationError("checkpoint: truncated header");
    }
    Checkpoint ckpt;
    std::size_t n_inputs = 0;
    std::size_t n_exc = 0;
    std::size_t n_labels = 0;
    std::vector<std::int64_t> labels;
    try {
        const auto header = nlohmann::json::parse(bytes.substr(pos, header_len));
        if (header.at("version").get<int>() != 1) {
            throw ValidationError("checkpoint: unsupported version");
        }
        for (const auto& [key, value] : header.at("config").items()) {
            set_config_value(ckpt.config, key, value.get<std::string>());
        }
        n_inputs = header.at("n_inputs").get<std::size_t>();
        n_exc = header.at("n_exc").get<std::size_t>();
        n_labels = header.at("n_labels").get<std::size_t>();
        labels = header.at("assignment").get<std::vector<std::int64_t>>();
        const auto& meta = header.at("meta");
        ckpt.meta.epochs_completed = meta.at("epochs_completed").get<std::size_t>();
        ckpt.meta.presentations = meta.at("presentations").get<std::uint64_t>();
        ckpt.meta.retries = meta.at("retries").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("checkpoint: malformed header: ") + e.what());
    }
    pos += header_len;

    if (n_inputs != ckpt.config.n_inputs() || n_exc != ckpt.config.n_exc) {
        throw ValidationError("checkpoint: matrix dimensions disagree with the config echo");
    }
    if (labels.size() != n_exc) {
        throw ValidationError("checkpoint: assignment length disagrees with n_exc");
    }
    const std::size_t expected = (n_inputs * n_exc + n_exc + n_exc * n_labels) * 8;
    if (bytes.size() - pos != expected) {
        throw ValidationError("checkpoint: binary section has " + std::to_string(bytes.size() - pos) +
                              " bytes, expected " + std::to_string(expected));
    }
    ckpt.weights = Matrix<double>(n_inputs, n_exc);
    ckpt.weights.data() = get_doubles(bytes, pos, n_inputs * n_exc);
    ckpt.theta = get_doubles(bytes, pos, n_exc);
    ckpt.counts = SpikeCountMatrix(n_exc, n_labels);
    ckpt.counts.data() = get_doubles(bytes, pos, n_exc * n_labels);

    ckpt.assignment = assign_standard(ckpt.counts);
    for (std::size_t i = 0; i < n_exc; ++i) {
        const auto& got = ckpt.assignment.label[i];
        const std::int64_t want = labels[i];
        if ((want < 0) != !got.has_value() || (got && static_cast<std::int64_t>(*got) != want)) {
            throw ValidationError("checkpoint: stored assignment disagrees with spike counts");
        }
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write checkpoint " + path.string());
    }
    const auto bytes = serialize_checkpoint(ckpt);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing checkpoint " + path.string());
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_checkpoint(ss.str());
}

}  // namespace vprsnn
