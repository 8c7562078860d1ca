#include "vprsnn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vprsnn/error.hpp"
#include "vprsnn/evaluation.hpp"
#include "vprsnn/random.hpp"

namespace vprsnn {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s)
{
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string traverse_id(std::size_t t, std::size_t n_reference)
{
    return t < n_reference ? "ref" + std::to_string(t) : "query";
}

std::string image_name(std::size_t place)
{
    std::string digits = std::to_string(place);
    if (digits.size() < 4) {
        digits.insert(0, 4 - digits.size(), '0');
    }
    return digits + ".pgm";
}

// Rounded integer division for non-negative operands.
std::int64_t div_round(std::int64_t num, std::int64_t den)
{
    return (2 * num + den) / (2 * den);
}

ImageGray base_pattern(const SynthSpec& spec, std::size_t place)
{
    const int w = spec.width;
    const int h = spec.height;
    Rng rng(mix_seed({spec.seed, 0xba5eULL, place}));
    std::vector<std::int64_t> noise(static_cast<std::size_t>(w) * h);
    for (auto& v : noise) {
        v = static_cast<std::int64_t>(rng.below(256));
    }
    const int r = spec.blur_radius;
    std::vector<std::int64_t> blurred(noise.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::int64_t sum = 0;
            std::int64_t count = 0;
            for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
                for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                    sum += noise[static_cast<std::size_t>(yy) * w + xx];
                    ++count;
                }
            }
            blurred[static_cast<std::size_t>(y) * w + x] = div_round(sum, count);
        }
    }
    const auto [lo_it, hi_it] = std::minmax_element(blurred.begin(), blurred.end());
    const std::int64_t lo = *lo_it;
    const std::int64_t range = *hi_it - lo;
    ImageGray out(w, h);
    for (std::size_t p = 0; p < blurred.size(); ++p) {
        out.data[p] = static_cast<std::uint8_t>(
            range == 0 ? blurred[p] : div_round((blurred[p] - lo) * 255, range));
    }
    return out;
}

ImageGray render_view(const SynthSpec& spec, const ImageGray& base, std::size_t traverse,
                      std::size_t place)
{
    Rng rng(mix_seed({spec.seed, 0x7a1eULL, traverse, place}));
    const int dx = static_cast<int>(rng.between(-spec.max_shift, spec.max_shift));
    const int dy = static_cast<int>(rng.between(-spec.max_shift, spec.max_shift));
    const int offset =
        static_cast<int>(rng.between(-spec.brightness_jitter, spec.brightness_jitter));
    ImageGray out(base.width, base.height);
    for (int y = 0; y < base.height; ++y) {
        for (int x = 0; x < base.width; ++x) {
            const int sx = std::clamp(x - dx, 0, base.width - 1);
            const int sy = std::clamp(y - dy, 0, base.height - 1);
            int v = base.at(sx, sy) + offset;
            if (spec.noise_sigma > 0.0) {
                v += static_cast<int>(std::floor(rng.gaussian() * spec.noise_sigma + 0.5));
            }
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
    }
    return out;
}

}  // namespace

std::size_t Dataset::n_labels() const noexcept
{
    std::size_t n = 0;
    for (const auto& e : entries) {
        n = std::max(n, e.label + 1);
    }
    return n;
}

std::vector<std::size_t> Dataset::labels() const
{
    std::vector<std::size_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        out.push_back(e.label);
    }
    return out;
}

std::vector<std::string> Dataset::traverses() const
{
    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (std::find(out.begin(), out.end(), e.traverse) == out.end()) {
            out.push_back(e.traverse);
        }
    }
    return out;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest " + path.string());
    }
    const fs::path base = path.parent_path();
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) !=
                                       std::vector<std::string>{"path", "label", "traverse"}) {
        throw ValidationError(path.string() + ": header must be 'path,label,traverse'");
    }
    std::vector<ManifestEntry> entries;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != 3) {
            throw ValidationError(where + ": expected 3 columns, got " +
                                  std::to_string(cells.size()));
        }
        ManifestEntry e;
        fs::path p(cells[0]);
        e.path = p.is_absolute() ? p : (base / p).lexically_normal();
        try {
            std::size_t used = 0;
            const long long v = std::stoll(cells[1], &used);
            if (used != cells[1].size() || v < 0) {
                throw std::invalid_argument(cells[1]);
            }
            e.label = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw ValidationError(where + ": bad label '" + cells[1] + "'");
        }
        e.traverse = cells[2];
        if (e.traverse.empty()) {
            throw ValidationError(where + ": empty traverse id");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries)
{
    const fs::path dir = path.parent_path();
    std::string text = "path,label,traverse\n";
    for (const auto& e : entries) {
        fs::path p = e.path;
        if (p.is_absolute() && !dir.empty()) {
            p = p.lexically_relative(fs::absolute(dir));
        } else if (!dir.empty()) {
            const auto rel = p.lexically_relative(dir);
            if (!rel.empty() && *rel.begin() != "..") {
                p = rel;
            }
        }
        text += p.generic_string() + "," + std::to_string(e.label) + "," + e.traverse + "\n";
    }
    write_text(path, text);
}

void validate_reference(std::span<const ManifestEntry> entries)
{
    if (entries.empty()) {
        throw ValidationError("reference manifest is empty");
    }
    std::set<std::size_t> labels;
    std::map<std::string, std::set<std::size_t>> by_traverse;
    std::vector<std::string> order;
    for (const auto& e : entries) {
        labels.insert(e.label);
        if (!by_traverse.contains(e.traverse)) {
            order.push_back(e.traverse);
        }
        by_traverse[e.traverse].insert(e.label);
    }
    const std::size_t top = *labels.rbegin();
    for (std::size_t l = 0; l <= top; ++l) {
        if (!labels.contains(l)) {
            throw ValidationError("reference labels must be contiguous: label gap at " +
                                  std::to_string(l));
        }
    }
    for (const auto& t : order) {
        const auto& have = by_traverse[t];
        for (std::size_t l = 0; l <= top; ++l) {
            if (!have.contains(l)) {
                throw ValidationError("traverse '" + t + "' is missing label " +
                                      std::to_string(l));
            }
        }
    }
}

Dataset load_manifests(std::span<const fs::path> paths, ManifestRole role)
{
    Dataset ds;
    ds.role = role;
    for (const auto& p : paths) {
        auto entries = read_manifest(p);
        ds.entries.insert(ds.entries.end(), entries.begin(), entries.end());
    }
    if (role == ManifestRole::reference) {
        validate_reference(ds.entries);
    } else if (ds.entries.empty()) {
        throw ValidationError("query manifest is empty");
    }
    ds.images.reserve(ds.entries.size());
    for (const auto& e : ds.entries) {
        ds.images.push_back(read_pgm(e.path));
    }
    return ds;
}

Dataset load_manifest(const fs::path& path, ManifestRole role)
{
    return load_manifests(std::span<const fs::path>(&path, 1), role);
}

void SynthSpec::validate() const
{
    if (places < 1) throw ValidationError("synth.places: must be >= 1");
    if (width < 1 || height < 1) throw ValidationError("synth.width/height: must be >= 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw ValidationError("synth.noise_sigma: must be >= 0");
    if (brightness_jitter < 0) throw ValidationError("synth.brightness_jitter: must be >= 0");
    if (max_shift < 0) throw ValidationError("synth.max_shift: must be >= 0");
    if (blur_radius < 0) throw ValidationError("synth.blur_radius: must be >= 0");
}

std::string SynthSpec::to_json() const
{
    nlohmann::ordered_json j;
    j["places"] = places;
    j["traverses"] = traverses;
    j["width"] = width;
    j["height"] = height;
    j["noise_sigma"] = noise_sigma;
    j["brightness_jitter"] = brightness_jitter;
    j["max_shift"] = max_shift;
    j["blur_radius"] = blur_radius;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

SynthSpec SynthSpec::from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("synth spec: ") + e.what());
    }
    if (!j.is_object()) {
        throw ValidationError("synth spec: expected a JSON object");
    }
    SynthSpec s;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& k = it.key();
            const auto& v = it.value();
            if (k == "places") s.places = v.get<std::size_t>();
            else if (k == "traverses") s.traverses = v.get<std::size_t>();
            else if (k == "width") s.width = v.get<int>();
            else if (k == "height") s.height = v.get<int>();
            else if (k == "noise_sigma") s.noise_sigma = v.get<double>();
            else if (k == "brightness_jitter") s.brightness_jitter = v.get<int>();
            else if (k == "max_shift") s.max_shift = v.get<int>();
            else if (k == "blur_radius") s.blur_radius = v.get<int>();
            else if (k == "seed") s.seed = v.get<std::uint64_t>();
            else throw ValidationError("synth spec: unknown key '" + k + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

SyntheticDataset generate_synthetic(const SynthSpec& spec)
{
    spec.validate();
    SyntheticDataset out;
    out.bases.reserve(spec.places);
    for (std::size_t p = 0; p < spec.places; ++p) {
        out.bases.push_back(base_pattern(spec, p));
    }
    for (std::size_t t = 0; t <= spec.traverses; ++t) {
        Dataset ds;
        ds.role = t < spec.traverses ? ManifestRole::reference : ManifestRole::query;
        const auto id = traverse_id(t, spec.traverses);
        for (std::size_t p = 0; p < spec.places; ++p) {
            ds.entries.push_back({fs::path("images") / id / image_name(p), p, id});
            ds.images.push_back(render_view(spec, out.bases[p], t, p));
        }
        if (t < spec.traverses) {
            out.references.push_back(std::move(ds));
        } else {
            out.query = std::move(ds);
        }
    }
    return out;
}

std::vector<fs::path> write_synthetic(const SyntheticDataset& data, const SynthSpec& spec,
                                      const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    auto emit = [&](const Dataset& ds, const fs::path& manifest) {
        std::vector<ManifestEntry> entries;
        for (std::size_t k = 0; k < ds.size(); ++k) {
            const fs::path target = dir / ds.entries[k].path;
            fs::create_directories(target.parent_path(), ec);
            if (ec) {
                throw IoError("cannot create " + target.parent_path().string());
            }
            write_pgm(target, ds.images[k]);
            entries.push_back({target, ds.entries[k].label, ds.entries[k].traverse});
        }
        write_manifest(manifest, entries);
    };
    std::vector<fs::path> refs;
    for (std::size_t t = 0; t < data.references.size(); ++t) {
        refs.push_back(dir / ("reference_" + std::to_string(t) + ".csv"));
        emit(data.references[t], refs.back());
    }
    emit(data.query, dir / "query.csv");
    write_text(dir / "spec.json", spec.to_json());
    return refs;
}

Dataset concat(std::span<const Dataset> parts, ManifestRole role)
{
    Dataset out;
    out.role = role;
    for (const auto& d : parts) {
        out.entries.insert(out.entries.end(), d.entries.begin(), d.entries.end());
        out.images.insert(out.images.end(), d.images.begin(), d.images.end());
    }
    return out;
}

}  // namespace vprsnn
