#include "vprsnn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "vprsnn/error.hpp"
#include "vprsnn/random.hpp"

namespace vprsnn {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kPhaseWeights = 0x11;
constexpr std::uint64_t kPhaseOrder = 0x12;
constexpr std::uint64_t kPhaseTrain = 0x13;
constexpr std::uint64_t kPhaseLabel = 0x14;
constexpr std::uint64_t kPhaseQuery = 0x15;

void log(const RunOptions& opts, const std::string& msg)
{
    if (opts.log) {
        opts.log(msg);
    }
}

// Runs body(i) for i in [0, n) over `threads` workers. Each worker gets its
// own context from make_ctx().
template <typename MakeCtx, typename Body>
void parallel_for(std::size_t n, unsigned threads, MakeCtx make_ctx, Body body)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        auto ctx = make_ctx();
        for (std::size_t i = 0; i < n; ++i) {
            body(ctx, i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            try {
                auto ctx = make_ctx();
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    body(ctx, i);
                }
            } catch (...) {
                if (!failed.exchange(true)) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

bool state_is_finite(const NetworkState& s)
{
    auto ok = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return ok(s.v_exc) && ok(s.v_inh) && ok(s.ge_exc) && ok(s.gi_exc) && ok(s.ge_inh) &&
           ok(s.theta) && ok(s.weights.data());
}

Network network_from(const Checkpoint& ckpt)
{
    return Network::from_weights(ckpt.weights, ckpt.theta, ckpt.config.exc, ckpt.config.inh,
                                 ckpt.config.syn);
}

EncodingConfig encoding_for(const RunConfig& cfg)
{
    EncodingConfig enc = cfg.enc;
    enc.seed = cfg.seed;
    return enc;
}

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

ImageGray preprocess(const ImageGray& img, const RunConfig& cfg)
{
    return patch_normalize(resize(img, cfg.image_width, cfg.image_height), cfg.patch_width,
                           cfg.patch_height);
}

Checkpoint train(const Dataset& reference, const RunConfig& cfg, const RunOptions& opts)
{
    cfg.validate();
    validate_reference(reference.entries);
    if (reference.images.size() != reference.entries.size()) {
        throw ValidationError("train: dataset has " + std::to_string(reference.images.size()) +
                              " images for " + std::to_string(reference.entries.size()) +
                              " entries");
    }

    std::vector<ImageGray> inputs;
    inputs.reserve(reference.size());
    for (const auto& img : reference.images) {
        inputs.push_back(preprocess(img, cfg));
    }

    // Traverses interleaved place by place; reshuffled every epoch.
    const auto traverses = reference.traverses();
    std::vector<std::size_t> order(reference.size());
    std::iota(order.begin(), order.end(), 0);
    auto traverse_rank = [&](std::size_t i) {
        return std::find(traverses.begin(), traverses.end(), reference.entries[i].traverse) -
               traverses.begin();
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = reference.entries[a];
        const auto& eb = reference.entries[b];
        if (ea.label != eb.label) return ea.label < eb.label;
        return traverse_rank(a) < traverse_rank(b);
    });

    Network net = Network::build(cfg.n_inputs(), cfg.n_exc, cfg.exc, cfg.inh, cfg.syn,
                                 mix_seed({cfg.seed, kPhaseWeights}));
    const auto enc = encoding_for(cfg);

    Checkpoint ckpt;
    ckpt.config = cfg;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng order_rng(mix_seed({cfg.seed, kPhaseOrder, epoch}));
        shuffle(order.begin(), order.end(), order_rng);
        std::uint64_t epoch_spikes = 0;
        for (const auto idx : order) {
            double boost = 0.0;
            for (std::size_t attempt = 0;; ++attempt) {
                const auto train_seed = mix_seed({cfg.seed, kPhaseTrain, epoch, idx, attempt});
                const auto spikes = encode_poisson(inputs[idx], enc, train_seed, boost);
                const auto record = net.present(spikes, enc.t_present, enc.t_rest, enc.dt, true);
                ++ckpt.meta.presentations;
                epoch_spikes += record.total;
                if (record.total >= cfg.min_spikes || attempt >= cfg.max_retries) {
                    break;
                }
                ++ckpt.meta.retries;
                boost += cfg.rate_boost;
            }
            if (!state_is_finite(net.state())) {
                throw Error("train: non-finite network state at epoch " + std::to_string(epoch) +
                            ", image " + reference.entries[idx].path.string() + " (t = " +
                            format_double(net.state().t_now) + " ms)");
            }
        }
        ckpt.meta.epochs_completed = epoch + 1;
        log(opts, "epoch " + std::to_string(epoch + 1) + "/" + std::to_string(cfg.epochs) +
                      ": " + std::to_string(epoch_spikes) + " output spikes");
    }

    // Every learning presentation starts from normalized weights; the frozen
    // passes use the same operating point.
    net.normalize_weights();
    ckpt.weights = net.state().weights;
    ckpt.theta = net.state().theta;

    std::vector<LabeledRecord> records;
    for (std::size_t pass = 0; pass < cfg.label_passes; ++pass) {
        const auto counts = frozen_spike_counts(ckpt, inputs, mix_seed({kPhaseLabel, pass}), opts);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            LabeledRecord r;
            r.label = reference.entries[i].label;
            r.record.counts.resize(counts.cols());
            for (std::size_t k = 0; k < counts.cols(); ++k) {
                r.record.counts[k] = static_cast<std::uint32_t>(counts(i, k));
                r.record.total += r.record.counts[k];
            }
            records.push_back(std::move(r));
        }
    }
    ckpt.counts = build_counts(records);
    ckpt.assignment = assign_standard(ckpt.counts);
    log(opts, "labeling pass: " + std::to_string(ckpt.assignment.n_assigned()) + "/" +
                  std::to_string(cfg.n_exc) + " neurons assigned");
    return ckpt;
}

Matrix<double> frozen_spike_counts(const Checkpoint& ckpt, std::span<const ImageGray> images,
                                   std::uint64_t phase, const RunOptions& opts)
{
    const auto& cfg = ckpt.config;
    if (ckpt.weights.rows() != cfg.n_inputs() || ckpt.weights.cols() != cfg.n_exc) {
        throw ValidationError("checkpoint weights do not match the configured network size");
    }
    const auto enc = encoding_for(cfg);
    Matrix<double> out(images.size(), cfg.n_exc, 0.0);
    parallel_for(
        images.size(), opts.threads, [&] { return network_from(ckpt); },
        [&](Network& net, std::size_t i) {
            if (images[i].size() != cfg.n_inputs()) {
                throw ValidationError("image " + std::to_string(i) + " has " +
                                      std::to_string(images[i].size()) +
                                      " pixels but the network expects " +
                                      std::to_string(cfg.n_inputs()));
            }
            net.reset_fast_state();
            const auto spikes = encode_poisson(images[i], enc, mix_seed({phase, i}));
            const auto record = net.present(spikes, enc.t_present, enc.t_rest, enc.dt, false);
            for (std::size_t k = 0; k < record.counts.size(); ++k) {
                out(i, k) = record.counts[k];
            }
        });
    return out;
}

Matrix<double> query_spike_counts(const Checkpoint& ckpt, const Dataset& queries,
                                  const RunOptions& opts)
{
    std::vector<ImageGray> inputs;
    inputs.reserve(queries.images.size());
    for (const auto& img : queries.images) {
        inputs.push_back(preprocess(img, ckpt.config));
    }
    return frozen_spike_counts(ckpt, inputs, kPhaseQuery, opts);
}

QueryResult decode(const Checkpoint& ckpt, Matrix<double> spike_counts, Scheme scheme)
{
    QueryResult out;
    out.table = score_all(spike_counts, ckpt.assignment, ckpt.counts, scheme, ckpt.config.gamma);
    out.predictions = predictions_from_scores(out.table.scores);
    out.low_confidence.resize(spike_counts.rows());
    for (std::size_t q = 0; q < spike_counts.rows(); ++q) {
        const auto row = spike_counts.row(q);
        out.low_confidence[q] = std::all_of(row.begin(), row.end(), [](double v) { return v == 0; });
    }
    out.spike_counts = std::move(spike_counts);
    return out;
}

QueryResult query(const Checkpoint& ckpt, const Dataset& queries, Scheme scheme,
                  const RunOptions& opts)
{
    return decode(ckpt, query_spike_counts(ckpt, queries, opts), scheme);
}

QueryResult sad_baseline(const Dataset& reference, const Dataset& queries, const RunConfig& cfg)
{
    validate_reference(reference.entries);
    const std::size_t n_labels = reference.n_labels();
    std::vector<ImageGray> refs;
    for (const auto& img : reference.images) {
        refs.push_back(preprocess(img, cfg));
    }
    DistanceMatrix d(queries.size(), n_labels, 0.0);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto qimg = preprocess(queries.images[q], cfg);
        std::vector<bool> seen(n_labels, false);
        for (std::size_t r = 0; r < refs.size(); ++r) {
            const auto l = reference.entries[r].label;
            const double dist = sad_distance(qimg, refs[r]);
            d(q, l) = seen[l] ? std::min(d(q, l), dist) : dist;
            seen[l] = true;
        }
    }
    QueryResult out;
    out.table.scheme = Scheme::standard;
    out.table.scores = to_distance(d);
    out.predictions = predictions_from_scores(out.table.scores);
    out.low_confidence.assign(queries.size(), false);
    return out;
}

std::string predictions_csv(const PredictionSet& set)
{
    std::string out = "query,predicted,confidence";
    for (std::size_t l = 0; l < set.scores.cols(); ++l) {
        out += ",score_" + std::to_string(l);
    }
    out += '\n';
    for (std::size_t q = 0; q < set.predictions.size(); ++q) {
        out += std::to_string(q) + "," + std::to_string(set.predictions[q].label) + "," +
               format_double(set.predictions[q].confidence);
        for (std::size_t l = 0; l < set.scores.cols(); ++l) {
            out += "," + format_double(set.scores(q, l));
        }
        out += '\n';
    }
    return out;
}

PredictionSet parse_predictions_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("query,predicted,confidence", 0) != 0) {
        throw ValidationError("predictions: header must start with 'query,predicted,confidence'");
    }
    const auto n_labels = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 2;
    auto parse_num = [](const std::string& cell, auto& value, std::size_t row) {
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
            throw ValidationError("predictions: bad value '" + cell + "' on row " +
                                  std::to_string(row));
        }
    };
    PredictionSet set;
    std::vector<double> scores;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        ++row;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != n_labels + 3) {
            throw ValidationError("predictions: row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " columns");
        }
        Prediction p;
        parse_num(cells[1], p.label, row);
        parse_num(cells[2], p.confidence, row);
        set.predictions.push_back(p);
        for (std::size_t l = 0; l < n_labels; ++l) {
            double v = 0.0;
            parse_num(cells[3 + l], v, row);
            scores.push_back(v);
        }
    }
    set.scores = Matrix<double>(set.predictions.size(), n_labels);
    set.scores.data() = std::move(scores);
    return set;
}

PredictionSet read_predictions(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open predictions " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_predictions_csv(ss.str());
}

PrCurve evaluate(const PredictionSet& set, std::span<const std::size_t> truth,
                 const fs::path& out_dir)
{
    const auto curve = pr_curve(set.predictions, truth);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    write_text(out_dir / "pr_curve.csv", pr_curve_csv(curve));
    write_text(out_dir / "summary.json", pr_summary_json(curve));
    if (!set.scores.empty()) {
        const auto d = to_distance(set.scores);
        write_pgm(out_dir / "distance.pgm", distance_heatmap(d));
        write_text(out_dir / "distance.csv", matrix_csv(d));
    }
    return curve;
}

}  // namespace vprsnn
