#include "segssl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "segssl/errors.hpp"
#include "segssl/losses.hpp"
#include "segssl/metrics.hpp"
#include "segssl/parallel.hpp"
#include "segssl/rng.hpp"

namespace segssl {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double softmax_dev(const ProbMap& p) {
    double worst = 0.0;
    for (size_t px = 0; px < p.pixel_count(); ++px) {
        double sum = 0.0;
        for (int c = 0; c < p.num_classes; ++c) sum += p.data[px * p.num_classes + c];
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

struct EpochTally {
    double sup_sum = 0.0, unl_sum = 0.0;
    size_t sup_n = 0, unl_n = 0;

    double supervised_mean() const { return sup_n ? sup_sum / sup_n : 0.0; }
    double unlabeled_mean() const { return unl_n ? unl_sum / unl_n : 0.0; }
    double total_mean() const {
        size_t n = sup_n + unl_n;
        return n ? (sup_sum + unl_sum) / n : 0.0;
    }
};

} // namespace

std::string to_string(TrainMode mode) {
    switch (mode) {
        case TrainMode::SL: return "SL";
        case TrainMode::SSL: return "SSL";
        case TrainMode::SSL_AL: return "SSL_AL";
    }
    return "?";
}

TrainMode parse_train_mode(const std::string& s) {
    if (s == "SL") return TrainMode::SL;
    if (s == "SSL") return TrainMode::SSL;
    if (s == "SSL_AL") return TrainMode::SSL_AL;
    throw ConfigError("unknown mode '" + s + "' (expected SL, SSL or SSL_AL)");
}

void TrainConfig::validate() const {
    if (e_maximum < 1) throw ConfigError("e_maximum must be >= 1");
    if (e_warmup < 0 || e_warmup > e_maximum)
        throw ConfigError("e_warmup must be in [0, e_maximum]");
    if (filter_interval < 1) throw ConfigError("filter_interval must be >= 1");
    if (!(drop_fraction >= 0.0 && drop_fraction < 1.0))
        throw ConfigError("drop_fraction must be in [0, 1)");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (lr0 <= 0.0) throw ConfigError("lr0 must be > 0");
    if (wd < 0.0) throw ConfigError("wd must be >= 0");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    weak.validate();
}

TrainResult train(const TrainConfig& config, const DatasetSplit& split) {
    config.validate();
    if (split.labeled.empty()) throw DataError("train: labeled set is empty");
    if (split.num_classes < 2) throw DataError("train: num_classes must be >= 2");

    NetworkSpec spec;
    spec.input_channels = split.labeled.front().image.channels;
    spec.num_classes = split.num_classes;

    TrainResult result;
    result.params = init_network(spec, config.seed);
    OptimState optim(result.params, config.lr0, config.wd, config.momentum, config.e_maximum);
    Rng rng(config.seed, 1); // loop stream, separate from init

    std::map<std::string, const Image*> unlabeled_images;
    std::vector<std::string> active;
    for (const UnlabeledSample& s : split.unlabeled) {
        unlabeled_images[s.id] = &s.image;
        active.push_back(s.id);
    }
    std::sort(active.begin(), active.end());

    size_t labeled_n = split.labeled.size();
    int u_per = config.batch_size / 2;
    int l_per = config.batch_size - u_per;

    auto track = [&](const ProbMap& p) {
        result.max_softmax_dev = std::max(result.max_softmax_dev, softmax_dev(p));
    };

    auto run_batch = [&](const std::vector<const ProbMap*>& preds,
                         const std::vector<const LabelMap*>& targets,
                         const std::vector<ForwardCache>& caches, size_t n_labeled,
                         int epoch, int batch, EpochTally& tally) {
        UnifiedLossResult ul = unified_loss(preds, targets);
        if (!std::isfinite(ul.loss))
            throw NumericError("epoch " + std::to_string(epoch) + " batch " +
                               std::to_string(batch) + ": non-finite loss");
        NetworkGrads grads;
        for (size_t i = 0; i < caches.size(); ++i)
            accumulate(grads, backward(result.params, caches[i], ul.logit_grads[i]));
        sgd_step(result.params, grads, optim, epoch - 1);
        for (size_t i = 0; i < ul.per_sample_loss.size(); ++i) {
            if (i < n_labeled) {
                tally.sup_sum += ul.per_sample_loss[i];
                ++tally.sup_n;
            } else {
                tally.unl_sum += ul.per_sample_loss[i];
                ++tally.unl_n;
            }
        }
    };

    for (int epoch = 1; epoch <= config.e_maximum; ++epoch) {
        EpochTally tally;
        bool supervised_only = epoch <= config.e_warmup || config.mode == TrainMode::SL ||
                               active.empty() || u_per == 0;

        if (supervised_only) {
            std::vector<size_t> order(labeled_n);
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            int batch_no = 0;
            for (size_t start = 0; start < order.size(); start += config.batch_size) {
                size_t end = std::min(order.size(), start + config.batch_size);
                std::vector<ProbMap> probs;
                std::vector<ForwardCache> caches(end - start);
                probs.reserve(end - start);
                for (size_t i = start; i < end; ++i) {
                    probs.push_back(
                        forward(result.params, split.labeled[order[i]].image, caches[i - start]));
                    track(probs.back());
                }
                std::vector<const ProbMap*> preds;
                std::vector<const LabelMap*> targets;
                for (size_t i = start; i < end; ++i) {
                    preds.push_back(&probs[i - start]);
                    targets.push_back(&split.labeled[order[i]].label);
                }
                run_batch(preds, targets, caches, preds.size(), epoch, ++batch_no, tally);
            }
        } else {
            std::vector<std::string> u_order = active;
            rng.shuffle(u_order);
            int batch_no = 0;
            for (size_t start = 0; start < u_order.size(); start += u_per) {
                size_t end = std::min(u_order.size(), start + static_cast<size_t>(u_per));

                std::vector<size_t> labeled_idx;
                for (int k = 0; k < l_per; ++k)
                    labeled_idx.push_back(static_cast<size_t>(
                        rng.uniform_int(0, static_cast<int64_t>(labeled_n) - 1)));

                size_t batch_total = labeled_idx.size() + (end - start);
                std::vector<ProbMap> probs;
                std::vector<LabelMap> pseudo_targets;
                std::vector<ForwardCache> caches(batch_total);
                probs.reserve(batch_total);
                pseudo_targets.reserve(end - start);

                for (size_t k = 0; k < labeled_idx.size(); ++k) {
                    probs.push_back(forward(result.params, split.labeled[labeled_idx[k]].image,
                                            caches[k]));
                    track(probs.back());
                }
                for (size_t i = start; i < end; ++i) {
                    const Image& xu = *unlabeled_images.at(u_order[i]);
                    WeakAugResult weak = weak_augment(xu, nullptr, config.weak, rng);
                    // Pseudo-label generation: separate forward pass whose
                    // cache is discarded, so no gradient flows through it.
                    ProbMap p_w = forward_probs(result.params, weak.image);
                    track(p_w);
                    LabelMap y_u = make_pseudo_label(p_w);
                    StrongAugResult strong = strong_augment(weak.image, rng);
                    pseudo_targets.push_back(transport_label(y_u, strong.transform));
                    size_t slot = labeled_idx.size() + (i - start);
                    probs.push_back(forward(result.params, strong.image, caches[slot]));
                    track(probs.back());
                }

                std::vector<const ProbMap*> preds;
                std::vector<const LabelMap*> targets;
                for (size_t k = 0; k < batch_total; ++k) preds.push_back(&probs[k]);
                for (size_t k = 0; k < labeled_idx.size(); ++k)
                    targets.push_back(&split.labeled[labeled_idx[k]].label);
                for (const LabelMap& t : pseudo_targets) targets.push_back(&t);

                run_batch(preds, targets, caches, labeled_idx.size(), epoch, ++batch_no, tally);
            }
        }

        // Entropy-based reverse filtering of the active unlabeled pool.
        if (config.mode == TrainMode::SSL_AL && epoch > config.e_warmup &&
            epoch % config.filter_interval == 0 && !active.empty()) {
            std::vector<UncertaintyScore> scores(active.size());
            std::vector<double> devs(active.size(), 0.0);
            parallel_for(active.size(), [&](size_t i) {
                // Scored on the un-augmented preprocessed image so the
                // ranking does not depend on augmentation draws.
                ProbMap p = forward_probs(result.params, *unlabeled_images.at(active[i]));
                devs[i] = softmax_dev(p);
                scores[i] = UncertaintyScore{active[i], image_entropy(p)};
            });
            for (double d : devs)
                result.max_softmax_dev = std::max(result.max_softmax_dev, d);
            FilterResult fr = filter_unlabeled(scores, config.drop_fraction);
            result.filter_events.push_back(FilterEventRecord{epoch, fr.dropped});
            active = fr.retained;
        }

        double val_dice = std::numeric_limits<double>::quiet_NaN();
        if (!split.validation.empty()) {
            std::vector<double> dices(split.validation.size());
            std::vector<double> devs(split.validation.size(), 0.0);
            parallel_for(split.validation.size(), [&](size_t i) {
                const LabeledSample& s = split.validation[i];
                ProbMap p = forward_probs(result.params, s.image);
                devs[i] = softmax_dev(p);
                dices[i] = evaluate(make_pseudo_label(p), s.label, split.num_classes).mean_dice;
            });
            for (double d : devs)
                result.max_softmax_dev = std::max(result.max_softmax_dev, d);
            val_dice = std::accumulate(dices.begin(), dices.end(), 0.0) /
                       static_cast<double>(dices.size());
        }

        result.history.push_back(EpochRecord{epoch, tally.supervised_mean(),
                                             tally.unlabeled_mean(), tally.total_mean(),
                                             static_cast<int>(active.size()), val_dice});
    }
    return result;
}

void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write history: " + path.string());
    out << "epoch,supervised_loss,unlabeled_loss_component,total_loss,active_unlabeled,val_dice\n";
    for (const EpochRecord& r : history)
        out << r.epoch << ',' << fmt17(r.supervised_loss) << ',' << fmt17(r.unlabeled_loss) << ','
            << fmt17(r.total_loss) << ',' << r.active_unlabeled << ',' << fmt17(r.val_dice)
            << "\n";
}

std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read history: " + path.string());
    std::vector<EpochRecord> history;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        EpochRecord r;
        std::getline(row, tok, ','); r.epoch = std::stoi(tok);
        std::getline(row, tok, ','); r.supervised_loss = std::stod(tok);
        std::getline(row, tok, ','); r.unlabeled_loss = std::stod(tok);
        std::getline(row, tok, ','); r.total_loss = std::stod(tok);
        std::getline(row, tok, ','); r.active_unlabeled = std::stoi(tok);
        std::getline(row, tok, ','); r.val_dice = std::stod(tok);
        history.push_back(r);
    }
    return history;
}

void write_filter_events_csv(const std::vector<FilterEventRecord>& events,
                             const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write filter events: " + path.string());
    out << "epoch,sample_id,score\n";
    for (const FilterEventRecord& e : events)
        for (const UncertaintyScore& s : e.dropped)
            out << e.epoch << ',' << s.sample_id << ',' << fmt17(s.score) << "\n";
}

} // namespace segssl
