#include "segssl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "segssl/config.hpp"
#include "segssl/datastats.hpp"
#include "segssl/errors.hpp"
#include "segssl/parallel.hpp"
#include "segssl/ssl.hpp"
#include "segssl/textio.hpp"

namespace segssl {

namespace {

namespace fs = std::filesystem;

template <typename Fn>
int run_command(Fn fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const TensorIoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

void normalize_split(const PreprocessPlan& plan, DatasetSplit& split, bool unlabeled_loaded) {
    for (LabeledSample& s : split.labeled) apply_plan_in_place(plan, s.image);
    for (LabeledSample& s : split.validation) apply_plan_in_place(plan, s.image);
    for (LabeledSample& s : split.test) apply_plan_in_place(plan, s.image);
    if (unlabeled_loaded)
        for (UnlabeledSample& s : split.unlabeled) apply_plan_in_place(plan, s.image);
}

std::string opt_fmt(const std::optional<double>& v) {
    return v ? fmt17(*v) : "nan";
}

struct TestEvalResult {
    std::vector<SampleEval> evals;
    EvalAggregate aggregate;
};

TestEvalResult evaluate_on_test(const NetworkParams& params, const DatasetSplit& split) {
    std::vector<Image> images;
    std::vector<std::string> ids;
    std::vector<const LabelMap*> gts;
    for (const LabeledSample& s : split.test) {
        images.push_back(s.image);
        ids.push_back(s.id);
        gts.push_back(&s.label);
    }
    std::vector<LabelMap> preds = predict_labels(params, images);
    TestEvalResult r;
    r.evals = evaluate_pairs(ids, preds, gts, split.num_classes);
    r.aggregate = aggregate_evals(r.evals);
    return r;
}

void write_eval_csvs(const TestEvalResult& r, const fs::path& out_dir) {
    std::ofstream per_class(out_dir / "metrics_per_class.csv", std::ios::trunc);
    if (!per_class) throw Error("cannot write metrics_per_class.csv");
    per_class << "sample_id,class,dice,iou,hd95,asd,flags\n";
    for (const SampleEval& e : r.evals)
        for (const ClassMetrics& m : e.report.per_class)
            per_class << e.id << ',' << m.class_id << ',' << fmt17(m.dice) << ',' << fmt17(m.iou)
                      << ',' << opt_fmt(m.hd95) << ',' << opt_fmt(m.asd) << ','
                      << (m.surface_defined() ? "" : "empty_surface") << "\n";

    std::ofstream summary(out_dir / "metrics_summary.csv", std::ios::trunc);
    if (!summary) throw Error("cannot write metrics_summary.csv");
    summary << "sample_id,dice,iou,hd95,asd\n";
    for (const SampleEval& e : r.evals)
        summary << e.id << ',' << fmt17(e.report.mean_dice) << ',' << fmt17(e.report.mean_iou)
                << ',' << opt_fmt(e.report.mean_hd95) << ',' << opt_fmt(e.report.mean_asd)
                << "\n";
    summary << "aggregate," << fmt17(r.aggregate.dice) << ',' << fmt17(r.aggregate.iou) << ','
            << opt_fmt(r.aggregate.hd95) << ',' << opt_fmt(r.aggregate.asd) << "\n";
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<LabelMap> predict_labels(const NetworkParams& params,
                                     const std::vector<Image>& images) {
    std::vector<LabelMap> preds(images.size());
    parallel_for(images.size(), [&](size_t i) {
        preds[i] = make_pseudo_label(forward_probs(params, images[i]));
    });
    return preds;
}

std::vector<SampleEval> evaluate_pairs(const std::vector<std::string>& ids,
                                       const std::vector<LabelMap>& preds,
                                       const std::vector<const LabelMap*>& gts,
                                       int num_classes) {
    if (ids.size() != preds.size() || ids.size() != gts.size())
        throw DataError("evaluate_pairs: list sizes differ");
    std::vector<SampleEval> evals(ids.size());
    parallel_for(ids.size(), [&](size_t i) {
        evals[i] = SampleEval{ids[i], evaluate(preds[i], *gts[i], num_classes)};
    });
    return evals;
}

EvalAggregate aggregate_evals(const std::vector<SampleEval>& evals) {
    EvalAggregate agg;
    if (evals.empty()) return agg;
    double hd_sum = 0.0, asd_sum = 0.0;
    int hd_n = 0;
    for (const SampleEval& e : evals) {
        agg.dice += e.report.mean_dice;
        agg.iou += e.report.mean_iou;
        if (e.report.mean_hd95) {
            hd_sum += *e.report.mean_hd95;
            asd_sum += *e.report.mean_asd;
            ++hd_n;
        }
    }
    agg.dice /= static_cast<double>(evals.size());
    agg.iou /= static_cast<double>(evals.size());
    if (hd_n > 0) {
        agg.hd95 = hd_sum / hd_n;
        agg.asd = asd_sum / hd_n;
    }
    return agg;
}

int cmd_gen(const fs::path& config_path, const fs::path& out_dir) {
    return run_command([&] {
        ExperimentConfig cfg = load_experiment_config(config_path);
        std::vector<Sample> samples = generate_synthetic(cfg.gen, cfg.data_seed);
        DatasetSplit split = split_dataset(samples, cfg.labeled_ratio, cfg.val_count,
                                           cfg.test_count, cfg.split_seed);
        fs::create_directories(out_dir);
        save_dataset(split, out_dir / "dataset");
        std::cout << "generated " << samples.size() << " samples -> " << (out_dir / "dataset")
                  << "\n"
                  << "labeled " << split.labeled.size() << ", unlabeled " << split.unlabeled.size()
                  << ", validation " << split.validation.size() << ", test " << split.test.size()
                  << ", classes " << split.num_classes << "\n";
        return kExitOk;
    });
}

int cmd_train(const fs::path& config_path, const fs::path& data_dir, const fs::path& out_dir,
              std::optional<TrainMode> mode_override) {
    return run_command([&] {
        ExperimentConfig cfg = load_experiment_config(config_path);
        TrainConfig tc = cfg.train;
        if (mode_override) tc.mode = *mode_override;

        bool need_unlabeled = tc.mode != TrainMode::SL;
        DatasetSplit split = load_dataset(data_dir, need_unlabeled);

        PreprocessPlan plan = compute_plan(split.labeled);
        normalize_split(plan, split, need_unlabeled);

        fs::create_directories(out_dir);
        save_plan(plan, out_dir / "preprocess_plan.txt");

        TrainResult result = train(tc, split);

        save_checkpoint(result.params, out_dir / "checkpoint");
        write_history_csv(result.history, out_dir / "history.csv");
        write_filter_events_csv(result.filter_events, out_dir / "filter_events.csv");

        const EpochRecord& last = result.history.back();
        std::cout << "trained " << to_string(tc.mode) << " for " << tc.e_maximum << " epochs\n"
                  << "final total loss " << last.total_loss << ", val dice " << last.val_dice
                  << ", active unlabeled " << last.active_unlabeled << "\n"
                  << "max softmax deviation " << result.max_softmax_dev << "\n";
        return kExitOk;
    });
}

int cmd_eval(const fs::path& run_dir, const fs::path& data_dir, const fs::path& out_dir) {
    return run_command([&] {
        NetworkParams params = load_checkpoint(run_dir / "checkpoint");
        PreprocessPlan plan = load_plan(run_dir / "preprocess_plan.txt");
        DatasetSplit split = load_dataset(data_dir, false);
        if (params.spec.num_classes != split.num_classes)
            throw DataError("checkpoint classes do not match dataset classes");
        for (LabeledSample& s : split.test) apply_plan_in_place(plan, s.image);

        TestEvalResult r = evaluate_on_test(params, split);
        fs::create_directories(out_dir);
        write_eval_csvs(r, out_dir);

        std::cout << "evaluated " << r.evals.size() << " test samples\n"
                  << "dice " << r.aggregate.dice << ", iou " << r.aggregate.iou << ", hd95 "
                  << opt_fmt(r.aggregate.hd95) << ", asd " << opt_fmt(r.aggregate.asd) << "\n";
        return kExitOk;
    });
}

int cmd_analyze(const fs::path& data_dir, const fs::path& out_dir) {
    return run_command([&] {
        DatasetSplit split = load_dataset(data_dir, false);
        std::vector<LabeledSample> samples = split.labeled;
        samples.insert(samples.end(), split.validation.begin(), split.validation.end());
        samples.insert(samples.end(), split.test.begin(), split.test.end());

        DatasetStats stats = analyze_dataset(samples);
        fs::create_directories(out_dir);
        std::ofstream out(out_dir / "datastats.csv", std::ios::trunc);
        if (!out) throw Error("cannot write datastats.csv");
        std::string name = data_dir.filename().string();
        if (name.empty()) name = "dataset";
        out << "dataset,cnr,snr,fbr_percent\n";
        out << name << ',' << fmt17(stats.mean.cnr) << ',' << fmt17(stats.mean.snr) << ','
            << fmt17(stats.mean.fbr_percent) << "\n";

        std::cout << "analyzed " << stats.images_used << " labeled images (" << stats.images_failed
                  << " skipped)\n"
                  << "cnr " << stats.mean.cnr << ", snr " << stats.mean.snr << ", fbr "
                  << stats.mean.fbr_percent << "%\n";
        return kExitOk;
    });
}

int cmd_ablate(const fs::path& config_path, const fs::path& out_dir,
               const std::vector<uint64_t>& seeds) {
    return run_command([&] {
        if (seeds.empty()) throw ConfigError("ablate needs at least one seed");
        ExperimentConfig cfg = load_experiment_config(config_path);

        std::vector<Sample> samples = generate_synthetic(cfg.gen, cfg.data_seed);
        fs::create_directories(out_dir);

        std::ofstream csv(out_dir / "ablation.csv", std::ios::trunc);
        if (!csv) throw Error("cannot write ablation.csv");
        csv << "method,labeled,seed,dice,iou,hd95,asd\n";
        csv.flush();

        const TrainMode modes[] = {TrainMode::SL, TrainMode::SSL, TrainMode::SSL_AL};
        std::map<std::string, std::vector<EvalAggregate>> per_method;
        int labeled_count = 0;

        // Per-seed rows land in the CSV as soon as they exist, so a failed
        // sub-run leaves the finished ones behind.
        for (uint64_t seed : seeds) {
            DatasetSplit split = split_dataset(samples, cfg.labeled_ratio, cfg.val_count,
                                               cfg.test_count, cfg.split_seed + seed);
            labeled_count = static_cast<int>(split.labeled.size());
            PreprocessPlan plan = compute_plan(split.labeled);
            normalize_split(plan, split, true);

            for (int m = 0; m < 3; ++m) {
                TrainConfig tc = cfg.train;
                tc.mode = modes[m];
                tc.seed = seed;

                fs::path run_dir =
                    out_dir / "runs" / ("seed" + std::to_string(seed) + "_" + to_string(tc.mode));
                fs::create_directories(run_dir);
                save_plan(plan, run_dir / "preprocess_plan.txt");

                TrainResult result = train(tc, split);
                save_checkpoint(result.params, run_dir / "checkpoint");
                write_history_csv(result.history, run_dir / "history.csv");
                write_filter_events_csv(result.filter_events, run_dir / "filter_events.csv");

                TestEvalResult ev = evaluate_on_test(result.params, split);
                write_eval_csvs(ev, run_dir);
                per_method[to_string(tc.mode)].push_back(ev.aggregate);

                std::string row = to_string(tc.mode) + "," + std::to_string(labeled_count) + "," +
                                  std::to_string(seed) + "," + fmt17(ev.aggregate.dice) + "," +
                                  fmt17(ev.aggregate.iou) + "," + opt_fmt(ev.aggregate.hd95) +
                                  "," + opt_fmt(ev.aggregate.asd);
                csv << row << "\n";
                csv.flush();
                std::cout << row << "\n";
            }
        }

        for (const TrainMode mode : modes) {
            const auto& aggs = per_method[to_string(mode)];
            std::vector<double> dice, iou, hd, as;
            for (const EvalAggregate& a : aggs) {
                dice.push_back(a.dice);
                iou.push_back(a.iou);
                if (a.hd95) hd.push_back(*a.hd95);
                if (a.asd) as.push_back(*a.asd);
            }
            csv << to_string(mode) << ',' << labeled_count << ",median," << fmt17(median(dice))
                << ',' << fmt17(median(iou)) << ',' << fmt17(median(hd)) << ','
                << fmt17(median(as)) << "\n";
            std::cout << to_string(mode) << " median dice " << median(dice) << ", iou "
                      << median(iou) << "\n";
        }
        return kExitOk;
    });
}

} // namespace segssl
