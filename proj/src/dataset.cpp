#include "segssl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "segssl/errors.hpp"
#include "segssl/rng.hpp"

namespace segssl {

namespace {

namespace fs = std::filesystem;

constexpr int kMaxPlacementAttempts = 100;
// Smallest accepted shape after clipping; keeps per-image foreground above
// 0.5% on the default 32x32 grid.
constexpr int kMinShapePixels = 8;

struct ShapeParams {
    ShapeKind kind;
    double cy, cx; // center
    double ry, rx; // semi-axes / half-extents
};

std::vector<std::pair<int, int>> shape_pixels(const ShapeParams& s, int h, int w) {
    std::vector<std::pair<int, int>> px;
    int y0 = std::max(0, static_cast<int>(std::floor(s.cy - s.ry - 1.0)));
    int y1 = std::min(h - 1, static_cast<int>(std::ceil(s.cy + s.ry + 1.0)));
    int x0 = std::max(0, static_cast<int>(std::floor(s.cx - s.rx - 1.0)));
    int x1 = std::min(w - 1, static_cast<int>(std::ceil(s.cx + s.rx + 1.0)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double dy = (y + 0.5) - s.cy;
            double dx = (x + 0.5) - s.cx;
            bool inside = false;
            if (s.kind == ShapeKind::Ellipse) {
                double a = dy / s.ry;
                double b = dx / s.rx;
                inside = a * a + b * b <= 1.0;
            } else {
                inside = std::abs(dy) <= s.ry && std::abs(dx) <= s.rx;
            }
            if (inside) px.emplace_back(y, x);
        }
    }
    return px;
}

std::string sample_id(int index) {
    std::ostringstream os;
    os << 's';
    std::string n = std::to_string(index);
    os << std::string(n.size() >= 4 ? 0 : 4 - n.size(), '0') << n;
    return os.str();
}

void write_sample_files(const fs::path& dir, const std::string& split, const std::string& id,
                        const Image& img, const LabelMap* lbl) {
    fs::path sub = dir / split;
    fs::create_directories(sub);
    save_tensor(img, sub / (id + "_img.segt"));
    if (lbl) save_tensor(*lbl, sub / (id + "_lbl.segt"));
}

struct ManifestRow {
    std::string id, split, image_file, label_file;
    bool is_labeled = false;
};

} // namespace

void GenConfig::validate() const {
    if (count < 1) throw ConfigError("generator count must be >= 1");
    if (num_classes < 2) throw ConfigError("generator num_classes must be >= 2");
    if (num_classes > 256) throw ConfigError("generator num_classes must fit a u8 label");
    if (noise_sigma < 0.0) throw ConfigError("generator noise_sigma must be >= 0");
    if (height < 4 || width < 4) throw ConfigError("generator image size too small");
    if (shape_kinds.empty()) throw ConfigError("generator needs at least one shape kind");
}

std::vector<Sample> generate_synthetic(const GenConfig& config, uint64_t seed) {
    config.validate();
    Rng rng(seed);

    double min_r = std::max(1.5, config.height / 16.0);
    double max_r = std::max(min_r + 0.5, config.height / 6.0);

    std::vector<Sample> samples;
    samples.reserve(config.count);
    for (int i = 0; i < config.count; ++i) {
        LabelMap label(config.height, config.width, 0);

        int max_shapes = config.num_classes - 1;
        int num_shapes = static_cast<int>(rng.uniform_int(1, max_shapes));
        std::vector<int> classes(max_shapes);
        std::iota(classes.begin(), classes.end(), 1);
        rng.shuffle(classes);
        classes.resize(num_shapes);

        for (int cls : classes) {
            bool placed = false;
            for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
                ShapeParams s;
                s.kind = config.shape_kinds[rng.uniform_int(0, static_cast<int64_t>(config.shape_kinds.size()) - 1)];
                s.cy = rng.uniform(0.0, config.height);
                s.cx = rng.uniform(0.0, config.width);
                s.ry = rng.uniform(min_r, max_r);
                s.rx = rng.uniform(min_r, max_r);
                auto px = shape_pixels(s, config.height, config.width);
                if (static_cast<int>(px.size()) < kMinShapePixels) continue;
                for (auto [y, x] : px) label.at(y, x) = static_cast<uint8_t>(cls);
                placed = true;
            }
            if (!placed)
                throw GenerationError("could not place a non-empty shape after " +
                                      std::to_string(kMaxPlacementAttempts) + " attempts");
        }

        Image img(config.height, config.width, 1);
        for (int y = 0; y < config.height; ++y)
            for (int x = 0; x < config.width; ++x)
                img.at(y, x, 0) = static_cast<float>(label.at(y, x));
        if (config.noise_sigma > 0.0) {
            for (size_t k = 0; k < img.data.size(); ++k)
                img.data[k] = static_cast<float>(img.data[k] + config.noise_sigma * rng.gaussian());
        }

        samples.push_back(Sample{sample_id(i), std::move(img), std::move(label)});
    }
    return samples;
}

DatasetSplit split_dataset(const std::vector<Sample>& samples, double labeled_ratio,
                           int val_count, int test_count, uint64_t seed) {
    if (!(labeled_ratio > 0.0 && labeled_ratio <= 1.0))
        throw ConfigError("labeled_ratio must be in (0, 1]");
    if (val_count < 0 || test_count < 0) throw ConfigError("val/test counts must be >= 0");
    int n = static_cast<int>(samples.size());
    if (val_count + test_count >= n)
        throw ConfigError("val_count + test_count must leave a non-empty training pool");
    for (const Sample& s : samples)
        if (!s.is_labeled()) throw DataError("split_dataset input sample without ground truth: " + s.id);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    int pool = n - val_count - test_count;
    int labeled_count = std::max(1, static_cast<int>(std::floor(labeled_ratio * pool + 0.5)));
    labeled_count = std::min(labeled_count, pool);

    DatasetSplit split;
    int max_class = 1;
    for (const Sample& s : samples)
        for (uint8_t v : s.label->data) max_class = std::max(max_class, static_cast<int>(v));
    split.num_classes = max_class + 1;

    auto as_labeled = [&](int idx) {
        const Sample& s = samples[idx];
        return LabeledSample{s.id, s.image, *s.label};
    };

    int pos = 0;
    for (int k = 0; k < val_count; ++k) split.validation.push_back(as_labeled(order[pos++]));
    for (int k = 0; k < test_count; ++k) split.test.push_back(as_labeled(order[pos++]));
    for (int k = 0; k < labeled_count; ++k) split.labeled.push_back(as_labeled(order[pos++]));
    while (pos < n) {
        const Sample& s = samples[order[pos++]];
        split.unlabeled.push_back(UnlabeledSample{s.id, s.image});
        split.hidden_labels.emplace(s.id, *s.label);
    }
    return split;
}

void save_dataset(const DatasetSplit& split, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<ManifestRow> rows;

    auto add_labeled = [&](const std::vector<LabeledSample>& v, const std::string& name) {
        for (const LabeledSample& s : v) {
            write_sample_files(dir, name, s.id, s.image, &s.label);
            rows.push_back({s.id, name, name + "/" + s.id + "_img.segt",
                            name + "/" + s.id + "_lbl.segt", true});
        }
    };
    add_labeled(split.labeled, "labeled");
    add_labeled(split.validation, "validation");
    add_labeled(split.test, "test");
    for (const UnlabeledSample& s : split.unlabeled) {
        auto it = split.hidden_labels.find(s.id);
        const LabelMap* hidden = it == split.hidden_labels.end() ? nullptr : &it->second;
        write_sample_files(dir, "unlabeled", s.id, s.image, hidden);
        rows.push_back({s.id, "unlabeled", "unlabeled/" + s.id + "_img.segt",
                        hidden ? "unlabeled/" + s.id + "_lbl.segt" : "-", false});
    }

    std::ofstream out(dir / "manifest.txt", std::ios::trunc);
    if (!out) throw Error("cannot write manifest in " + dir.string());
    out << "# segssl dataset manifest\n";
    out << "num_classes=" << split.num_classes << "\n";
    out << "id,split,image,label,is_labeled\n";
    for (const ManifestRow& r : rows)
        out << r.id << ',' << r.split << ',' << r.image_file << ',' << r.label_file << ','
            << (r.is_labeled ? 1 : 0) << "\n";
}

DatasetSplit load_dataset(const fs::path& dir, bool load_unlabeled_images) {
    std::ifstream in(dir / "manifest.txt");
    if (!in) throw DataError("missing manifest.txt in " + dir.string());

    DatasetSplit split;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("num_classes=", 0) == 0) {
            split.num_classes = std::stoi(line.substr(12));
            continue;
        }
        if (!header_done) { // column header row
            header_done = true;
            continue;
        }
        std::istringstream row(line);
        std::string id, split_name, image_file, label_file, labeled_flag;
        if (!std::getline(row, id, ',') || !std::getline(row, split_name, ',') ||
            !std::getline(row, image_file, ',') || !std::getline(row, label_file, ',') ||
            !std::getline(row, labeled_flag))
            throw DataError("malformed manifest row: " + line);

        if (split_name == "unlabeled") {
            UnlabeledSample s;
            s.id = id;
            if (load_unlabeled_images) {
                s.image = load_image(dir / image_file);
                if (label_file != "-")
                    split.hidden_labels.emplace(id, load_label_map(dir / label_file));
            }
            split.unlabeled.push_back(std::move(s));
            continue;
        }

        if (label_file == "-") throw DataError("labeled sample without label file: " + id);
        LabeledSample s{id, load_image(dir / image_file), load_label_map(dir / label_file)};
        if (split_name == "labeled") split.labeled.push_back(std::move(s));
        else if (split_name == "validation") split.validation.push_back(std::move(s));
        else if (split_name == "test") split.test.push_back(std::move(s));
        else throw DataError("unknown split '" + split_name + "' in manifest");
    }
    if (split.num_classes < 2) throw DataError("manifest missing num_classes");
    return split;
}

} // namespace segssl
