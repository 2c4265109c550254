#include "segssl/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "segssl/errors.hpp"

namespace segssl {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

int64_t parse_int(const std::string& v, int line) {
    try {
        size_t used = 0;
        int64_t x = std::stoll(v, &used);
        if (used != v.size()) fail(line, "trailing characters in integer '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(line, "not an integer: '" + v + "'");
    }
}

uint64_t parse_u64(const std::string& v, int line) {
    int64_t x = parse_int(v, line);
    if (x < 0) fail(line, "value must be >= 0: '" + v + "'");
    return static_cast<uint64_t>(x);
}

double parse_double(const std::string& v, int line) {
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) fail(line, "trailing characters in number '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(line, "not a number: '" + v + "'");
    }
}

std::vector<ShapeKind> parse_shape_kinds(const std::string& v, int line) {
    std::vector<ShapeKind> kinds;
    std::istringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok == "ellipse") kinds.push_back(ShapeKind::Ellipse);
        else if (tok == "rect") kinds.push_back(ShapeKind::Rect);
        else fail(line, "unknown shape kind '" + tok + "' (expected ellipse or rect)");
    }
    if (kinds.empty()) fail(line, "shape_kinds must list at least one kind");
    return kinds;
}

} // namespace

std::map<std::string, KvEntry> parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());

    std::map<std::string, KvEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key=value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (entries.count(key))
            fail(line_no, "duplicate key '" + key + "' (first set on line " +
                              std::to_string(entries[key].line) + ")");
        entries[key] = KvEntry{value, line_no};
    }
    return entries;
}

void ExperimentConfig::validate() const {
    gen.validate();
    train.validate();
    if (!(labeled_ratio > 0.0 && labeled_ratio <= 1.0))
        throw ConfigError("labeled_ratio must be in (0, 1]");
    if (val_count < 0 || test_count < 0) throw ConfigError("val/test counts must be >= 0");
    if (val_count + test_count >= gen.count)
        throw ConfigError("val_count + test_count must leave a non-empty training pool");
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    auto entries = parse_kv_file(path);
    ExperimentConfig cfg;

    using Setter = std::function<void(const std::string&, int)>;
    std::map<std::string, Setter> keys = {
        {"count", [&](const std::string& v, int l) { cfg.gen.count = static_cast<int>(parse_int(v, l)); }},
        {"height", [&](const std::string& v, int l) { cfg.gen.height = static_cast<int>(parse_int(v, l)); }},
        {"width", [&](const std::string& v, int l) { cfg.gen.width = static_cast<int>(parse_int(v, l)); }},
        {"num_classes", [&](const std::string& v, int l) { cfg.gen.num_classes = static_cast<int>(parse_int(v, l)); }},
        {"noise_sigma", [&](const std::string& v, int l) { cfg.gen.noise_sigma = parse_double(v, l); }},
        {"shape_kinds", [&](const std::string& v, int l) { cfg.gen.shape_kinds = parse_shape_kinds(v, l); }},
        {"data_seed", [&](const std::string& v, int l) { cfg.data_seed = parse_u64(v, l); }},
        {"labeled_ratio", [&](const std::string& v, int l) { cfg.labeled_ratio = parse_double(v, l); }},
        {"val_count", [&](const std::string& v, int l) { cfg.val_count = static_cast<int>(parse_int(v, l)); }},
        {"test_count", [&](const std::string& v, int l) { cfg.test_count = static_cast<int>(parse_int(v, l)); }},
        {"split_seed", [&](const std::string& v, int l) { cfg.split_seed = parse_u64(v, l); }},
        {"mode", [&](const std::string& v, int l) {
             try { cfg.train.mode = parse_train_mode(v); }
             catch (const ConfigError& e) { fail(l, e.what()); }
         }},
        {"e_maximum", [&](const std::string& v, int l) { cfg.train.e_maximum = static_cast<int>(parse_int(v, l)); }},
        {"e_warmup", [&](const std::string& v, int l) { cfg.train.e_warmup = static_cast<int>(parse_int(v, l)); }},
        {"filter_interval", [&](const std::string& v, int l) { cfg.train.filter_interval = static_cast<int>(parse_int(v, l)); }},
        {"drop_fraction", [&](const std::string& v, int l) { cfg.train.drop_fraction = parse_double(v, l); }},
        {"batch_size", [&](const std::string& v, int l) { cfg.train.batch_size = static_cast<int>(parse_int(v, l)); }},
        {"lr0", [&](const std::string& v, int l) { cfg.train.lr0 = parse_double(v, l); }},
        {"wd", [&](const std::string& v, int l) { cfg.train.wd = parse_double(v, l); }},
        {"momentum", [&](const std::string& v, int l) { cfg.train.momentum = parse_double(v, l); }},
        {"seed", [&](const std::string& v, int l) { cfg.train.seed = parse_u64(v, l); }},
        {"weak_scale_lo", [&](const std::string& v, int l) { cfg.train.weak.scale_lo = parse_double(v, l); }},
        {"weak_scale_hi", [&](const std::string& v, int l) { cfg.train.weak.scale_hi = parse_double(v, l); }},
        {"weak_noise_sigma_max", [&](const std::string& v, int l) { cfg.train.weak.noise_sigma_max = parse_double(v, l); }},
        {"weak_brightness_max", [&](const std::string& v, int l) { cfg.train.weak.brightness_shift_max = parse_double(v, l); }},
        {"weak_contrast_lo", [&](const std::string& v, int l) { cfg.train.weak.contrast_lo = parse_double(v, l); }},
        {"weak_contrast_hi", [&](const std::string& v, int l) { cfg.train.weak.contrast_hi = parse_double(v, l); }},
        {"weak_shift_max", [&](const std::string& v, int l) { cfg.train.weak.shift_max = static_cast<int>(parse_int(v, l)); }},
    };

    for (const auto& [key, entry] : entries) {
        auto it = keys.find(key);
        if (it == keys.end()) fail(entry.line, "unknown key '" + key + "'");
        it->second(entry.value, entry.line);
    }

    cfg.validate();
    return cfg;
}

} // namespace segssl
