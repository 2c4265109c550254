#include "segssl/preprocess.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "segssl/errors.hpp"

namespace segssl {

namespace {
constexpr double kStdFloor = 1e-8;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace

PreprocessPlan compute_plan(const std::vector<LabeledSample>& labeled) {
    if (labeled.empty()) throw DataError("compute_plan: labeled set is empty");

    PreprocessPlan plan;
    plan.target_height = labeled.front().image.height;
    plan.target_width = labeled.front().image.width;

    // Two passes for a numerically clean pooled variance.
    double sum = 0.0;
    size_t n = 0;
    for (const LabeledSample& s : labeled) {
        if (s.image.height != plan.target_height || s.image.width != plan.target_width)
            throw DataError("compute_plan: labeled images differ in size");
        for (float v : s.image.data) sum += v;
        n += s.image.data.size();
    }
    plan.intensity_mean = sum / static_cast<double>(n);

    double sq = 0.0;
    for (const LabeledSample& s : labeled)
        for (float v : s.image.data) {
            double d = v - plan.intensity_mean;
            sq += d * d;
        }
    plan.intensity_std = std::max(kStdFloor, std::sqrt(sq / static_cast<double>(n)));
    return plan;
}

void apply_plan_in_place(const PreprocessPlan& plan, Image& image) {
    if (image.height != plan.target_height || image.width != plan.target_width)
        throw DataError("apply_plan: image size does not match plan target size");
    for (float& v : image.data)
        v = static_cast<float>((v - plan.intensity_mean) / plan.intensity_std);
}

Image apply_plan(const PreprocessPlan& plan, const Image& image) {
    Image out = image;
    apply_plan_in_place(plan, out);
    return out;
}

void save_plan(const PreprocessPlan& plan, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write plan: " + path.string());
    out << "intensity_mean=" << fmt17(plan.intensity_mean) << "\n";
    out << "intensity_std=" << fmt17(plan.intensity_std) << "\n";
    out << "target_height=" << plan.target_height << "\n";
    out << "target_width=" << plan.target_width << "\n";
}

PreprocessPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read plan: " + path.string());
    PreprocessPlan plan;
    std::string line;
    bool saw_mean = false, saw_std = false, saw_h = false, saw_w = false;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "intensity_mean") { plan.intensity_mean = std::stod(val); saw_mean = true; }
        else if (key == "intensity_std") { plan.intensity_std = std::stod(val); saw_std = true; }
        else if (key == "target_height") { plan.target_height = std::stoi(val); saw_h = true; }
        else if (key == "target_width") { plan.target_width = std::stoi(val); saw_w = true; }
        else throw DataError("unknown plan key: " + key);
    }
    if (!(saw_mean && saw_std && saw_h && saw_w))
        throw DataError("incomplete preprocess plan: " + path.string());
    return plan;
}

} // namespace segssl
