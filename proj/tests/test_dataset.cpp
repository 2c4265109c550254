#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <set>

#include "oracles.hpp"
#include "segssl/datastats.hpp"
#include "segssl/dataset.hpp"
#include "segssl/errors.hpp"

using namespace segssl;

namespace {

bool samples_identical(const std::vector<Sample>& a, const std::vector<Sample>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].id != b[i].id) return false;
        if (std::memcmp(a[i].image.data.data(), b[i].image.data.data(),
                        a[i].image.data.size() * sizeof(float)) != 0)
            return false;
        if (!(a[i].label == b[i].label)) return false;
    }
    return true;
}

std::set<std::string> ids_of(const DatasetSplit& s) {
    std::set<std::string> ids;
    for (const auto& x : s.labeled) ids.insert(x.id);
    for (const auto& x : s.unlabeled) ids.insert(x.id);
    for (const auto& x : s.validation) ids.insert(x.id);
    for (const auto& x : s.test) ids.insert(x.id);
    return ids;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("generator is deterministic per seed") {
    GenConfig cfg;
    cfg.count = 10;
    auto a = generate_synthetic(cfg, 99);
    auto b = generate_synthetic(cfg, 99);
    CHECK(samples_identical(a, b));
    auto c = generate_synthetic(cfg, 100);
    CHECK(!samples_identical(a, c));
}

TEST_CASE("no noise and one class-1 ellipse gives two intensity values") {
    GenConfig cfg;
    cfg.count = 5;
    cfg.num_classes = 2;
    cfg.noise_sigma = 0.0;
    cfg.shape_kinds = {ShapeKind::Ellipse};
    for (const Sample& s : generate_synthetic(cfg, 3)) {
        std::set<float> values(s.image.data.begin(), s.image.data.end());
        CHECK(values == std::set<float>{0.0f, 1.0f});
    }
}

TEST_CASE("default corpus keeps foreground ratio in [0.5, 30] percent") {
    GenConfig cfg; // defaults: 200 samples, 32x32, 3 classes
    auto samples = generate_synthetic(cfg, 7);
    REQUIRE(samples.size() == 200);
    for (const Sample& s : samples) {
        double ratio = fbr(*s.label);
        // Independent count as the oracle for the fbr value itself.
        size_t fg = 0;
        for (uint8_t v : s.label->data)
            if (v != 0) ++fg;
        CHECK(ratio == doctest::Approx(100.0 * fg / s.label->data.size()).epsilon(1e-12));
        CHECK(ratio >= 0.5);
        CHECK(ratio <= 30.0);
    }
}

TEST_CASE("generated labels stay below num_classes") {
    GenConfig cfg;
    cfg.count = 30;
    cfg.num_classes = 5;
    for (const Sample& s : generate_synthetic(cfg, 21))
        for (uint8_t v : s.label->data) CHECK(v < 5);
}

TEST_CASE("split reproduces the documented 200-sample example") {
    GenConfig cfg;
    auto samples = generate_synthetic(cfg, 1);
    DatasetSplit split = split_dataset(samples, 0.05, 20, 40, 17);
    CHECK(split.validation.size() == 20);
    CHECK(split.test.size() == 40);
    CHECK(split.labeled.size() == 7); // max(1, round(0.05 * 140))
    CHECK(split.unlabeled.size() == 133);
    CHECK(split.num_classes == 3);
    CHECK(split.hidden_labels.size() == 133);
}

TEST_CASE("ratio 1.0 leaves the unlabeled pool empty") {
    GenConfig cfg;
    cfg.count = 12;
    auto samples = generate_synthetic(cfg, 2);
    DatasetSplit split = split_dataset(samples, 1.0, 2, 2, 5);
    CHECK(split.unlabeled.empty());
    CHECK(split.labeled.size() == 8);
}

TEST_CASE("same split seed reproduces the id partition") {
    GenConfig cfg;
    cfg.count = 40;
    auto samples = generate_synthetic(cfg, 3);
    DatasetSplit a = split_dataset(samples, 0.2, 5, 5, 11);
    DatasetSplit b = split_dataset(samples, 0.2, 5, 5, 11);
    auto id_list = [](const DatasetSplit& s) {
        std::vector<std::string> v;
        for (const auto& x : s.labeled) v.push_back("L" + x.id);
        for (const auto& x : s.unlabeled) v.push_back("U" + x.id);
        for (const auto& x : s.validation) v.push_back("V" + x.id);
        for (const auto& x : s.test) v.push_back("T" + x.id);
        return v;
    };
    CHECK(id_list(a) == id_list(b));
}

TEST_CASE("splits partition the input ids for any seed and ratio") {
    GenConfig cfg;
    cfg.count = 25;
    auto samples = generate_synthetic(cfg, 4);
    std::set<std::string> all;
    for (const Sample& s : samples) all.insert(s.id);

    for (uint64_t seed : {0ull, 1ull, 99ull}) {
        for (double ratio : {0.04, 0.3, 0.77, 1.0}) {
            DatasetSplit split = split_dataset(samples, ratio, 3, 4, seed);
            CHECK(ids_of(split) == all);
            size_t total = split.labeled.size() + split.unlabeled.size() +
                           split.validation.size() + split.test.size();
            CHECK(total == samples.size()); // pairwise disjoint given the set equality
        }
    }
}

TEST_CASE("split rejects bad arguments") {
    GenConfig cfg;
    cfg.count = 6;
    auto samples = generate_synthetic(cfg, 5);
    CHECK_THROWS_AS(split_dataset(samples, 0.5, 3, 3, 1), ConfigError);
    CHECK_THROWS_AS(split_dataset(samples, 0.0, 1, 1, 1), ConfigError);
    CHECK_THROWS_AS(split_dataset(samples, 1.5, 1, 1, 1), ConfigError);
}

TEST_CASE("dataset directory round trips through the manifest") {
    oracles::TempDir tmp("dataset");
    GenConfig cfg;
    cfg.count = 14;
    auto samples = generate_synthetic(cfg, 6);
    DatasetSplit split = split_dataset(samples, 0.3, 2, 3, 9);
    save_dataset(split, tmp.path / "ds");
    DatasetSplit back = load_dataset(tmp.path / "ds");

    CHECK(back.num_classes == split.num_classes);
    CHECK(ids_of(back) == ids_of(split));
    REQUIRE(back.labeled.size() == split.labeled.size());
    CHECK(back.hidden_labels.size() == split.hidden_labels.size());
    for (size_t i = 0; i < split.labeled.size(); ++i) {
        CHECK(back.labeled[i].id == split.labeled[i].id);
        CHECK(back.labeled[i].label == split.labeled[i].label);
        CHECK(std::memcmp(back.labeled[i].image.data.data(), split.labeled[i].image.data.data(),
                          split.labeled[i].image.data.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("saving twice produces byte-identical directories") {
    oracles::TempDir tmp("dataset");
    GenConfig cfg;
    cfg.count = 10;
    auto samples = generate_synthetic(cfg, 8);
    DatasetSplit split = split_dataset(samples, 0.3, 2, 2, 3);
    save_dataset(split, tmp.path / "a");
    save_dataset(split, tmp.path / "b");
    CHECK(oracles::dirs_identical(tmp.path / "a", tmp.path / "b"));
}

TEST_CASE("manifest-only unlabeled loading survives deleted files") {
    oracles::TempDir tmp("dataset");
    GenConfig cfg;
    cfg.count = 10;
    auto samples = generate_synthetic(cfg, 8);
    DatasetSplit split = split_dataset(samples, 0.3, 2, 2, 3);
    save_dataset(split, tmp.path / "ds");
    std::filesystem::remove_all(tmp.path / "ds" / "unlabeled");

    DatasetSplit loaded = load_dataset(tmp.path / "ds", false);
    CHECK(loaded.unlabeled.size() == split.unlabeled.size());
    CHECK(loaded.hidden_labels.empty());
    CHECK_THROWS(load_dataset(tmp.path / "ds", true));
}

} // TEST_SUITE
