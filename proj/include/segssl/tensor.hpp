#ifndef SEGSSL_TENSOR_HPP
#define SEGSSL_TENSOR_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace segssl {

// Float intensity grid, row-major, channel-last.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    float& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(height) * width; }

    // All values finite, data length = height*width*channels.
    void validate() const;
};

// Integer class grid, row-major.
struct LabelMap {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    LabelMap() = default;
    LabelMap(int h, int w, uint8_t fill = 0)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t pixel_count() const { return static_cast<size_t>(height) * width; }

    bool operator==(const LabelMap&) const = default;

    void validate(int num_classes) const;
};

// Per-pixel class probability grid. Held in 64-bit floats so softmax
// normalization survives at 1e-9 tolerances.
struct ProbMap {
    int height = 0;
    int width = 0;
    int num_classes = 0;
    std::vector<double> data;

    ProbMap() = default;
    ProbMap(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), num_classes(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * num_classes + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * num_classes + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(height) * width; }

    // Entries in [0,1], per-pixel sums within 1e-6 of 1.
    void validate() const;
};

// SEGT tensor container, version 1.
//
//   offset  size   field
//   0       4      magic "SEGT"
//   4       1      version, 1
//   5       1      dtype: 1 = float32, 2 = uint8, 3 = float64
//   6       4      rank, uint32 little-endian
//   10      4*r    one uint32 little-endian per dimension
//   ...            payload, row-major, little-endian
//
// Image saves as float32 rank 3 (h, w, c), LabelMap as uint8 rank 2 (h, w),
// ProbMap as float64 rank 3 (h, w, classes). Float64 also carries network
// checkpoints so parameters round-trip without loss.
enum class DType : uint8_t { F32 = 1, U8 = 2, F64 = 3 };

struct RawTensor {
    DType dtype = DType::F32;
    std::vector<uint32_t> shape;
    std::vector<float> f32;
    std::vector<uint8_t> u8;
    std::vector<double> f64;

    size_t element_count() const;
};

void save_raw(const RawTensor& t, const std::filesystem::path& path);
RawTensor load_raw(const std::filesystem::path& path);

void save_tensor(const Image& t, const std::filesystem::path& path);
void save_tensor(const LabelMap& t, const std::filesystem::path& path);
void save_tensor(const ProbMap& t, const std::filesystem::path& path);

using LoadedTensor = std::variant<Image, LabelMap, ProbMap>;
LoadedTensor load_tensor(const std::filesystem::path& path);

Image load_image(const std::filesystem::path& path);
LabelMap load_label_map(const std::filesystem::path& path);
ProbMap load_prob_map(const std::filesystem::path& path);

} // namespace segssl

#endif
