#include "segssl/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "segssl/errors.hpp"

namespace segssl {

namespace {

constexpr char kMagic[4] = {'S', 'E', 'G', 'T'};
constexpr uint8_t kVersion = 1;

void put_u32_le(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

uint32_t get_u32_le(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

size_t dtype_size(DType d) {
    switch (d) {
        case DType::F32: return 4;
        case DType::U8: return 1;
        case DType::F64: return 8;
    }
    return 0;
}

template <typename T>
void append_le(std::vector<uint8_t>& out, const std::vector<T>& values) {
    size_t start = out.size();
    out.resize(start + values.size() * sizeof(T));
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(out.data() + start, values.data(), values.size() * sizeof(T));
    } else {
        for (size_t i = 0; i < values.size(); ++i) {
            auto bits = std::bit_cast<std::array<uint8_t, sizeof(T)>>(values[i]);
            for (size_t b = 0; b < sizeof(T); ++b)
                out[start + i * sizeof(T) + b] = bits[sizeof(T) - 1 - b];
        }
    }
}

template <typename T>
std::vector<T> read_le(const uint8_t* p, size_t count) {
    std::vector<T> values(count);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(values.data(), p, count * sizeof(T));
    } else {
        for (size_t i = 0; i < count; ++i) {
            std::array<uint8_t, sizeof(T)> bits;
            for (size_t b = 0; b < sizeof(T); ++b)
                bits[sizeof(T) - 1 - b] = p[i * sizeof(T) + b];
            values[i] = std::bit_cast<T>(bits);
        }
    }
    return values;
}

} // namespace

void Image::validate() const {
    if (data.size() != static_cast<size_t>(height) * width * channels)
        throw DataError("image data length does not match height*width*channels");
    if (channels < 1) throw DataError("image must have at least one channel");
    for (float v : data)
        if (!std::isfinite(v)) throw DataError("image contains non-finite values");
}

void LabelMap::validate(int num_classes) const {
    if (data.size() != static_cast<size_t>(height) * width)
        throw DataError("label data length does not match height*width");
    for (uint8_t v : data)
        if (v >= num_classes) throw DataError("label value exceeds num_classes");
}

void ProbMap::validate() const {
    if (num_classes < 2) throw DataError("prob map needs at least two classes");
    if (data.size() != static_cast<size_t>(height) * width * num_classes)
        throw DataError("prob map data length does not match shape");
    for (size_t px = 0; px < pixel_count(); ++px) {
        double sum = 0.0;
        for (int c = 0; c < num_classes; ++c) {
            double p = data[px * num_classes + c];
            if (!(p >= 0.0 && p <= 1.0)) throw DataError("probability outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6) throw DataError("per-pixel probabilities do not sum to 1");
    }
}

size_t RawTensor::element_count() const {
    size_t n = 1;
    for (uint32_t d : shape) n *= d;
    return n;
}

void save_raw(const RawTensor& t, const std::filesystem::path& path) {
    std::vector<uint8_t> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    buf.push_back(kVersion);
    buf.push_back(static_cast<uint8_t>(t.dtype));
    put_u32_le(buf, static_cast<uint32_t>(t.shape.size()));
    for (uint32_t d : t.shape) put_u32_le(buf, d);

    size_t n = t.element_count();
    switch (t.dtype) {
        case DType::F32:
            if (t.f32.size() != n) throw DataError("f32 payload size mismatch");
            append_le(buf, t.f32);
            break;
        case DType::U8:
            if (t.u8.size() != n) throw DataError("u8 payload size mismatch");
            buf.insert(buf.end(), t.u8.begin(), t.u8.end());
            break;
        case DType::F64:
            if (t.f64.size() != n) throw DataError("f64 payload size mismatch");
            append_le(buf, t.f64);
            break;
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("write failed: " + path.string());
}

RawTensor load_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for reading: " + path.string());
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 10) throw TruncatedFileError("file too short for header: " + path.string());
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw BadMagicError("bad magic in " + path.string());
    if (buf[4] != kVersion)
        throw TensorIoError("unsupported version " + std::to_string(buf[4]) + " in " + path.string());
    uint8_t dtype_code = buf[5];
    if (dtype_code != 1 && dtype_code != 2 && dtype_code != 3)
        throw UnknownDtypeError("unknown dtype code " + std::to_string(dtype_code) + " in " + path.string());

    RawTensor t;
    t.dtype = static_cast<DType>(dtype_code);
    uint32_t rank = get_u32_le(buf.data() + 6);
    if (rank > 8) throw TensorIoError("rank too large in " + path.string());
    size_t header = 10 + static_cast<size_t>(rank) * 4;
    if (buf.size() < header) throw TruncatedFileError("truncated dimension list in " + path.string());
    t.shape.resize(rank);
    uint64_t n = 1;
    for (uint32_t i = 0; i < rank; ++i) {
        t.shape[i] = get_u32_le(buf.data() + 10 + i * 4);
        n *= t.shape[i];
        if (n > (1ull << 40)) throw TensorIoError("declared shape too large in " + path.string());
    }

    size_t expected = header + n * dtype_size(t.dtype);
    if (buf.size() < expected) throw TruncatedFileError("truncated payload in " + path.string());
    if (buf.size() > expected) throw TensorIoError("trailing bytes after payload in " + path.string());

    const uint8_t* p = buf.data() + header;
    switch (t.dtype) {
        case DType::F32: t.f32 = read_le<float>(p, n); break;
        case DType::U8: t.u8.assign(p, p + n); break;
        case DType::F64: t.f64 = read_le<double>(p, n); break;
    }
    return t;
}

void save_tensor(const Image& t, const std::filesystem::path& path) {
    RawTensor r;
    r.dtype = DType::F32;
    r.shape = {static_cast<uint32_t>(t.height), static_cast<uint32_t>(t.width),
               static_cast<uint32_t>(t.channels)};
    r.f32 = t.data;
    save_raw(r, path);
}

void save_tensor(const LabelMap& t, const std::filesystem::path& path) {
    RawTensor r;
    r.dtype = DType::U8;
    r.shape = {static_cast<uint32_t>(t.height), static_cast<uint32_t>(t.width)};
    r.u8 = t.data;
    save_raw(r, path);
}

void save_tensor(const ProbMap& t, const std::filesystem::path& path) {
    RawTensor r;
    r.dtype = DType::F64;
    r.shape = {static_cast<uint32_t>(t.height), static_cast<uint32_t>(t.width),
               static_cast<uint32_t>(t.num_classes)};
    r.f64 = t.data;
    save_raw(r, path);
}

LoadedTensor load_tensor(const std::filesystem::path& path) {
    RawTensor r = load_raw(path);
    if (r.dtype == DType::F32 && r.shape.size() == 3) {
        Image img;
        img.height = static_cast<int>(r.shape[0]);
        img.width = static_cast<int>(r.shape[1]);
        img.channels = static_cast<int>(r.shape[2]);
        img.data = std::move(r.f32);
        return img;
    }
    if (r.dtype == DType::U8 && r.shape.size() == 2) {
        LabelMap lbl;
        lbl.height = static_cast<int>(r.shape[0]);
        lbl.width = static_cast<int>(r.shape[1]);
        lbl.data = std::move(r.u8);
        return lbl;
    }
    if (r.dtype == DType::F64 && r.shape.size() == 3) {
        ProbMap pm;
        pm.height = static_cast<int>(r.shape[0]);
        pm.width = static_cast<int>(r.shape[1]);
        pm.num_classes = static_cast<int>(r.shape[2]);
        pm.data = std::move(r.f64);
        return pm;
    }
    throw TensorIoError("unexpected dtype/rank combination in " + path.string());
}

Image load_image(const std::filesystem::path& path) {
    LoadedTensor t = load_tensor(path);
    if (auto* img = std::get_if<Image>(&t)) return std::move(*img);
    throw DataError("not an image tensor: " + path.string());
}

LabelMap load_label_map(const std::filesystem::path& path) {
    LoadedTensor t = load_tensor(path);
    if (auto* lbl = std::get_if<LabelMap>(&t)) return std::move(*lbl);
    throw DataError("not a label tensor: " + path.string());
}

ProbMap load_prob_map(const std::filesystem::path& path) {
    LoadedTensor t = load_tensor(path);
    if (auto* pm = std::get_if<ProbMap>(&t)) return std::move(*pm);
    throw DataError("not a prob-map tensor: " + path.string());
}

} // namespace segssl
