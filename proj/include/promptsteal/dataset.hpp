#ifndef PROMPTSTEAL_DATASET_HPP
#define PROMPTSTEAL_DATASET_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include <png.h>

#include "promptsteal/common.hpp"
#include "promptsteal/image.hpp"
#include "promptsteal/synthetic.hpp"

namespace promptsteal {

namespace fs = std::filesystem;

// Feature images (and any float image) serialize as a small JSON object
// with the exact double pixel values; no precision is lost on round trip.
inline nlohmann::json image_to_json(const Image& img) {
    img.validate("image_to_json input");
    return {{"height", img.height},
            {"width", img.width},
            {"channels", img.channels},
            {"pixels", img.pixels}};
}

inline Image image_from_json(const nlohmann::json& j) {
    Image img;
    img.height = j.at("height").get<int>();
    img.width = j.at("width").get<int>();
    img.channels = j.at("channels").get<int>();
    img.pixels = j.at("pixels").get<std::vector<double>>();
    img.validate("image_from_json result");
    return img;
}

inline void save_image_json(const fs::path& path, const Image& img) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write image file: " + path.string());
    out << image_to_json(img).dump() << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

inline Image load_image_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open image file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        return image_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad image JSON in " + path.string() + ": " + e.what());
    }
}

// 8-bit PNG input; palette, 16-bit and alpha variants are folded down to
// gray or RGB.
inline Image load_png(const fs::path& path) {
    std::FILE* fp = std::fopen(path.string().c_str(), "rb");
    if (!fp) throw IoError("cannot open PNG: " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng allocation failed");
    }
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng failed reading " + path.string());
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_byte color_type = png_get_color_type(png, info);
    png_byte bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_strip_alpha(png);
    }
    png_read_update_info(png, info);

    int width = static_cast<int>(png_get_image_width(png, info));
    int height = static_cast<int>(png_get_image_height(png, info));
    int channels = static_cast<int>(png_get_channels(png, info));
    size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * static_cast<size_t>(height));
    rows.resize(static_cast<size_t>(height));
    for (int y = 0; y < height; ++y) {
        rows[static_cast<size_t>(y)] = buffer.data() + static_cast<size_t>(y) * rowbytes;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);

    if (channels != 1 && channels != 3) {
        throw IoError("unsupported PNG channel count " + std::to_string(channels) + " in " +
                      path.string());
    }
    Image img(height, width, channels);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        img.pixels[i] = static_cast<double>(buffer[i]) / 255.0;
    }
    return img;
}

inline void save_png(const fs::path& path, const Image& img) {
    img.validate("save_png input");
    if (img.channels != 1 && img.channels != 3) {
        throw ArgumentError("save_png: only 1- or 3-channel images");
    }
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IoError("cannot create PNG: " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng allocation failed");
    }
    std::vector<png_byte> buffer(img.pixels.size());
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        buffer[i] = static_cast<png_byte>(std::lround(img.pixels[i] * 255.0));
    }
    size_t rowbytes = static_cast<size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y) {
        rows[static_cast<size_t>(y)] = buffer.data() + static_cast<size_t>(y) * rowbytes;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng failed writing " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

inline Image load_image(const fs::path& path) {
    std::string ext = fold_case(path.extension().string());
    if (ext == ".json") return load_image_json(path);
    if (ext == ".png") return load_png(path);
    throw IoError("unsupported image extension: " + path.string());
}

inline void save_image(const fs::path& path, const Image& img) {
    std::string ext = fold_case(path.extension().string());
    if (ext == ".json") {
        save_image_json(path, img);
    } else if (ext == ".png") {
        save_png(path, img);
    } else {
        throw IoError("unsupported image extension: " + path.string());
    }
}

// One showcase with whatever side information the dataset carries: the
// ground-truth prompt when known (training/eval splits), a theme id, and
// for synthetic data the captioner's hidden target.
struct DatasetPair {
    std::string id;
    fs::path image_path;
    Image showcase;
    std::optional<std::string> ground_truth_prompt;
    std::optional<std::string> theme;
    std::optional<CaptionTarget> caption_target;
};

struct DatasetLoadResult {
    std::vector<DatasetPair> pairs;
    std::vector<std::string> errors;  // per-pair failures, dataset still usable
};

// Directory layout: <id>.json or <id>.png showcases, optional <id>.txt
// ground-truth prompt, optional <id>.caption.json captioner target,
// optional themes.json mapping id -> theme.
inline DatasetLoadResult load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("dataset directory not found: " + dir.string());
    }
    std::vector<fs::path> image_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = fold_case(entry.path().extension().string());
        std::string name = entry.path().filename().string();
        if (name == "themes.json") continue;
        if (name.size() > 13 && name.substr(name.size() - 13) == ".caption.json") continue;
        if (ext == ".json" || ext == ".png") image_files.push_back(entry.path());
    }
    std::sort(image_files.begin(), image_files.end());
    if (image_files.empty()) {
        throw IoError("no showcase images (*.json, *.png) in " + dir.string());
    }

    nlohmann::json themes;
    fs::path themes_path = dir / "themes.json";
    if (fs::exists(themes_path)) {
        std::ifstream in(themes_path);
        try {
            in >> themes;
        } catch (const nlohmann::json::exception& e) {
            throw IoError("bad themes.json: " + std::string(e.what()));
        }
    }

    DatasetLoadResult res;
    for (const fs::path& img_path : image_files) {
        std::string id = img_path.stem().string();
        DatasetPair pair;
        pair.id = id;
        pair.image_path = img_path;
        try {
            pair.showcase = load_image(img_path);
        } catch (const Error& e) {
            res.errors.push_back(id + ": " + e.what());
            continue;
        }
        fs::path prompt_path = img_path.parent_path() / (id + ".txt");
        if (fs::exists(prompt_path)) {
            std::ifstream in(prompt_path);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            std::string trimmed = trim(text);
            if (!trimmed.empty()) pair.ground_truth_prompt = trimmed;
        }
        fs::path target_path = img_path.parent_path() / (id + ".caption.json");
        if (fs::exists(target_path)) {
            std::ifstream in(target_path);
            try {
                nlohmann::json j;
                in >> j;
                CaptionTarget t;
                t.subject = j.at("subject").get<std::string>();
                t.phrases = j.value("phrases", std::vector<std::string>{});
                pair.caption_target = std::move(t);
            } catch (const nlohmann::json::exception& e) {
                res.errors.push_back(id + ": bad caption target: " + e.what());
            }
        }
        if (themes.is_object() && themes.contains(id)) {
            pair.theme = themes[id].get<std::string>();
        }
        res.pairs.push_back(std::move(pair));
    }
    if (res.pairs.empty()) {
        std::string detail;
        for (const std::string& e : res.errors) detail += "\n  " + e;
        throw IoError("dataset has no loadable pairs in " + dir.string() + detail);
    }
    return res;
}

// Blueprint for one generated pair: subject and scene phrases are what a
// captioner could see; style modifiers only appear in the prompt text.
struct SyntheticPairSpec {
    std::string id;
    std::string subject;
    std::vector<std::string> scene_phrases;
    std::vector<std::string> style_modifiers;
    std::string theme;

    std::string full_prompt() const {
        std::string out = subject;
        for (const auto& p : scene_phrases) {
            out += ", ";
            out += p;
        }
        for (const auto& m : style_modifiers) {
            out += ", ";
            out += m;
        }
        return out;
    }
};

// Render each spec through the synthetic proxy and write a loadable
// dataset directory (feature image, prompt, caption target, themes).
inline void generate_synthetic_dataset(const fs::path& dir,
                                       const std::shared_ptr<const SyntheticWorld>& world,
                                       const std::vector<SyntheticPairSpec>& specs,
                                       uint64_t proxy_seed) {
    if (specs.empty()) throw ArgumentError("generate_synthetic_dataset: no pair specs");
    fs::create_directories(dir);
    SyntheticProxy proxy(world);
    nlohmann::json themes = nlohmann::json::object();
    for (const SyntheticPairSpec& spec : specs) {
        if (spec.id.empty()) throw ArgumentError("pair spec without id");
        std::string prompt = spec.full_prompt();
        Image showcase = proxy.generate(prompt, proxy_seed);
        save_image_json(dir / (spec.id + ".json"), showcase);
        {
            std::ofstream out(dir / (spec.id + ".txt"));
            if (!out) throw IoError("cannot write prompt for pair " + spec.id);
            out << prompt << '\n';
        }
        {
            nlohmann::json t{{"subject", spec.subject}, {"phrases", spec.scene_phrases}};
            std::ofstream out(dir / (spec.id + ".caption.json"));
            if (!out) throw IoError("cannot write caption target for pair " + spec.id);
            out << t.dump(2) << '\n';
        }
        if (!spec.theme.empty()) themes[spec.id] = spec.theme;
    }
    if (!themes.empty()) {
        std::ofstream out(dir / "themes.json");
        if (!out) throw IoError("cannot write themes.json");
        out << themes.dump(2) << '\n';
    }
}

}  // namespace promptsteal

#endif  // PROMPTSTEAL_DATASET_HPP
