#pragma once
// Dataset artifacts: one feature CSV (row per sample x modality), one labels
// CSV, and the full generator spec as JSON. Doubles travel at 17 significant
// digits, so save -> load is value-exact.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "careflow/jsonio.hpp"
#include "careflow/synthdata.hpp"

namespace careflow {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
    if (!out) throw ConfigError("write failed for " + path);
}

namespace detail {

inline std::size_t split_id_offset(const DatasetSpec& spec, Split split) {
    switch (split) {
        case Split::Train: return 0;
        case Split::Val: return static_cast<std::size_t>(spec.train_samples);
        default: return static_cast<std::size_t>(spec.train_samples + spec.val_samples);
    }
}

inline std::size_t max_raw_dim(const DatasetSpec& spec) {
    std::size_t d = 0;
    for (const ModalityChannel& ch : spec.modalities) d = std::max(d, ch.map.rows);
    return d;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

inline double parse_double_cell(const std::string& cell, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
        throw ConfigError(where + ": malformed number '" + cell + "'");
    return v;
}

inline std::size_t parse_id_cell(const std::string& cell, std::size_t limit) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(cell.c_str(), &end, 10);
    if (end == cell.c_str() || *end != '\0')
        throw ConfigError("csv: malformed sample id '" + cell + "'");
    if (v >= limit)
        throw ConfigError("csv: sample id " + cell + " outside expected range 0.." +
                          std::to_string(limit == 0 ? 0 : limit - 1));
    return static_cast<std::size_t>(v);
}

}  // namespace detail

// Header: split,sample_id,modality,dim_0..dim_{D-1} with D = max modality
// width; narrower modalities leave their trailing cells empty. sample_id is
// global across splits (train, then val, then test).
inline std::string write_dataset_csv(const Dataset& data) {
    const std::size_t max_d = detail::max_raw_dim(data.spec);
    std::string out = "split,sample_id,modality";
    for (std::size_t c = 0; c < max_d; ++c) out += ",dim_" + std::to_string(c);
    out += "\n";
    for (Split split : {Split::Train, Split::Val, Split::Test}) {
        const std::vector<Sample>& samples = data.split(split);
        const std::size_t offset = detail::split_id_offset(data.spec, split);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            for (std::size_t m = 0; m < 3; ++m) {
                out += split_name(split);
                out += ',' + std::to_string(offset + i);
                out += ',';
                out += modality_name(static_cast<Modality>(m));
                const std::vector<double>& u = samples[i].raw[m];
                for (std::size_t c = 0; c < max_d; ++c) {
                    out += ',';
                    if (c < u.size()) out += fmt_double(u[c]);
                }
                out += '\n';
            }
        }
    }
    return out;
}

inline std::string write_labels_csv(const Dataset& data) {
    std::string out = "sample_id,y\n";
    for (Split split : {Split::Train, Split::Val, Split::Test}) {
        const std::vector<Sample>& samples = data.split(split);
        const std::size_t offset = detail::split_id_offset(data.spec, split);
        for (std::size_t i = 0; i < samples.size(); ++i)
            out += std::to_string(offset + i) + ',' + fmt_double(samples[i].label) + '\n';
    }
    return out;
}

inline std::string write_spec_json(const DatasetSpec& spec) {
    JsonWriter w;
    w.begin_object();
    w.key("format").value("careflow-dataset-spec");
    w.key("version").value(1);
    w.key("name").value(spec.name);
    w.key("task").value(task_name(spec.task));
    w.key("classes").value(spec.classes);
    w.key("latent_dim").value(spec.latent_dim);
    w.key("latent_std").value(spec.latent_std);
    w.key("centers");
    w.begin_array();
    for (std::size_t i = 0; i < spec.centers.rows; ++i) w.value(spec.centers.row_vec(i));
    w.end_array();
    w.key("label_weights").value(spec.label_weights);
    w.key("label_noise").value(spec.label_noise);
    w.key("label_range");
    w.begin_array();
    w.value(spec.label_range[0]);
    w.value(spec.label_range[1]);
    w.end_array();
    w.key("train_samples").value(spec.train_samples);
    w.key("val_samples").value(spec.val_samples);
    w.key("test_samples").value(spec.test_samples);
    w.key("seed").value(spec.seed);
    w.key("modalities");
    w.begin_object();
    for (std::size_t m = 0; m < 3; ++m) {
        const ModalityChannel& ch = spec.modalities[m];
        w.key(modality_name(static_cast<Modality>(m)));
        w.begin_object();
        w.key("map");
        w.begin_array();
        for (std::size_t r = 0; r < ch.map.rows; ++r) w.value(ch.map.row_vec(r));
        w.end_array();
        w.key("shift").value(ch.shift);
        w.key("noise").value(ch.noise);
        w.end_object();
    }
    w.end_object();
    w.end_object();
    return w.str();
}

inline DatasetSpec read_spec_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("spec: invalid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || doc.value("format", "") != "careflow-dataset-spec")
        throw ConfigError("spec: missing or wrong format marker");
    if (doc.value("version", -1) != 1) throw ConfigError("spec: unsupported version");

    auto matrix_of = [](const nlohmann::json& arr, const std::string& where) {
        if (!arr.is_array() || arr.empty()) throw ConfigError(where + ": expected rows");
        const std::size_t rows = arr.size();
        const std::size_t cols = arr[0].is_array() ? arr[0].size() : 0;
        if (cols == 0) throw ConfigError(where + ": expected nonempty row arrays");
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            if (!arr[i].is_array() || arr[i].size() != cols)
                throw ConfigError(where + ": ragged rows");
            for (std::size_t j = 0; j < cols; ++j) m(i, j) = arr[i][j].get<double>();
        }
        return m;
    };

    DatasetSpec spec;
    try {
        spec.name = doc.at("name").get<std::string>();
        spec.task = parse_task(doc.at("task").get<std::string>());
        spec.classes = doc.at("classes").get<int>();
        spec.latent_dim = doc.at("latent_dim").get<int>();
        spec.latent_std = doc.at("latent_std").get<double>();
        spec.centers = matrix_of(doc.at("centers"), "spec.centers");
        spec.label_weights = doc.at("label_weights").get<std::vector<double>>();
        spec.label_noise = doc.at("label_noise").get<double>();
        const auto range = doc.at("label_range").get<std::vector<double>>();
        if (range.size() != 2) throw ConfigError("spec.label_range: expected [lo, hi]");
        spec.label_range = {range[0], range[1]};
        spec.train_samples = doc.at("train_samples").get<int>();
        spec.val_samples = doc.at("val_samples").get<int>();
        spec.test_samples = doc.at("test_samples").get<int>();
        spec.seed = doc.at("seed").get<std::uint64_t>();
        const nlohmann::json& mods = doc.at("modalities");
        for (std::size_t m = 0; m < 3; ++m) {
            const char* name = modality_name(static_cast<Modality>(m));
            const nlohmann::json& ch = mods.at(name);
            spec.modalities[m].map = matrix_of(ch.at("map"), std::string("spec.") + name + ".map");
            spec.modalities[m].shift = ch.at("shift").get<std::vector<double>>();
            spec.modalities[m].noise = ch.at("noise").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("spec: " + std::string(e.what()));
    }
    validate_spec(spec);
    return spec;
}

// Rebuilds the three splits from the CSV pair, validated against the spec.
inline Dataset parse_dataset_csv(const std::string& features_csv, const std::string& labels_csv,
                                 const DatasetSpec& spec) {
    Dataset data;
    data.spec = spec;
    const std::size_t total = static_cast<std::size_t>(spec.train_samples + spec.val_samples +
                                                       spec.test_samples);
    std::vector<Sample> all(total);

    {
        std::istringstream in(labels_csv);
        std::string line;
        if (!std::getline(in, line) || detail::split_csv_line(line) !=
                                           std::vector<std::string>{"sample_id", "y"})
            throw ConfigError("labels csv: bad header");
        std::size_t count = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::vector<std::string> cells = detail::split_csv_line(line);
            if (cells.size() != 2) throw ConfigError("labels csv: expected 2 cells per row");
            const std::size_t id = detail::parse_id_cell(cells[0], total);
            all[id].label = detail::parse_double_cell(cells[1], "labels csv");
            ++count;
        }
        if (count != total)
            throw ConfigError("labels csv: expected " + std::to_string(total) + " rows, found " +
                              std::to_string(count));
    }

    {
        std::istringstream in(features_csv);
        std::string line;
        if (!std::getline(in, line)) throw ConfigError("dataset csv: empty file");
        const std::vector<std::string> header = detail::split_csv_line(line);
        const std::size_t max_d = detail::max_raw_dim(spec);
        if (header.size() != 3 + max_d || header[0] != "split" || header[1] != "sample_id" ||
            header[2] != "modality")
            throw ConfigError("dataset csv: bad header");
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::vector<std::string> cells = detail::split_csv_line(line);
            if (cells.size() != header.size())
                throw ConfigError("dataset csv: ragged row " + std::to_string(rows));
            const std::size_t id = detail::parse_id_cell(cells[1], total);
            std::size_t m = 3;
            for (std::size_t k = 0; k < 3; ++k)
                if (cells[2] == modality_name(static_cast<Modality>(k))) m = k;
            if (m == 3) throw ConfigError("dataset csv: unknown modality '" + cells[2] + "'");
            const std::size_t dm = spec.modalities[m].map.rows;
            std::vector<double>& u = all[id].raw[m];
            u.resize(dm);
            for (std::size_t c = 0; c < dm; ++c)
                u[c] = detail::parse_double_cell(cells[3 + c], "dataset csv");
            for (std::size_t c = dm; c < max_d; ++c)
                if (!cells[3 + c].empty())
                    throw ConfigError("dataset csv: unexpected value beyond modality width");
            ++rows;
        }
        if (rows != 3 * total)
            throw ConfigError("dataset csv: expected " + std::to_string(3 * total) +
                              " rows, found " + std::to_string(rows));
    }

    auto take = [&](int count, std::size_t offset) {
        return std::vector<Sample>(all.begin() + static_cast<std::ptrdiff_t>(offset),
                                   all.begin() + static_cast<std::ptrdiff_t>(offset) +
                                       count);
    };
    data.train = take(spec.train_samples, 0);
    data.val = take(spec.val_samples, static_cast<std::size_t>(spec.train_samples));
    data.test = take(spec.test_samples,
                     static_cast<std::size_t>(spec.train_samples + spec.val_samples));
    return data;
}

inline void save_dataset_dir(const std::string& dir, const Dataset& data) {
    write_text_file(dir + "/dataset.csv", write_dataset_csv(data));
    write_text_file(dir + "/labels.csv", write_labels_csv(data));
    write_text_file(dir + "/spec.json", write_spec_json(data.spec));
}

inline Dataset load_dataset_dir(const std::string& dir) {
    const DatasetSpec spec = read_spec_json(read_text_file(dir + "/spec.json"));
    return parse_dataset_csv(read_text_file(dir + "/dataset.csv"),
                             read_text_file(dir + "/labels.csv"), spec);
}

}  // namespace careflow
