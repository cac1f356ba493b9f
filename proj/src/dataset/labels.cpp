// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

#include "flakelens/dataset/labels.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace flakelens::dataset {

using core::Instance;

LabelParseError::LabelParseError(int line, const std::string& message, const std::string& source)
    : std::runtime_error((source.empty() ? std::string() : source + ": ") + "line " + std::to_string(line) + ": " +
                         message),
      line_(line),
      detail_(message) {}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        if (i > start) {
            tokens.push_back(line.substr(start, i - start));
        }
    }
    return tokens;
}

double parse_number(std::string_view tok, int line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw LabelParseError(line, "non-numeric token '" + std::string(tok) + "'");
    }
    return v;
}

int parse_class(std::string_view tok, int line, const core::ClassSet& classes) {
    int id = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw LabelParseError(line, "non-numeric class id '" + std::string(tok) + "'");
    }
    if (!classes.contains(id)) {
        throw LabelParseError(line, "class id " + std::to_string(id) + " outside class set of size " +
                                        std::to_string(classes.size()));
    }
    return id;
}

void append_fixed(std::string& out, double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, " %.6f", v);
    out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::vector<Instance> parse_label_file(std::string_view text, const core::ClassSet& classes) {
    std::vector<Instance> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        const std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty()) {
            continue;
        }
        const int cls = parse_class(tokens[0], line_no, classes);
        const std::size_t coords = tokens.size() - 1;
        if (coords < 4) {
            throw LabelParseError(line_no, "expected 4 box values or at least 6 polygon coordinates, got " +
                                               std::to_string(coords));
        }
        if (coords % 2 != 0) {
            throw LabelParseError(line_no, "odd coordinate count " + std::to_string(coords));
        }
        std::vector<double> v;
        v.reserve(coords);
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            v.push_back(parse_number(tokens[i], line_no));
        }
        try {
            if (coords == 4) {
                Instance inst;
                inst.class_id = cls;
                inst.box = core::NormBox::make(v[0], v[1], v[2], v[3]);
                out.push_back(std::move(inst));
            } else {
                std::vector<core::Point2> pts;
                pts.reserve(coords / 2);
                for (std::size_t i = 0; i < coords; i += 2) {
                    pts.push_back({v[i], v[i + 1]});
                }
                out.push_back(Instance::from_polygon(cls, core::PolygonMask::make(std::move(pts))));
            }
        } catch (const std::invalid_argument& e) {
            throw LabelParseError(line_no, e.what());
        }
    }
    return out;
}

std::string write_label_file(std::span<const Instance> instances) {
    std::string out;
    for (const auto& inst : instances) {
        out += std::to_string(inst.class_id);
        if (inst.mask) {
            for (const auto& p : inst.mask->vertices()) {
                append_fixed(out, p.x);
                append_fixed(out, p.y);
            }
        } else {
            append_fixed(out, inst.box.cx());
            append_fixed(out, inst.box.cy());
            append_fixed(out, inst.box.w());
            append_fixed(out, inst.box.h());
        }
        out += '\n';
    }
    return out;
}

std::vector<Instance> read_label_path(const std::filesystem::path& path, const core::ClassSet& classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open label file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_label_file(ss.str(), classes);
    } catch (const LabelParseError& e) {
        throw LabelParseError(e.line(), e.detail(), path.string());
    }
}

void write_label_path(const std::filesystem::path& path, std::span<const Instance> instances) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write label file " + path.string());
    }
    out << write_label_file(instances);
}

}  // namespace flakelens::dataset
