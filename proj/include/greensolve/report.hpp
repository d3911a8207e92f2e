// Copyright 2026 the greensolve authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "greensolve/quad_grid.hpp"

namespace greensolve {

/// Minimal ordered JSON value for reports: keys keep insertion order
/// and every floating-point number is printed with 17 significant
/// digits, so identical inputs produce byte-identical files.
class Report {
  public:
    Report() : value_(nullptr) {}
    Report(bool b) : value_(b) {}
    Report(double d) : value_(d) {}
    Report(int i) : value_(static_cast<long long>(i)) {}
    Report(std::size_t i) : value_(static_cast<long long>(i)) {}
    Report(long long i) : value_(i) {}
    Report(const char* s) : value_(std::string(s)) {}
    Report(std::string s) : value_(std::move(s)) {}
    Report(const Vec3& v) {
        value_ = Array{};
        push_back(v.x());
        push_back(v.y());
        push_back(v.z());
    }
    Report(const std::vector<double>& v) {
        value_ = Array{};
        for (double d : v) push_back(d);
    }

    static Report object() {
        Report r;
        r.value_ = Object{};
        return r;
    }
    static Report array() {
        Report r;
        r.value_ = Array{};
        return r;
    }

    Report& set(const std::string& key, Report v) {
        auto& obj = std::get<Object>(value_);
        obj.emplace_back(key, std::make_shared<Report>(std::move(v)));
        return *this;
    }

    Report& push_back(Report v) {
        std::get<Array>(value_).push_back(
            std::make_shared<Report>(std::move(v)));
        return *this;
    }

    std::string dump(int indent = 2) const {
        std::string out;
        write(out, indent, 0);
        out.push_back('\n');
        return out;
    }

  private:
    using Ptr = std::shared_ptr<Report>;
    using Object = std::vector<std::pair<std::string, Ptr>>;
    using Array = std::vector<Ptr>;
    std::variant<std::nullptr_t, bool, long long, double, std::string, Object,
                 Array>
        value_;

    static void write_escaped(std::string& out, const std::string& s) {
        out.push_back('"');
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                default: out.push_back(c);
            }
        }
        out.push_back('"');
    }

    void write(std::string& out, int indent, int depth) const {
        const std::string pad(static_cast<std::size_t>(indent) * (depth + 1),
                              ' ');
        const std::string close_pad(static_cast<std::size_t>(indent) * depth,
                                    ' ');
        if (std::holds_alternative<std::nullptr_t>(value_)) {
            out += "null";
        } else if (const bool* b = std::get_if<bool>(&value_)) {
            out += *b ? "true" : "false";
        } else if (const long long* i = std::get_if<long long>(&value_)) {
            out += std::to_string(*i);
        } else if (const double* d = std::get_if<double>(&value_)) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", *d);
            out += buf;
        } else if (const std::string* s = std::get_if<std::string>(&value_)) {
            write_escaped(out, *s);
        } else if (const Object* obj = std::get_if<Object>(&value_)) {
            if (obj->empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            for (std::size_t k = 0; k < obj->size(); ++k) {
                out += pad;
                write_escaped(out, (*obj)[k].first);
                out += ": ";
                (*obj)[k].second->write(out, indent, depth + 1);
                if (k + 1 < obj->size()) out += ",";
                out += "\n";
            }
            out += close_pad + "}";
        } else {
            const Array& arr = std::get<Array>(value_);
            if (arr.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < arr.size(); ++k) {
                out += pad;
                arr[k]->write(out, indent, depth + 1);
                if (k + 1 < arr.size()) out += ",";
                out += "\n";
            }
            out += close_pad + "]";
        }
    }
};

/// Writes a file atomically: the content lands under a temporary name
/// in the same directory and is renamed into place, so readers never
/// observe a partial file.
inline void atomic_write_file(const std::string& path,
                              const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("atomic_write_file: cannot open " + tmp);
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out)
            throw std::runtime_error("atomic_write_file: write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("atomic_write_file: rename failed: " + path);
}

/// Plot-ready CSV: a header row and one row per ladder point, floats
/// at 17 significant digits.
inline std::string format_csv(const std::vector<std::string>& header,
                              const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        out += header[c];
        out += c + 1 < header.size() ? "," : "\n";
    }
    char buf[40];
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("format_csv: row width mismatch");
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
            out += buf;
            out += c + 1 < row.size() ? "," : "\n";
        }
    }
    return out;
}

}  // namespace greensolve
