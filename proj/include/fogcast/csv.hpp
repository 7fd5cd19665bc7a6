/* Copyright 2026 The Fogcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FOGCAST_CSV_HPP
#define FOGCAST_CSV_HPP

#include <cstdlib>
#include <istream>
#include <string>
#include <vector>

#include "fogcast/common.hpp"

namespace fogcast {

// Minimal comma-separated reader for the documented file schemas. Fields are
// plain (no quoting); the header row is matched verbatim against the schema.
class CsvReader {
  public:
    CsvReader(std::istream& in, const std::string& expected_header, std::string source_name)
        : in_(in), source_(std::move(source_name)) {
        std::string header;
        if (!std::getline(in_, header)) {
            throw InputError(source_ + ": empty file, expected header '" + expected_header + "'");
        }
        strip_cr(header);
        if (header != expected_header) {
            throw InputError(source_ + ":1: bad header '" + header + "', expected '" +
                             expected_header + "'");
        }
        line_no_ = 1;
    }

    // Next data row split into fields; false at end of input. Blank lines are
    // skipped. Field counts are validated by the caller via expect_fields().
    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            strip_cr(line);
            if (line.empty()) continue;
            split(line, fields);
            return true;
        }
        return false;
    }

    std::size_t line() const { return line_no_; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError(source_ + ":" + std::to_string(line_no_) + ": " + msg);
    }

    void expect_fields(const std::vector<std::string>& fields, std::size_t n) const {
        if (fields.size() != n) {
            fail("expected " + std::to_string(n) + " fields, got " +
                 std::to_string(fields.size()));
        }
    }

    double parse_double(const std::string& s, const char* what) const {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') fail(std::string("bad ") + what + " '" + s + "'");
        return v;
    }

    long parse_long(const std::string& s, const char* what) const {
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0') fail(std::string("bad ") + what + " '" + s + "'");
        return v;
    }

  private:
    static void strip_cr(std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }
    static void split(const std::string& line, std::vector<std::string>& out) {
        out.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                out.push_back(line.substr(start));
                break;
            }
            out.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
    }

    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

}  // namespace fogcast

#endif  // FOGCAST_CSV_HPP
