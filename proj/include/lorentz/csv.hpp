// Copyright 2026 The lorentz-bg Authors.
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
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lorentz/errors.hpp"

namespace lorentz {

/// Shortest text that round-trips for every finite double: 17 significant digits.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Comma-separated writer: header row, LF line endings, %.17g numbers.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream &out) : out_(&out) {}

    void header(std::initializer_list<std::string_view> cols)
    {
        bool first = true;
        for (auto c : cols) {
            if (!first)
                *out_ << ',';
            *out_ << c;
            first = false;
        }
        *out_ << '\n';
    }

    CsvWriter &cell(double v) { return raw(format_double(v)); }
    CsvWriter &cell(long long v) { return raw(std::to_string(v)); }
    CsvWriter &cell(long v) { return raw(std::to_string(v)); }
    CsvWriter &cell(int v) { return raw(std::to_string(v)); }
    CsvWriter &cell(std::size_t v) { return raw(std::to_string(v)); }
    CsvWriter &cell(std::string_view s) { return raw(std::string(s)); }

    void end_row()
    {
        *out_ << '\n';
        first_ = true;
    }

    void row(std::initializer_list<double> values)
    {
        for (double v : values)
            cell(v);
        end_row();
    }

private:
    CsvWriter &raw(const std::string &s)
    {
        if (!first_)
            *out_ << ',';
        *out_ << s;
        first_ = false;
        return *this;
    }

    std::ostream *out_;
    bool first_ = true;
};

/// Opens a file for CSV output in binary mode so line endings stay LF.
inline std::ofstream open_csv(const std::string &path)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw resource_error("cannot open " + path + " for writing");
    return f;
}

} // namespace lorentz
