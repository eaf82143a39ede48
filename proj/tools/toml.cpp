// Copyright 2026 The MapsTP Authors
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

#include "mapstp/cli/toml.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "mapstp/errors.hpp"

namespace mapstp::cli
{

namespace
{

class LineParser
{
public:
  LineParser(std::string_view line, std::string where) : s_(line), where_(std::move(where)) {}

  [[noreturn]] void fail(const std::string & what) const { throw ConfigError(where_ + ": " + what); }

  void skip_ws()
  {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) {
      ++pos_;
    }
  }
  bool at_end_or_comment()
  {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  bool eat(char c)
  {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string bare_key()
  {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) {
      fail("expected a key");
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  TomlValue value()
  {
    skip_ws();
    if (pos_ >= s_.size()) {
      fail("missing value");
    }
    const char c = s_[pos_];
    if (c == '"') {
      return string();
    }
    if (c == '[') {
      return array();
    }
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

private:
  std::string string()
  {
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) {
        fail("unterminated string");
      }
      const char c = s_[pos_++];
      if (c == '"') {
        return out;
      }
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= s_.size()) {
        fail("unterminated escape");
      }
      const char e = s_[pos_++];
      switch (e) {
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  TomlArray array()
  {
    ++pos_;
    TomlArray out;
    if (eat(']')) {
      return out;
    }
    while (true) {
      const TomlValue v = number();
      out.push_back(std::holds_alternative<std::int64_t>(v) ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v));
      if (eat(']')) {
        return out;
      }
      if (!eat(',')) {
        fail("expected ',' or ']' in array");
      }
      if (eat(']')) {
        return out;
      }
    }
  }

  TomlValue number()
  {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '_')) {
      ++pos_;
    }
    std::string tok;
    for (const char c : s_.substr(start, pos_ - start)) {
      if (c != '_') {
        tok += c;
      }
    }
    if (tok.empty()) {
      fail("expected a value");
    }
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "nan";
    const char * first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char * last = tok.data() + tok.size();
    if (is_float) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last) {
        fail("invalid number '" + tok + "'");
      }
      return v;
    }
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) {
      fail("invalid integer '" + tok + "'");
    }
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::string where_;
};

}  // namespace

TomlTable parse_toml(std::string_view text, std::string_view source)
{
  TomlTable table;
  std::string prefix;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    ++line_no;
    start = end + 1;
    LineParser p(line, std::string(source) + ":" + std::to_string(line_no));
    if (p.at_end_or_comment()) {
      continue;
    }
    if (p.eat('[')) {
      prefix = p.bare_key() + ".";
      if (!p.eat(']')) {
        p.fail("expected ']'");
      }
    } else {
      const std::string key = prefix + p.bare_key();
      if (!p.eat('=')) {
        p.fail("expected '=' after key");
      }
      TomlValue v = p.value();
      if (!table.emplace(key, std::move(v)).second) {
        p.fail("duplicate key '" + key + "'");
      }
    }
    if (!p.at_end_or_comment()) {
      p.fail("unexpected trailing characters");
    }
  }
  return table;
}

}  // namespace mapstp::cli
