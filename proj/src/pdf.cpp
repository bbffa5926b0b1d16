// Copyright 2026 The DocRefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "docrefine/pdf.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string_view>
#include <variant>

#include "docrefine/error.hpp"

namespace docrefine::pdf {
namespace {

// ---------------------------------------------------------------------------
// Object model.

struct Ref {
  int num = 0;
  int gen = 0;
};
struct Name {
  std::string v;
};
struct Str {
  std::string bytes;
};
struct Keyword {
  std::string v;
};
struct Value;
using Array = std::vector<Value>;
using Dict = std::map<std::string, Value>;
struct Stream {
  std::shared_ptr<Dict> dict;
  std::string raw;
};

struct Value {
  std::variant<std::monostate, bool, double, Str, Name, std::shared_ptr<Array>,
               std::shared_ptr<Dict>, Ref, std::shared_ptr<Stream>, Keyword>
      v;

  bool is_null() const { return std::holds_alternative<std::monostate>(v); }
  const double* num() const { return std::get_if<double>(&v); }
  const Name* name() const { return std::get_if<Name>(&v); }
  const Str* str() const { return std::get_if<Str>(&v); }
  const Array* array() const {
    auto p = std::get_if<std::shared_ptr<Array>>(&v);
    return p ? p->get() : nullptr;
  }
  const Dict* dict() const {
    if (auto p = std::get_if<std::shared_ptr<Dict>>(&v)) return p->get();
    if (auto s = std::get_if<std::shared_ptr<Stream>>(&v)) return (*s)->dict.get();
    return nullptr;
  }
  const Stream* stream() const {
    auto p = std::get_if<std::shared_ptr<Stream>>(&v);
    return p ? p->get() : nullptr;
  }
  const Ref* ref() const { return std::get_if<Ref>(&v); }
  const Keyword* keyword() const { return std::get_if<Keyword>(&v); }
};

bool is_ws(char c) {
  return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0';
}
bool is_delim(char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' ||
         c == '{' || c == '}' || c == '/' || c == '%';
}

class Lexer {
 public:
  Lexer(std::string_view data, size_t pos = 0) : d_(data), pos_(pos) {}

  size_t pos() const { return pos_; }
  void set_pos(size_t p) { pos_ = p; }
  bool at_end() {
    skip_ws();
    return pos_ >= d_.size();
  }

  void skip_ws() {
    while (pos_ < d_.size()) {
      if (is_ws(d_[pos_])) {
        ++pos_;
      } else if (d_[pos_] == '%') {
        while (pos_ < d_.size() && d_[pos_] != '\n' && d_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  // Parses one value. Keywords (operators, "R", "obj", ...) come back as
  // Keyword values; "N G R" is folded into a Ref.
  Value parse() {
    Value v = parse_one();
    if (v.num() != nullptr && is_integer(*v.num())) {
      const size_t save = pos_;
      Value gen = parse_one_if_number();
      if (gen.num() != nullptr && is_integer(*gen.num())) {
        skip_ws();
        if (pos_ < d_.size() && d_[pos_] == 'R' &&
            (pos_ + 1 == d_.size() || is_ws(d_[pos_ + 1]) || is_delim(d_[pos_ + 1]))) {
          ++pos_;
          return Value{Ref{static_cast<int>(*v.num()), static_cast<int>(*gen.num())}};
        }
      }
      pos_ = save;
    }
    return v;
  }

  std::string_view data() const { return d_; }

 private:
  static bool is_integer(double x) { return x >= 0 && std::floor(x) == x; }

  Value parse_one_if_number() {
    skip_ws();
    if (pos_ >= d_.size()) return {};
    const char c = d_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_one();
    return {};
  }

  Value parse_one() {
    skip_ws();
    if (pos_ >= d_.size()) throw IngestError("unexpected end of PDF data");
    const char c = d_[pos_];
    if (c == '/') return Value{Name{read_name()}};
    if (c == '(') return Value{Str{read_literal()}};
    if (c == '<') {
      if (pos_ + 1 < d_.size() && d_[pos_ + 1] == '<') return read_dict();
      return Value{Str{read_hex()}};
    }
    if (c == '[') {
      ++pos_;
      auto arr = std::make_shared<Array>();
      while (true) {
        skip_ws();
        if (pos_ >= d_.size()) throw IngestError("unterminated array");
        if (d_[pos_] == ']') {
          ++pos_;
          break;
        }
        arr->push_back(parse());
      }
      return Value{arr};
    }
    if (c == ']' || c == '>' || c == ')' || c == '{' || c == '}') {
      ++pos_;
      return Value{Keyword{std::string(1, c)}};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      size_t end = pos_ + 1;
      while (end < d_.size() &&
             (std::isdigit(static_cast<unsigned char>(d_[end])) || d_[end] == '.')) {
        ++end;
      }
      const std::string tok(d_.substr(pos_, end - pos_));
      pos_ = end;
      try {
        return Value{std::stod(tok == "-" || tok == "+" || tok == "." ? "0" : tok)};
      } catch (const std::exception&) {
        return Value{0.0};
      }
    }
    size_t end = pos_;
    while (end < d_.size() && !is_ws(d_[end]) && !is_delim(d_[end])) ++end;
    if (end == pos_) ++end;
    const std::string word(d_.substr(pos_, end - pos_));
    pos_ = end;
    if (word == "true") return Value{true};
    if (word == "false") return Value{false};
    if (word == "null") return Value{};
    return Value{Keyword{word}};
  }

  std::string read_name() {
    ++pos_;
    std::string out;
    while (pos_ < d_.size() && !is_ws(d_[pos_]) && !is_delim(d_[pos_])) {
      if (d_[pos_] == '#' && pos_ + 2 < d_.size() &&
          std::isxdigit(static_cast<unsigned char>(d_[pos_ + 1])) &&
          std::isxdigit(static_cast<unsigned char>(d_[pos_ + 2]))) {
        out += static_cast<char>(std::stoi(std::string(d_.substr(pos_ + 1, 2)), nullptr, 16));
        pos_ += 3;
      } else {
        out += d_[pos_++];
      }
    }
    return out;
  }

  std::string read_literal() {
    ++pos_;
    std::string out;
    int depth = 1;
    while (pos_ < d_.size()) {
      const char c = d_[pos_++];
      if (c == '\\') {
        if (pos_ >= d_.size()) break;
        const char e = d_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 'r': out += '\r'; break;
          case 't': out += '\t'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case '\r':
            if (pos_ < d_.size() && d_[pos_] == '\n') ++pos_;
            break;
          case '\n': break;
          default:
            if (e >= '0' && e <= '7') {
              int v = e - '0';
              for (int k = 0; k < 2 && pos_ < d_.size() && d_[pos_] >= '0' && d_[pos_] <= '7';
                   ++k) {
                v = v * 8 + (d_[pos_++] - '0');
              }
              out += static_cast<char>(v & 0xFF);
            } else {
              out += e;
            }
        }
      } else if (c == '(') {
        ++depth;
        out += c;
      } else if (c == ')') {
        if (--depth == 0) return out;
        out += c;
      } else {
        out += c;
      }
    }
    throw IngestError("unterminated string literal");
  }

  std::string read_hex() {
    ++pos_;
    std::string digits;
    while (pos_ < d_.size() && d_[pos_] != '>') {
      if (std::isxdigit(static_cast<unsigned char>(d_[pos_]))) digits += d_[pos_];
      ++pos_;
    }
    ++pos_;
    if (digits.size() % 2 == 1) digits += '0';
    std::string out;
    for (size_t i = 0; i < digits.size(); i += 2) {
      out += static_cast<char>(std::stoi(digits.substr(i, 2), nullptr, 16));
    }
    return out;
  }

  Value read_dict() {
    pos_ += 2;
    auto dict = std::make_shared<Dict>();
    while (true) {
      skip_ws();
      if (pos_ + 1 < d_.size() && d_[pos_] == '>' && d_[pos_ + 1] == '>') {
        pos_ += 2;
        break;
      }
      if (pos_ >= d_.size()) throw IngestError("unterminated dictionary");
      Value key = parse_one();
      if (key.name() == nullptr) {
        if (key.keyword() != nullptr) continue;
        throw IngestError("dictionary key is not a name");
      }
      (*dict)[key.name()->v] = parse();
    }
    return Value{dict};
  }

  std::string_view d_;
  size_t pos_;
};

// ---------------------------------------------------------------------------
// Stream filters.

std::string inflate_bytes(const std::string& in) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw IngestError("zlib init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  std::string out;
  std::array<char, 16384> buf{};
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf.data());
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf.data(), buf.size() - zs.avail_out);
    if (rc == Z_STREAM_END) break;
    if (rc != Z_OK) {
      // Truncated streams are common; keep what decoded.
      if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
      inflateEnd(&zs);
      if (!out.empty()) return out;
      throw IngestError("corrupt Flate stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

std::string ascii85_decode(const std::string& in) {
  std::string out;
  uint32_t tuple = 0;
  int count = 0;
  for (size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (c == '~') break;
    if (is_ws(c)) continue;
    if (c == 'z' && count == 0) {
      out.append(4, '\0');
      continue;
    }
    if (c < '!' || c > 'u') throw IngestError("bad ASCII85 data");
    tuple = tuple * 85 + static_cast<uint32_t>(c - '!');
    if (++count == 5) {
      for (int k = 3; k >= 0; --k) out += static_cast<char>((tuple >> (8 * k)) & 0xFF);
      tuple = 0;
      count = 0;
    }
  }
  if (count > 1) {
    for (int k = count; k < 5; ++k) tuple = tuple * 85 + 84;
    for (int k = 0; k < count - 1; ++k) out += static_cast<char>((tuple >> (8 * (3 - k))) & 0xFF);
  }
  return out;
}

std::string asciihex_decode(const std::string& in) {
  std::string digits;
  for (char c : in) {
    if (c == '>') break;
    if (std::isxdigit(static_cast<unsigned char>(c))) digits += c;
  }
  if (digits.size() % 2 == 1) digits += '0';
  std::string out;
  for (size_t i = 0; i < digits.size(); i += 2) {
    out += static_cast<char>(std::stoi(digits.substr(i, 2), nullptr, 16));
  }
  return out;
}

// ---------------------------------------------------------------------------
// File-level object table.

class File {
 public:
  explicit File(const std::string& bytes) : bytes_(bytes) { scan(); }

  const Value& resolve(const Value& v, int depth = 0) const {
    static const Value kNull;
    if (const Ref* r = v.ref()) {
      if (depth > 32) return kNull;
      auto it = objects_.find(r->num);
      if (it == objects_.end()) return kNull;
      return resolve(it->second, depth + 1);
    }
    return v;
  }

  const Value* get(const Dict& d, const std::string& key) const {
    auto it = d.find(key);
    if (it == d.end()) return nullptr;
    const Value& v = resolve(it->second);
    return v.is_null() ? nullptr : &v;
  }

  std::string decode(const Stream& s, std::vector<std::string>* warnings) const {
    std::vector<std::string> filters;
    if (const Value* f = get(*s.dict, "Filter")) {
      if (const Name* n = f->name()) filters.push_back(n->v);
      if (const Array* a = f->array()) {
        for (const auto& item : *a) {
          if (const Name* n = resolve(item).name()) filters.push_back(n->v);
        }
      }
    }
    std::string data = s.raw;
    for (const auto& f : filters) {
      if (f == "FlateDecode" || f == "Fl") {
        data = inflate_bytes(data);
      } else if (f == "ASCII85Decode" || f == "A85") {
        data = ascii85_decode(data);
      } else if (f == "ASCIIHexDecode" || f == "AHx") {
        data = asciihex_decode(data);
      } else {
        if (warnings != nullptr) warnings->push_back("unsupported stream filter " + f);
        return {};
      }
    }
    return data;
  }

  const Dict* catalog() const { return catalog_; }
  bool encrypted() const { return encrypted_; }

 private:
  void scan() {
    std::string_view d(bytes_);
    size_t pos = 0;
    while (true) {
      const size_t hit = d.find("obj", pos);
      if (hit == std::string_view::npos) break;
      pos = hit + 3;
      if (pos < d.size() && !is_ws(d[pos]) && !is_delim(d[pos])) continue;
      // Expect "<num> <gen> obj".
      size_t p = hit;
      auto back_ws = [&]() {
        while (p > 0 && is_ws(d[p - 1])) --p;
      };
      auto back_digits = [&]() {
        const size_t end = p;
        while (p > 0 && std::isdigit(static_cast<unsigned char>(d[p - 1]))) --p;
        return end > p ? std::optional<int>(std::stoi(std::string(d.substr(p, end - p))))
                       : std::nullopt;
      };
      back_ws();
      if (p == hit) continue;
      const auto gen = back_digits();
      if (!gen) continue;
      const size_t before_gen = p;
      back_ws();
      if (p == before_gen) continue;
      const auto num = back_digits();
      if (!num) continue;
      try {
        Lexer lx(d, hit + 3);
        Value v = lx.parse();
        lx.skip_ws();
        size_t after = lx.pos();
        if (v.dict() != nullptr && d.substr(after, 6) == "stream") {
          auto dict = std::get<std::shared_ptr<Dict>>(v.v);
          size_t start = after + 6;
          if (start < d.size() && d[start] == '\r') ++start;
          if (start < d.size() && d[start] == '\n') ++start;
          size_t end = std::string_view::npos;
          auto len = dict->find("Length");
          if (len != dict->end() && len->second.num() != nullptr) {
            const size_t n = static_cast<size_t>(*len->second.num());
            if (start + n <= d.size()) {
              size_t q = start + n;
              while (q < d.size() && is_ws(d[q])) ++q;
              if (d.substr(q, 9) == "endstream") end = start + n;
            }
          }
          if (end == std::string_view::npos) {
            const size_t es = d.find("endstream", start);
            if (es == std::string_view::npos) continue;
            end = es;
            if (end > start && d[end - 1] == '\n') --end;
            if (end > start && d[end - 1] == '\r') --end;
          }
          auto stream = std::make_shared<Stream>();
          stream->dict = dict;
          stream->raw = std::string(d.substr(start, end - start));
          v = Value{stream};
          pos = end;
        } else {
          pos = after;
        }
        objects_[*num] = v;
      } catch (const Error&) {
        continue;
      }
    }
    expand_object_streams();
    for (const auto& [num, v] : objects_) {
      const Dict* dict = v.dict();
      if (dict == nullptr) continue;
      auto type = dict->find("Type");
      if (type == dict->end() || type->second.name() == nullptr) continue;
      if (type->second.name()->v == "Catalog") catalog_ = dict;
      if (type->second.name()->v == "XRef" && dict->count("Encrypt") > 0) encrypted_ = true;
    }
    if (d.find("/Encrypt") != std::string_view::npos) {
      const size_t t = d.rfind("trailer");
      if (t != std::string_view::npos && d.find("/Encrypt", t) != std::string_view::npos) {
        encrypted_ = true;
      }
    }
  }

  void expand_object_streams() {
    std::vector<std::pair<int, Value>> found;
    for (const auto& [num, v] : objects_) {
      const Stream* s = v.stream();
      if (s == nullptr) continue;
      auto type = s->dict->find("Type");
      if (type == s->dict->end() || type->second.name() == nullptr ||
          type->second.name()->v != "ObjStm") {
        continue;
      }
      try {
        const std::string data = decode(*s, nullptr);
        const Value* n = get(*s->dict, "N");
        const Value* first = get(*s->dict, "First");
        if (n == nullptr || first == nullptr || n->num() == nullptr || first->num() == nullptr) {
          continue;
        }
        Lexer header(data);
        std::vector<std::pair<int, size_t>> index;
        for (int i = 0; i < static_cast<int>(*n->num()); ++i) {
          Value a = header.parse();
          Value b = header.parse();
          if (a.num() == nullptr || b.num() == nullptr) break;
          index.emplace_back(static_cast<int>(*a.num()), static_cast<size_t>(*b.num()));
        }
        for (const auto& [obj, off] : index) {
          const size_t at = static_cast<size_t>(*first->num()) + off;
          if (at >= data.size()) continue;
          Lexer lx(data, at);
          found.emplace_back(obj, lx.parse());
        }
      } catch (const Error&) {
        continue;
      }
    }
    for (auto& [num, v] : found) {
      if (objects_.count(num) == 0) objects_[num] = std::move(v);
    }
  }

  const std::string& bytes_;
  std::map<int, Value> objects_;
  const Dict* catalog_ = nullptr;
  bool encrypted_ = false;
};

// ---------------------------------------------------------------------------
// Fonts.

std::string utf8_encode(uint32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

// WinAnsi code points for 0x80..0x9F; the rest of the byte range maps to
// Latin-1.
constexpr std::array<uint16_t, 32> kWinAnsiHigh = {
    0x20AC, 0x0000, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021,
    0x02C6, 0x2030, 0x0160, 0x2039, 0x0152, 0x0000, 0x017D, 0x0000,
    0x0000, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
    0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x0000, 0x017E, 0x0178};

uint32_t hex_value(const std::string& bytes) {
  uint32_t v = 0;
  for (unsigned char c : bytes) v = (v << 8) | c;
  return v;
}

std::string utf16be_to_utf8(const std::string& bytes) {
  std::string out;
  for (size_t i = 0; i + 1 < bytes.size(); i += 2) {
    uint32_t u = (static_cast<unsigned char>(bytes[i]) << 8) |
                 static_cast<unsigned char>(bytes[i + 1]);
    if (u >= 0xD800 && u < 0xDC00 && i + 3 < bytes.size()) {
      const uint32_t lo = (static_cast<unsigned char>(bytes[i + 2]) << 8) |
                          static_cast<unsigned char>(bytes[i + 3]);
      u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
      i += 2;
    }
    out += utf8_encode(u);
  }
  return out;
}

struct Font {
  int code_bytes = 1;
  std::map<uint32_t, std::string> to_unicode;
  std::map<uint32_t, double> widths;  // glyph space units (1/1000 em)
  double default_width = 500;

  std::vector<uint32_t> codes(const std::string& s) const {
    std::vector<uint32_t> out;
    for (size_t i = 0; i + code_bytes <= s.size(); i += code_bytes) {
      out.push_back(hex_value(s.substr(i, code_bytes)));
    }
    return out;
  }

  std::string text_for(uint32_t code) const {
    auto it = to_unicode.find(code);
    if (it != to_unicode.end()) return it->second;
    if (code_bytes == 2) return {};
    if (code >= 0x80 && code < 0xA0) {
      const uint16_t u = kWinAnsiHigh[code - 0x80];
      return u == 0 ? std::string() : utf8_encode(u);
    }
    if (code < 0x20) return {};
    return utf8_encode(code);
  }

  double width_for(uint32_t code) const {
    auto it = widths.find(code);
    return it != widths.end() ? it->second : default_width;
  }
};

void parse_cmap(const std::string& data, Font& font) {
  Lexer lx(data);
  std::vector<Value> operands;
  while (!lx.at_end()) {
    Value v;
    try {
      v = lx.parse();
    } catch (const Error&) {
      break;
    }
    const Keyword* kw = v.keyword();
    if (kw == nullptr) {
      operands.push_back(v);
      continue;
    }
    if (kw->v == "begincodespacerange") {
      operands.clear();
    } else if (kw->v == "endcodespacerange") {
      if (!operands.empty() && operands[0].str() != nullptr) {
        font.code_bytes = std::max(1, static_cast<int>(operands[0].str()->bytes.size()));
      }
      operands.clear();
    } else if (kw->v == "endbfchar") {
      for (size_t i = 0; i + 1 < operands.size(); i += 2) {
        if (operands[i].str() && operands[i + 1].str()) {
          font.to_unicode[hex_value(operands[i].str()->bytes)] =
              utf16be_to_utf8(operands[i + 1].str()->bytes);
        }
      }
      operands.clear();
    } else if (kw->v == "endbfrange") {
      for (size_t i = 0; i + 2 < operands.size(); i += 3) {
        if (!operands[i].str() || !operands[i + 1].str()) continue;
        const uint32_t lo = hex_value(operands[i].str()->bytes);
        const uint32_t hi = hex_value(operands[i + 1].str()->bytes);
        if (hi < lo || hi - lo > 0xFFFF) continue;
        if (const Str* dst = operands[i + 2].str()) {
          std::string base = dst->bytes;
          for (uint32_t c = lo; c <= hi; ++c) {
            font.to_unicode[c] = utf16be_to_utf8(base);
            if (!base.empty()) base.back() = static_cast<char>(base.back() + 1);
          }
        } else if (const Array* arr = operands[i + 2].array()) {
          for (uint32_t c = lo; c <= hi && c - lo < arr->size(); ++c) {
            if (const Str* s = (*arr)[c - lo].str()) font.to_unicode[c] = utf16be_to_utf8(s->bytes);
          }
        }
      }
      operands.clear();
    } else if (kw->v == "beginbfchar" || kw->v == "beginbfrange") {
      operands.clear();
    }
  }
}

Font load_font(const File& file, const Dict& fd, std::vector<std::string>& warnings) {
  Font font;
  const Value* subtype = file.get(fd, "Subtype");
  const bool type0 = subtype && subtype->name() && subtype->name()->v == "Type0";
  if (type0) {
    font.code_bytes = 2;
    font.default_width = 1000;
    if (const Value* desc = file.get(fd, "DescendantFonts")) {
      const Array* arr = desc->array();
      if (arr != nullptr && !arr->empty()) {
        if (const Dict* cid = file.resolve((*arr)[0]).dict()) {
          if (const Value* dw = file.get(*cid, "DW"); dw && dw->num()) font.default_width = *dw->num();
          if (const Value* w = file.get(*cid, "W")) {
            if (const Array* wa = w->array()) {
              for (size_t i = 0; i < wa->size();) {
                const Value& a = file.resolve((*wa)[i]);
                if (a.num() == nullptr || i + 1 >= wa->size()) break;
                const Value& b = file.resolve((*wa)[i + 1]);
                if (const Array* list = b.array()) {
                  uint32_t c = static_cast<uint32_t>(*a.num());
                  for (const auto& wv : *list) {
                    if (const double* n = file.resolve(wv).num()) font.widths[c] = *n;
                    ++c;
                  }
                  i += 2;
                } else if (b.num() != nullptr && i + 2 < wa->size()) {
                  const double* wv = file.resolve((*wa)[i + 2]).num();
                  for (uint32_t c = static_cast<uint32_t>(*a.num());
                       c <= static_cast<uint32_t>(*b.num()) && wv; ++c) {
                    font.widths[c] = *wv;
                  }
                  i += 3;
                } else {
                  break;
                }
              }
            }
          }
        }
      }
    }
  } else {
    const Value* first = file.get(fd, "FirstChar");
    const Value* widths = file.get(fd, "Widths");
    if (first && first->num() && widths && widths->array()) {
      uint32_t c = static_cast<uint32_t>(*first->num());
      for (const auto& wv : *widths->array()) {
        if (const double* n = file.resolve(wv).num()) font.widths[c] = *n;
        ++c;
      }
    }
  }
  if (const Value* tu = file.get(fd, "ToUnicode")) {
    if (const Stream* s = tu->stream()) {
      try {
        parse_cmap(file.decode(*s, &warnings), font);
      } catch (const Error& e) {
        warnings.push_back(std::string("ignoring unreadable ToUnicode map: ") + e.what());
      }
    }
  }
  return font;
}

// ---------------------------------------------------------------------------
// Content interpretation.

struct Matrix {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  Matrix operator*(const Matrix& m) const {
    return {a * m.a + b * m.c,         a * m.b + b * m.d,
            c * m.a + d * m.c,         c * m.b + d * m.d,
            e * m.a + f * m.c + m.e,   e * m.b + f * m.d + m.f};
  }
  std::pair<double, double> apply(double x, double y) const {
    return {a * x + c * y + e, b * x + d * y + f};
  }
};

struct GraphicsState {
  Matrix ctm;
  const Font* font = nullptr;
  double font_size = 0;
  double char_spacing = 0;
  double word_spacing = 0;
  double h_scale = 1;
  double leading = 0;
  double rise = 0;
};

class PageInterpreter {
 public:
  PageInterpreter(const File& file, PageContent& page, double llx, double lly,
                  std::vector<std::string>& warnings)
      : file_(file), page_(page), llx_(llx), lly_(lly), warnings_(warnings) {}

  void run(const std::string& content, const Dict* resources, const Matrix& base,
           int depth = 0) {
    if (depth > 8) return;
    GraphicsState gs;
    gs.ctm = base;
    std::vector<GraphicsState> stack;
    Matrix tm, tlm;
    std::vector<Value> ops;
    Lexer lx(content);
    while (true) {
      Value v;
      try {
        if (lx.at_end()) break;
        v = lx.parse();
      } catch (const Error&) {
        warnings_.push_back("content stream truncated");
        break;
      }
      const Keyword* kw = v.keyword();
      if (kw == nullptr) {
        ops.push_back(std::move(v));
        continue;
      }
      const std::string& op = kw->v;
      auto num = [&](size_t i) {
        if (i >= ops.size()) return 0.0;
        const double* n = ops[i].num();
        return n ? *n : 0.0;
      };
      auto text_show = [&](const Value& operand) { show(operand, gs, tm); };
      if (op == "q") {
        stack.push_back(gs);
      } else if (op == "Q") {
        if (!stack.empty()) {
          gs = stack.back();
          stack.pop_back();
        }
      } else if (op == "cm" && ops.size() >= 6) {
        gs.ctm = Matrix{num(0), num(1), num(2), num(3), num(4), num(5)} * gs.ctm;
      } else if (op == "BT") {
        tm = tlm = Matrix{};
      } else if (op == "Tf" && ops.size() >= 2) {
        gs.font_size = num(1);
        gs.font = ops[0].name() ? font(resources, ops[0].name()->v) : nullptr;
      } else if (op == "Tc" && !ops.empty()) {
        gs.char_spacing = num(0);
      } else if (op == "Tw" && !ops.empty()) {
        gs.word_spacing = num(0);
      } else if (op == "Tz" && !ops.empty()) {
        gs.h_scale = num(0) / 100.0;
      } else if (op == "TL" && !ops.empty()) {
        gs.leading = num(0);
      } else if (op == "Ts" && !ops.empty()) {
        gs.rise = num(0);
      } else if ((op == "Td" || op == "TD") && ops.size() >= 2) {
        if (op == "TD") gs.leading = -num(1);
        tlm = Matrix{1, 0, 0, 1, num(0), num(1)} * tlm;
        tm = tlm;
      } else if (op == "Tm" && ops.size() >= 6) {
        tlm = tm = Matrix{num(0), num(1), num(2), num(3), num(4), num(5)};
      } else if (op == "T*") {
        tlm = Matrix{1, 0, 0, 1, 0, -gs.leading} * tlm;
        tm = tlm;
      } else if (op == "Tj" && !ops.empty()) {
        text_show(ops[0]);
      } else if (op == "TJ" && !ops.empty()) {
        text_show(ops[0]);
      } else if (op == "'" && !ops.empty()) {
        tlm = Matrix{1, 0, 0, 1, 0, -gs.leading} * tlm;
        tm = tlm;
        text_show(ops.back());
      } else if (op == "\"" && ops.size() >= 3) {
        gs.word_spacing = num(0);
        gs.char_spacing = num(1);
        tlm = Matrix{1, 0, 0, 1, 0, -gs.leading} * tlm;
        tm = tlm;
        text_show(ops[2]);
      } else if (op == "Do" && !ops.empty() && ops[0].name()) {
        draw_xobject(resources, ops[0].name()->v, gs.ctm, depth);
      } else if (op == "BI") {
        skip_inline_image(lx);
      }
      ops.clear();
    }
  }

 private:
  const Font* font(const Dict* resources, const std::string& name) {
    if (resources == nullptr) return nullptr;
    const Value* fonts = file_.get(*resources, "Font");
    if (fonts == nullptr || fonts->dict() == nullptr) return nullptr;
    const Value* fv = file_.get(*fonts->dict(), name);
    if (fv == nullptr || fv->dict() == nullptr) return nullptr;
    const Dict* key = fv->dict();
    auto it = fonts_.find(key);
    if (it == fonts_.end()) {
      it = fonts_.emplace(key, std::make_unique<Font>(load_font(file_, *key, warnings_))).first;
    }
    return it->second.get();
  }

  void show(const Value& operand, GraphicsState& gs, Matrix& tm) {
    static const Font kFallback;
    const Font& f = gs.font ? *gs.font : kFallback;
    const Matrix start = Matrix{1, 0, 0, 1, 0, gs.rise} * tm * gs.ctm;
    std::string text;
    double advance = 0;  // unscaled text space units
    auto show_string = [&](const std::string& bytes) {
      for (uint32_t code : f.codes(bytes)) {
        const double w0 = f.width_for(code) / 1000.0;
        double tx = w0 * gs.font_size + gs.char_spacing;
        if (f.code_bytes == 1 && code == 32) tx += gs.word_spacing;
        advance += tx * gs.h_scale;
        text += f.text_for(code);
      }
    };
    if (const Str* s = operand.str()) {
      show_string(s->bytes);
    } else if (const Array* arr = operand.array()) {
      for (const auto& item : *arr) {
        if (const Str* s = item.str()) {
          show_string(s->bytes);
        } else if (const double* n = item.num()) {
          const double shift = -*n / 1000.0 * gs.font_size * gs.h_scale;
          advance += shift;
          if (*n < -200 && !text.empty() && text.back() != ' ') text += ' ';
        }
      }
    }
    tm = Matrix{1, 0, 0, 1, advance, 0} * tm;
    if (text.empty()) return;
    const auto [x, y] = start.apply(0, 0);
    const double x_scale = std::hypot(start.a, start.b);
    const double y_scale = std::hypot(start.c, start.d);
    TextRun run;
    run.x = x - llx_;
    run.baseline = page_.size.height - (y - lly_);
    run.width = std::abs(advance * x_scale);
    run.font_size = std::abs(gs.font_size * y_scale);
    run.text = std::move(text);
    if (run.font_size <= 0) run.font_size = 1;
    page_.runs.push_back(std::move(run));
  }

  void draw_xobject(const Dict* resources, const std::string& name, const Matrix& ctm,
                    int depth) {
    if (resources == nullptr) return;
    const Value* xobjects = file_.get(*resources, "XObject");
    if (xobjects == nullptr || xobjects->dict() == nullptr) return;
    const Value* xv = file_.get(*xobjects->dict(), name);
    if (xv == nullptr || xv->stream() == nullptr) return;
    const Stream& xs = *xv->stream();
    const Value* subtype = file_.get(*xs.dict, "Subtype");
    if (subtype == nullptr || subtype->name() == nullptr) return;
    if (subtype->name()->v == "Image") {
      double xs_[4], ys_[4];
      const std::pair<double, double> corners[4] = {ctm.apply(0, 0), ctm.apply(1, 0),
                                                     ctm.apply(0, 1), ctm.apply(1, 1)};
      for (int i = 0; i < 4; ++i) {
        xs_[i] = corners[i].first - llx_;
        ys_[i] = page_.size.height - (corners[i].second - lly_);
      }
      ir::BBox box;
      box.x0 = *std::min_element(xs_, xs_ + 4);
      box.x1 = *std::max_element(xs_, xs_ + 4);
      box.y0 = *std::min_element(ys_, ys_ + 4);
      box.y1 = *std::max_element(ys_, ys_ + 4);
      page_.images.push_back(box);
    } else if (subtype->name()->v == "Form") {
      Matrix m;
      if (const Value* mv = file_.get(*xs.dict, "Matrix"); mv && mv->array() &&
                                                             mv->array()->size() == 6) {
        const Array& a = *mv->array();
        auto n = [&](size_t i) {
          const double* p = file_.resolve(a[i]).num();
          return p ? *p : 0.0;
        };
        m = Matrix{n(0), n(1), n(2), n(3), n(4), n(5)};
      }
      const Value* res = file_.get(*xs.dict, "Resources");
      run(file_.decode(xs, &warnings_), res ? res->dict() : resources, m * ctm, depth + 1);
    }
  }

  static void skip_inline_image(Lexer& lx) {
    std::string_view d = lx.data();
    size_t p = d.find("ID", lx.pos());
    if (p == std::string_view::npos) {
      lx.set_pos(d.size());
      return;
    }
    p += 2;
    while (p + 2 <= d.size()) {
      if (d[p] == 'E' && d[p + 1] == 'I' && p > 0 && is_ws(d[p - 1]) &&
          (p + 2 == d.size() || is_ws(d[p + 2]))) {
        lx.set_pos(p + 2);
        return;
      }
      ++p;
    }
    lx.set_pos(d.size());
  }

  const File& file_;
  PageContent& page_;
  double llx_;
  double lly_;
  std::vector<std::string>& warnings_;
  std::map<const Dict*, std::unique_ptr<Font>> fonts_;
};

struct PageNode {
  const Dict* dict;
  std::array<double, 4> media_box;
  const Dict* resources;
};

void collect_pages(const File& file, const Dict& node, std::array<double, 4> media_box,
                   const Dict* resources, std::vector<PageNode>& out,
                   std::set<const Dict*>& seen) {
  if (!seen.insert(&node).second) return;
  if (const Value* mb = file.get(node, "MediaBox"); mb && mb->array() && mb->array()->size() == 4) {
    for (size_t i = 0; i < 4; ++i) {
      const double* n = file.resolve((*mb->array())[i]).num();
      media_box[i] = n ? *n : 0;
    }
  }
  if (const Value* res = file.get(node, "Resources"); res && res->dict()) resources = res->dict();
  const Value* type = file.get(node, "Type");
  const bool is_page = type && type->name() && type->name()->v == "Page";
  const Value* kids = file.get(node, "Kids");
  if (is_page || kids == nullptr) {
    out.push_back({&node, media_box, resources});
    return;
  }
  if (const Array* arr = kids->array()) {
    for (const auto& k : *arr) {
      if (const Dict* kd = file.resolve(k).dict()) {
        collect_pages(file, *kd, media_box, resources, out, seen);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Layout grouping.

struct Line {
  double x0, x1, baseline, font_size;
  std::string text;
};

struct Block {
  std::vector<Line> lines;
  double x0, x1;
  double font_size;
};

bool ends_with_space(const std::string& s) { return !s.empty() && s.back() == ' '; }

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<Line> group_lines(std::vector<TextRun> runs) {
  std::stable_sort(runs.begin(), runs.end(), [](const TextRun& a, const TextRun& b) {
    if (a.baseline != b.baseline) return a.baseline < b.baseline;
    return a.x < b.x;
  });
  std::vector<Line> lines;
  for (const auto& r : runs) {
    if (trim(r.text).empty()) continue;
    Line* target = nullptr;
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
      const double tol = 0.3 * std::max(it->font_size, r.font_size);
      if (r.baseline - it->baseline > tol) break;
      const double gap = r.x - it->x1;
      if (std::abs(r.baseline - it->baseline) <= tol && gap >= -r.font_size &&
          gap <= 1.0 * std::max(it->font_size, r.font_size)) {
        target = &*it;
        break;
      }
    }
    if (target == nullptr) {
      lines.push_back({r.x, r.x + r.width, r.baseline, r.font_size, r.text});
      continue;
    }
    const double gap = r.x - target->x1;
    if (gap > 0.15 * r.font_size && !ends_with_space(target->text) && r.text.front() != ' ') {
      target->text += ' ';
    }
    target->text += r.text;
    target->x1 = std::max(target->x1, r.x + r.width);
    target->font_size = std::max(target->font_size, r.font_size);
  }
  for (auto& l : lines) l.text = trim(l.text);
  return lines;
}

std::vector<Block> group_blocks(std::vector<Line> lines) {
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.baseline != b.baseline) return a.baseline < b.baseline;
    return a.x0 < b.x0;
  });
  std::vector<Block> blocks;
  for (auto& l : lines) {
    Block* best = nullptr;
    double best_dist = 0;
    for (auto& b : blocks) {
      const Line& last = b.lines.back();
      const double dist = l.baseline - last.baseline;
      const double size_ratio = l.font_size / b.font_size;
      const bool overlap = std::min(b.x1, l.x1) > std::max(b.x0, l.x0);
      if (dist > 0 && dist <= 1.6 * b.font_size && size_ratio > 0.9 && size_ratio < 1.1 &&
          overlap && (best == nullptr || dist < best_dist)) {
        best = &b;
        best_dist = dist;
      }
    }
    if (best == nullptr) {
      blocks.push_back({{l}, l.x0, l.x1, l.font_size});
    } else {
      best->lines.push_back(l);
      best->x0 = std::min(best->x0, l.x0);
      best->x1 = std::max(best->x1, l.x1);
    }
  }
  return blocks;
}

std::string block_text(const Block& b) {
  std::string out;
  for (const auto& l : b.lines) {
    if (out.empty()) {
      out = l.text;
      continue;
    }
    const bool hyphen = out.size() >= 2 && out.back() == '-' &&
                        std::isalpha(static_cast<unsigned char>(out[out.size() - 2])) &&
                        !l.text.empty() && std::islower(static_cast<unsigned char>(l.text[0]));
    if (hyphen) {
      out.pop_back();
    } else {
      out += ' ';
    }
    out += l.text;
  }
  return out;
}

bool looks_like_caption(const std::string& text) {
  static const std::regex re(R"(^(figure|fig\.|table)\s*\d+)", std::regex::icase);
  return std::regex_search(text, re);
}

bool looks_like_list_item(const std::string& text) {
  static const std::regex re(R"(^(\(?\d{1,2}[.)]|\(?[a-z][.)]|[-*])\s)");
  if (std::regex_search(text, re)) return true;
  for (std::string_view bullet : {"•", "–", "·", "▪", "◦"}) {
    if (text.rfind(bullet, 0) == 0) return true;
  }
  return false;
}

}  // namespace

Document parse(const std::string& bytes) {
  if (bytes.rfind("%PDF-", 0) != 0 && bytes.find("%PDF-") > 1024) {
    throw IngestError("not a PDF file (missing %PDF- header)");
  }
  File file(bytes);
  if (file.encrypted()) throw IngestError("encrypted PDF files are not supported");
  if (file.catalog() == nullptr) throw IngestError("PDF has no document catalog");
  const Value* pages_root = file.get(*file.catalog(), "Pages");
  if (pages_root == nullptr || pages_root->dict() == nullptr) {
    throw IngestError("PDF catalog has no page tree");
  }
  std::vector<PageNode> nodes;
  std::set<const Dict*> seen;
  collect_pages(file, *pages_root->dict(), {0, 0, 612, 792}, nullptr, nodes, seen);
  if (nodes.empty()) throw IngestError("PDF has no pages");

  Document doc;
  for (const auto& node : nodes) {
    PageContent page;
    const auto& mb = node.media_box;
    page.size.width = std::abs(mb[2] - mb[0]);
    page.size.height = std::abs(mb[3] - mb[1]);
    if (page.size.width <= 0 || page.size.height <= 0) page.size = ir::PageSize{};
    std::string content;
    if (const Value* c = file.get(*node.dict, "Contents")) {
      if (const Stream* s = c->stream()) {
        content = file.decode(*s, &doc.warnings);
      } else if (const Array* arr = c->array()) {
        for (const auto& item : *arr) {
          if (const Stream* s = file.resolve(item).stream()) {
            content += file.decode(*s, &doc.warnings);
            content += '\n';
          }
        }
      }
    }
    PageInterpreter interp(file, page, std::min(mb[0], mb[2]), std::min(mb[1], mb[3]),
                           doc.warnings);
    interp.run(content, node.resources, Matrix{});
    doc.pages.push_back(std::move(page));
  }
  return doc;
}

Extraction extract_elements(const Document& doc) {
  Extraction out;
  out.warnings = doc.warnings;

  struct Pending {
    int page;
    Block block;
  };
  std::vector<Pending> pending;
  std::vector<double> sizes;
  for (size_t p = 0; p < doc.pages.size(); ++p) {
    out.pages.push_back(doc.pages[p].size);
    for (auto& b : group_blocks(group_lines(doc.pages[p].runs))) {
      for (const auto& l : b.lines) {
        sizes.insert(sizes.end(), std::max<size_t>(1, l.text.size()), l.font_size);
      }
      pending.push_back({static_cast<int>(p), std::move(b)});
    }
  }
  double median = 10;
  if (!sizes.empty()) {
    std::nth_element(sizes.begin(), sizes.begin() + sizes.size() / 2, sizes.end());
    median = sizes[sizes.size() / 2];
  }

  std::set<double> heading_sizes;
  auto is_heading = [&](const Block& b) {
    return b.font_size >= 1.15 * median && b.lines.size() <= 3;
  };
  for (const auto& p : pending) {
    if (is_heading(p.block)) heading_sizes.insert(std::round(p.block.font_size * 2) / 2);
  }
  std::vector<double> ranked(heading_sizes.rbegin(), heading_sizes.rend());

  std::vector<std::vector<ir::Element>> per_page(doc.pages.size());
  for (const auto& p : pending) {
    const Block& b = p.block;
    const ir::PageSize& size = doc.pages[static_cast<size_t>(p.page)].size;
    ir::Element e;
    e.text = block_text(b);
    e.bbox.page_index = p.page;
    e.bbox.x0 = std::clamp(b.x0, 0.0, size.width);
    e.bbox.x1 = std::clamp(b.x1, 0.0, size.width);
    e.bbox.y0 = std::clamp(b.lines.front().baseline - 0.8 * b.font_size, 0.0, size.height);
    e.bbox.y1 = std::clamp(b.lines.back().baseline + 0.25 * b.font_size, 0.0, size.height);
    if (is_heading(b)) {
      e.kind = ir::ElementKind::kHeading;
      const double key = std::round(b.font_size * 2) / 2;
      const auto rank = std::find(ranked.begin(), ranked.end(), key) - ranked.begin();
      e.heading_level = std::min<int>(6, static_cast<int>(rank) + 1);
    } else if (looks_like_caption(e.text)) {
      e.kind = ir::ElementKind::kCaption;
    } else if (looks_like_list_item(e.text)) {
      e.kind = ir::ElementKind::kListItem;
    } else if (b.font_size <= 0.85 * median && e.bbox.y0 >= 0.8 * size.height) {
      e.kind = ir::ElementKind::kFootnote;
    } else {
      e.kind = ir::ElementKind::kParagraph;
    }
    per_page[static_cast<size_t>(p.page)].push_back(std::move(e));
  }
  for (size_t p = 0; p < doc.pages.size(); ++p) {
    const ir::PageSize& size = doc.pages[p].size;
    for (const auto& img : doc.pages[p].images) {
      ir::Element e;
      e.kind = ir::ElementKind::kFigure;
      e.bbox = img;
      e.bbox.page_index = static_cast<int>(p);
      e.bbox.x0 = std::clamp(e.bbox.x0, 0.0, size.width);
      e.bbox.x1 = std::clamp(e.bbox.x1, 0.0, size.width);
      e.bbox.y0 = std::clamp(e.bbox.y0, 0.0, size.height);
      e.bbox.y1 = std::clamp(e.bbox.y1, 0.0, size.height);
      per_page[p].push_back(std::move(e));
    }
  }
  for (size_t p = 0; p < per_page.size(); ++p) {
    auto& elems = per_page[p];
    std::stable_sort(elems.begin(), elems.end(), [](const ir::Element& a, const ir::Element& b) {
      if (a.bbox.y0 != b.bbox.y0) return a.bbox.y0 < b.bbox.y0;
      return a.bbox.x0 < b.bbox.x0;
    });
    int n = 0;
    for (auto& e : elems) {
      e.bbox = e.bbox.quantized();
      if (e.bbox.x1 <= e.bbox.x0 || e.bbox.y1 <= e.bbox.y0) {
        out.warnings.push_back("dropped zero-area " + std::string(ir::to_string(e.kind)) +
                               " on page " + std::to_string(p + 1));
        continue;
      }
      e.id = "p" + std::to_string(p + 1) + "e" + std::to_string(++n);
      out.elements.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace docrefine::pdf
