// Copyright 2026 The farmbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "farmbench/xml.hpp"

#include <charconv>
#include <cstdint>
#include <utility>

namespace farmbench::xml {

namespace {

constexpr std::size_t kMaxDepth = 256;
constexpr std::string_view kXmlNamespace =
    "http://www.w3.org/XML/1998/namespace";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

bool is_name_start(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' ||
         c == ':' || u >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Splits "prefix:local". Returns false for malformed qualified names.
bool split_qname(std::string_view qname, std::string_view& prefix,
                 std::string_view& local) {
  const auto colon = qname.find(':');
  if (colon == std::string_view::npos) {
    prefix = {};
    local = qname;
    return !local.empty();
  }
  prefix = qname.substr(0, colon);
  local = qname.substr(colon + 1);
  return !prefix.empty() && !local.empty() &&
         local.find(':') == std::string_view::npos;
}

class Parser {
 public:
  explicit Parser(std::string_view doc) : doc_(doc) {}

  Element parse_document() {
    if (doc_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    if (doc_.substr(pos_, 5) == "<?xml") parse_pi();
    skip_misc();
    if (at_end() || peek() != '<') fail("expected root element");
    Element root = parse_element(0);
    skip_misc();
    if (!at_end()) fail("content after root element");
    return root;
  }

 private:
  using Scope = std::vector<std::pair<std::string, std::string>>;

  [[noreturn]] void fail(const std::string& what) const {
    throw XmlError(pos_, what);
  }

  bool at_end() const { return pos_ >= doc_.size(); }
  char peek() const { return doc_[pos_]; }
  bool starts_with(std::string_view s) const {
    return doc_.substr(pos_, s.size()) == s;
  }

  void skip_space() {
    while (!at_end() && is_space(peek())) ++pos_;
  }

  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view parse_name() {
    const std::size_t start = pos_;
    if (at_end() || !is_name_start(peek())) fail("expected a name");
    while (!at_end() && is_name_char(peek())) ++pos_;
    return doc_.substr(start, pos_ - start);
  }

  void skip_until(std::string_view terminator, const char* what) {
    const auto end = doc_.find(terminator, pos_);
    if (end == std::string_view::npos)
      fail(std::string("unterminated ") + what);
    pos_ = end + terminator.size();
  }

  void parse_pi() { skip_until("?>", "processing instruction"); }

  void parse_comment() {
    pos_ += 4;
    skip_until("-->", "comment");
  }

  // Whitespace, comments and processing instructions outside the root.
  void skip_misc() {
    for (;;) {
      skip_space();
      if (starts_with("<!--")) {
        parse_comment();
      } else if (starts_with("<?")) {
        parse_pi();
      } else if (starts_with("<!DOCTYPE")) {
        fail("DOCTYPE is not supported");
      } else {
        return;
      }
    }
  }

  std::string lookup(std::string_view prefix, std::size_t at) const {
    if (prefix == "xml") return std::string(kXmlNamespace);
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      for (auto b = it->rbegin(); b != it->rend(); ++b) {
        if (b->first == prefix) return b->second;
      }
    }
    if (prefix.empty()) return {};
    throw XmlError(at,
                   "unbound namespace prefix '" + std::string(prefix) + "'");
  }

  std::string parse_attribute_value() {
    if (at_end() || (peek() != '"' && peek() != '\'')) {
      fail("expected quoted attribute value");
    }
    const char quote = peek();
    ++pos_;
    const std::size_t start = pos_;
    const auto end = doc_.find(quote, pos_);
    if (end == std::string_view::npos) fail("unterminated attribute value");
    const std::string_view raw = doc_.substr(start, end - start);
    if (const auto lt = raw.find('<'); lt != std::string_view::npos) {
      pos_ = start + lt;
      fail("'<' in attribute value");
    }
    pos_ = end + 1;
    return unescape(raw, start);
  }

  Element parse_element(std::size_t depth) {
    if (depth >= kMaxDepth) fail("element nesting too deep");
    Element el;
    el.offset = pos_;
    expect('<');
    el.name = std::string(parse_name());

    Scope scope;
    for (;;) {
      const std::size_t before = pos_;
      skip_space();
      if (at_end()) fail("unterminated start tag");
      if (peek() == '>' || peek() == '/') break;
      if (pos_ == before) fail("expected whitespace before attribute");
      const std::size_t attr_at = pos_;
      Attribute attr{std::string(parse_name()), {}};
      skip_space();
      expect('=');
      skip_space();
      attr.value = parse_attribute_value();
      for (const Attribute& other : el.attributes) {
        if (other.name == attr.name) {
          throw XmlError(attr_at, "duplicate attribute '" + attr.name + "'");
        }
      }
      if (attr.name == "xmlns") {
        scope.emplace_back("", attr.value);
      } else if (attr.name.starts_with("xmlns:")) {
        if (attr.value.empty()) {
          throw XmlError(attr_at, "empty namespace for prefix declaration");
        }
        scope.emplace_back(attr.name.substr(6), attr.value);
      }
      el.attributes.push_back(std::move(attr));
    }
    scopes_.push_back(std::move(scope));

    std::string_view prefix;
    std::string_view local;
    if (!split_qname(el.name, prefix, local)) {
      throw XmlError(el.offset, "malformed element name '" + el.name + "'");
    }
    el.local_name = std::string(local);
    el.ns = lookup(prefix, el.offset);
    for (const Attribute& attr : el.attributes) {
      if (!split_qname(attr.name, prefix, local)) {
        throw XmlError(el.offset,
                       "malformed attribute name '" + attr.name + "'");
      }
      if (!prefix.empty() && prefix != "xmlns") lookup(prefix, el.offset);
    }

    if (peek() == '/') {
      ++pos_;
      expect('>');
    } else {
      expect('>');
      parse_content(el, depth);
    }
    scopes_.pop_back();
    return el;
  }

  void parse_content(Element& el, std::size_t depth) {
    for (;;) {
      const auto lt = doc_.find('<', pos_);
      if (lt == std::string_view::npos) {
        pos_ = doc_.size();
        fail("missing end tag for '" + el.name + "'");
      }
      if (lt > pos_) {
        el.text += unescape(doc_.substr(pos_, lt - pos_), pos_);
        pos_ = lt;
      }
      if (starts_with("</")) {
        pos_ += 2;
        const std::size_t at = pos_;
        const std::string_view name = parse_name();
        if (name != el.name) {
          throw XmlError(at, "end tag '" + std::string(name) +
                                 "' does not match '" + el.name + "'");
        }
        skip_space();
        expect('>');
        return;
      }
      if (starts_with("<!--")) {
        parse_comment();
      } else if (starts_with("<![CDATA[")) {
        pos_ += 9;
        const auto end = doc_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        el.text.append(doc_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (starts_with("<?")) {
        parse_pi();
      } else if (starts_with("<!")) {
        fail("unsupported markup declaration");
      } else {
        el.children.push_back(parse_element(depth + 1));
      }
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
  std::vector<Scope> scopes_;
};

}  // namespace

const Element* Element::find_child(std::string_view ns_uri,
                                   std::string_view local) const {
  for (const Element& child : children) {
    if (child.ns == ns_uri && child.local_name == local) return &child;
  }
  return nullptr;
}

Element parse(std::string_view doc) { return Parser(doc).parse_document(); }

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + s.size() / 8);
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string unescape(std::string_view s, std::size_t base_offset) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto amp = s.find('&', i);
    if (amp == std::string_view::npos) {
      out.append(s.substr(i));
      break;
    }
    out.append(s.substr(i, amp - i));
    const auto semi = s.find(';', amp);
    if (semi == std::string_view::npos || semi - amp > 12) {
      throw XmlError(base_offset + amp, "unterminated entity reference");
    }
    const std::string_view name = s.substr(amp + 1, semi - amp - 1);
    if (name == "amp") {
      out.push_back('&');
    } else if (name == "lt") {
      out.push_back('<');
    } else if (name == "gt") {
      out.push_back('>');
    } else if (name == "quot") {
      out.push_back('"');
    } else if (name == "apos") {
      out.push_back('\'');
    } else if (name.size() >= 2 && name[0] == '#') {
      const bool hex = name[1] == 'x';
      const std::string_view digits = name.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      const auto [end, ec] = std::from_chars(
          digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (digits.empty() || ec != std::errc{} ||
          end != digits.data() + digits.size() || cp == 0 || cp > 0x10FFFF ||
          (cp >= 0xD800 && cp <= 0xDFFF)) {
        throw XmlError(base_offset + amp, "invalid character reference");
      }
      append_utf8(out, cp);
    } else {
      throw XmlError(base_offset + amp,
                     "unknown entity '" + std::string(name) + "'");
    }
    i = semi + 1;
  }
  return out;
}

}  // namespace farmbench::xml
