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

#pragma once

// Small namespace-aware XML reader producing an element tree. Supports the
// XML declaration, processing instructions, comments, CDATA, the five
// predefined entities and numeric character references. DOCTYPE is
// rejected. Line endings are not normalized, so character data round-trips
// byte for byte through xml_escape.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace farmbench::xml {

class XmlError : public std::runtime_error {
 public:
  XmlError(std::size_t offset, const std::string& what)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct Attribute {
  std::string name;  // qualified, as written
  std::string value;
};

struct Element {
  std::string name;        // qualified, as written
  std::string local_name;  // part after the prefix
  std::string ns;          // resolved namespace URI, empty if none
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::string text;  // all character data directly inside this element
  std::size_t offset = 0;

  /// First child element with the given namespace and local name.
  const Element* find_child(std::string_view ns_uri,
                            std::string_view local) const;
};

/// Parses a complete document and returns its root element.
Element parse(std::string_view doc);

/// Escapes &, <, >, " and ' as entities.
std::string escape(std::string_view s);

/// Resolves the five predefined entities and numeric references.
/// `base_offset` is added to offsets reported in XmlError.
std::string unescape(std::string_view s, std::size_t base_offset = 0);

}  // namespace farmbench::xml
