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

#include "farmbench/codec.hpp"

#include <array>

#include "farmbench/xml.hpp"

namespace farmbench {

namespace {

constexpr std::string_view kProlog =
    R"(<?xml version="1.0" encoding="UTF-8"?>)"
    R"(<soap:Envelope xmlns:soap="http://schemas.xmlsoap.org/soap/envelope/">)"
    R"(<soap:Body>)";
constexpr std::string_view kEpilog = "</soap:Body></soap:Envelope>";
constexpr std::string_view kStringTypeAttrs =
    R"( xsi:type="xsd:string")"
    R"( xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance")"
    R"( xmlns:xsd="http://www.w3.org/2001/XMLSchema")";
constexpr std::string_view kResponseSuffix = "Response";

[[noreturn]] void client_fault(std::string code, std::string detail) {
  throw EnvelopeFault(RpcFault{std::move(code), std::move(detail)});
}

void append_string_element(std::string& out, std::string_view tag,
                           std::string_view value) {
  out += '<';
  out += tag;
  out += kStringTypeAttrs;
  out += '>';
  out += xml::escape(value);
  out += "</";
  out += tag;
  out += '>';
}

// Parses the document and returns the first element inside soap:Body.
xml::Element body_payload(std::string_view bytes) {
  xml::Element root;
  try {
    root = xml::parse(bytes);
  } catch (const xml::XmlError& e) {
    client_fault("Client.BadXML", e.what());
  }
  if (root.ns != kSoapEnvelopeNs || root.local_name != "Envelope") {
    client_fault("Client", "root element is not a soap:Envelope");
  }
  const xml::Element* body = root.find_child(kSoapEnvelopeNs, "Body");
  if (body == nullptr) client_fault("Client", "soap:Envelope has no Body");
  if (body->children.empty()) client_fault("Client", "soap:Body is empty");
  return body->children.front();
}

const std::string& leaf_text(const xml::Element& el) {
  if (!el.children.empty()) {
    client_fault("Client", "element '" + el.name + "' has element content");
  }
  return el.text;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kPush:
      return "push";
    case Method::kPop:
      return "pop";
    case Method::kEvaluate:
      return "evaluate";
  }
  return "";
}

std::optional<Method> method_from_name(std::string_view name) {
  for (const Method m : {Method::kPush, Method::kPop, Method::kEvaluate}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

std::size_t method_arity(Method m) { return m == Method::kPop ? 0 : 1; }

RpcRequest RpcRequest::push(std::string payload) {
  return {Method::kPush, {std::move(payload)}};
}

RpcRequest RpcRequest::pop() { return {Method::kPop, {}}; }

RpcRequest RpcRequest::evaluate(std::string genome_bits) {
  return {Method::kEvaluate, {std::move(genome_bits)}};
}

void RpcRequest::validate() const {
  if (params.size() != method_arity(method)) {
    throw std::invalid_argument(std::string(method_name(method)) + " takes " +
                                std::to_string(method_arity(method)) +
                                " parameter(s), got " +
                                std::to_string(params.size()));
  }
}

RpcResponse RpcResponse::ok(std::string result) {
  RpcResponse r;
  r.body_ = std::move(result);
  return r;
}

RpcResponse RpcResponse::fault(std::string code, std::string detail) {
  RpcResponse r;
  r.body_ = RpcFault{std::move(code), std::move(detail)};
  return r;
}

std::string xml_escape(std::string_view s) { return xml::escape(s); }

std::string xml_unescape(std::string_view s) { return xml::unescape(s); }

std::string encode_envelope_request(const RpcRequest& r) {
  r.validate();
  const std::string_view name = method_name(r.method);
  std::string out;
  out.reserve(kProlog.size() + kEpilog.size() + 64 +
              (r.params.empty() ? 0 : r.params[0].size() + 200));
  out += kProlog;
  out += "<ns:";
  out += name;
  out += R"( xmlns:ns="urn:Demo">)";
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    append_string_element(out, "c" + std::to_string(i), r.params[i]);
  }
  out += "</ns:";
  out += name;
  out += '>';
  out += kEpilog;
  return out;
}

RpcRequest parse_envelope_request(std::string_view bytes) {
  const xml::Element call = body_payload(bytes);
  const auto method = method_from_name(call.local_name);
  if (!method) {
    client_fault("Client.UnknownMethod",
                 "no method '" + call.local_name + "' on this service");
  }
  RpcRequest req{*method, {}};
  for (const xml::Element& param : call.children) {
    req.params.push_back(leaf_text(param));
  }
  if (req.params.size() != method_arity(*method)) {
    client_fault("Client", call.local_name + " takes " +
                               std::to_string(method_arity(*method)) +
                               " parameter(s), got " +
                               std::to_string(req.params.size()));
  }
  return req;
}

std::string encode_envelope_response(Method method, const RpcResponse& r) {
  std::string out(kProlog);
  if (r.is_fault()) {
    out += "<soap:Fault><faultcode>soap:";
    out += xml::escape(r.fault().code);
    out += "</faultcode><faultstring>";
    out += xml::escape(r.fault().detail);
    out += "</faultstring></soap:Fault>";
  } else {
    const std::string_view name = method_name(method);
    out += "<ns:";
    out += name;
    out += kResponseSuffix;
    out += R"( xmlns:ns="urn:Demo">)";
    append_string_element(out, "result", r.result());
    out += "</ns:";
    out += name;
    out += kResponseSuffix;
    out += '>';
  }
  out += kEpilog;
  return out;
}

RpcResponse parse_envelope_response(std::string_view bytes,
                                    std::optional<Method> expected) {
  const xml::Element payload = body_payload(bytes);
  if (payload.ns == kSoapEnvelopeNs && payload.local_name == "Fault") {
    const xml::Element* code = payload.find_child("", "faultcode");
    const xml::Element* detail = payload.find_child("", "faultstring");
    if (code == nullptr || detail == nullptr) {
      client_fault("Client", "soap:Fault lacks faultcode or faultstring");
    }
    // faultcode is a QName; drop the envelope prefix.
    std::string code_text = leaf_text(*code);
    if (const auto colon = code_text.find(':'); colon != std::string::npos) {
      code_text.erase(0, colon + 1);
    }
    return RpcResponse::fault(std::move(code_text), leaf_text(*detail));
  }

  const std::string& name = payload.local_name;
  if (!name.ends_with(kResponseSuffix)) {
    client_fault("Client", "'" + name + "' is not a response element");
  }
  const auto method = method_from_name(
      std::string_view(name).substr(0, name.size() - kResponseSuffix.size()));
  if (!method) {
    client_fault("Client.UnknownMethod",
                 "response for unknown method '" + name + "'");
  }
  if (expected && *expected != *method) {
    client_fault("Client", "expected " + std::string(method_name(*expected)) +
                               "Response, got " + name);
  }
  if (payload.children.size() != 1) {
    client_fault("Client", name + " must hold exactly one result element");
  }
  return RpcResponse::ok(leaf_text(payload.children.front()));
}

std::string percent_encode(std::string_view s) {
  static constexpr std::array<char, 16> kHex = {'0', '1', '2', '3', '4', '5',
                                                '6', '7', '8', '9', 'A', 'B',
                                                'C', 'D', 'E', 'F'};
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' ||
        c == '~') {
      out.push_back(c);
    } else {
      out.push_back('%');
      out.push_back(kHex[u >> 4]);
      out.push_back(kHex[u & 0xF]);
    }
  }
  return out;
}

std::string percent_decode(std::string_view s) {
  const auto hex_value = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 2 >= s.size()) {
      throw PercentDecodeError(i, "truncated percent escape");
    }
    const int hi = hex_value(s[i + 1]);
    const int lo = hex_value(s[i + 2]);
    if (hi < 0 || lo < 0) throw PercentDecodeError(i, "bad percent escape");
    out.push_back(static_cast<char>((hi << 4) | lo));
    i += 2;
  }
  return out;
}

std::string rest_encode(const RpcRequest& r) {
  r.validate();
  switch (r.method) {
    case Method::kPush:
      return "/push/" + percent_encode(r.params[0]);
    case Method::kPop:
      return "/pop/";
    case Method::kEvaluate:
      return "/evaluate/" + percent_encode(r.params[0]);
  }
  return {};
}

RpcRequest rest_decode(std::string_view path) {
  constexpr std::string_view kPush = "/push/";
  constexpr std::string_view kEvaluate = "/evaluate/";
  if (path == "/pop/") return RpcRequest::pop();
  const auto decode_tail = [path](std::size_t prefix) {
    try {
      return percent_decode(path.substr(prefix));
    } catch (const PercentDecodeError& e) {
      throw PercentDecodeError(prefix + e.offset(), "bad percent escape");
    }
  };
  if (path.starts_with(kPush)) {
    return RpcRequest::push(decode_tail(kPush.size()));
  }
  if (path.starts_with(kEvaluate)) {
    return RpcRequest::evaluate(decode_tail(kEvaluate.size()));
  }
  throw RouteError("no route for '" + std::string(path) + "'");
}

}  // namespace farmbench
