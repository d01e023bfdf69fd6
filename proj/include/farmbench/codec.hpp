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

// Wire formats for the Demo service (push, pop) and the fitness evaluator
// (evaluate).
//
// Envelope protocol: a SOAP 1.1 shaped XML document POSTed to "/". Request
// parameters are positional <c0>, <c1>, ... elements inside the method
// element; responses carry <result> inside <METHODResponse>, errors a
// soap:Fault with <faultcode> and <faultstring>.
//
// Rest protocol: GET /push/{percent-encoded}, GET /pop/, GET /evaluate/{bits}
// with the result as a plain-text body.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace farmbench {

inline constexpr std::string_view kSoapEnvelopeNs =
    "http://schemas.xmlsoap.org/soap/envelope/";
inline constexpr std::string_view kDemoNs = "urn:Demo";

enum class Method { kPush, kPop, kEvaluate };

std::string_view method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);
std::size_t method_arity(Method m);

struct RpcRequest {
  Method method = Method::kPop;
  std::vector<std::string> params;

  static RpcRequest push(std::string payload);
  static RpcRequest pop();
  static RpcRequest evaluate(std::string genome_bits);

  /// Throws std::invalid_argument if params.size() != method_arity(method).
  void validate() const;

  friend bool operator==(const RpcRequest&, const RpcRequest&) = default;
};

struct RpcFault {
  std::string code;  // e.g. "Client", "Client.BadXML", "Server"
  std::string detail;

  friend bool operator==(const RpcFault&, const RpcFault&) = default;
};

class RpcResponse {
 public:
  static RpcResponse ok(std::string result);
  static RpcResponse fault(std::string code, std::string detail);

  bool is_fault() const { return std::holds_alternative<RpcFault>(body_); }
  /// Precondition: !is_fault().
  const std::string& result() const { return std::get<std::string>(body_); }
  /// Precondition: is_fault().
  const RpcFault& fault() const { return std::get<RpcFault>(body_); }

  friend bool operator==(const RpcResponse&, const RpcResponse&) = default;

 private:
  std::variant<std::string, RpcFault> body_;
};

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structured fault raised while reading an envelope.
class EnvelopeFault : public CodecError {
 public:
  explicit EnvelopeFault(RpcFault fault)
      : CodecError(fault.code + ": " + fault.detail),
        fault_(std::move(fault)) {}

  const RpcFault& fault() const { return fault_; }

 private:
  RpcFault fault_;
};

/// Path does not name a rest route.
class RouteError : public CodecError {
 public:
  using CodecError::CodecError;
};

/// Malformed percent escape; offset is into the encoded input.
class PercentDecodeError : public CodecError {
 public:
  PercentDecodeError(std::size_t offset, const std::string& what)
      : CodecError(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

std::string xml_escape(std::string_view s);
/// Throws xml::XmlError (with byte offset) on a malformed entity.
std::string xml_unescape(std::string_view s);

std::string encode_envelope_request(const RpcRequest& r);

/// Throws EnvelopeFault: "Client.BadXML" for malformed XML, "Client" for a
/// missing Envelope/Body or a wrong parameter count,
/// "Client.UnknownMethod" for an unknown method.
RpcRequest parse_envelope_request(std::string_view bytes);

/// A fault response ignores `method` and emits the soap:Fault form.
std::string encode_envelope_response(Method method, const RpcResponse& r);

/// A soap:Fault body yields a fault response rather than an exception.
/// Throws EnvelopeFault for malformed documents, or when `expected` is set
/// and the response element names a different method.
RpcResponse parse_envelope_response(std::string_view bytes,
                                    std::optional<Method> expected = {});

/// Encodes everything outside [A-Za-z0-9-_.~] as %XX.
std::string percent_encode(std::string_view s);
std::string percent_decode(std::string_view s);

std::string rest_encode(const RpcRequest& r);
/// Throws RouteError for an unknown route and PercentDecodeError for a
/// malformed escape.
RpcRequest rest_decode(std::string_view path);

}  // namespace farmbench
