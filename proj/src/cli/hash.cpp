// Copyright 2026 The ser-forge Authors.
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

#include <openssl/evp.h>

#include <memory>
#include <string>

#include "ser/cli.hpp"
#include "ser/errors.hpp"

namespace ser::cli {

namespace {

struct DigestContext {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};
};

std::string digest(std::span<const std::uint8_t> header, std::span<const std::uint8_t> body) {
  DigestContext d;
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!d.ctx || EVP_DigestInit_ex(d.ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(d.ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(d.ctx.get(), body.data(), body.size()) != 1 ||
      EVP_DigestFinal_ex(d.ctx.get(), out, &len) != 1) {
    throw InternalError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[out[i] >> 4];
    hex += kHex[out[i] & 15];
  }
  return hex;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) { return digest({}, bytes); }

std::string blob_hash(std::span<const std::uint8_t> bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  return digest({reinterpret_cast<const std::uint8_t*>(header.data()), header.size()}, bytes);
}

}  // namespace ser::cli
