// Copyright 2026 The MBRB Authors
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

#include "mbrb/sigcrypt.h"

#include <sodium.h>

#include <algorithm>
#include <limits>

namespace mbrb {
namespace {

void put_be(Bytes& out, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

std::uint64_t get_be(std::span<const std::uint8_t> in, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | in[i];
  return v;
}

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

// BLAKE2b(key, domain | u64be owner), used to derive per-owner material.
Bytes derive(const KeySeed& seed, std::string_view domain, ProcessId owner,
             std::size_t out_len) {
  ensure_sodium();
  Bytes msg(domain.begin(), domain.end());
  put_be(msg, index_of(owner), 8);
  Bytes out(out_len);
  crypto_generichash(out.data(), out.size(), msg.data(), msg.size(),
                     seed.data(), seed.size());
  return out;
}

constexpr std::size_t kTestKeyBytes = 32;
constexpr std::size_t kTestTagBytes = 16;

}  // namespace

TripletEncoding encode_triplet(std::span<const std::uint8_t> m,
                               std::uint64_t sn, ProcessId sender) {
  if (m.size() > kMaxPayloadBytes) {
    throw EncodingError("app-message of " + std::to_string(m.size()) +
                        " octets exceeds the " +
                        std::to_string(kMaxPayloadBytes) + "-octet limit");
  }
  TripletEncoding enc;
  enc.bytes.assign(kTripletTag.begin(), kTripletTag.end());
  put_be(enc.bytes, m.size(), 4);
  const std::size_t at = enc.bytes.size();
  enc.bytes.resize(at + m.size());
  std::copy(m.begin(), m.end(), enc.bytes.begin() + static_cast<std::ptrdiff_t>(at));
  put_be(enc.bytes, sn, 8);
  put_be(enc.bytes, index_of(sender), 8);
  return enc;
}

std::optional<Triplet> decode_triplet(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kFixed = kTripletTag.size() + 4 + 8 + 8;
  if (bytes.size() < kFixed) return std::nullopt;
  if (!std::equal(kTripletTag.begin(), kTripletTag.end(), bytes.begin())) {
    return std::nullopt;
  }
  const std::uint64_t len = get_be(bytes.subspan(4), 4);
  if (len > kMaxPayloadBytes || bytes.size() != kFixed + len) return std::nullopt;
  Triplet x;
  x.m.assign(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(len));
  x.sn = get_be(bytes.subspan(8 + len), 8);
  const std::uint64_t sender = get_be(bytes.subspan(16 + len), 8);
  if (sender > std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  x.sender = pid(static_cast<std::uint32_t>(sender));
  return x;
}

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kTest:
      return "test";
    case SchemeKind::kEd25519:
      return "ed25519";
  }
  return "unknown";
}

SchemeKind scheme_from_string(std::string_view name) {
  if (name == "test") return SchemeKind::kTest;
  if (name == "ed25519") return SchemeKind::kEd25519;
  throw ConfigError("unknown signature scheme '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// TestScheme

KeyPair TestScheme::keygen(const KeySeed& seed, ProcessId owner) const {
  Bytes key = derive(seed, "mbrb-test-key", owner, kTestKeyBytes);
  return KeyPair{PublicKey{key}, SecretKey{key}, owner};
}

Signature TestScheme::sign(const KeyPair& keys,
                           const TripletEncoding& enc) const {
  Bytes tag(kTestTagBytes);
  crypto_generichash(tag.data(), tag.size(), enc.bytes.data(), enc.bytes.size(),
                     keys.secret_key.bytes.data(), keys.secret_key.bytes.size());
  return Signature{keys.owner, std::move(tag)};
}

bool TestScheme::verify(const PublicKey& key, const TripletEncoding& enc,
                        const Signature& sig) const {
  if (key.bytes.size() != kTestKeyBytes || sig.bytes.size() != kTestTagBytes) {
    return false;
  }
  std::array<std::uint8_t, kTestTagBytes> tag{};
  crypto_generichash(tag.data(), tag.size(), enc.bytes.data(), enc.bytes.size(),
                     key.bytes.data(), key.bytes.size());
  return sodium_memcmp(tag.data(), sig.bytes.data(), tag.size()) == 0;
}

// ---------------------------------------------------------------------------
// Ed25519Scheme

Ed25519Scheme::Ed25519Scheme() { ensure_sodium(); }

KeyPair Ed25519Scheme::keygen(const KeySeed& seed, ProcessId owner) const {
  Bytes signing_seed = derive(seed, "mbrb-ed25519-key", owner,
                              crypto_sign_SEEDBYTES);
  KeyPair kp;
  kp.owner = owner;
  kp.public_key.bytes.resize(crypto_sign_PUBLICKEYBYTES);
  kp.secret_key.bytes.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(kp.public_key.bytes.data(),
                           kp.secret_key.bytes.data(), signing_seed.data());
  sodium_memzero(signing_seed.data(), signing_seed.size());
  return kp;
}

Signature Ed25519Scheme::sign(const KeyPair& keys,
                              const TripletEncoding& enc) const {
  if (keys.secret_key.bytes.size() != crypto_sign_SECRETKEYBYTES) {
    throw PreconditionError("not an Ed25519 secret key");
  }
  Signature sig{keys.owner, Bytes(crypto_sign_BYTES)};
  crypto_sign_detached(sig.bytes.data(), nullptr, enc.bytes.data(),
                       enc.bytes.size(), keys.secret_key.bytes.data());
  return sig;
}

bool Ed25519Scheme::verify(const PublicKey& key, const TripletEncoding& enc,
                           const Signature& sig) const {
  if (key.bytes.size() != crypto_sign_PUBLICKEYBYTES ||
      sig.bytes.size() != crypto_sign_BYTES) {
    return false;
  }
  return crypto_sign_verify_detached(sig.bytes.data(), enc.bytes.data(),
                                     enc.bytes.size(), key.bytes.data()) == 0;
}

std::shared_ptr<const SignatureScheme> make_scheme(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kTest:
      return std::make_shared<TestScheme>();
    case SchemeKind::kEd25519:
      return std::make_shared<Ed25519Scheme>();
  }
  throw ConfigError("unknown signature scheme");
}

KeySeed key_seed_from_master(std::uint64_t master_seed) {
  ensure_sodium();
  Bytes msg = to_bytes("mbrb-master-seed");
  put_be(msg, master_seed, 8);
  KeySeed out{};
  crypto_generichash(out.data(), out.size(), msg.data(), msg.size(), nullptr, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Verifier / KeyRing

Verifier::Verifier(std::shared_ptr<const SignatureScheme> scheme,
                   std::map<ProcessId, PublicKey> keys)
    : scheme_(std::move(scheme)), keys_(std::move(keys)) {}

const PublicKey* Verifier::key_of(ProcessId p) const {
  auto it = keys_.find(p);
  return it == keys_.end() ? nullptr : &it->second;
}

bool Verifier::verify(const TripletEncoding& enc, const Signature& sig) const {
  const PublicKey* key = key_of(sig.signer);
  return key != nullptr && scheme_->verify(*key, enc, sig);
}

KeyRing KeyRing::generate(std::shared_ptr<const SignatureScheme> scheme,
                          const KeySeed& seed, std::uint32_t n) {
  KeyRing ring;
  ring.scheme = std::move(scheme);
  std::map<ProcessId, PublicKey> publics;
  for (std::uint32_t i = 0; i < n; ++i) {
    ring.pairs.push_back(ring.scheme->keygen(seed, pid(i)));
    publics.emplace(pid(i), ring.pairs.back().public_key);
  }
  ring.verifier = std::make_shared<Verifier>(ring.scheme, std::move(publics));
  return ring;
}

}  // namespace mbrb
