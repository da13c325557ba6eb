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

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "mbrb/types.h"

namespace mbrb {

/// The object every signature endorses: app-message, sequence number and
/// original sender.
struct Triplet {
  Bytes m;
  std::uint64_t sn = 0;
  ProcessId sender{};

  auto operator<=>(const Triplet&) const = default;
};

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical signed bytes of a triplet:
///
///   "MBRB" | u32be len(m) | m | u64be sn | u64be sender
///
/// The length prefix makes the layout injective. Payloads are capped at
/// kMaxPayloadBytes.
struct TripletEncoding {
  Bytes bytes;

  auto operator<=>(const TripletEncoding&) const = default;
};

inline constexpr std::array<std::uint8_t, 4> kTripletTag = {'M', 'B', 'R', 'B'};
inline constexpr std::size_t kMaxPayloadBytes = std::size_t{1} << 24;

/// Throws EncodingError when m exceeds kMaxPayloadBytes.
TripletEncoding encode_triplet(std::span<const std::uint8_t> m,
                               std::uint64_t sn, ProcessId sender);
inline TripletEncoding encode_triplet(const Triplet& x) {
  return encode_triplet(x.m, x.sn, x.sender);
}

/// Inverse of encode_triplet; nullopt on anything that is not a canonical
/// encoding (wrong tag, truncated, trailing bytes, sender out of range).
std::optional<Triplet> decode_triplet(std::span<const std::uint8_t> bytes);

using KeySeed = std::array<std::uint8_t, 32>;

struct PublicKey {
  Bytes bytes;
  auto operator<=>(const PublicKey&) const = default;
};

struct SecretKey {
  Bytes bytes;
  auto operator<=>(const SecretKey&) const = default;
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
  ProcessId owner{};
};

struct Signature {
  ProcessId signer{};
  Bytes bytes;

  auto operator<=>(const Signature&) const = default;
};

enum class SchemeKind { kTest, kEd25519 };

std::string to_string(SchemeKind kind);
/// Accepts "test" and "ed25519".
SchemeKind scheme_from_string(std::string_view name);

/// Deterministic signature scheme. Signing is a pure function of
/// (key, encoding), so a process that re-signs a triplet reproduces the same
/// signature.
class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;

  virtual SchemeKind kind() const = 0;
  virtual KeyPair keygen(const KeySeed& seed, ProcessId owner) const = 0;
  virtual Signature sign(const KeyPair& keys,
                         const TripletEncoding& enc) const = 0;
  /// Malformed keys or signatures verify as false.
  virtual bool verify(const PublicKey& key, const TripletEncoding& enc,
                      const Signature& sig) const = 0;
};

/// Keyed BLAKE2b tag. Verification needs the key material, so the public key
/// carries it; unforgeability holds only because the simulator never hands
/// Byzantine strategies anything but their own KeyPair and a Verifier.
class TestScheme final : public SignatureScheme {
 public:
  SchemeKind kind() const override { return SchemeKind::kTest; }
  KeyPair keygen(const KeySeed& seed, ProcessId owner) const override;
  Signature sign(const KeyPair& keys,
                 const TripletEncoding& enc) const override;
  bool verify(const PublicKey& key, const TripletEncoding& enc,
              const Signature& sig) const override;
};

/// Ed25519 (libsodium). Per-owner signing seeds are derived from the run seed.
class Ed25519Scheme final : public SignatureScheme {
 public:
  Ed25519Scheme();

  SchemeKind kind() const override { return SchemeKind::kEd25519; }
  KeyPair keygen(const KeySeed& seed, ProcessId owner) const override;
  Signature sign(const KeyPair& keys,
                 const TripletEncoding& enc) const override;
  bool verify(const PublicKey& key, const TripletEncoding& enc,
              const Signature& sig) const override;
};

std::shared_ptr<const SignatureScheme> make_scheme(SchemeKind kind);

/// Derives the 32-octet key seed used when a scenario does not supply one.
KeySeed key_seed_from_master(std::uint64_t master_seed);

/// Public keys of every process plus the scheme to check them with. This is
/// all a process (correct or Byzantine) learns about its peers.
class Verifier {
 public:
  Verifier(std::shared_ptr<const SignatureScheme> scheme,
           std::map<ProcessId, PublicKey> keys);

  /// False for unknown signers.
  bool verify(const TripletEncoding& enc, const Signature& sig) const;
  const SignatureScheme& scheme() const { return *scheme_; }
  std::size_t size() const { return keys_.size(); }
  const PublicKey* key_of(ProcessId p) const;

 private:
  std::shared_ptr<const SignatureScheme> scheme_;
  std::map<ProcessId, PublicKey> keys_;
};

/// Key material for a whole run, generated deterministically from a seed.
struct KeyRing {
  std::shared_ptr<const SignatureScheme> scheme;
  std::vector<KeyPair> pairs;  // indexed by process id
  std::shared_ptr<const Verifier> verifier;

  static KeyRing generate(std::shared_ptr<const SignatureScheme> scheme,
                          const KeySeed& seed, std::uint32_t n);
};

}  // namespace mbrb
