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

#include <gtest/gtest.h>

#include <set>

#include "mbrb/rng.h"

namespace mbrb {
namespace {

// Independent byte-level layout of an encoding.
Bytes expected_encoding(const Bytes& m, std::uint64_t sn, std::uint64_t j) {
  Bytes out = {'M', 'B', 'R', 'B'};
  const auto len = static_cast<std::uint32_t>(m.size());
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(len >> s));
  out.insert(out.end(), m.begin(), m.end());
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(sn >> s));
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(j >> s));
  return out;
}

TEST(EncodeTriplet, EmptyTripletIsTagZeroLengthAndZeros) {
  const auto enc = encode_triplet(Bytes{}, 0, pid(0));
  Bytes want = {'M', 'B', 'R', 'B', 0, 0, 0, 0};
  want.resize(want.size() + 16, 0);
  EXPECT_EQ(enc.bytes, want);
}

TEST(EncodeTriplet, MatchesByteLayout) {
  const Bytes m = to_bytes("hello");
  EXPECT_EQ(encode_triplet(m, 0x0102030405060708ULL, pid(0xabcdef)).bytes,
            expected_encoding(m, 0x0102030405060708ULL, 0xabcdef));
}

TEST(EncodeTriplet, SwappedFieldsDiffer) {
  const Bytes a = to_bytes("a");
  EXPECT_NE(encode_triplet(a, 1, pid(2)), encode_triplet(a, 2, pid(1)));
}

TEST(EncodeTriplet, LengthPrefixSeparatesPayloadFromSn) {
  // Without a length prefix these two would share a suffix boundary.
  Bytes m1 = to_bytes("ab");
  Bytes m2 = to_bytes("a");
  EXPECT_NE(encode_triplet(m1, 0, pid(0)), encode_triplet(m2, 0x62ULL << 56, pid(0)));
}

TEST(EncodeTriplet, Deterministic) {
  const Bytes m = to_bytes("same");
  EXPECT_EQ(encode_triplet(m, 9, pid(3)), encode_triplet(m, 9, pid(3)));
}

TEST(EncodeTriplet, OversizePayloadThrows) {
  Bytes big(kMaxPayloadBytes + 1, 0x5a);
  EXPECT_THROW(encode_triplet(big, 1, pid(0)), EncodingError);
}

TEST(DecodeTriplet, RoundTripsSeededRandomTriplets) {
  Rng rng(20260101);
  for (int i = 0; i < 1000; ++i) {
    Triplet x;
    x.m.resize(rng.uniform_below(64));
    for (auto& b : x.m) b = static_cast<std::uint8_t>(rng.next());
    x.sn = rng.next();
    x.sender = pid(static_cast<std::uint32_t>(rng.next()));
    const auto enc = encode_triplet(x);
    EXPECT_EQ(enc.bytes, expected_encoding(x.m, x.sn, index_of(x.sender)));
    const auto back = decode_triplet(enc.bytes);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, x);
  }
}

TEST(DecodeTriplet, RejectsNonCanonicalInput) {
  Bytes good = encode_triplet(to_bytes("x"), 4, pid(1)).bytes;
  EXPECT_TRUE(decode_triplet(good).has_value());

  Bytes bad_tag = good;
  bad_tag[0] = 'X';
  EXPECT_FALSE(decode_triplet(bad_tag).has_value());

  Bytes truncated(good.begin(), good.end() - 1);
  EXPECT_FALSE(decode_triplet(truncated).has_value());

  Bytes trailing = good;
  trailing.push_back(0);
  EXPECT_FALSE(decode_triplet(trailing).has_value());

  Bytes wide_sender = expected_encoding(to_bytes("x"), 4, std::uint64_t{1} << 32);
  EXPECT_FALSE(decode_triplet(wide_sender).has_value());
}

// ---------------------------------------------------------------------------

KeySeed seed_of(std::uint8_t fill) {
  KeySeed s;
  s.fill(fill);
  return s;
}

class SchemeTest : public ::testing::TestWithParam<SchemeKind> {
 protected:
  std::shared_ptr<const SignatureScheme> scheme = make_scheme(GetParam());
};

TEST_P(SchemeTest, KeygenIsDeterministic) {
  const auto a = scheme->keygen(seed_of(7), pid(3));
  const auto b = scheme->keygen(seed_of(7), pid(3));
  EXPECT_EQ(a.public_key, b.public_key);
  EXPECT_EQ(a.secret_key, b.secret_key);
  EXPECT_EQ(a.owner, pid(3));
}

TEST_P(SchemeTest, OwnersGetDifferentKeys) {
  const auto a = scheme->keygen(seed_of(7), pid(0));
  const auto b = scheme->keygen(seed_of(7), pid(1));
  EXPECT_NE(a.public_key, b.public_key);
  EXPECT_NE(a.secret_key, b.secret_key);
}

TEST_P(SchemeTest, HundredKeysAreDistinct) {
  std::set<PublicKey> seen;
  for (std::uint32_t i = 0; i < 100; ++i) {
    seen.insert(scheme->keygen(key_seed_from_master(i % 10), pid(i / 10)).public_key);
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST_P(SchemeTest, SignThenVerify) {
  const auto keys = scheme->keygen(seed_of(1), pid(2));
  const auto enc = encode_triplet(to_bytes("m"), 1, pid(0));
  const Signature sig = scheme->sign(keys, enc);
  EXPECT_EQ(sig.signer, pid(2));
  EXPECT_TRUE(scheme->verify(keys.public_key, enc, sig));
  EXPECT_EQ(scheme->sign(keys, enc), sig);
}

TEST_P(SchemeTest, OtherProcessKeyRejects) {
  const auto keys = scheme->keygen(seed_of(1), pid(2));
  const auto other = scheme->keygen(seed_of(1), pid(3));
  const auto enc = encode_triplet(to_bytes("m"), 1, pid(0));
  EXPECT_FALSE(scheme->verify(other.public_key, enc, scheme->sign(keys, enc)));
}

TEST_P(SchemeTest, BitFlipsReject) {
  Rng rng(99);
  const auto keys = scheme->keygen(seed_of(4), pid(1));
  for (int i = 0; i < 100; ++i) {
    Bytes m(1 + rng.uniform_below(32));
    for (auto& b : m) b = static_cast<std::uint8_t>(rng.next());
    TripletEncoding enc = encode_triplet(m, rng.next(), pid(static_cast<std::uint32_t>(rng.uniform_below(16))));
    const Signature sig = scheme->sign(keys, enc);
    const std::size_t bit = rng.uniform_below(enc.bytes.size() * 8);
    enc.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_FALSE(scheme->verify(keys.public_key, enc, sig)) << "case " << i;
  }
}

TEST_P(SchemeTest, MalformedSignatureRejects) {
  const auto keys = scheme->keygen(seed_of(1), pid(0));
  const auto enc = encode_triplet(to_bytes("m"), 1, pid(0));
  Signature sig = scheme->sign(keys, enc);
  sig.bytes.pop_back();
  EXPECT_FALSE(scheme->verify(keys.public_key, enc, sig));
  EXPECT_FALSE(scheme->verify(PublicKey{}, enc, scheme->sign(keys, enc)));
}

TEST_P(SchemeTest, VerifierKnowsOnlyItsRing) {
  const KeyRing ring = KeyRing::generate(scheme, seed_of(5), 4);
  ASSERT_EQ(ring.pairs.size(), 4u);
  EXPECT_EQ(ring.verifier->size(), 4u);
  const auto enc = encode_triplet(to_bytes("m"), 1, pid(0));
  for (const KeyPair& kp : ring.pairs) {
    EXPECT_TRUE(ring.verifier->verify(enc, scheme->sign(kp, enc)));
  }
  const KeyPair stranger = scheme->keygen(seed_of(5), pid(9));
  EXPECT_FALSE(ring.verifier->verify(enc, scheme->sign(stranger, enc)));

  // A signature attributed to someone else does not verify.
  Signature forged = scheme->sign(ring.pairs[1], enc);
  forged.signer = pid(2);
  EXPECT_FALSE(ring.verifier->verify(enc, forged));
}

INSTANTIATE_TEST_SUITE_P(Schemes, SchemeTest,
                         ::testing::Values(SchemeKind::kTest, SchemeKind::kEd25519),
                         [](const auto& info) { return to_string(info.param); });

TEST(SchemeNames, RoundTrip) {
  EXPECT_EQ(scheme_from_string("test"), SchemeKind::kTest);
  EXPECT_EQ(scheme_from_string("ed25519"), SchemeKind::kEd25519);
  EXPECT_THROW(scheme_from_string("rsa"), ConfigError);
}

TEST(Hex, RoundTripAndRejects) {
  const Bytes b = {0x00, 0xff, 0x10};
  EXPECT_EQ(to_hex(b), "00ff10");
  EXPECT_EQ(from_hex("00FF10"), b);
  EXPECT_THROW(from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}

}  // namespace
}  // namespace mbrb
