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

#include "mbrb/core.h"

#include <algorithm>
#include <string>

namespace mbrb {
namespace {

void put_be(Bytes& out, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

Bundle make_bundle(const Bytes& m, const SlotKey& key,
                   const std::map<ProcessId, Signature>& saved) {
  Bundle b{m, key.sn, key.sender, {}};
  b.sigs.reserve(saved.size());
  for (const auto& [signer, sig] : saved) b.sigs.push_back(sig);
  return b;
}

}  // namespace

void Config::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (n < 1) fail("n must be at least 1");
  if (t < 0 || t >= n) fail("t must satisfy 0 <= t < n");
  if (d < 0) fail("d must be non-negative");
  if (c < n - t || c > n) fail("c must satisfy n - t <= c <= n");
}

const Signature* Bundle::signature_of(ProcessId signer) const {
  auto it = std::find_if(sigs.begin(), sigs.end(),
                         [&](const Signature& s) { return s.signer == signer; });
  return it == sigs.end() ? nullptr : &*it;
}

Bytes serialize_bundle(const Bundle& b) {
  Bytes out = encode_triplet(b.m, b.sn, b.sender).bytes;
  std::vector<const Signature*> sorted;
  sorted.reserve(b.sigs.size());
  for (const auto& s : b.sigs) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Signature* x, const Signature* y) {
                     return x->signer < y->signer;
                   });
  put_be(out, sorted.size(), 4);
  for (const Signature* s : sorted) {
    put_be(out, index_of(s->signer), 8);
    put_be(out, s->bytes.size(), 4);
    out.insert(out.end(), s->bytes.begin(), s->bytes.end());
  }
  return out;
}

ProcessState::ProcessState(ProcessId id, Config config, KeyPair keys,
                           std::shared_ptr<const Verifier> peers)
    : id(id), config(config), keys(std::move(keys)), peers(std::move(peers)) {
  if (this->keys.owner != id) {
    throw PreconditionError("key pair does not belong to this process");
  }
}

const SlotState* ProcessState::slot(const SlotKey& key) const {
  auto it = store.find(key);
  return it == store.end() ? nullptr : &it->second;
}

bool ProcessState::same_as(const ProcessState& other) const {
  return id == other.id && config.n == other.config.n &&
         config.t == other.config.t &&
         keys.public_key == other.keys.public_key && store == other.store;
}

Outputs mbrb_broadcast(ProcessState& state, const Bytes& m, std::uint64_t sn) {
  const SlotKey key{state.id, sn};
  if (const SlotState* s = state.slot(key); s && s->signed_by_me) {
    throw PreconditionError("sequence number " + std::to_string(sn) +
                            " already used by process " +
                            std::to_string(index_of(state.id)));
  }
  const TripletEncoding enc = encode_triplet(m, sn, state.id);
  SlotState& slot = state.store[key];
  auto& saved = slot.sigs_by_message[m];
  saved.insert_or_assign(state.id, state.peers->scheme().sign(state.keys, enc));
  slot.signed_by_me = m;

  Outputs out;
  out.outbound.push_back(make_bundle(m, key, saved));
  return out;
}

Outputs handle_bundle(ProcessState& state, const Bundle& b) {
  Outputs out;
  const SlotKey key = b.slot();
  if (const SlotState* s = state.slot(key); s && s->delivered) return out;

  if (b.m.size() > kMaxPayloadBytes) return out;
  const TripletEncoding enc = encode_triplet(b.m, b.sn, b.sender);

  // The sender's own valid signature gates everything else.
  const Signature* sender_sig = nullptr;
  for (const auto& sig : b.sigs) {
    if (sig.signer == b.sender && state.peers->verify(enc, sig)) {
      sender_sig = &sig;
      break;
    }
  }
  if (sender_sig == nullptr) return out;

  SlotState& slot = state.store[key];
  auto& saved = slot.sigs_by_message[b.m];
  saved.try_emplace(b.sender, *sender_sig);
  for (const auto& sig : b.sigs) {
    if (saved.contains(sig.signer)) continue;
    if (state.peers->verify(enc, sig)) saved.emplace(sig.signer, sig);
  }

  if (!slot.signed_by_me) {
    saved.insert_or_assign(state.id,
                           state.peers->scheme().sign(state.keys, enc));
    slot.signed_by_me = b.m;
    out.outbound.push_back(make_bundle(b.m, key, saved));
  }

  const auto quorum = static_cast<std::size_t>(
      quorum_threshold(state.config.n, state.config.t));
  if (saved.size() >= quorum) {
    Bundle proof = make_bundle(b.m, key, saved);
    if (!(state.config.dedup_emit && !out.outbound.empty() &&
          out.outbound.back() == proof)) {
      out.outbound.push_back(std::move(proof));
    }
    slot.delivered = b.m;
    out.delivered.push_back(Delivery{b.m, b.sn, b.sender, state.id});
  }
  return out;
}

int saved_count(const ProcessState& state, const Bytes& m, std::uint64_t sn,
                ProcessId sender) {
  const SlotState* slot = state.slot(SlotKey{sender, sn});
  if (slot == nullptr) return 0;
  auto it = slot->sigs_by_message.find(m);
  return it == slot->sigs_by_message.end() ? 0
                                           : static_cast<int>(it->second.size());
}

}  // namespace mbrb
