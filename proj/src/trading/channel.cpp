#include "datamarket/trading/channel.hpp"

#include <algorithm>

namespace datamarket::trading {

void SessionKeyDirectory::issue(const crypto::PublicKey& provider, const crypto::PublicKey& consumer,
                                const crypto::SessionKey& key) {
    owners_[key] = {provider, consumer};
}

bool SessionKeyDirectory::issued_to(const crypto::PublicKey& a, const crypto::PublicKey& b,
                                    const crypto::SessionKey& key) const {
    auto it = owners_.find(key);
    if (it == owners_.end()) return false;
    const auto& [p, c] = it->second;
    return (p == a && c == b) || (p == b && c == a);
}

bool SessionKeyDirectory::issued_at_all(const crypto::SessionKey& key) const { return owners_.count(key) > 0; }

const Frame& OffchainChannel::send(std::span<const std::uint8_t> plaintext) {
    if (!open_) throw ChannelError("channel_closed");
    std::uint64_t seq = next_seq_++;
    transcript_.push_back({seq, crypto::seal(key_, seq, plaintext)});
    return transcript_.back();
}

std::optional<Bytes> OffchainChannel::receive(const Frame& frame, const crypto::SessionKey& key) {
    return crypto::open(key, frame.seq, frame.ciphertext);
}

Bytes handshake_payload(const crypto::PublicKey& a, const crypto::PublicKey& b, const crypto::SessionKey& key) {
    crypto::Encoder enc;
    enc.str("channel-open").bytes(a.bytes).bytes(b.bytes).bytes(crypto::hash(std::span<const std::uint8_t>(key)));
    return enc.take();
}

OffchainChannel open_channel(const identity::KeyPair& opener, const crypto::PublicKey& peer,
                             const crypto::SessionKey& key, const SessionKeyDirectory& directory) {
    if (!directory.issued_at_all(key)) throw ChannelError("unknown_session_key");
    if (!directory.issued_to(opener.public_key, peer, key)) throw ChannelError("foreign_session_key");
    OffchainChannel ch;
    ch.endpoints_ = {opener.public_key, peer};
    ch.key_ = key;
    ch.handshake_ = identity::sign(opener, handshake_payload(opener.public_key, peer, key));
    ch.open_ = true;
    return ch;
}

bool verify_handshake(const OffchainChannel& channel, const crypto::SessionKey& key) {
    const auto& [opener, peer] = channel.endpoints();
    return identity::verify(opener, handshake_payload(opener, peer, key), channel.handshake());
}

EavesdropReport eavesdrop(const std::vector<Frame>& transcript, const crypto::SessionKey& guess,
                          std::span<const std::uint8_t> marker) {
    EavesdropReport r;
    r.frames_captured = transcript.size();
    for (const auto& f : transcript) {
        if (crypto::open(guess, f.seq, f.ciphertext)) {
            ++r.plaintexts_recovered;
            continue;
        }
        // Without the key the only hope is that plaintext leaked into the
        // ciphertext bytes.
        if (!marker.empty() &&
            std::search(f.ciphertext.begin(), f.ciphertext.end(), marker.begin(), marker.end()) != f.ciphertext.end())
            ++r.plaintexts_recovered;
    }
    return r;
}

}  // namespace datamarket::trading
