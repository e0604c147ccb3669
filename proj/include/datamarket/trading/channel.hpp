#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "datamarket/common/crypto.hpp"
#include "datamarket/identity/participant.hpp"

namespace datamarket::trading {

struct ChannelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Session keys handed out by ExecuteContract, indexed by the (provider,
// consumer) pair they were issued to.
class SessionKeyDirectory {
public:
    void issue(const crypto::PublicKey& provider, const crypto::PublicKey& consumer, const crypto::SessionKey& key);
    bool issued_to(const crypto::PublicKey& a, const crypto::PublicKey& b, const crypto::SessionKey& key) const;
    bool issued_at_all(const crypto::SessionKey& key) const;

private:
    std::map<crypto::SessionKey, std::pair<crypto::PublicKey, crypto::PublicKey>> owners_;
};

struct Frame {
    std::uint64_t seq = 0;
    Bytes ciphertext;
};

// Encrypted point-to-point path for data units. The transcript holds only
// ciphertext; the plaintext never leaves the two endpoints.
class OffchainChannel {
public:
    const std::pair<crypto::PublicKey, crypto::PublicKey>& endpoints() const { return endpoints_; }
    bool is_open() const { return open_; }
    const std::vector<Frame>& transcript() const { return transcript_; }
    const crypto::Signature& handshake() const { return handshake_; }

    // Encrypts and records the next frame.
    const Frame& send(std::span<const std::uint8_t> plaintext);
    // Decrypts a frame with the holder's key; nullopt when the key is wrong
    // or the frame was altered.
    static std::optional<Bytes> receive(const Frame& frame, const crypto::SessionKey& key);

    void close() { open_ = false; }

private:
    friend OffchainChannel open_channel(const identity::KeyPair&, const crypto::PublicKey&, const crypto::SessionKey&,
                                        const SessionKeyDirectory&);

    std::pair<crypto::PublicKey, crypto::PublicKey> endpoints_;
    crypto::SessionKey key_{};
    crypto::Signature handshake_;
    std::vector<Frame> transcript_;
    std::uint64_t next_seq_ = 0;
    bool open_ = false;
};

// Bytes the opener signs so the peer knows who holds the channel key.
Bytes handshake_payload(const crypto::PublicKey& a, const crypto::PublicKey& b, const crypto::SessionKey& key);

// Opens a channel from `opener` to `peer` under a DSC-issued key. Throws
// ChannelError("unknown_session_key") for a key nobody issued and
// ChannelError("foreign_session_key") for a key issued to another pair.
OffchainChannel open_channel(const identity::KeyPair& opener, const crypto::PublicKey& peer,
                             const crypto::SessionKey& key, const SessionKeyDirectory& directory);

// Run by the peer, which also holds the key: checks the opener signed this
// endpoint pair and key.
bool verify_handshake(const OffchainChannel& channel, const crypto::SessionKey& key);

// Result of an eavesdropper working through a captured transcript without
// the session key.
struct EavesdropReport {
    std::size_t frames_captured = 0;
    std::size_t plaintexts_recovered = 0;
};

EavesdropReport eavesdrop(const std::vector<Frame>& transcript, const crypto::SessionKey& guess,
                          std::span<const std::uint8_t> known_plaintext_marker);

}  // namespace datamarket::trading
