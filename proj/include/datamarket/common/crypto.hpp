#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "datamarket/common/types.hpp"

// Thin wrappers over libsodium: BLAKE2b digests, Ed25519 signatures and
// XSalsa20-Poly1305 for the off-chain channel.
namespace datamarket::crypto {

using Digest = std::array<std::uint8_t, 32>;
using Seed = std::array<std::uint8_t, 32>;
using SessionKey = std::array<std::uint8_t, 16>;

struct PublicKey {
    std::array<std::uint8_t, 32> bytes{};
    auto operator<=>(const PublicKey&) const = default;
};

struct SecretKey {
    std::array<std::uint8_t, 64> bytes{};
    bool operator==(const SecretKey&) const = default;
};

struct Signature {
    std::array<std::uint8_t, 64> bytes{};
    bool operator==(const Signature&) const = default;
};

std::string to_hex(std::span<const std::uint8_t> bytes, bool upper = false);
Bytes from_hex(std::string_view hex);

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& a, bool upper = false) {
    return to_hex(std::span<const std::uint8_t>(a.data(), a.size()), upper);
}
inline std::string to_hex(const PublicKey& pk) { return to_hex(pk.bytes); }

// Length-prefixed canonical encoding; the input to every digest and signature.
class Encoder {
public:
    Encoder& u64(std::uint64_t v);
    Encoder& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
    Encoder& str(std::string_view s);
    Encoder& bytes(std::span<const std::uint8_t> b);
    template <std::size_t N>
    Encoder& bytes(const std::array<std::uint8_t, N>& a) {
        return bytes(std::span<const std::uint8_t>(a.data(), a.size()));
    }
    Encoder& tag(char c) {
        out_.push_back(static_cast<std::uint8_t>(c));
        return *this;
    }

    const Bytes& data() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

Digest hash(std::span<const std::uint8_t> data);
inline Digest hash(const Encoder& e) { return hash(e.data()); }

struct KeyMaterial {
    PublicKey public_key;
    SecretKey secret_key;
};

KeyMaterial keypair_from_seed(const Seed& seed);
Signature sign(const SecretKey& key, std::span<const std::uint8_t> message);
bool verify(const PublicKey& key, std::span<const std::uint8_t> message, const Signature& sig);

// Authenticated symmetric encryption keyed by a 128-bit session key. The
// frame sequence number is the nonce, so a (key, seq) pair must not repeat.
Bytes seal(const SessionKey& key, std::uint64_t seq, std::span<const std::uint8_t> plaintext);
std::optional<Bytes> open(const SessionKey& key, std::uint64_t seq, std::span<const std::uint8_t> ciphertext);

}  // namespace datamarket::crypto
