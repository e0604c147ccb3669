#include "datamarket/common/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

namespace datamarket::crypto {
namespace {

void ensure_sodium() {
    static const bool ready = [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
        return true;
    }();
    (void)ready;
}

std::array<std::uint8_t, crypto_secretbox_KEYBYTES> cipher_key(const SessionKey& key) {
    std::array<std::uint8_t, crypto_secretbox_KEYBYTES> out{};
    crypto_generichash(out.data(), out.size(), key.data(), key.size(), nullptr, 0);
    return out;
}

std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> nonce_for(std::uint64_t seq) {
    std::array<std::uint8_t, crypto_secretbox_NONCEBYTES> n{};
    for (int i = 0; i < 8; ++i) n[i] = static_cast<std::uint8_t>(seq >> (8 * i));
    return n;
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes, bool upper) {
    static constexpr char lower_digits[] = "0123456789abcdef";
    static constexpr char upper_digits[] = "0123456789ABCDEF";
    const char* digits = upper ? upper_digits : lower_digits;
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("bad hex digit");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

Encoder& Encoder::u64(std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
}

Encoder& Encoder::str(std::string_view s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
    return *this;
}

Encoder& Encoder::bytes(std::span<const std::uint8_t> b) {
    u64(b.size());
    out_.insert(out_.end(), b.begin(), b.end());
    return *this;
}

Digest hash(std::span<const std::uint8_t> data) {
    ensure_sodium();
    Digest d{};
    crypto_generichash(d.data(), d.size(), data.data(), data.size(), nullptr, 0);
    return d;
}

KeyMaterial keypair_from_seed(const Seed& seed) {
    ensure_sodium();
    KeyMaterial km;
    crypto_sign_seed_keypair(km.public_key.bytes.data(), km.secret_key.bytes.data(), seed.data());
    return km;
}

Signature sign(const SecretKey& key, std::span<const std::uint8_t> message) {
    ensure_sodium();
    Signature sig;
    crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), key.bytes.data());
    return sig;
}

bool verify(const PublicKey& key, std::span<const std::uint8_t> message, const Signature& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(), key.bytes.data()) == 0;
}

Bytes seal(const SessionKey& key, std::uint64_t seq, std::span<const std::uint8_t> plaintext) {
    ensure_sodium();
    auto k = cipher_key(key);
    auto n = nonce_for(seq);
    Bytes out(plaintext.size() + crypto_secretbox_MACBYTES);
    crypto_secretbox_easy(out.data(), plaintext.data(), plaintext.size(), n.data(), k.data());
    return out;
}

std::optional<Bytes> open(const SessionKey& key, std::uint64_t seq, std::span<const std::uint8_t> ciphertext) {
    ensure_sodium();
    if (ciphertext.size() < crypto_secretbox_MACBYTES) return std::nullopt;
    auto k = cipher_key(key);
    auto n = nonce_for(seq);
    Bytes out(ciphertext.size() - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(out.data(), ciphertext.data(), ciphertext.size(), n.data(), k.data()) != 0)
        return std::nullopt;
    return out;
}

}  // namespace datamarket::crypto
