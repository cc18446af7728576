#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privshard/entity_types.h"

namespace privshard::crypto {

inline constexpr std::size_t kEncKeySize = 16;
inline constexpr std::size_t kIndexKeySize = 32;
inline constexpr std::size_t kKeyFileSize = kEncKeySize + kIndexKeySize;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kDigestSize = 32;
inline constexpr std::size_t kFingerprintSize = 8;

inline constexpr std::string_view kCipherName = "AES-128-GCM";
inline constexpr std::string_view kMacName = "HMAC-SHA256";

using Digest = std::array<uint8_t, kDigestSize>;

Digest Sha256(std::span<const uint8_t> data);

// Symmetric key (16 bytes) plus blind-index MAC key (32 bytes). The
// fingerprint binds a store to the bundle that built it.
class KeyBundle {
 public:
  using EncKey = std::array<uint8_t, kEncKeySize>;
  using IndexKey = std::array<uint8_t, kIndexKeySize>;
  using Fingerprint = std::array<uint8_t, kFingerprintSize>;

  KeyBundle(const EncKey& enc_key, const IndexKey& index_key);

  // Key-file layout: enc_key || index_key. Throws Error(kConfig) when the
  // input is not exactly 48 bytes.
  static KeyBundle FromBytes(std::span<const uint8_t> raw);
  std::array<uint8_t, kKeyFileSize> ToBytes() const;

  // Writes the 48-byte key file with owner-only permissions. Refuses to
  // overwrite unless `overwrite`.
  void Save(const std::filesystem::path& path, bool overwrite) const;
  static KeyBundle Load(const std::filesystem::path& path);

  const EncKey& enc_key() const { return enc_key_; }
  const IndexKey& index_key() const { return index_key_; }
  const Fingerprint& fingerprint() const { return fingerprint_; }
  std::string FingerprintHex() const;

  bool operator==(const KeyBundle& other) const {
    return enc_key_ == other.enc_key_ && index_key_ == other.index_key_;
  }

  // HMAC state keyed with index_key, shared by copies of the bundle and
  // duplicated per blind-index computation.
  struct PreparedMac;
  const PreparedMac& prepared_mac() const { return *mac_; }

 private:
  EncKey enc_key_;
  IndexKey index_key_;
  Fingerprint fingerprint_;
  std::shared_ptr<const PreparedMac> mac_;
};

// Fresh keys from the OS CSPRNG. `test_seed` switches to a deterministic
// derivation for reproducible tests; release callers never pass it.
KeyBundle GenerateKeys(std::optional<uint64_t> test_seed = std::nullopt);

struct Ciphertext {
  std::array<uint8_t, kNonceSize> nonce{};
  std::vector<uint8_t> body;
  std::array<uint8_t, kTagSize> tag{};

  bool operator==(const Ciphertext&) const = default;
};

// Authenticated encryption with a fresh random nonce. `aad` is bound to the
// ciphertext but not stored. Throws Error(kArgument) on empty plaintext.
Ciphertext EncryptValue(std::string_view plaintext, const KeyBundle& keys,
                        std::span<const uint8_t> aad = {});

// Throws Error(kAuthentication) for a wrong key, a tampered field or a
// mismatched aad; the causes are not distinguished.
std::string DecryptValue(const Ciphertext& ct, const KeyBundle& keys,
                         std::span<const uint8_t> aad = {});

// Process-wide count of DecryptValue calls, for instrumentation.
uint64_t DecryptionCount();

struct BlindIndex {
  Digest digest{};

  std::string Hex() const;
  static std::optional<BlindIndex> FromHex(std::string_view hex);

  bool operator==(const BlindIndex&) const = default;
  auto operator<=>(const BlindIndex&) const = default;
};

struct BlindIndexHash {
  std::size_t operator()(const BlindIndex& ix) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) {
      h = (h << 8) | ix.digest[i];
    }
    return h;
  }
};

// Normal form hashed into the blind index:
//   EMAIL, URL           lowercase
//   PHONE, SSN, CC       digits only
//   MONEY                '$' and ',' removed (cents kept)
//   PASSPORT             ASCII alphanumerics, uppercased
std::string Canonicalize(std::string_view value, EntityKind kind);

// HMAC-SHA256 under index_key over KIND || 0x00 || Canonicalize(value).
BlindIndex ComputeBlindIndex(std::string_view value, EntityKind kind,
                             const KeyBundle& keys);

}  // namespace privshard::crypto
