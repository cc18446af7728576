#include "privshard/crypto_vault.h"

#include <fcntl.h>
#include <openssl/evp.h>
#include <openssl/core_names.h>
#include <openssl/rand.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "privshard/encoding.h"
#include "privshard/error.h"
#include "privshard/text_pipeline.h"

namespace privshard::crypto {
namespace {

std::atomic<uint64_t> g_decryptions{0};

constexpr std::string_view kFingerprintDomain = "privshard-key-fingerprint-v1";
constexpr std::string_view kTestSeedDomain = "privshard-test-seed-v1";

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx NewCipherCtx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  PRIVSHARD_ENFORCE(ctx != nullptr, ErrorCode::kCrypto,
                    "EVP_CIPHER_CTX_new failed");
  return ctx;
}

struct MacCtxDeleter {
  void operator()(EVP_MAC_CTX* ctx) const { EVP_MAC_CTX_free(ctx); }
};
using MacCtx = std::unique_ptr<EVP_MAC_CTX, MacCtxDeleter>;

EVP_MAC* HmacAlgorithm() {
  static EVP_MAC* mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
  return mac;
}

}  // namespace

struct KeyBundle::PreparedMac {
  MacCtx ctx;
};

Digest Sha256(std::span<const uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  PRIVSHARD_ENFORCE(
      EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                 nullptr) == 1 &&
          len == out.size(),
      ErrorCode::kCrypto, "SHA-256 failed");
  return out;
}

KeyBundle::KeyBundle(const EncKey& enc_key, const IndexKey& index_key)
    : enc_key_(enc_key), index_key_(index_key) {
  std::vector<uint8_t> material(kFingerprintDomain.begin(),
                                kFingerprintDomain.end());
  material.insert(material.end(), enc_key_.begin(), enc_key_.end());
  material.insert(material.end(), index_key_.begin(), index_key_.end());
  Digest d = Sha256(material);
  std::copy_n(d.begin(), fingerprint_.size(), fingerprint_.begin());

  EVP_MAC* hmac = HmacAlgorithm();
  PRIVSHARD_ENFORCE(hmac != nullptr, ErrorCode::kCrypto, "HMAC unavailable");
  MacCtx ctx(EVP_MAC_CTX_new(hmac));
  char digest_name[] = "SHA256";
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest_name, 0),
      OSSL_PARAM_construct_end()};
  PRIVSHARD_ENFORCE(ctx != nullptr &&
                        EVP_MAC_init(ctx.get(), index_key_.data(),
                                     index_key_.size(), params) == 1,
                    ErrorCode::kCrypto, "HMAC key setup failed");
  mac_ = std::make_shared<const PreparedMac>(PreparedMac{std::move(ctx)});
}

KeyBundle KeyBundle::FromBytes(std::span<const uint8_t> raw) {
  PRIVSHARD_ENFORCE(raw.size() == kKeyFileSize, ErrorCode::kConfig,
                    "key material must be exactly 48 bytes, got " +
                        std::to_string(raw.size()));
  EncKey enc{};
  IndexKey idx{};
  std::copy_n(raw.begin(), kEncKeySize, enc.begin());
  std::copy_n(raw.begin() + kEncKeySize, kIndexKeySize, idx.begin());
  return KeyBundle(enc, idx);
}

std::array<uint8_t, kKeyFileSize> KeyBundle::ToBytes() const {
  std::array<uint8_t, kKeyFileSize> out{};
  std::copy(enc_key_.begin(), enc_key_.end(), out.begin());
  std::copy(index_key_.begin(), index_key_.end(), out.begin() + kEncKeySize);
  return out;
}

void KeyBundle::Save(const std::filesystem::path& path, bool overwrite) const {
  int flags = O_WRONLY | O_CREAT | (overwrite ? O_TRUNC : O_EXCL);
  int fd = ::open(path.c_str(), flags, S_IRUSR | S_IWUSR);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error(ErrorCode::kIo, "key file exists: " + path.string() +
                                      " (use --force to overwrite)");
    }
    throw Error(ErrorCode::kIo, "cannot create key file " + path.string() +
                                    ": " + std::strerror(errno));
  }
  ::fchmod(fd, S_IRUSR | S_IWUSR);
  auto bytes = ToBytes();
  ssize_t n = ::write(fd, bytes.data(), bytes.size());
  ::close(fd);
  PRIVSHARD_ENFORCE(n == static_cast<ssize_t>(bytes.size()), ErrorCode::kIo,
                    "short write to key file " + path.string());
}

KeyBundle KeyBundle::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  PRIVSHARD_ENFORCE(in.good(), ErrorCode::kConfig,
                    "cannot read key file " + path.string());
  std::vector<uint8_t> raw((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  return FromBytes(raw);
}

std::string KeyBundle::FingerprintHex() const { return HexEncode(fingerprint_); }

KeyBundle GenerateKeys(std::optional<uint64_t> test_seed) {
  std::array<uint8_t, kKeyFileSize> raw{};
  if (test_seed) {
    std::vector<uint8_t> material(kTestSeedDomain.begin(),
                                  kTestSeedDomain.end());
    for (int i = 0; i < 8; ++i) {
      material.push_back(static_cast<uint8_t>(*test_seed >> (8 * i)));
    }
    material.push_back(0);
    Digest a = Sha256(material);
    material.back() = 1;
    Digest b = Sha256(material);
    std::copy(a.begin(), a.end(), raw.begin());
    std::copy_n(b.begin(), kKeyFileSize - a.size(), raw.begin() + a.size());
  } else {
    PRIVSHARD_ENFORCE(RAND_bytes(raw.data(), static_cast<int>(raw.size())) == 1,
                      ErrorCode::kCrypto, "entropy source unavailable");
  }
  return KeyBundle::FromBytes(raw);
}

Ciphertext EncryptValue(std::string_view plaintext, const KeyBundle& keys,
                        std::span<const uint8_t> aad) {
  PRIVSHARD_ENFORCE(!plaintext.empty(), ErrorCode::kArgument,
                    "cannot encrypt an empty value");
  Ciphertext ct;
  PRIVSHARD_ENFORCE(RAND_bytes(ct.nonce.data(), kNonceSize) == 1,
                    ErrorCode::kCrypto, "entropy source unavailable");
  ct.body.resize(plaintext.size());

  CipherCtx ctx = NewCipherCtx();
  int len = 0;
  bool ok =
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, nullptr,
                         nullptr) == 1 &&
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize,
                          nullptr) == 1 &&
      EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, keys.enc_key().data(),
                         ct.nonce.data()) == 1;
  if (ok && !aad.empty()) {
    ok = EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                           static_cast<int>(aad.size())) == 1;
  }
  ok = ok &&
       EVP_EncryptUpdate(ctx.get(), ct.body.data(), &len,
                         reinterpret_cast<const uint8_t*>(plaintext.data()),
                         static_cast<int>(plaintext.size())) == 1 &&
       EVP_EncryptFinal_ex(ctx.get(), ct.body.data() + len, &len) == 1 &&
       EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize,
                           ct.tag.data()) == 1;
  PRIVSHARD_ENFORCE(ok, ErrorCode::kCrypto, "AES-GCM encryption failed");
  return ct;
}

std::string DecryptValue(const Ciphertext& ct, const KeyBundle& keys,
                         std::span<const uint8_t> aad) {
  g_decryptions.fetch_add(1, std::memory_order_relaxed);
  std::string out(ct.body.size(), '\0');
  auto* out_bytes = reinterpret_cast<uint8_t*>(out.data());
  auto tag = ct.tag;

  CipherCtx ctx = NewCipherCtx();
  int len = 0;
  bool ok =
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, nullptr,
                         nullptr) == 1 &&
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize,
                          nullptr) == 1 &&
      EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, keys.enc_key().data(),
                         ct.nonce.data()) == 1;
  if (ok && !aad.empty()) {
    ok = EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                           static_cast<int>(aad.size())) == 1;
  }
  ok = ok &&
       EVP_DecryptUpdate(ctx.get(), out_bytes, &len, ct.body.data(),
                         static_cast<int>(ct.body.size())) == 1 &&
       EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize,
                           tag.data()) == 1 &&
       EVP_DecryptFinal_ex(ctx.get(), out_bytes + len, &len) == 1;
  PRIVSHARD_ENFORCE(ok, ErrorCode::kAuthentication,
                    "ciphertext failed authentication");
  return out;
}

uint64_t DecryptionCount() {
  return g_decryptions.load(std::memory_order_relaxed);
}

std::string BlindIndex::Hex() const { return HexEncode(digest); }

std::optional<BlindIndex> BlindIndex::FromHex(std::string_view hex) {
  auto raw = HexDecode(hex);
  if (!raw || raw->size() != kDigestSize) return std::nullopt;
  BlindIndex ix;
  std::copy(raw->begin(), raw->end(), ix.digest.begin());
  return ix;
}

std::string Canonicalize(std::string_view value, EntityKind kind) {
  std::string out;
  switch (kind) {
    case EntityKind::kEmail:
    case EntityKind::kUrl:
      return text::ToLower(value);
    case EntityKind::kPhone:
    case EntityKind::kSsn:
    case EntityKind::kCreditCard:
      for (char c : value) {
        if (c >= '0' && c <= '9') out.push_back(c);
      }
      return out;
    case EntityKind::kMoney:
      for (char c : value) {
        if (c != '$' && c != ',') out.push_back(c);
      }
      return out;
    case EntityKind::kPassport:
      for (char c : value) {
        auto uc = static_cast<unsigned char>(c);
        if (uc < 0x80 && std::isalnum(uc)) {
          out.push_back(static_cast<char>(std::toupper(uc)));
        }
      }
      return out;
  }
  return std::string(value);
}

BlindIndex ComputeBlindIndex(std::string_view value, EntityKind kind,
                             const KeyBundle& keys) {
  std::string message(KindName(kind));
  message.push_back('\0');
  message += Canonicalize(value, kind);

  BlindIndex ix;
  MacCtx ctx(EVP_MAC_CTX_dup(keys.prepared_mac().ctx.get()));
  std::size_t len = 0;
  bool ok = ctx != nullptr &&
            EVP_MAC_update(ctx.get(),
                           reinterpret_cast<const uint8_t*>(message.data()),
                           message.size()) == 1 &&
            EVP_MAC_final(ctx.get(), ix.digest.data(), &len,
                          ix.digest.size()) == 1;
  PRIVSHARD_ENFORCE(ok && len == kDigestSize, ErrorCode::kCrypto,
                    "HMAC-SHA256 failed");
  return ix;
}

}  // namespace privshard::crypto
