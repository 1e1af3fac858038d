"""Crypto providers, cost profiles and per-principal operation ledgers.

Two providers share one accounting path:

* ``ModelProvider`` does no cipher work. A sealed blob opens iff the key
  reference (key id and version) matches, which is enough to check the secrecy
  semantics at scale.
* ``RealProvider`` uses AES-256-GCM and RSA-2048-OAEP, so a wrong key fails
  cryptographically rather than by bookkeeping.

Traffic and time accounting always uses the canonical sizes: a symmetric seal
is the size of its plaintext, an asymmetric seal is 256 bytes.
"""
from __future__ import annotations

import itertools
import os
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from .core import UserId

KEY_BYTES = 32
ASYM_BYTES = 256


class CryptoError(Exception):
    pass


class WrongKey(CryptoError):
    def __init__(self, msg: str = "wrong key"):
        super().__init__(msg)


class PayloadTooLarge(CryptoError):
    def __init__(self, msg: str = "payload too large"):
        super().__init__(msg)


@dataclass(frozen=True)
class CryptoCostParams:
    sym_throughput: float  # bytes per second
    sym_key_setup: float  # seconds
    asym_encrypt: float  # seconds
    asym_decrypt: float  # seconds

    def __post_init__(self):
        for name in ("sym_throughput", "sym_key_setup", "asym_encrypt", "asym_decrypt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def time_for(self, sym_bytes: int, key_setups: int, asym_enc: int, asym_dec: int) -> float:
        return (
            sym_bytes / self.sym_throughput
            + key_setups * self.sym_key_setup
            + asym_enc * self.asym_encrypt
            + asym_dec * self.asym_decrypt
        )


# Crypto++ AES-256 rows and RSA-2048 rows.
CBC_PROFILE = CryptoCostParams(447e6, 0.216e-6, 0.16e-3, 6.08e-3)
CTR_PROFILE = CryptoCostParams(2496e6, 0.278e-6, 0.16e-3, 6.08e-3)
DEFAULT_PROFILE = CBC_PROFILE
PROFILES = {"cbc": CBC_PROFILE, "ctr": CTR_PROFILE}

_PROFILE_KEYS = {
    "sym_throughput_mb_s": ("sym_throughput", 1e6),
    "sym_key_setup_us": ("sym_key_setup", 1e-6),
    "asym_encrypt_ms": ("asym_encrypt", 1e-3),
    "asym_decrypt_ms": ("asym_decrypt", 1e-3),
}


def parse_profile(text: str) -> CryptoCostParams:
    """Parse ``key=value`` lines on top of a base profile (``base=cbc|ctr``)."""
    base = DEFAULT_PROFILE
    overrides: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"profile line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "base":
            try:
                base = PROFILES[value.lower()]
            except KeyError:
                raise ValueError(f"profile line {lineno}: unknown base {value!r}") from None
            continue
        if key not in _PROFILE_KEYS:
            raise ValueError(f"profile line {lineno}: unknown key {key!r}")
        name, scale = _PROFILE_KEYS[key]
        overrides[name] = float(value) * scale
    return replace(base, **overrides)


def load_profile(path: str | Path) -> CryptoCostParams:
    return parse_profile(Path(path).read_text())


@dataclass
class OpLedger:
    """Crypto work done by one principal.

    Every symmetric encryption or decryption also pays one key setup, as does
    every key generation; this is what makes tree rekeying cost microseconds
    rather than nanoseconds.
    """

    params: CryptoCostParams = DEFAULT_PROFILE
    sym_enc_count: int = 0
    sym_dec_count: int = 0
    asym_enc_count: int = 0
    asym_dec_count: int = 0
    keygen_count: int = 0
    sym_bytes_processed: int = 0
    modeled_time: float = 0.0

    @property
    def key_setups(self) -> int:
        return self.keygen_count + self.sym_enc_count + self.sym_dec_count

    def closed_form_time(self) -> float:
        return self.params.time_for(
            self.sym_bytes_processed, self.key_setups, self.asym_enc_count, self.asym_dec_count
        )

    def charge_keygen(self) -> None:
        self.keygen_count += 1
        self.modeled_time += self.params.sym_key_setup

    def charge_sym(self, nbytes: int, decrypt: bool = False) -> None:
        if decrypt:
            self.sym_dec_count += 1
        else:
            self.sym_enc_count += 1
        self.sym_bytes_processed += nbytes
        self.modeled_time += nbytes / self.params.sym_throughput + self.params.sym_key_setup

    def charge_asym(self, decrypt: bool = False) -> None:
        if decrypt:
            self.asym_dec_count += 1
            self.modeled_time += self.params.asym_decrypt
        else:
            self.asym_enc_count += 1
            self.modeled_time += self.params.asym_encrypt

    def counters(self) -> tuple[int, int, int, int, int, int]:
        return (
            self.sym_enc_count,
            self.sym_dec_count,
            self.asym_enc_count,
            self.asym_dec_count,
            self.keygen_count,
            self.sym_bytes_processed,
        )


class Ledgers(dict):
    """``UserId -> OpLedger``, creating empty ledgers on first access."""

    def __init__(self, params: CryptoCostParams = DEFAULT_PROFILE):
        super().__init__()
        self.params = params

    def __missing__(self, user):
        ledger = self[user] = OpLedger(self.params)
        return ledger


@dataclass(frozen=True)
class SymKey:
    key_id: int
    version: int
    secret: Optional[bytes] = field(default=None, repr=False)

    @property
    def ref(self) -> tuple[int, int]:
        return (self.key_id, self.version)


@dataclass(frozen=True)
class KeyPair:
    owner: UserId
    public: Any = field(default=None, repr=False)
    private: Any = field(default=None, repr=False)


@dataclass(frozen=True)
class Sealed:
    payload: Any = field(repr=False)
    key_ref: tuple
    canonical_size: int
    asym: bool = False

    @property
    def size(self) -> int:
        return self.canonical_size


class CryptoProvider:
    """Accounting shared by both providers; subclasses do the cipher work."""

    real = False

    def __init__(self):
        self._key_ids = itertools.count(1)
        self._pairs: dict[UserId, KeyPair] = {}

    # hooks
    def _new_secret(self) -> Optional[bytes]:
        raise NotImplementedError

    def _sym_encrypt(self, key: SymKey, payload: bytes) -> Any:
        raise NotImplementedError

    def _sym_decrypt(self, key: SymKey, sealed: Sealed) -> bytes:
        raise NotImplementedError

    def _new_pair(self, owner: UserId) -> KeyPair:
        raise NotImplementedError

    def _asym_encrypt(self, pair: KeyPair, payload: bytes) -> Any:
        raise NotImplementedError

    def _asym_decrypt(self, pair: KeyPair, sealed: Sealed) -> bytes:
        raise NotImplementedError

    def key_bytes(self, key: SymKey) -> bytes:
        raise NotImplementedError

    def key_from_bytes(self, data: bytes, key_id: int, version: int) -> SymKey:
        raise NotImplementedError

    # symmetric
    def gen_sym(self, ledger: Optional[OpLedger]) -> SymKey:
        if ledger is not None:
            ledger.charge_keygen()
        return SymKey(next(self._key_ids), 1, self._new_secret())

    def refresh(self, key: SymKey, ledger: Optional[OpLedger]) -> SymKey:
        """Next version of the same logical key."""
        if ledger is not None:
            ledger.charge_keygen()
        return SymKey(key.key_id, key.version + 1, self._new_secret())

    def seal_sym(self, key: SymKey, payload: bytes, ledger: Optional[OpLedger]) -> Sealed:
        size = len(payload)
        sealed = Sealed(self._sym_encrypt(key, payload), key.ref, size)
        if ledger is not None:
            ledger.charge_sym(size)
        return sealed

    def open_sym(self, key: SymKey, sealed: Sealed, ledger: Optional[OpLedger]) -> bytes:
        if sealed.asym:
            raise WrongKey()
        if ledger is not None:
            ledger.charge_sym(sealed.canonical_size, decrypt=True)
        return self._sym_decrypt(key, sealed)

    def wrap_key(self, wrapping: SymKey, key: SymKey, ledger: Optional[OpLedger]) -> Sealed:
        return self.seal_sym(wrapping, self.key_bytes(key), ledger)

    def unwrap_key(self, wrapping: SymKey, sealed: Sealed, key_ref: tuple[int, int],
                   ledger: Optional[OpLedger]) -> SymKey:
        return self.key_from_bytes(self.open_sym(wrapping, sealed, ledger), *key_ref)

    # asymmetric
    def keypair(self, owner: UserId) -> KeyPair:
        pair = self._pairs.get(owner)
        if pair is None:
            pair = self._pairs[owner] = self._new_pair(owner)
        return pair

    def seal_asym(self, owner: UserId, payload: bytes, ledger: Optional[OpLedger]) -> Sealed:
        if len(payload) > ASYM_BYTES:
            raise PayloadTooLarge()
        pair = self.keypair(owner)
        sealed = Sealed(self._asym_encrypt(pair, payload), ("pk", owner), ASYM_BYTES, asym=True)
        if ledger is not None:
            ledger.charge_asym()
        return sealed

    def open_asym(self, pair: KeyPair, sealed: Sealed, ledger: Optional[OpLedger]) -> bytes:
        if not sealed.asym:
            raise WrongKey()
        if ledger is not None:
            ledger.charge_asym(decrypt=True)
        return self._asym_decrypt(pair, sealed)


class ModelProvider(CryptoProvider):
    """Perfect crypto: opening succeeds iff the key reference matches."""

    def _new_secret(self):
        return None

    def _sym_encrypt(self, key, payload):
        return payload

    def _sym_decrypt(self, key, sealed):
        if key.ref != sealed.key_ref:
            raise WrongKey()
        return sealed.payload

    def _new_pair(self, owner):
        return KeyPair(owner)

    def _asym_encrypt(self, pair, payload):
        return payload

    def _asym_decrypt(self, pair, sealed):
        if sealed.key_ref != ("pk", pair.owner):
            raise WrongKey()
        return sealed.payload

    def key_bytes(self, key):
        return struct.pack(">QQ", key.key_id, key.version).ljust(KEY_BYTES, b"\0")

    def key_from_bytes(self, data, key_id, version):
        if data != struct.pack(">QQ", key_id, version).ljust(KEY_BYTES, b"\0"):
            raise WrongKey()
        return SymKey(key_id, version)


class RealProvider(CryptoProvider):
    """AES-256-GCM for symmetric seals, RSA-2048 OAEP(SHA-256) for asymmetric.

    OAEP with SHA-256 caps plaintexts at 190 bytes, below the 256-byte canonical
    limit; larger payloads raise PayloadTooLarge. Only 32-byte keys are ever
    sealed asymmetrically.
    """

    real = True
    _NONCE = 12

    def __init__(self):
        super().__init__()
        from cryptography.exceptions import InvalidTag
        from cryptography.hazmat.primitives import hashes
        from cryptography.hazmat.primitives.asymmetric import padding, rsa
        from cryptography.hazmat.primitives.ciphers.aead import AESGCM

        self._InvalidTag = InvalidTag
        self._AESGCM = AESGCM
        self._rsa = rsa
        self._oaep = padding.OAEP(
            mgf=padding.MGF1(algorithm=hashes.SHA256()), algorithm=hashes.SHA256(), label=None
        )

    def _new_secret(self):
        return os.urandom(KEY_BYTES)

    def _sym_encrypt(self, key, payload):
        nonce = os.urandom(self._NONCE)
        return nonce + self._AESGCM(key.secret).encrypt(nonce, bytes(payload), None)

    def _sym_decrypt(self, key, sealed):
        if key.secret is None:
            raise WrongKey()
        blob = sealed.payload
        try:
            return self._AESGCM(key.secret).decrypt(blob[: self._NONCE], blob[self._NONCE:], None)
        except self._InvalidTag:
            raise WrongKey() from None

    def _new_pair(self, owner):
        private = self._rsa.generate_private_key(public_exponent=65537, key_size=2048)
        return KeyPair(owner, private.public_key(), private)

    def _asym_encrypt(self, pair, payload):
        if len(payload) > 190:
            raise PayloadTooLarge()
        return pair.public.encrypt(bytes(payload), self._oaep)

    def _asym_decrypt(self, pair, sealed):
        try:
            return pair.private.decrypt(sealed.payload, self._oaep)
        except ValueError:
            raise WrongKey() from None

    def key_bytes(self, key):
        return key.secret

    def key_from_bytes(self, data, key_id, version):
        if len(data) != KEY_BYTES:
            raise WrongKey()
        return SymKey(key_id, version, bytes(data))


def make_provider(real: bool = False) -> CryptoProvider:
    return RealProvider() if real else ModelProvider()
