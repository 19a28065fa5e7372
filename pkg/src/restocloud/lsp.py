"""Location Service Provider: registration, login, authorization, service
listing, and per-zone presence.

Stores are linearizable maps (single lock each); uniqueness checks are
atomic with insertion so concurrent registrations of the same phone produce
exactly one account.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import secrets
import threading
import time
from pathlib import Path
from typing import Iterable, Sequence

from .domain import AuthToken, UserAccount, canonicalize_category, canonicalize_phone
from .errors import (
    AuthFailed,
    DuplicatePhone,
    InvalidPhone,
    InvalidToken,
    UnknownUser,
    UnknownZone,
    WeakPassword,
)
from .geolocation import (
    BeaconObservation,
    GeoPoint,
    ZoneMap,
    resolve_gps,
    resolve_rfid,
)

MIN_PASSWORD_LENGTH = 8
PBKDF2_ITERATIONS = 50_000

#: wire messages pinned by the login contract
AUTH_OK_MESSAGE = "Authenticated User"
AUTH_FAILED_MESSAGE = "Authentication Failed"


def hash_password(password: str, iterations: int = PBKDF2_ITERATIONS) -> bytes:
    salt = os.urandom(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, iterations)
    return b"pbkdf2-sha256$%d$%s$%s" % (iterations, salt.hex().encode(), digest.hex().encode())


def verify_password(password: str, credential_hash: bytes) -> bool:
    try:
        _scheme, iters, salt_hex, digest_hex = credential_hash.split(b"$")
        digest = hashlib.pbkdf2_hmac(
            "sha256", password.encode(), bytes.fromhex(salt_hex.decode()), int(iters)
        )
        return hmac.compare_digest(digest.hex().encode(), digest_hex)
    except (ValueError, AttributeError):
        return False


class AccountStore:
    """Accounts keyed by canonical phone number.

    Optionally persisted to a line-delimited records file: one JSON
    snapshot of an account per line, replayed at load with the last line
    per user winning.
    """

    def __init__(self, iterations: int = PBKDF2_ITERATIONS,
                 persist_path: str | Path | None = None):
        self._lock = threading.Lock()
        self._accounts: dict[str, UserAccount] = {}
        self._iterations = iterations
        self._decoy = hash_password("decoy-password", iterations)
        self._persist_path = Path(persist_path) if persist_path else None
        if self._persist_path and self._persist_path.exists():
            self._load()

    def _load(self) -> None:
        for line in self._persist_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            self._accounts[obj["user_id"]] = UserAccount(
                user_id=obj["user_id"],
                credential_hash=bytes.fromhex(obj["credential_hash"]),
                subscriptions=frozenset(obj["subscriptions"]),
                created_at=obj["created_at"],
            )

    def _persist(self, account: UserAccount) -> None:
        # append-only snapshot; caller holds the lock
        if self._persist_path is None:
            return
        line = json.dumps({
            "user_id": account.user_id,
            "credential_hash": account.credential_hash.hex(),
            "subscriptions": sorted(account.subscriptions),
            "created_at": account.created_at,
        }, sort_keys=True)
        with self._persist_path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def register(self, phone: str, password: str, preferences: Iterable[str]) -> str:
        user_id = canonicalize_phone(phone)
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password shorter than {MIN_PASSWORD_LENGTH}")
        subscriptions = frozenset(canonicalize_category(c) for c in preferences)
        credential = hash_password(password, self._iterations)  # slow part outside the lock
        account = UserAccount(
            user_id=user_id,
            credential_hash=credential,
            subscriptions=subscriptions,
            created_at=time.time(),
        )
        with self._lock:
            if user_id in self._accounts:
                raise DuplicatePhone(user_id)
            self._accounts[user_id] = account
            self._persist(account)
        return user_id

    def get(self, user_id: str) -> UserAccount:
        with self._lock:
            try:
                return self._accounts[user_id]
            except KeyError:
                raise UnknownUser(user_id) from None

    def check_credentials(self, user_id: str, password: str) -> bool:
        with self._lock:
            account = self._accounts.get(user_id)
        if account is None:
            # burn comparable work so unknown-user and bad-password are
            # indistinguishable by timing too
            verify_password(password, self._decoy)
            return False
        return verify_password(password, account.credential_hash)

    def subscribe(self, user_id: str, category: str) -> frozenset[str]:
        category = canonicalize_category(category)
        with self._lock:
            account = self._accounts.get(user_id)
            if account is None:
                raise UnknownUser(user_id)
            updated = UserAccount(
                user_id=account.user_id,
                credential_hash=account.credential_hash,
                subscriptions=account.subscriptions | {category},
                created_at=account.created_at,
            )
            self._accounts[user_id] = updated
            self._persist(updated)
        return updated.subscriptions

    def __len__(self) -> int:
        with self._lock:
            return len(self._accounts)


class SessionStore:
    """Bearer tokens for logged-in users; logout removes the session."""

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: dict[str, AuthToken] = {}

    def issue(self, user_id: str) -> AuthToken:
        with self._lock:
            while True:
                value = secrets.token_hex(32)
                if value not in self._sessions:
                    break
            record = AuthToken(token=value, user_id=user_id, issued_at=time.time())
            self._sessions[value] = record
        return record

    def get(self, token: str) -> AuthToken:
        with self._lock:
            try:
                return self._sessions[token]
            except KeyError:
                raise InvalidToken() from None

    def set_zone(self, token: str, zone_id: str) -> AuthToken:
        with self._lock:
            record = self._sessions.get(token)
            if record is None:
                raise InvalidToken()
            updated = AuthToken(
                token=record.token,
                user_id=record.user_id,
                issued_at=record.issued_at,
                current_zone=zone_id,
            )
            self._sessions[token] = updated
        return updated

    def logout(self, token: str) -> None:
        with self._lock:
            if self._sessions.pop(token, None) is None:
                raise InvalidToken()


class PresenceTable:
    """Which zone each user was last resolved to; a user is in at most one."""

    def __init__(self):
        self._lock = threading.Lock()
        self._zone_of: dict[str, str] = {}
        self._members: dict[str, set[str]] = {}

    def move(self, user_id: str, zone_id: str) -> None:
        with self._lock:
            prior = self._zone_of.get(user_id)
            if prior is not None:
                self._members[prior].discard(user_id)
            self._zone_of[user_id] = zone_id
            self._members.setdefault(zone_id, set()).add(user_id)

    def count(self, zone_id: str) -> int:
        with self._lock:
            return len(self._members.get(zone_id, ()))

    def zone_of(self, user_id: str) -> str | None:
        with self._lock:
            return self._zone_of.get(user_id)

    def total_users(self) -> int:
        with self._lock:
            return len(self._zone_of)


class LspNode:
    """The identity tier: accounts, sessions, presence, and locate."""

    def __init__(self, zone_map: ZoneMap, iterations: int = PBKDF2_ITERATIONS,
                 accounts_file: str | Path | None = None):
        self.zone_map = zone_map
        self.accounts = AccountStore(iterations=iterations, persist_path=accounts_file)
        self.sessions = SessionStore()
        self.presence = PresenceTable()

    # -- Algorithm 1: registration and login ------------------------------

    def register_user(self, phone: str, password: str, preferences: Sequence[str]) -> str:
        return self.accounts.register(phone, password, preferences)

    def authenticate(self, user_id: str, password: str) -> AuthToken:
        # unknown user and wrong password are deliberately indistinguishable
        try:
            user_id = canonicalize_phone(user_id)
        except InvalidPhone:
            raise AuthFailed() from None
        if not self.accounts.check_credentials(user_id, password):
            raise AuthFailed()
        return self.sessions.issue(user_id)

    def introspect(self, token: str) -> tuple[AuthToken, frozenset[str]]:
        record = self.sessions.get(token)
        account = self.accounts.get(record.user_id)
        return record, account.subscriptions

    # -- Algorithm 4: authorization and the service list ------------------

    def authorize(self, user_id: str, category: str) -> bool:
        account = self.accounts.get(user_id)
        return canonicalize_category(category) in account.subscriptions

    def list_available_services(
        self, user_id: str, zone_id: str, offered: Iterable[str]
    ) -> list[str]:
        account = self.accounts.get(user_id)
        offered_set = {canonicalize_category(c) for c in offered}
        return sorted(account.subscriptions & offered_set)

    def subscribe(self, user_id: str, category: str) -> frozenset[str]:
        return self.accounts.subscribe(user_id, category)

    # -- Algorithm 2: locate and presence ---------------------------------

    def locate_gps(self, observations: Sequence[BeaconObservation]) -> tuple[str, GeoPoint]:
        return resolve_gps(observations, self.zone_map)

    def locate_rfid(self, tag_id: str) -> tuple[str, GeoPoint]:
        zone_id = resolve_rfid(tag_id, self.zone_map)
        return zone_id, self.zone_map.zone(zone_id).centroid()

    def record_presence(self, token: str, zone_id: str) -> None:
        record = self.sessions.get(token)
        if not self.zone_map.has_zone(zone_id):
            raise UnknownZone(zone_id)
        self.presence.move(record.user_id, zone_id)
        self.sessions.set_zone(token, zone_id)

    def count_users(self, zone_id: str) -> int:
        if not self.zone_map.has_zone(zone_id):
            raise UnknownZone(zone_id)
        return self.presence.count(zone_id)
