"""Time-sensitive API tokens for machine callers.

A token is caller id plus an issue/expiry window, signed with an HMAC over
the canonical field concatenation. Verification checks signature, expiry,
and the caller host against the trusted allow-list, in that order.
"""

from __future__ import annotations

import hashlib
import hmac
import re
import time
from dataclasses import dataclass

DEFAULT_LIFETIME_S = 300
MAX_LIFETIME_S = 3600

_CALLER_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


class TokenError(ValueError):
    pass


@dataclass(frozen=True)
class ApiToken:
    caller_id: str
    issued_at: int
    expires_at: int
    signature: str

    def encode(self) -> str:
        return f"{self.caller_id}.{self.issued_at}.{self.expires_at}.{self.signature}"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: str | None = None
    caller_id: str | None = None

    def __bool__(self) -> bool:
        return self.accepted


def _sign(caller_id: str, issued_at: int, expires_at: int, secret: bytes) -> str:
    material = f"{caller_id}|{issued_at}|{expires_at}".encode("utf-8")
    return hmac.new(secret, material, hashlib.sha256).hexdigest()


def issue_token(
    caller_id: str,
    secret: bytes,
    lifetime_s: int = DEFAULT_LIFETIME_S,
    now: int | None = None,
) -> ApiToken:
    if not secret:
        raise TokenError("shared secret is not configured")
    if not _CALLER_RE.match(caller_id):
        raise TokenError(f"bad caller id {caller_id!r}")
    if not 0 < lifetime_s <= MAX_LIFETIME_S:
        raise TokenError(f"lifetime must be in (0, {MAX_LIFETIME_S}] seconds")
    issued = int(now if now is not None else time.time())
    expires = issued + lifetime_s
    return ApiToken(caller_id, issued, expires, _sign(caller_id, issued, expires, secret))


def verify_token(
    token: str,
    origin_host: str,
    allow_list: list[str] | tuple[str, ...],
    secret: bytes,
    now: int | None = None,
) -> Verdict:
    parts = token.split(".") if token else []
    if len(parts) != 4:
        return Verdict(False, "malformed")
    caller_id, issued_raw, expires_raw, signature = parts
    try:
        issued_at, expires_at = int(issued_raw), int(expires_raw)
    except ValueError:
        return Verdict(False, "malformed")
    expected = _sign(caller_id, issued_at, expires_at, secret)
    if not hmac.compare_digest(signature, expected):
        return Verdict(False, "bad signature")
    current = int(now if now is not None else time.time())
    if current >= expires_at:
        return Verdict(False, "expired")
    if origin_host not in allow_list:
        return Verdict(False, "host not allowed")
    return Verdict(True, caller_id=caller_id)
