"""Security levels and the key lifecycle enforced on every frame exchange.

Three levels: 0 sends plaintext with no keys, 1 authenticates each frame
with a tag, 2 additionally encrypts the body. A node first associates
with the hub at a negotiated level; for any secured level a master key
is activated (pre-shared, or created on the spot by unauthenticated
association) and a pairwise temporal key (PTK) is derived from it. A PTK
serves exactly one session: re-keying after teardown always yields a
fresh key id. Group traffic uses a group temporal key (GTK) distributed
only over established secured sessions.

Cryptography here is interface-only. Key derivation is a keyed hash of
the master key and a session ordinal, and the cipher is a reversible
keyed stream built from the same hash; both are pluggable. The testable
contract is the state machine, not the algorithms.

Wire format of a secured frame body:
    [level: 1 byte][counter: 4 bytes big-endian][body][tag: 8 bytes]
where the body is XOR-masked at level 2 and the tag covers the level,
the counter, and the body as sent. Level 0 frames are the raw body.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable

from bansim.errors import (
    KeyStateError,
    LevelMismatch,
    ProtocolOrderError,
    ReplayRejection,
    SecurityError,
    TagFailure,
)

__all__ = [
    "SecurityLevel",
    "SECURITY_WIRE_OVERHEAD",
    "PairwiseKey",
    "SecuritySession",
    "GroupKeyState",
    "SecurityManager",
    "secure_frame",
    "admit_frame",
]

TAG_LEN = 8
COUNTER_LEN = 4


class SecurityLevel(IntEnum):
    UNSECURED = 0
    AUTHENTICATED = 1
    ENCRYPTED = 2


# Extra on-air body bytes per level: level byte + counter + tag.
SECURITY_WIRE_OVERHEAD = {
    SecurityLevel.UNSECURED: 0,
    SecurityLevel.AUTHENTICATED: 1 + COUNTER_LEN + TAG_LEN,
    SecurityLevel.ENCRYPTED: 1 + COUNTER_LEN + TAG_LEN,
}

MK_MODES = ("preshared", "unauthenticated")


def _digest(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        h.update(len(part).to_bytes(4, "big"))
        h.update(part)
    return h.digest()


def default_kdf(mk: bytes, ordinal: int) -> bytes:
    """Pairwise key material from the master key and a session ordinal."""
    return _digest(b"ptk", mk, ordinal.to_bytes(8, "big"))


@dataclass(frozen=True)
class PairwiseKey:
    key_id: str  # short public identifier
    key: bytes  # secret material


@dataclass
class SecuritySession:
    node_id: str
    hub_id: str
    level: SecurityLevel
    mk_source: str | None = None  # "preshared" | "unauthenticated" | None
    mk: bytes | None = None
    ptk: PairwiseKey | None = None
    session_counter: int = 0  # how many PTKs this pairing has consumed
    tx_counter: int = 0  # last counter stamped on an outgoing frame
    rx_counter: int = 0  # highest counter admitted so far
    gtk_id: str | None = None

    @property
    def ptk_active(self) -> bool:
        return self.ptk is not None


@dataclass(frozen=True)
class GroupKeyState:
    group_id: str
    gtk_id: str
    members: frozenset[str]


class SecurityManager:
    """Hub-side owner of all sessions and key state for one run."""

    def __init__(self, hub_id: str = "hub", kdf: Callable[[bytes, int], bytes] = default_kdf):
        self.hub_id = hub_id
        self._kdf = kdf
        self.sessions: dict[str, SecuritySession] = {}
        # Session ordinals survive teardown so a re-keyed pairing can
        # never reproduce an old PTK ("one PTK per session").
        self._session_ordinals: dict[str, int] = {}
        self._mk_serial = 0
        self._issued_ptk_ids: set[str] = set()
        self.groups: dict[str, GroupKeyState] = {}

    def associate(
        self, node_id: str, level: SecurityLevel | int, mk: str = "preshared"
    ) -> SecuritySession:
        """Negotiate a session; secured levels come up with an active PTK."""
        level = SecurityLevel(level)
        if node_id in self.sessions:
            raise ProtocolOrderError(f"{node_id} is already associated")
        if mk not in MK_MODES:
            raise SecurityError(f"unknown master-key mode {mk!r}")
        session = SecuritySession(node_id, self.hub_id, level)
        self.sessions[node_id] = session
        if level >= SecurityLevel.AUTHENTICATED:
            self._activate_mk(session, mk)
            self.establish_ptk(session)
        return session

    def _activate_mk(self, session: SecuritySession, mode: str) -> None:
        if mode == "preshared":
            # Stable per pairing, as if provisioned out of band.
            session.mk = _digest(b"mk-preshared", session.node_id.encode(), self.hub_id.encode())
        else:
            # Created fresh by the unauthenticated association exchange.
            self._mk_serial += 1
            session.mk = _digest(
                b"mk-unauthenticated",
                session.node_id.encode(),
                self._mk_serial.to_bytes(8, "big"),
            )
        session.mk_source = mode

    def establish_ptk(self, session: SecuritySession) -> SecuritySession:
        if session.mk is None:
            raise KeyStateError(f"{session.node_id}: no master key to derive from")
        if session.ptk_active:
            raise KeyStateError(f"{session.node_id}: a pairwise key is already active")
        ordinal = self._session_ordinals.get(session.node_id, 0) + 1
        self._session_ordinals[session.node_id] = ordinal
        session.session_counter = ordinal
        key = self._kdf(session.mk, ordinal)
        key_id = key[:8].hex()
        if key_id in self._issued_ptk_ids:
            raise KeyStateError(f"key derivation repeated id {key_id}")
        self._issued_ptk_ids.add(key_id)
        session.ptk = PairwiseKey(key_id, key)
        session.tx_counter = 0
        session.rx_counter = 0
        return session

    def teardown(self, node_id: str) -> None:
        """End the session: retire the PTK and forget the association."""
        if node_id not in self.sessions:
            raise ProtocolOrderError(f"{node_id} is not associated")
        del self.sessions[node_id]

    def distribute_gtk(self, group_id: str, node_ids: list[str]) -> GroupKeyState:
        """Share one group key over the members' secured unicast sessions."""
        for node_id in node_ids:
            session = self.sessions.get(node_id)
            if session is None:
                raise KeyStateError(f"{node_id} has no session")
            if session.level < SecurityLevel.AUTHENTICATED or not session.ptk_active:
                raise KeyStateError(
                    f"{node_id} lacks an active pairwise key; group key refused"
                )
        gtk_id = _digest(
            b"gtk", group_id.encode(), len(self.groups).to_bytes(4, "big")
        )[:8].hex()
        state = GroupKeyState(group_id, gtk_id, frozenset(node_ids))
        for node_id in node_ids:
            self.sessions[node_id].gtk_id = gtk_id
        self.groups[group_id] = state
        return state


def _keystream(key: bytes, counter: int, length: int) -> bytes:
    out = b""
    block = 0
    while len(out) < length:
        out += _digest(b"stream", key, counter.to_bytes(COUNTER_LEN, "big"), block.to_bytes(4, "big"))
        block += 1
    return out[:length]


def _tag(key: bytes, level: int, counter: int, body: bytes) -> bytes:
    return _digest(
        b"tag", key, bytes([level]), counter.to_bytes(COUNTER_LEN, "big"), body
    )[:TAG_LEN]


def secure_frame(body: bytes, session: SecuritySession) -> bytes:
    """Apply the session's level to an outgoing body."""
    if session.level == SecurityLevel.UNSECURED:
        return bytes(body)
    if not session.ptk_active:
        raise KeyStateError(f"{session.node_id}: secured frame without an active pairwise key")
    counter = session.tx_counter + 1
    session.tx_counter = counter
    sent = bytes(body)
    if session.level == SecurityLevel.ENCRYPTED:
        stream = _keystream(session.ptk.key, counter, len(sent))
        sent = bytes(a ^ b for a, b in zip(sent, stream))
    tag = _tag(session.ptk.key, session.level, counter, sent)
    return bytes([session.level]) + counter.to_bytes(COUNTER_LEN, "big") + sent + tag


def admit_frame(wire: bytes, session: SecuritySession) -> bytes:
    """Validate an incoming wire body against the session; return the body.

    Rejections: a frame at a different level than negotiated, a tag that
    does not verify under the session keys, and a counter at or below the
    last admitted one (replay). The replay floor moves only after the tag
    verifies.
    """
    if session.level == SecurityLevel.UNSECURED:
        return bytes(wire)
    overhead = SECURITY_WIRE_OVERHEAD[session.level]
    if len(wire) < overhead:
        raise TagFailure("frame shorter than the secured envelope")
    if wire[0] != session.level:
        raise LevelMismatch(f"frame level {wire[0]}, session level {int(session.level)}")
    if not session.ptk_active:
        raise KeyStateError(f"{session.node_id}: no active pairwise key to admit with")
    counter = int.from_bytes(wire[1 : 1 + COUNTER_LEN], "big")
    sent = wire[1 + COUNTER_LEN : -TAG_LEN]
    tag = wire[-TAG_LEN:]
    if _tag(session.ptk.key, session.level, counter, sent) != tag:
        raise TagFailure("authentication tag does not verify")
    if counter <= session.rx_counter:
        raise ReplayRejection(f"counter {counter} not above {session.rx_counter}")
    session.rx_counter = counter
    if session.level == SecurityLevel.ENCRYPTED:
        stream = _keystream(session.ptk.key, counter, len(sent))
        sent = bytes(a ^ b for a, b in zip(sent, stream))
    return sent
