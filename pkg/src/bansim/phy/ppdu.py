"""Bit-exact frame construction and parsing for the three radio types.

Every frame serializes as

    sync pattern .. coded PHY header .. coded (and spread) MAC frame

where the MAC frame is mac_header(7) + body(0..255) + fcs(2). The PHY
header carries the body length, so a parser given the operating config can
recover every field and validate the frame end to end. Decoding is
detect-only: any inconsistency raises a distinct FrameError subclass.

Sync patterns, shown here in build order:

* narrowband: a 90-bit pseudo-noise preamble, no delimiter;
* pulse radio: four repetitions of spreading code 0 followed by one
  complemented copy as the start-frame delimiter;
* body-coupled: a 32-bit preamble unit sent exactly four times, then one
  16-bit delimiter.

The patterns are fixed constants of this implementation (the frame format
requires fixed patterns without prescribing them); builders and parsers
accept replacements for experimentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bansim.errors import (
    ConfigError,
    FcsMismatch,
    FrameTooLong,
    HeaderCheckError,
    DespreadError,
    PreambleMismatch,
    SfdMismatch,
    TrailingBitsError,
    TruncatedFrame,
)
from bansim.phy import fec
from bansim.phy.bitfields import bits_to_bytes, bits_to_int, bytes_to_bits, int_to_bits
from bansim.phy.checksums import crc4_bits, crc16
from bansim.phy.kasami import kasami63_bits, mseq
from bansim.phy.rates import PhyConfig, PhyKind, info_data_rate

__all__ = [
    "MAC_HEADER_LEN",
    "FCS_LEN",
    "MAX_BODY_LEN",
    "NbPlcpHeader",
    "UwbPhr",
    "HbcPhyHeader",
    "AirtimeBreakdown",
    "Ppdu",
    "build_nb_ppdu",
    "parse_nb_ppdu",
    "build_uwb_ppdu",
    "parse_uwb_ppdu",
    "build_hbc_ppdu",
    "parse_hbc_ppdu",
    "build_ppdu",
    "parse_ppdu",
    "ppdu_airtime",
    "frame_airtime_us",
    "hexdump",
]

MAC_HEADER_LEN = 7
FCS_LEN = 2
MAX_BODY_LEN = 255

# Information bits carried by each PHY header (check/pad bits included).
HEADER_INFO_BITS = {PhyKind.NB: 19, PhyKind.UWB: 16, PhyKind.HBC: 11}

# Narrowband sync: the first 90 bits of the degree-7 maximal sequence.
NB_PREAMBLE = mseq(7, (7, 1), 0b1111111)[:90].copy()

UWB_PREAMBLE_REPS = 4
UWB_PREAMBLE_CODE = kasami63_bits(0)
UWB_SFD = (1 - UWB_PREAMBLE_CODE).astype(np.uint8)

HBC_PREAMBLE_REPS = 4
# Degree-5 and degree-4 maximal sequences, padded to even byte sizes.
HBC_PREAMBLE_UNIT = np.concatenate([mseq(5, (5, 2), 0b11111), [0]]).astype(np.uint8)
HBC_SFD = np.concatenate([mseq(4, (4, 1), 0b1111), [1]]).astype(np.uint8)


@dataclass(frozen=True)
class NbPlcpHeader:
    rate_index: int  # 3 bits
    length: int  # 8 bits, body byte count
    scrambler: int  # 1 bit
    burst_mode: int  # 1 bit
    hcs: int  # 4-bit check over the 15 bits above + 2 reserved


@dataclass(frozen=True)
class UwbPhr:
    rate_index: int  # 4 bits
    length: int  # 8 bits
    scrambler_seed: int  # 2 bits


@dataclass(frozen=True)
class HbcPhyHeader:
    length: int  # 8 bits
    rate_index: int  # 3 bits


@dataclass(frozen=True)
class AirtimeBreakdown:
    preamble_us: float
    header_us: float
    psdu_us: float

    @property
    def total_us(self) -> float:
        return self.preamble_us + self.header_us + self.psdu_us


@dataclass(frozen=True)
class Ppdu:
    """Structured frame plus its serialized bit image."""

    kind: PhyKind
    preamble_bits: np.ndarray
    sfd_bits: np.ndarray
    header: NbPlcpHeader | UwbPhr | HbcPhyHeader
    mac_header: bytes
    body: bytes
    fcs: int
    bits: np.ndarray

    @property
    def psdu_bytes(self) -> bytes:
        return self.mac_header + self.body + self.fcs.to_bytes(FCS_LEN, "big")


def _check_psdu_args(mac_header: bytes, body: bytes) -> None:
    if len(mac_header) != MAC_HEADER_LEN:
        raise ValueError(f"mac header must be {MAC_HEADER_LEN} bytes, got {len(mac_header)}")
    if len(body) > MAX_BODY_LEN:
        raise FrameTooLong(f"body of {len(body)} bytes exceeds {MAX_BODY_LEN}")


def _encode_psdu(cfg: PhyConfig, psdu: bytes) -> np.ndarray:
    coded = fec.encode_blocks(bytes_to_bits(psdu), cfg.psdu_fec)
    return np.repeat(coded, cfg.spreading)


def _decode_psdu(cfg: PhyConfig, region: np.ndarray, psdu_len: int) -> bytes:
    s = cfg.spreading
    expected = fec.coded_length(psdu_len * 8, cfg.psdu_fec) * s
    if len(region) < expected:
        raise TruncatedFrame(f"frame region holds {len(region)} bits, needs {expected}")
    if len(region) > expected:
        raise TrailingBitsError(f"{len(region) - expected} bits past end of frame")
    if s > 1:
        copies = region.reshape(-1, s)
        if (copies != copies[:, :1]).any():
            raise DespreadError("repetition copies disagree")
        region = copies[:, 0]
    info = fec.decode_blocks(region, cfg.psdu_fec, psdu_len * 8)
    return bits_to_bytes(info)


def _split_psdu(psdu: bytes) -> tuple[bytes, bytes, int]:
    mac_header = psdu[:MAC_HEADER_LEN]
    body = psdu[MAC_HEADER_LEN:-FCS_LEN]
    fcs = int.from_bytes(psdu[-FCS_LEN:], "big")
    if fcs != crc16(mac_header + body):
        raise FcsMismatch(
            f"frame check 0x{fcs:04X} != computed 0x{crc16(mac_header + body):04X}"
        )
    return mac_header, body, fcs


def _take(bits: np.ndarray, offset: int, count: int, what: str) -> np.ndarray:
    if len(bits) < offset + count:
        raise TruncatedFrame(f"image ends inside {what}")
    return bits[offset : offset + count]


# ---------------------------------------------------------------- narrowband


def build_nb_ppdu(
    cfg: PhyConfig,
    mac_header: bytes,
    body: bytes,
    scrambler: int = 0,
    burst_mode: int = 0,
    preamble: np.ndarray = NB_PREAMBLE,
) -> Ppdu:
    _check_psdu_args(mac_header, body)
    if cfg.kind != PhyKind.NB:
        raise ConfigError(f"config is {cfg.kind.value}, not nb")
    fields = np.concatenate(
        [
            int_to_bits(cfg.rate_index, 3),
            int_to_bits(len(body), 8),
            int_to_bits(scrambler, 1),
            int_to_bits(burst_mode, 1),
            int_to_bits(0, 2),  # reserved
        ]
    )
    hcs = crc4_bits(int(b) for b in fields)
    header_bits = np.concatenate([fields, int_to_bits(hcs, 4)])
    fcs = crc16(mac_header + body)
    psdu = mac_header + body + fcs.to_bytes(FCS_LEN, "big")
    image = np.concatenate(
        [preamble, fec.encode_blocks(header_bits, cfg.header_fec), _encode_psdu(cfg, psdu)]
    )
    header = NbPlcpHeader(cfg.rate_index, len(body), scrambler, burst_mode, hcs)
    return Ppdu(
        PhyKind.NB, preamble, np.zeros(0, dtype=np.uint8), header,
        mac_header, body, fcs, image,
    )


def parse_nb_ppdu(bits: np.ndarray, cfg: PhyConfig, preamble: np.ndarray = NB_PREAMBLE) -> Ppdu:
    if cfg.kind != PhyKind.NB:
        raise ConfigError(f"config is {cfg.kind.value}, not nb")
    bits = np.asarray(bits, dtype=np.uint8)
    got = _take(bits, 0, len(preamble), "preamble")
    if not np.array_equal(got, preamble):
        raise PreambleMismatch("sync pattern mismatch")
    n_hdr = fec.coded_length(19, cfg.header_fec)
    coded_header = _take(bits, len(preamble), n_hdr, "header")
    header_bits = fec.decode_blocks(coded_header, cfg.header_fec, 19)
    fields, hcs = header_bits[:15], bits_to_int(header_bits[15:19])
    if hcs != crc4_bits(int(b) for b in fields):
        raise HeaderCheckError("header check bits mismatch")
    header = NbPlcpHeader(
        rate_index=bits_to_int(fields[0:3]),
        length=bits_to_int(fields[3:11]),
        scrambler=int(fields[11]),
        burst_mode=int(fields[12]),
        hcs=hcs,
    )
    psdu_len = MAC_HEADER_LEN + header.length + FCS_LEN
    psdu = _decode_psdu(cfg, bits[len(preamble) + n_hdr :], psdu_len)
    mac_header, body, fcs = _split_psdu(psdu)
    return Ppdu(
        PhyKind.NB, preamble, np.zeros(0, dtype=np.uint8), header,
        mac_header, body, fcs, bits,
    )


# --------------------------------------------------------------- pulse radio


def build_uwb_ppdu(
    cfg: PhyConfig,
    mac_header: bytes,
    body: bytes,
    scrambler_seed: int = 0,
) -> Ppdu:
    _check_psdu_args(mac_header, body)
    if cfg.kind != PhyKind.UWB:
        raise ConfigError(f"config is {cfg.kind.value}, not uwb")
    preamble = np.tile(UWB_PREAMBLE_CODE, UWB_PREAMBLE_REPS)
    phr_bits = np.concatenate(
        [
            int_to_bits(cfg.rate_index, 4),
            int_to_bits(len(body), 8),
            int_to_bits(scrambler_seed, 2),
            int_to_bits(0, 2),  # pad to a whole number of bytes
        ]
    )
    fcs = crc16(mac_header + body)
    psdu = mac_header + body + fcs.to_bytes(FCS_LEN, "big")
    image = np.concatenate(
        [preamble, UWB_SFD, fec.encode_blocks(phr_bits, cfg.header_fec), _encode_psdu(cfg, psdu)]
    )
    header = UwbPhr(cfg.rate_index, len(body), scrambler_seed)
    return Ppdu(PhyKind.UWB, preamble, UWB_SFD, header, mac_header, body, fcs, image)


def parse_uwb_ppdu(bits: np.ndarray, cfg: PhyConfig) -> Ppdu:
    if cfg.kind != PhyKind.UWB:
        raise ConfigError(f"config is {cfg.kind.value}, not uwb")
    bits = np.asarray(bits, dtype=np.uint8)
    off = 0
    for rep in range(UWB_PREAMBLE_REPS):
        got = _take(bits, off, 63, "preamble")
        if not np.array_equal(got, UWB_PREAMBLE_CODE):
            raise PreambleMismatch(f"sync code repetition {rep} mismatch")
        off += 63
    sfd = _take(bits, off, 63, "start-frame delimiter")
    if not np.array_equal(sfd, UWB_SFD):
        raise SfdMismatch("start-frame delimiter mismatch")
    off += 63
    n_hdr = fec.coded_length(16, cfg.header_fec)
    phr_bits = fec.decode_blocks(_take(bits, off, n_hdr, "header"), cfg.header_fec, 16)
    off += n_hdr
    if phr_bits[14:16].any():
        raise HeaderCheckError("nonzero header pad bits")
    header = UwbPhr(
        rate_index=bits_to_int(phr_bits[0:4]),
        length=bits_to_int(phr_bits[4:12]),
        scrambler_seed=bits_to_int(phr_bits[12:14]),
    )
    psdu_len = MAC_HEADER_LEN + header.length + FCS_LEN
    psdu = _decode_psdu(cfg, bits[off:], psdu_len)
    mac_header, body, fcs = _split_psdu(psdu)
    preamble = np.tile(UWB_PREAMBLE_CODE, UWB_PREAMBLE_REPS)
    return Ppdu(PhyKind.UWB, preamble, UWB_SFD, header, mac_header, body, fcs, bits)


# -------------------------------------------------------------- body-coupled


def build_hbc_ppdu(cfg: PhyConfig, mac_header: bytes, body: bytes) -> Ppdu:
    _check_psdu_args(mac_header, body)
    if cfg.kind != PhyKind.HBC:
        raise ConfigError(f"config is {cfg.kind.value}, not hbc")
    preamble = np.tile(HBC_PREAMBLE_UNIT, HBC_PREAMBLE_REPS)
    header_bits = np.concatenate(
        [int_to_bits(len(body), 8), int_to_bits(cfg.rate_index, 3)]
    )
    fcs = crc16(mac_header + body)
    psdu = mac_header + body + fcs.to_bytes(FCS_LEN, "big")
    image = np.concatenate(
        [preamble, HBC_SFD, fec.encode_blocks(header_bits, cfg.header_fec), _encode_psdu(cfg, psdu)]
    )
    header = HbcPhyHeader(len(body), cfg.rate_index)
    return Ppdu(PhyKind.HBC, preamble, HBC_SFD, header, mac_header, body, fcs, image)


def parse_hbc_ppdu(bits: np.ndarray, cfg: PhyConfig) -> Ppdu:
    if cfg.kind != PhyKind.HBC:
        raise ConfigError(f"config is {cfg.kind.value}, not hbc")
    bits = np.asarray(bits, dtype=np.uint8)
    unit = len(HBC_PREAMBLE_UNIT)
    off = 0
    for rep in range(HBC_PREAMBLE_REPS):
        got = _take(bits, off, unit, "preamble")
        if not np.array_equal(got, HBC_PREAMBLE_UNIT):
            raise PreambleMismatch(f"preamble copy {rep} mismatch")
        off += unit
    sfd = _take(bits, off, len(HBC_SFD), "start-frame delimiter")
    if not np.array_equal(sfd, HBC_SFD):
        raise SfdMismatch("start-frame delimiter mismatch")
    off += len(HBC_SFD)
    n_hdr = fec.coded_length(11, cfg.header_fec)
    header_bits = fec.decode_blocks(_take(bits, off, n_hdr, "header"), cfg.header_fec, 11)
    off += n_hdr
    header = HbcPhyHeader(
        length=bits_to_int(header_bits[0:8]), rate_index=bits_to_int(header_bits[8:11])
    )
    psdu_len = MAC_HEADER_LEN + header.length + FCS_LEN
    psdu = _decode_psdu(cfg, bits[off:], psdu_len)
    mac_header, body, fcs = _split_psdu(psdu)
    preamble = np.tile(HBC_PREAMBLE_UNIT, HBC_PREAMBLE_REPS)
    return Ppdu(PhyKind.HBC, preamble, HBC_SFD, header, mac_header, body, fcs, bits)


# ----------------------------------------------------------------- dispatch


_BUILDERS = {PhyKind.NB: build_nb_ppdu, PhyKind.UWB: build_uwb_ppdu, PhyKind.HBC: build_hbc_ppdu}
_PARSERS = {PhyKind.NB: parse_nb_ppdu, PhyKind.UWB: parse_uwb_ppdu, PhyKind.HBC: parse_hbc_ppdu}


def build_ppdu(cfg: PhyConfig, mac_header: bytes, body: bytes) -> Ppdu:
    return _BUILDERS[cfg.kind](cfg, mac_header, body)


def parse_ppdu(bits: np.ndarray, cfg: PhyConfig) -> Ppdu:
    return _PARSERS[cfg.kind](bits, cfg)


# ------------------------------------------------------------------ airtime


def ppdu_airtime(ppdu: Ppdu, cfg: PhyConfig) -> AirtimeBreakdown:
    """Transmission time split by region, in microseconds.

    Sync symbols go out at the raw symbol rate; header and frame regions
    take information_bits / information_rate, so coding and spreading
    stretch them through the rate, not through the bit image.
    """
    if ppdu.kind != cfg.kind:
        raise ConfigError(f"frame is {ppdu.kind.value}, config is {cfg.kind.value}")
    sync_symbols = len(ppdu.preamble_bits) + len(ppdu.sfd_bits)
    return AirtimeBreakdown(
        preamble_us=sync_symbols / cfg.symbol_rate * 1000.0,
        header_us=HEADER_INFO_BITS[cfg.kind] / info_data_rate(cfg, "header") * 1000.0,
        psdu_us=len(ppdu.psdu_bytes) * 8 / info_data_rate(cfg, "psdu") * 1000.0,
    )


def frame_airtime_us(cfg: PhyConfig, body_len: int) -> float:
    """Airtime of a frame with `body_len` body bytes, without building it."""
    if body_len < 0 or body_len > MAX_BODY_LEN:
        raise FrameTooLong(f"body of {body_len} bytes exceeds {MAX_BODY_LEN}")
    psdu_bits = (MAC_HEADER_LEN + body_len + FCS_LEN) * 8
    return (
        cfg.preamble_symbols / cfg.symbol_rate * 1000.0
        + HEADER_INFO_BITS[cfg.kind] / info_data_rate(cfg, "header") * 1000.0
        + psdu_bits / info_data_rate(cfg, "psdu") * 1000.0
    )


# ------------------------------------------------------------------ hexdump


_PREAMBLE_REPS = {PhyKind.UWB: UWB_PREAMBLE_REPS, PhyKind.HBC: HBC_PREAMBLE_REPS}


def _regions(ppdu: Ppdu, cfg: PhyConfig) -> list[tuple[str, np.ndarray]]:
    pre = len(ppdu.preamble_bits)
    sfd = len(ppdu.sfd_bits)
    n_hdr = fec.coded_length(HEADER_INFO_BITS[cfg.kind], cfg.header_fec)
    bits = ppdu.bits
    reps = _PREAMBLE_REPS.get(cfg.kind, 1)
    if reps > 1:
        unit = pre // reps
        out = [
            (f"preamble block {i + 1}/{reps}", bits[i * unit : (i + 1) * unit])
            for i in range(reps)
        ]
    else:
        out = [("preamble", bits[:pre])]
    off = pre
    if sfd:
        out.append(("sfd", bits[off : off + sfd]))
        off += sfd
    out.append((f"phy_header ({HEADER_INFO_BITS[cfg.kind]} info bits)", bits[off : off + n_hdr]))
    off += n_hdr
    out.append((f"psdu ({len(ppdu.psdu_bytes)} bytes coded)", bits[off:]))
    return out


def hexdump(ppdu: Ppdu, cfg: PhyConfig) -> str:
    """Annotated dump: bit offset, hex of the region bits, field label.

    Regions are padded to whole bytes for display only; offsets count image
    bits, so region boundaries remain exact.
    """
    lines = []
    offset = 0
    for label, bits in _regions(ppdu, cfg):
        data = bits_to_bytes(
            np.concatenate([bits, np.zeros((-len(bits)) % 8, dtype=np.uint8)])
        )
        for i in range(0, max(len(data), 1), 16):
            chunk = data[i : i + 16]
            hexpart = " ".join(f"{b:02x}" for b in chunk)
            note = f"{label} ({len(bits)} bits)" if i == 0 else ""
            lines.append(f"{offset + i * 8:>7}  {hexpart:<47}  {note}".rstrip())
        offset += len(bits)
    return "\n".join(lines)
