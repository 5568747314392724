"""Band registry, modulation parameters, and the information-rate engine.

Each operating band carries a published pair of rate entries per packet
component (header at a fixed low rate, payload at a selectable rate); the
information data rate follows from

    rate = symbol_rate * bits_per_symbol * (k / n) / spreading

with spreading a repetition factor in {1, 2, 4}. The 21-row narrowband
table reproduces from these parameters to within 0.1 Kbps.

A registry override directory can be supplied explicitly or through the
BANSIM_CONFIG_DIR environment variable; a `rates.csv` in that directory
(the machine-readable `rates` command output) replaces the built-in rows.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from bansim.errors import ConfigError

__all__ = [
    "Band",
    "Modulation",
    "PhyKind",
    "PhyConfig",
    "RateRow",
    "UwbChannelPlan",
    "UWB_CHANNELS",
    "info_data_rate",
    "load_rate_table",
    "builtin_rate_table",
    "nb_config",
    "uwb_config",
    "hbc_config",
    "band_configs",
    "write_rate_csv",
    "CONFIG_DIR_ENV",
]

CONFIG_DIR_ENV = "BANSIM_CONFIG_DIR"


class PhyKind(str, Enum):
    NB = "nb"
    UWB = "uwb"
    HBC = "hbc"


class Modulation(str, Enum):
    DBPSK = "pi/2-DBPSK"
    DQPSK = "pi/4-DQPSK"
    D8PSK = "D8PSK"
    GMSK = "GMSK"
    UWB_GENERIC = "UWB"
    EFC = "EFC"


BITS_PER_SYMBOL = {
    Modulation.DBPSK: 1,
    Modulation.DQPSK: 2,
    Modulation.D8PSK: 3,
    Modulation.GMSK: 1,
    Modulation.UWB_GENERIC: 1,
    Modulation.EFC: 1,
}


class Band(str, Enum):
    NB_402_405 = "402-405"
    NB_420_450 = "420-450"
    NB_863_870 = "863-870"
    NB_902_928 = "902-928"
    NB_950_956 = "950-956"
    NB_2360_2400 = "2360-2400"
    NB_2400_2483 = "2400-2483.5"
    UWB_LOW = "uwb-low"
    UWB_HIGH = "uwb-high"
    HBC_16 = "hbc-16"
    HBC_27 = "hbc-27"


@dataclass(frozen=True)
class BandInfo:
    kind: PhyKind
    center_freq: float  # MHz
    bandwidth: float  # MHz
    # Regulations forbid beacons in the implant band; the superframe
    # scheduler consults this flag.
    beacon_prohibited: bool = False


_BAND_INFO = {
    Band.NB_402_405: BandInfo(PhyKind.NB, 403.5, 3.0, beacon_prohibited=True),
    Band.NB_420_450: BandInfo(PhyKind.NB, 435.0, 30.0),
    Band.NB_863_870: BandInfo(PhyKind.NB, 866.5, 7.0),
    Band.NB_902_928: BandInfo(PhyKind.NB, 915.0, 26.0),
    Band.NB_950_956: BandInfo(PhyKind.NB, 953.0, 6.0),
    Band.NB_2360_2400: BandInfo(PhyKind.NB, 2380.0, 40.0),
    Band.NB_2400_2483: BandInfo(PhyKind.NB, 2441.75, 83.5),
    Band.UWB_LOW: BandInfo(PhyKind.UWB, 3993.6, 499.2),
    Band.UWB_HIGH: BandInfo(PhyKind.UWB, 7987.2, 499.2),
    Band.HBC_16: BandInfo(PhyKind.HBC, 16.0, 4.0),
    Band.HBC_27: BandInfo(PhyKind.HBC, 27.0, 4.0),
}


def band_info(band: Band) -> BandInfo:
    return _BAND_INFO[band]


@dataclass(frozen=True)
class UwbChannelPlan:
    channel_id: int
    center_freq: float  # MHz
    mandatory: bool


# Low band: three channels on the 499.2 MHz raster; high band: eight.
UWB_CHANNELS = [
    UwbChannelPlan(1, 7 * 499.2, False),
    UwbChannelPlan(2, 8 * 499.2, True),
    UwbChannelPlan(3, 9 * 499.2, False),
] + [
    UwbChannelPlan(ch, (ch + 9) * 499.2, ch == 7) for ch in range(4, 12)
]


# Sync pattern sizes in symbols, including any start-frame delimiter.
NB_PREAMBLE_SYMBOLS = 90
UWB_PREAMBLE_SYMBOLS = 5 * 63  # four code repetitions + one delimiter code
HBC_PREAMBLE_SYMBOLS = 4 * 32 + 16  # four preamble copies + one delimiter

HEADER_CODE = (31, 19)
PSDU_CODE = (63, 51)


@dataclass(frozen=True)
class PhyConfig:
    """Operating point: band plus the modulation/coding of both components.

    `spreading` applies to the payload component, `header_spreading` to the
    PHY header; both are repetition factors. `rate_override_kbps`, when set,
    pins the information rate of both components directly, bypassing the
    arithmetic (used for rate points quoted without table parameters).
    """

    band_id: Band
    modulation: Modulation
    symbol_rate: float  # kilosymbols per second
    header_modulation: Modulation | None = None
    header_fec: tuple[int, int] = HEADER_CODE
    psdu_fec: tuple[int, int] = PSDU_CODE
    spreading: int = 1
    header_spreading: int = 2
    preamble_symbols: int = NB_PREAMBLE_SYMBOLS
    center_freq: float = 0.0  # MHz; 0 = band default
    channel_bandwidth: float = 0.0  # MHz; 0 = band default
    rate_index: int = 0
    rate_override_kbps: float | None = None

    def __post_init__(self):
        if self.spreading not in (1, 2, 4) or self.header_spreading not in (1, 2, 4):
            raise ConfigError(f"spreading must be 1, 2, or 4")
        for n, k in (self.header_fec, self.psdu_fec):
            if k < 1 or n < k:
                raise ConfigError(f"bad code geometry ({n},{k})")
        if self.symbol_rate <= 0:
            raise ConfigError("symbol rate must be positive")
        info = _BAND_INFO[self.band_id]
        if self.header_modulation is None:
            object.__setattr__(self, "header_modulation", self.modulation)
        if not self.center_freq:
            object.__setattr__(self, "center_freq", info.center_freq)
        if not self.channel_bandwidth:
            object.__setattr__(self, "channel_bandwidth", info.bandwidth)

    @property
    def kind(self) -> PhyKind:
        return _BAND_INFO[self.band_id].kind

    @property
    def header_rate_kbps(self) -> float:
        return info_data_rate(self, "header")

    @property
    def psdu_rate_kbps(self) -> float:
        return info_data_rate(self, "psdu")


def info_data_rate(cfg: PhyConfig, component: str) -> float:
    """Information data rate of one packet component, in Kbps."""
    if component == "header":
        modulation, (n, k), spreading = cfg.header_modulation, cfg.header_fec, cfg.header_spreading
    elif component == "psdu":
        modulation, (n, k), spreading = cfg.modulation, cfg.psdu_fec, cfg.spreading
    else:
        raise ValueError(f"component must be 'header' or 'psdu', got {component!r}")
    if cfg.rate_override_kbps is not None:
        return cfg.rate_override_kbps
    bps = BITS_PER_SYMBOL.get(modulation)
    if bps is None:
        raise ConfigError(f"unknown modulation {modulation!r}")
    return cfg.symbol_rate * bps * (k / n) / spreading


# Narrowband registry: per band, the symbol rate and the modulation and
# spreading of (header, low-rate payload, high-rate payload). Spreading
# values were fixed by requiring every published rate to reproduce within
# 0.1 Kbps; at 600 ksps the low-rate entries spread by 4, elsewhere by 2.
_M = Modulation
_NB_BANDS: dict[Band, tuple[float, _M, tuple[_M, int], tuple[_M, int]]] = {
    Band.NB_402_405: (187.5, _M.DBPSK, (_M.DBPSK, 2), (_M.DQPSK, 1)),
    Band.NB_420_450: (187.5, _M.GMSK, (_M.GMSK, 2), (_M.GMSK, 1)),
    Band.NB_863_870: (250.0, _M.DBPSK, (_M.DBPSK, 2), (_M.DQPSK, 1)),
    Band.NB_902_928: (300.0, _M.DBPSK, (_M.DBPSK, 2), (_M.DQPSK, 1)),
    Band.NB_950_956: (250.0, _M.DBPSK, (_M.DBPSK, 2), (_M.DQPSK, 1)),
    Band.NB_2360_2400: (600.0, _M.DBPSK, (_M.DBPSK, 4), (_M.DBPSK, 1)),
    Band.NB_2400_2483: (600.0, _M.DBPSK, (_M.DBPSK, 4), (_M.DBPSK, 1)),
}


def nb_config(band: Band, rate: str = "high") -> PhyConfig:
    """Operational narrowband config: `rate` picks the payload entry."""
    if band not in _NB_BANDS:
        raise ConfigError(f"{band.value} is not a narrowband band")
    sym, hdr_mod, low, high = _NB_BANDS[band]
    if rate not in ("low", "high"):
        raise ConfigError(f"rate must be 'low' or 'high', got {rate!r}")
    mod, spread = low if rate == "low" else high
    return PhyConfig(
        band_id=band,
        modulation=mod,
        symbol_rate=sym,
        header_modulation=hdr_mod,
        spreading=spread,
        header_spreading=4 if sym == 600.0 else 2,
        rate_index=0 if rate == "low" else 1,
    )


def uwb_config(channel: int = 2) -> PhyConfig:
    """Pulse-radio config on one of the 11 channels.

    The 603.1 ksps symbol clock puts the payload information rate at the
    mandatory 488.2 Kbps under the (63,51) code.
    """
    plan = next((c for c in UWB_CHANNELS if c.channel_id == channel), None)
    if plan is None:
        raise ConfigError(f"channel {channel} outside 1..11")
    return PhyConfig(
        band_id=Band.UWB_LOW if channel <= 3 else Band.UWB_HIGH,
        modulation=Modulation.UWB_GENERIC,
        symbol_rate=603.1,
        spreading=1,
        header_spreading=1,
        preamble_symbols=UWB_PREAMBLE_SYMBOLS,
        center_freq=plan.center_freq,
        channel_bandwidth=499.2,
    )


def hbc_config(center_mhz: int = 16) -> PhyConfig:
    """Body-coupled config; symbol clock equals the 4 MHz channel width."""
    if center_mhz not in (16, 27):
        raise ConfigError(f"band center must be 16 or 27 MHz, got {center_mhz}")
    return PhyConfig(
        band_id=Band.HBC_16 if center_mhz == 16 else Band.HBC_27,
        modulation=Modulation.EFC,
        symbol_rate=4000.0,
        spreading=4,
        header_spreading=4,
        preamble_symbols=HBC_PREAMBLE_SYMBOLS,
    )


def band_configs(band: Band) -> list[PhyConfig]:
    """Both operational payload-rate configs of a narrowband band."""
    return [nb_config(band, "low"), nb_config(band, "high")]


@dataclass(frozen=True)
class RateRow:
    """One line of the published rate table: a component of a config."""

    band: Band
    component: str  # "header" or "psdu"
    config: PhyConfig
    rate_kbps: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "rate_kbps", info_data_rate(self.config, self.component))

    @property
    def modulation(self) -> Modulation:
        cfg = self.config
        return cfg.header_modulation if self.component == "header" else cfg.modulation

    @property
    def fec(self) -> tuple[int, int]:
        return self.config.header_fec if self.component == "header" else self.config.psdu_fec

    @property
    def spreading(self) -> int:
        cfg = self.config
        return cfg.header_spreading if self.component == "header" else cfg.spreading


def builtin_rate_table() -> list[RateRow]:
    """The 21 narrowband rows: per band, one header and two payload entries."""
    rows = []
    for band in _NB_BANDS:
        low, high = band_configs(band)
        rows.append(RateRow(band, "header", low))
        rows.append(RateRow(band, "psdu", low))
        rows.append(RateRow(band, "psdu", high))
    return rows


_CSV_FIELDS = [
    "band",
    "component",
    "modulation",
    "symbol_rate_ksps",
    "fec_n",
    "fec_k",
    "spreading",
    "rate_kbps",
]


def write_rate_csv(rows: list[RateRow], fh) -> None:
    """Emit the machine-readable table; `load_rate_table` reads it back."""
    writer = csv.writer(fh)
    writer.writerow(_CSV_FIELDS)
    for row in rows:
        n, k = row.fec
        writer.writerow(
            [
                row.band.value,
                row.component,
                row.modulation.value,
                f"{row.config.symbol_rate:g}",
                n,
                k,
                row.spreading,
                f"{row.rate_kbps:.1f}",
            ]
        )


def _row_from_csv(record: dict[str, str], line: int) -> RateRow:
    try:
        band = Band(record["band"])
        modulation = Modulation(record["modulation"])
        sym = float(record["symbol_rate_ksps"])
        n, k = int(record["fec_n"]), int(record["fec_k"])
        spreading = int(record["spreading"])
        component = record["component"]
        published = float(record["rate_kbps"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"rates.csv line {line}: {exc}") from exc
    if component not in ("header", "psdu"):
        raise ConfigError(f"rates.csv line {line}: bad component {component!r}")
    if component == "header":
        cfg = PhyConfig(
            band_id=band,
            modulation=modulation,
            symbol_rate=sym,
            header_modulation=modulation,
            header_fec=(n, k),
            header_spreading=spreading,
        )
    else:
        cfg = PhyConfig(
            band_id=band,
            modulation=modulation,
            symbol_rate=sym,
            psdu_fec=(n, k),
            spreading=spreading,
        )
    row = RateRow(band, component, cfg)
    if abs(row.rate_kbps - published) > 0.1:
        raise ConfigError(
            f"rates.csv line {line}: published {published} Kbps disagrees with "
            f"computed {row.rate_kbps:.1f}"
        )
    return row


def load_rate_table(config_dir: str | os.PathLike | None = None) -> list[RateRow]:
    """Rate table rows, from the override directory when one is configured."""
    directory = config_dir if config_dir is not None else os.environ.get(CONFIG_DIR_ENV)
    if directory:
        path = Path(directory) / "rates.csv"
        if path.exists():
            with open(path, newline="") as fh:
                reader = csv.DictReader(fh)
                return [
                    _row_from_csv(record, line)
                    for line, record in enumerate(reader, start=2)
                ]
    return builtin_rate_table()
