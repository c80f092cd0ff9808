"""Versioned text fixtures for code descriptors.

Layout::

    PLSAUTH-CODE 1
    family LDPC|POLAR|BCH
    name <name>
    n <blocklength>
    k <message length>
    ...family-specific header lines...
    data <count>
    <count lines of whitespace-separated integers>

LDPC data lines list the column indices of each row of ``H``. POLAR carries
``crc`` and ``p_design`` headers and one data line with the sorted indices
of ``U`` published in the syndrome. BCH carries ``m`` and ``t`` headers and
one data line with the generator coefficients, lowest degree first, used as
a consistency check on load.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .base import Family
from .bch import BchCode
from .ldpc import LdpcCode, build_regular_code
from .polar import PolarCode

MAGIC = "PLSAUTH-CODE"
VERSION = 1

BUILTIN = {
    "ldpc_3_6_512": "ldpc_3_6_512.code",
    "polar_512_267": "polar_512_267.code",
    "polar_1024_523": "polar_1024_523.code",
    "bch_511_259_30": "bch_511_259_30.code",
    "bch_15_7_2": "bch_15_7_2.code",
}


class FixtureError(ValueError):
    pass


def dumps(code) -> str:
    head = [f"{MAGIC} {VERSION}", f"family {code.family.value}", f"name {code.name}",
            f"n {code.n}", f"k {code.k}"]
    if code.family is Family.LDPC:
        rows = code.rows()
    elif code.family is Family.POLAR:
        head += [f"crc {code.crc_len}", f"p_design {code.p_design!r}"]
        rows = [code.frozen.tolist()]
    else:
        head += [f"m {code.m}", f"t {code.t}"]
        rows = [code.generator.tolist()]
    head.append(f"data {len(rows)}")
    return "\n".join(head + [" ".join(map(str, r)) for r in rows]) + "\n"


def loads(text: str):
    lines = [ln.strip() for ln in text.splitlines()]
    if not lines or lines[0].split()[:1] != [MAGIC]:
        raise FixtureError("missing code fixture header")
    version = int(lines[0].split()[1])
    if version != VERSION:
        raise FixtureError(f"unsupported fixture version {version}")
    meta = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("data"):
        key, _, value = lines[i].partition(" ")
        meta[key] = value.strip()
        i += 1
    if i == len(lines):
        raise FixtureError("missing data section")
    count = int(lines[i].split()[1])
    data = [[int(v) for v in ln.split()] for ln in lines[i + 1:i + 1 + count]]
    if len(data) != count:
        raise FixtureError(f"expected {count} data lines, found {len(data)}")
    try:
        family = Family(meta["family"])
        n, k = int(meta["n"]), int(meta["k"])
    except (KeyError, ValueError) as exc:
        raise FixtureError(f"bad header: {exc}") from exc
    name = meta.get("name")

    if family is Family.LDPC:
        H = np.zeros((len(data), n), dtype=np.uint8)
        for r, cols in enumerate(data):
            H[r, cols] = 1
        code = LdpcCode(H, name=name)
    elif family is Family.POLAR:
        code = PolarCode(n, k, crc_len=int(meta["crc"]), frozen=data[0],
                         p_design=float(meta["p_design"]), name=name)
    else:
        code = BchCode(int(meta["m"]), int(meta["t"]), name=name)
        if code.generator.tolist() != data[0]:
            raise FixtureError("generator polynomial does not match (m, t)")
    if (code.n, code.k) != (n, k):
        raise FixtureError(f"fixture declares ({n}, {k}), built ({code.n}, {code.k})")
    return code


def save_code(code, path):
    Path(path).write_text(dumps(code))


def load_code(path):
    return loads(Path(path).read_text())


@lru_cache(maxsize=None)
def builtin_code(name: str):
    """Load one of the shipped fixtures by name (cached; treat the result as read-only)."""
    if name not in BUILTIN:
        raise KeyError(f"unknown code fixture {name!r}; choose from {sorted(BUILTIN)}")
    text = resources.files("plsauth.coding").joinpath("data", BUILTIN[name]).read_text()
    return loads(text)


def load_any(name_or_path: str):
    if name_or_path in BUILTIN:
        return builtin_code(name_or_path)
    return load_code(name_or_path)


def regenerate_builtin(directory):
    """Rebuild every shipped fixture into ``directory``."""
    directory = Path(directory)
    codes = [
        build_regular_code(512, 3, 6, seed=2021),
        PolarCode(512, 267, crc_len=11, p_design=0.05),
        PolarCode(1024, 523, crc_len=11, p_design=0.05),
        BchCode(9, 30),
        BchCode(4, 2),
    ]
    for name, code in zip(BUILTIN, codes):
        code.name = name
        save_code(code, directory / BUILTIN[name])
