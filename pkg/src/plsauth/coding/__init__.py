"""Slepian-Wolf reconciliation codes: LDPC + OSD, polar + CRC-aided SCL, BCH + list."""

from .base import DecodeFailure, DecodeResult, Family, SlepianWolfCode, Syndrome, bsc_llr
from .bch import BchCode, bch_list_decode, bch_syndrome
from .fixtures import builtin_code, load_any, load_code, save_code
from .ldpc import LdpcCode, build_regular_code, ldpc_osd_decode, ldpc_syndrome
from .polar import PolarCode, polar_encode_syndrome, polar_scl_decode, polar_transform

__all__ = [
    "BchCode", "DecodeFailure", "DecodeResult", "Family", "LdpcCode", "PolarCode",
    "SlepianWolfCode", "Syndrome", "bch_list_decode", "bch_syndrome", "bsc_llr",
    "build_regular_code", "builtin_code", "ldpc_osd_decode", "ldpc_syndrome",
    "load_any", "load_code", "polar_encode_syndrome", "polar_scl_decode",
    "polar_transform", "save_code",
]
