"""Static queuing schemes: the injection-time flow -> virtual channel map.

All four schemes are stateless and depend only on (scheme, src, dst, N, nVC),
so a destination always lands on the same VC for a given scheme (except under
Flow2SL, where the VC additionally depends on the source group).
"""

from __future__ import annotations

import math
from enum import Enum


class SqsError(Exception):
    pass


class Scheme(str, Enum):
    ONE_Q = "one_q"
    DBBM = "dbbm"
    BBQ = "bbq"
    FLOW2SL = "flow2sl"


def scheme_from_str(name):
    try:
        return Scheme(name)
    except ValueError:
        valid = ", ".join(s.value for s in Scheme)
        raise SqsError(f"unknown SQS {name!r} (valid: {valid})") from None


def map_vc(scheme, src, dst, n_endpoints, nvc):
    """VC index in [0, nvc) for a packet from src to dst.

    one_q:    everything on VC 0.
    dbbm:     destination modulo nVC (low-order destination split).
    bbq:      contiguous destination bands (high-order destination split).
    flow2sl:  source/destination groups of size ceil(N/nVC); the VC is the
              group distance (dstG - srcG) mod nVC, so each source group
              spreads its destination groups over all VCs.
    """
    if nvc < 1:
        raise SqsError(f"nvc must be >= 1, got {nvc}")
    if not (0 <= src < n_endpoints) or not (0 <= dst < n_endpoints):
        raise SqsError(f"endpoint out of range: src={src}, dst={dst}, N={n_endpoints}")
    if scheme == Scheme.ONE_Q:
        return 0
    if scheme == Scheme.DBBM:
        return dst % nvc
    if scheme == Scheme.BBQ:
        return dst * nvc // n_endpoints
    if scheme == Scheme.FLOW2SL:
        gs = math.ceil(n_endpoints / nvc)
        return (dst // gs - src // gs) % nvc
    raise SqsError(f"unknown scheme {scheme!r}")
