"""Communication accounting: quantized reals and the per-run cost ledger.

Bit-cost conventions, applied uniformly by every protocol:

* sending an element of a size-``N`` domain costs ``ceil(log2 N)`` bits
  (0 bits when ``N == 1``);
* sending a real from ``[-1, 1]`` at additive precision ``eta`` costs
  ``ceil(log2(2/eta)) + 1`` bits and the decoded value is within ``eta/2``
  of the (clamped) input;
* shared randomness is free and never appears in the ledger.

Reals from other ranges go through :func:`quantize_interval`, which maps
the range onto ``[-1, 1]`` first; the bit count becomes
``ceil(log2(span/eta)) + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InputValidationError

__all__ = [
    "ALICE",
    "BOB",
    "index_bits",
    "real_bits",
    "quantize",
    "quantize_interval",
    "Message",
    "CostLedger",
]

ALICE = "alice"
BOB = "bob"


def index_bits(domain_size: int) -> int:
    """Bits to name one element of a size-``domain_size`` domain."""
    if domain_size < 1:
        raise InputValidationError(f"domain_size must be >= 1, got {domain_size}")
    return math.ceil(math.log2(domain_size)) if domain_size > 1 else 0


def real_bits(eta: float) -> int:
    """Bits to send a real in [-1, 1] at additive precision ``eta``."""
    if not 0.0 < eta <= 2.0:
        raise InputValidationError(f"precision must lie in (0, 2], got {eta}")
    return math.ceil(math.log2(2.0 / eta)) + 1


def quantize(value: float, eta: float) -> tuple[int, int, float]:
    """Round ``value`` in [-1, 1] to precision ``eta``.

    Returns ``(code, bits, decoded)`` with ``|decoded - clamp(value)| <= eta/2``.
    Values outside [-1, 1] are clamped to the window first.  The codebook is
    the uniform grid of ``2**bits`` cell midpoints, so the achieved error is
    at most ``2**-bits <= eta/4``, comfortably inside the contract.
    """
    bits = real_bits(eta)
    levels = 1 << bits
    v = min(1.0, max(-1.0, float(value)))
    code = int((v + 1.0) / 2.0 * levels)
    if code == levels:  # v == 1.0 lands on the right edge
        code = levels - 1
    decoded = -1.0 + (code + 0.5) * (2.0 / levels)
    return code, bits, decoded


def quantize_interval(value: float, lo: float, hi: float, eta: float) -> tuple[int, int, float]:
    """Quantize a real from ``[lo, hi]`` at additive precision ``eta``.

    Affinely maps onto [-1, 1] and delegates to :func:`quantize`; the
    decoded value is within ``eta/2`` of the clamped input.
    """
    if not hi > lo:
        raise InputValidationError(f"need hi > lo, got [{lo}, {hi}]")
    span = hi - lo
    mapped = 2.0 * (float(value) - lo) / span - 1.0
    # a precision as coarse as the whole span still needs one bit
    code, bits, dec = quantize(mapped, min(2.0, 2.0 * eta / span))
    return code, bits, lo + (dec + 1.0) * span / 2.0


@dataclass(frozen=True)
class Message:
    """One ledger entry: who spoke, how many bits, and a short label."""

    speaker: str
    bits: int
    label: str = ""

    def __post_init__(self):
        if self.speaker not in (ALICE, BOB):
            raise InputValidationError(f"unknown speaker {self.speaker!r}")
        if self.bits < 0:
            raise InputValidationError("message bits must be >= 0")


@dataclass
class CostLedger:
    """Append-only record of everything sent during one protocol run.

    ``rounds`` counts maximal blocks of consecutive messages by the same
    speaker (0 for an empty transcript), which is the usual alternation
    count plus one.
    """

    messages: list[Message] = field(default_factory=list)

    def send(self, speaker: str, bits: int, label: str = "") -> None:
        self.messages.append(Message(speaker, int(bits), label))

    def extend(self, other: "CostLedger") -> None:
        self.messages.extend(other.messages)

    def bits_for(self, speaker: str) -> int:
        return sum(m.bits for m in self.messages if m.speaker == speaker)

    @property
    def bits_alice(self) -> int:
        return self.bits_for(ALICE)

    @property
    def bits_bob(self) -> int:
        return self.bits_for(BOB)

    @property
    def total_bits(self) -> int:
        return sum(m.bits for m in self.messages)

    @property
    def rounds(self) -> int:
        rounds = 0
        last = None
        for m in self.messages:
            if m.speaker != last:
                rounds += 1
                last = m.speaker
        return rounds

    def labelled_bits(self, label: str) -> int:
        return sum(m.bits for m in self.messages if m.label == label)
