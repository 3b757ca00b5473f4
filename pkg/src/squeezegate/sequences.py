"""Builders for the rectangle-loop gate family.

A loop is four edges in pulse order::

    D_q^(q_ion)(+a), [D_p^(p_ion)(-a)], D_q^(q_ion)(-a), [D_p^(p_ion)(+a)]

and each p-edge may be sandwiched by squeezes on other ions, in pulse order
``S(-xi) ... D_p ... S(+xi)``.  That sandwich multiplies the p-edge by
``exp(s_m xi)`` in branch ``s``.  The clockwise orientation gives branch
angles ``theta_s = -Phi0 * prod exp(s_m xi_m) * s_q * s_p`` so the gate is
``exp(-i Phi)`` with ``Phi = Phi0 (cosh xi X1X3 + sinh xi X1X2X3)`` for the
three-ion builder.  Edge amplitude ``a = sqrt(Phi0 / 2)``: a rectangle with
sides ``2a`` (branch separation) encloses twice the single-branch area.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import ConfigError
from .model import (DURATIONS, ChainConfig, Displace, PrepX, PrepZ, PulseOp, PulseSequence, Rotate,
                    Squeeze, preset_chain)

AREA_CONSTANT = 2.0
XI_CAP = 1.0


def _durations(chain: ChainConfig) -> dict[str, float]:
    return DURATIONS.get(chain.n_ions, DURATIONS[3])


def _sandwich(p_op: Displace, squeezers: Sequence[tuple[int, float]], dur: float,
              reverse: bool) -> list[PulseOp]:
    # Outermost squeezer listed last, so the 4-ion sandwich reads S3(-z) S2(-x) D S2(+x) S3(+z).
    first = -1 if not reverse else 1
    before = [Squeeze(ion, xi, sign=first, duration=dur) for ion, xi in reversed(squeezers) if xi != 0]
    after = [Squeeze(ion, xi, sign=-first, duration=dur) for ion, xi in squeezers if xi != 0]
    return before + [p_op] + after


def rectangle(chain: ChainConfig, phi0: float, q_ion: int, p_ion: int,
              squeezers: Sequence[tuple[int, float]] = (), echo: bool = True,
              reverse_sandwich: bool = False, label: str = "") -> PulseSequence:
    """General squeezed rectangle; see the module docstring for the layout."""
    if phi0 < 0:
        raise ConfigError("phi0 must be nonnegative")
    if any(xi < 0 for _, xi in squeezers):
        raise ConfigError("squeeze parameters must be nonnegative")
    ions = {q_ion, p_ion, *(m for m, _ in squeezers)}
    if len(ions) != 2 + len(squeezers) or not all(0 <= n < chain.n_ions for n in ions):
        raise ConfigError("displaced and squeezed ions must be distinct and inside the chain")
    dur = _durations(chain)
    a = math.sqrt(phi0 / AREA_CONSTANT)
    dq = lambda amp: Displace(q_ion, complex(amp, 0.0), duration=dur["displace"])  # noqa: E731
    dp = lambda amp: Displace(p_ion, complex(0.0, amp), duration=dur["displace"])  # noqa: E731
    edge_ions = sorted({q_ion, p_ion})
    ops: list[PulseOp] = [dq(a)]
    ops += _sandwich(dp(-a), squeezers, dur["squeeze"], reverse_sandwich)
    if echo:
        ops += [Rotate(n, 0.0, math.pi, duration=dur["rotate"]) for n in edge_ions]
    ops.append(dq(-a))
    ops += _sandwich(dp(a), squeezers, dur["squeeze"], reverse_sandwich)
    if echo:
        ops += [Rotate(n, 0.0, -math.pi, duration=dur["rotate"]) for n in edge_ions]
    meta = {"phi0": phi0, "squeezers": [[m, xi] for m, xi in squeezers], "echo": echo,
            "reverse_sandwich": reverse_sandwich}
    return PulseSequence(chain, tuple(ops), label, meta)


def _require_ions(chain: ChainConfig, n: int) -> None:
    if chain.n_ions != n:
        raise ConfigError(f"builder needs a {n}-ion chain, got {chain.n_ions}")


def ms_rectangle(chain: ChainConfig | None = None, phi0: float = 0.0, echo: bool = True) -> PulseSequence:
    """Pairwise MS phase gate ``exp(-i phi0 X1 X3)`` between the edge ions of three."""
    chain = chain or preset_chain(3)
    _require_ions(chain, 3)
    seq = rectangle(chain, phi0, 0, 2, (), echo, label=f"ms(phi0={phi0:.12g})")
    seq.metadata["family"] = "ms"
    return seq


def squeezed_rectangle_3(chain: ChainConfig | None = None, phi0: float = 0.0, xi: float = 0.0,
                         echo: bool = True, reverse_sandwich: bool = False) -> PulseSequence:
    chain = chain or preset_chain(3)
    _require_ions(chain, 3)
    seq = rectangle(chain, phi0, 0, 2, [(1, xi)], echo, reverse_sandwich,
                    label=f"rect3(phi0={phi0:.12g},xi={xi:.12g})")
    seq.metadata.update(family="rect3", xi=xi)
    return seq


def squeezed_rectangle_4(chain: ChainConfig | None = None, phi0: float = 0.0, xi: float = 0.0,
                         zeta: float = 0.0, echo: bool = True,
                         reverse_sandwich: bool = False) -> PulseSequence:
    chain = chain or preset_chain(4)
    _require_ions(chain, 4)
    seq = rectangle(chain, phi0, 0, 3, [(1, xi), (2, zeta)], echo, reverse_sandwich,
                    label=f"rect4(phi0={phi0:.12g},xi={xi:.12g},zeta={zeta:.12g})")
    seq.metadata.update(family="rect4", xi=xi, zeta=zeta)
    return seq


def solve_pure_three_body(phi3: float, xi_cap: float = XI_CAP) -> tuple[float, float]:
    """``(phi0, xi)`` with ``pi tanh xi = phi3`` and ``phi0 = pi / cosh xi``."""
    if not 0 < phi3 <= math.pi * math.tanh(xi_cap):
        raise ConfigError(f"three-body angle {phi3} outside (0, pi tanh({xi_cap})]")
    xi = math.atanh(phi3 / math.pi)
    return math.pi / math.cosh(xi), xi


def pure_three_body(chain: ChainConfig | None = None, phi3: float = math.pi / 4, echo: bool = True,
                    xi_cap: float = XI_CAP) -> PulseSequence:
    """``exp(-i phi3 X1X2X3)`` up to a global phase (the two-body part is ``pi``)."""
    phi0, xi = solve_pure_three_body(phi3, xi_cap)
    seq = squeezed_rectangle_3(chain, phi0, xi, echo)
    seq.metadata.update(family="xxx", phi3=phi3)
    return PulseSequence(seq.chain, seq.ops, f"xxx(phi3={phi3:.12g})", seq.metadata)


def with_prep(seq: PulseSequence, prep: Sequence[tuple[str, str]]) -> PulseSequence:
    """Prepend prep pseudo-ops; ``prep`` holds one ``(basis, direction)`` per ion."""
    if len(prep) != seq.n_ions:
        raise ConfigError(f"prep has {len(prep)} entries for {seq.n_ions} ions")
    ops: list[PulseOp] = []
    for ion, (basis, direction) in enumerate(prep):
        if basis not in ("z", "x"):
            raise ConfigError(f"prep basis must be 'z' or 'x', got {basis!r}")
        ops.append((PrepZ if basis == "z" else PrepX)(ion, direction))
    return PulseSequence(seq.chain, tuple(ops) + seq.dynamic_ops, seq.label, dict(seq.metadata))


def with_analysis_rotations(seq: PulseSequence, theta: float) -> PulseSequence:
    dur = _durations(seq.chain)["rotate"]
    return seq.then(*(Rotate(n, theta, math.pi / 2, duration=dur) for n in range(seq.n_ions)))


FAMILIES = ("ms", "rect3", "rect4", "xxx")


def build(family: str, phi0: float = 0.0, xi: float = 0.0, zeta: float = 0.0,
          phi3: float = math.pi / 4, echo: bool = True, chain: ChainConfig | None = None) -> PulseSequence:
    if family == "ms":
        return ms_rectangle(chain, phi0, echo)
    if family == "rect3":
        return squeezed_rectangle_3(chain, phi0, xi, echo)
    if family == "rect4":
        return squeezed_rectangle_4(chain, phi0, xi, zeta, echo)
    if family == "xxx":
        return pure_three_body(chain, phi3, echo)
    raise ConfigError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
