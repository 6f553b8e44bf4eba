"""Prior-probability providers over valid generation tokens.

A prior is a callable ``(state, mask) -> list[float]`` where ``mask`` is the
ascending list of currently valid tokens; the result is aligned to ``mask``,
nonnegative, and sums to 1.  The search layer is agnostic to where the
numbers come from — built-in heuristics here, or an external process speaking
the bridge protocol below.

Bridge wire format (exact, newline-delimited UTF-8; one request line, one
response line):

    request:  {"m": int, "requirements": [{"care": hex, "val": hex}],
               "tokens": [int], "mask": [int]}
    response: {"p": [float]}   aligned to "mask" order

``care``/``val`` are lowercase hex strings of the 2^m-bit tables, zero-padded
to ceil(2^m / 4) digits, most-significant nibble first.  A response may
instead carry one probability per vocabulary token (length ``4 + 2m``); it is
then projected onto the mask, and mass beyond 1e-6 on invalid tokens is an
error.
"""

from __future__ import annotations

import json
import os
import select
import subprocess
import threading
import time
from typing import Callable, Sequence

from aigrw.aig import var_table
from aigrw.synthgen import AND_NEG, AND_POS, PI_BASE, GenState, vocab_size

PolicyPrior = Callable[[GenState, Sequence[int]], list[float]]

_INVALID_MASS_TOL = 1e-6


class BridgeError(RuntimeError):
    """The external policy process failed to produce a usable distribution."""


def uniform_prior(state: GenState, mask: Sequence[int]) -> list[float]:
    """Equal mass on every valid token."""
    if not mask:
        raise ValueError("empty valid-token mask")
    p = 1.0 / len(mask)
    return [p] * len(mask)


def heuristic_prior(
    state: GenState, mask: Sequence[int], boost: float = 4.0
) -> list[float]:
    """Cheap structural guidance: boost moves that plausibly finish early.

    Any valid literal closes the top obligation outright, so it gets the
    boost; an AND gets it only when its both-children-must-be-1 mask is
    already covered by some signed input, i.e. one child can be a leaf.
    """
    if not mask:
        raise ValueError("empty valid-token mask")
    if boost < 1.0:
        raise ValueError("boost must be >= 1")
    m = state.num_vars
    full = state.full
    weights = []
    care = val = 0
    if state.obligations:
        _, care, val, _, _ = state._top()
    for tok in mask:
        if tok in (AND_POS, AND_NEG):
            req1 = (care & ~val) if tok == AND_NEG else val
            covered = any(
                var_table(i, m) & req1 == req1
                or (var_table(i, m) ^ full) & req1 == req1
                for i in range(1, m + 1)
            )
            weights.append(boost if covered else 1.0)
        elif tok >= PI_BASE:
            weights.append(boost)
        else:
            weights.append(1.0)
    total = sum(weights)
    return [w / total for w in weights]


def make_heuristic_prior(boost: float = 4.0) -> PolicyPrior:
    """Bind the boost factor into the two-argument prior signature."""
    return lambda state, mask: heuristic_prior(state, mask, boost)


def external_prior(
    endpoint: "PolicyBridge", state: GenState, mask: Sequence[int]
) -> list[float]:
    """One request/response round trip against a bridge endpoint."""
    return endpoint.prior(state, mask)


def _table_hex(table: int, num_vars: int) -> str:
    width = ((1 << num_vars) + 3) // 4
    return format(table, f"0{width}x")


class _Child:
    """One bridge subprocess plus its read buffer and request lock."""

    def __init__(self, cmd: Sequence[str] | str):
        shell = isinstance(cmd, str)
        self.proc = subprocess.Popen(
            cmd,
            shell=shell,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            bufsize=0,
        )
        self.buf = bytearray()
        self.lock = threading.Lock()

    def round_trip(self, line: bytes, timeout: float) -> bytes:
        if self.proc.poll() is not None:
            raise BridgeError("bridge process has exited")
        try:
            self.proc.stdin.write(line)
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise BridgeError(f"bridge stdin closed: {e}") from e
        deadline = time.monotonic() + timeout
        fd = self.proc.stdout.fileno()
        while b"\n" not in self.buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BridgeError(f"bridge timeout after {timeout}s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise BridgeError(f"bridge timeout after {timeout}s")
            chunk = os.read(fd, 65536)
            if not chunk:
                raise BridgeError("bridge closed its stdout")
            self.buf.extend(chunk)
        line_out, _, rest = bytes(self.buf).partition(b"\n")
        self.buf = bytearray(rest)
        return line_out

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


class PolicyBridge:
    """Line-protocol client for an external policy process.

    Children are spawned lazily; requests are serialized per child, with a
    round-robin pool for concurrent callers.  `fallback_uniform` degrades
    bridge failures to the uniform prior instead of raising.
    """

    def __init__(
        self,
        cmd: Sequence[str] | str,
        timeout: float = 5.0,
        fallback_uniform: bool = False,
        pool_size: int = 1,
    ):
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        if pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        self.cmd = cmd
        self.timeout = timeout
        self.fallback_uniform = fallback_uniform
        self._children: list[_Child | None] = [None] * pool_size
        self._next = 0
        self._pick_lock = threading.Lock()

    def __call__(self, state: GenState, mask: Sequence[int]) -> list[float]:
        return self.prior(state, mask)

    def prior(self, state: GenState, mask: Sequence[int]) -> list[float]:
        if not mask:
            raise ValueError("empty valid-token mask")
        try:
            return self._ask(state, mask)
        except BridgeError:
            if self.fallback_uniform:
                return uniform_prior(state, mask)
            raise

    def _ask(self, state: GenState, mask: Sequence[int]) -> list[float]:
        m = state.num_vars
        request = {
            "m": m,
            "requirements": [
                {"care": _table_hex(r.care, m), "val": _table_hex(r.val, m)}
                for r in state.requirements
            ],
            "tokens": list(state.tokens),
            "mask": list(mask),
        }
        line = json.dumps(request, separators=(",", ":")).encode() + b"\n"
        child = self._checkout()
        with child.lock:
            reply = child.round_trip(line, self.timeout)
        return self._parse(reply, state, mask)

    def _checkout(self) -> _Child:
        with self._pick_lock:
            i = self._next
            self._next = (self._next + 1) % len(self._children)
            child = self._children[i]
            if child is None or child.proc.poll() is not None:
                child = _Child(self.cmd)
                self._children[i] = child
            return child

    def _parse(
        self, reply: bytes, state: GenState, mask: Sequence[int]
    ) -> list[float]:
        try:
            payload = json.loads(reply.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise BridgeError(f"malformed bridge response {reply!r}: {e}") from e
        if not isinstance(payload, dict):
            raise BridgeError(f"malformed bridge response {reply!r}")
        if "err" in payload:
            raise BridgeError(f"bridge reported an error: {payload['err']}")
        p = payload.get("p")
        if not isinstance(p, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in p
        ):
            raise BridgeError(f"malformed bridge response {reply!r}")
        vals = [float(x) for x in p]
        if any(x != x or x in (float("inf"), float("-inf")) or x < 0 for x in vals):
            raise BridgeError(f"non-finite or negative probability in {reply!r}")
        nvocab = vocab_size(state.num_vars)
        if len(vals) == len(mask):
            picked = vals
        elif len(vals) == nvocab:
            picked = [vals[t] for t in mask]
            invalid = sum(vals) - sum(picked)
            if invalid > _INVALID_MASS_TOL:
                raise BridgeError(
                    f"probability mass {invalid:g} on invalid tokens"
                )
        else:
            raise BridgeError(
                f"response length {len(vals)} matches neither mask "
                f"({len(mask)}) nor vocabulary ({nvocab})"
            )
        total = sum(picked)
        if total <= 0:
            raise BridgeError("no probability mass on any valid token")
        return [x / total for x in picked]

    def close(self) -> None:
        for child in self._children:
            if child is not None:
                child.close()
        self._children = [None] * len(self._children)

    def __enter__(self) -> "PolicyBridge":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
