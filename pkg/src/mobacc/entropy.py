"""Per-user mobility entropy measures.

Three measures per trajectory, all in bits: random entropy (log2 of the
distinct-location count), temporal-uncorrelated entropy (Shannon entropy of
the visit-frequency distribution), and real entropy (an estimate of the
entropy rate of the full location sequence, order included).

Real entropy uses the match-length estimator: with ``lam[i]`` the length of
the shortest subsequence starting at position i that does not occur inside
the prefix before i, the estimate is ``n * log2(n) / sum(lam)``. Two
implementations are provided: a suffix-automaton pass (linear time) and a
direct quadratic scan used as its verification oracle.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence

from mobacc.ingest import Trajectory

ORACLE_MAX_LENGTH = 5000


@dataclass(frozen=True)
class EntropyProfile:
    """Bundle of the three entropy measures for one user."""

    user_id: str
    s_rand: float
    s_unc: float
    s_real: float
    n_unique_locations: int
    sequence_length: int


def random_entropy(traj: Trajectory) -> float:
    """log2 of the number of distinct locations visited."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    return math.log2(len(set(traj.locations)))


def uncorrelated_entropy(traj: Trajectory) -> float:
    """Shannon entropy of the empirical visit-frequency distribution."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    counts = Counter(traj.locations)
    n = len(traj)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


class _SuffixAutomaton:
    """Suffix automaton over a full sequence, with the end position of each
    state's first occurrence (needed to restrict matches to a prefix)."""

    __slots__ = ("trans", "link", "length", "min_end")

    def __init__(self, seq: Sequence[Hashable]):
        self.trans: list[dict] = [{}]
        self.link = [-1]
        self.length = [0]
        self.min_end = [0]
        last = 0
        for pos, sym in enumerate(seq):
            last = self._extend(sym, pos, last)
        self._propagate_min_end()

    def _new_state(self, length: int, link: int, trans: dict, min_end: int) -> int:
        self.trans.append(trans)
        self.link.append(link)
        self.length.append(length)
        self.min_end.append(min_end)
        return len(self.length) - 1

    def _extend(self, sym: Hashable, pos: int, last: int) -> int:
        trans, link, length = self.trans, self.link, self.length
        cur = self._new_state(length[last] + 1, 0, {}, pos + 1)
        p = last
        while p != -1 and sym not in trans[p]:
            trans[p][sym] = cur
            p = link[p]
        if p != -1:
            q = trans[p][sym]
            if length[p] + 1 == length[q]:
                link[cur] = q
            else:
                # clone: first-occurrence end filled in by the final pass
                clone = self._new_state(length[p] + 1, link[q], dict(trans[q]), 1 << 62)
                while p != -1 and trans[p].get(sym) == q:
                    trans[p][sym] = clone
                    p = link[p]
                link[q] = clone
                link[cur] = clone
        return cur

    def _propagate_min_end(self) -> None:
        # min over the endpos set = min over link-tree children (+ own creation)
        order = sorted(range(1, len(self.length)), key=self.length.__getitem__, reverse=True)
        for v in order:
            parent = self.link[v]
            if parent >= 0 and self.min_end[v] < self.min_end[parent]:
                self.min_end[parent] = self.min_end[v]


def match_lengths(seq: Sequence[Hashable]) -> list[int]:
    """lam[i] = 1 + length of the longest subsequence starting at i that
    occurs fully inside seq[:i]; capped naturally at the remaining length."""
    n = len(seq)
    if n == 0:
        return []
    sam = _SuffixAutomaton(seq)
    trans, link, length, min_end = sam.trans, sam.link, sam.length, sam.min_end
    lams = [0] * n
    state = 0
    matched = 0
    for i in range(n):
        while i + matched < n:
            nxt = trans[state].get(seq[i + matched])
            if nxt is None or min_end[nxt] > i:
                break
            state = nxt
            matched += 1
        lams[i] = matched + 1
        if matched > 0:
            matched -= 1
            while state != 0 and matched <= length[link[state]]:
                state = link[state]
        else:
            state = 0
    return lams


def match_lengths_naive(seq: Sequence[Hashable]) -> list[int]:
    """Same quantity as :func:`match_lengths` by direct substring scanning
    with no index structure; quadratic, used as the verification oracle."""
    n = len(seq)
    symbols = {sym: chr(i) for i, sym in enumerate(dict.fromkeys(seq))}
    text = "".join(symbols[sym] for sym in seq)
    lams = []
    for i in range(n):
        prefix = text[:i]
        matched = 0
        for ell in range(1, n - i + 1):
            if text[i : i + ell] in prefix:
                matched = ell
            else:
                break
        lams.append(matched + 1)
    return lams


def _estimate_bits(lams: Sequence[int]) -> float:
    n = len(lams)
    if n < 2:
        raise ValueError("real entropy needs a sequence of length >= 2")
    return n * math.log2(n) / sum(lams)


def real_entropy_lz(traj: Trajectory) -> float:
    """Match-length estimate of the entropy rate, in bits."""
    if len(traj) < 2:
        raise ValueError("real entropy needs a sequence of length >= 2")
    return _estimate_bits(match_lengths(traj.locations))


def real_entropy_oracle(traj: Trajectory) -> float:
    """Oracle twin of :func:`real_entropy_lz`; refuses long sequences."""
    n = len(traj)
    if n > ORACLE_MAX_LENGTH:
        raise ValueError(f"oracle capped at length {ORACLE_MAX_LENGTH}, got {n}")
    if n < 2:
        raise ValueError("real entropy needs a sequence of length >= 2")
    return _estimate_bits(match_lengths_naive(traj.locations))


def profile_sequence(user_id: str, locations: Sequence[Hashable]) -> EntropyProfile:
    """All three measures plus the distinct-location and event counts."""
    n = len(locations)
    if n < 2:
        raise ValueError("entropy profile needs a sequence of length >= 2")
    counts = Counter(locations)
    s_unc = -sum((c / n) * math.log2(c / n) for c in counts.values())
    return EntropyProfile(
        user_id=user_id,
        s_rand=math.log2(len(counts)),
        s_unc=s_unc,
        s_real=_estimate_bits(match_lengths(locations)),
        n_unique_locations=len(counts),
        sequence_length=n,
    )


def entropy_profile(traj: Trajectory) -> EntropyProfile:
    """All three measures for one user's trajectory."""
    return profile_sequence(traj.user_id, traj.locations)
