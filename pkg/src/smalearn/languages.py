"""The six benchmark languages: membership oracles and word generators.

Words are tuples of symbol ids over the language's own alphabet.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .automaton import Alphabet, ValidationError, Way

DEFAULT_MAX_LEN = 20

BINARY = Alphabet(("0", "1"))
AB = Alphabet(("a", "b"))
ABC = Alphabet(("a", "b", "c"))


class LanguageId(str, enum.Enum):
    L1 = "L1"  # 0w1
    L2 = "L2"  # even length
    L3 = "L3"  # a^n b^n
    L4 = "L4"  # palindromes
    L5 = "L5"  # a^n b^n c^n
    L6 = "L6"  # ww


@dataclass(frozen=True)
class LanguageProfile:
    id: LanguageId
    alphabet: Alphabet
    k: int
    way: Way

    @property
    def m(self) -> int:
        return self.alphabet.m

    @property
    def d(self) -> int:
        return self.way.d


PROFILES: dict[LanguageId, LanguageProfile] = {
    LanguageId.L1: LanguageProfile(LanguageId.L1, BINARY, 1, Way.ONE),
    LanguageId.L2: LanguageProfile(LanguageId.L2, BINARY, 1, Way.ONE),
    LanguageId.L3: LanguageProfile(LanguageId.L3, AB, 2, Way.ONE),
    LanguageId.L4: LanguageProfile(LanguageId.L4, BINARY, 2, Way.TWO),
    LanguageId.L5: LanguageProfile(LanguageId.L5, ABC, 3, Way.ONE),
    LanguageId.L6: LanguageProfile(LanguageId.L6, BINARY, 3, Way.ONE),
}

REGULAR = frozenset({LanguageId.L1, LanguageId.L2})


def profile(language: LanguageId | str) -> LanguageProfile:
    try:
        return PROFILES[LanguageId(language)]
    except ValueError:
        raise ValidationError(f"unknown language {language!r}; expected one of L1..L6") from None


def _is_counted_blocks(word: tuple[int, ...], blocks: int) -> bool:
    n, rem = divmod(len(word), blocks)
    if rem:
        return False
    return all(word[i * n:(i + 1) * n] == (i,) * n for i in range(blocks))


def membership(language: LanguageId | str, word: Sequence[int] | str) -> bool:
    """Exact membership test.

    Raises:
        ValidationError: if ``word`` has a symbol outside the language's alphabet.
    """
    prof = profile(language)
    if isinstance(word, str):
        word = prof.alphabet.parse(word)
    w = prof.alphabet.check_word(word)
    lid = prof.id
    if lid is LanguageId.L1:
        return len(w) >= 2 and w[0] == 0 and w[-1] == 1
    if lid is LanguageId.L2:
        return len(w) % 2 == 0
    if lid is LanguageId.L3:
        return _is_counted_blocks(w, 2)
    if lid is LanguageId.L4:
        return w == w[::-1]
    if lid is LanguageId.L5:
        return _is_counted_blocks(w, 3)
    half, rem = divmod(len(w), 2)
    return rem == 0 and w[:half] == w[half:]


def member_lengths(language: LanguageId | str, max_len: int) -> list[int]:
    """Lengths ``0..max_len`` at which the language has at least one member."""
    lid = profile(language).id
    if lid is LanguageId.L1:
        return list(range(2, max_len + 1))
    if lid is LanguageId.L4:
        return list(range(0, max_len + 1))
    if lid is LanguageId.L5:
        return list(range(0, max_len + 1, 3))
    return list(range(0, max_len + 1, 2))


def generate_member(language: LanguageId | str, max_len: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw a member: length uniform over feasible lengths, then uniform within that length."""
    prof = profile(language)
    lengths = member_lengths(prof.id, max_len)
    if not lengths:
        raise ValueError(f"{prof.id.value} has no member of length <= {max_len}")
    length = int(lengths[rng.integers(len(lengths))])
    s = prof.alphabet.size

    def bits(count):
        return tuple(int(x) for x in rng.integers(s, size=count))

    lid = prof.id
    if lid is LanguageId.L1:
        return (0, *bits(length - 2), 1)
    if lid is LanguageId.L2:
        return bits(length)
    if lid in (LanguageId.L3, LanguageId.L5):
        blocks = 2 if lid is LanguageId.L3 else 3
        n = length // blocks
        return tuple(i for i in range(blocks) for _ in range(n))
    if lid is LanguageId.L4:
        half = bits(length // 2)
        middle = bits(length % 2)
        return half + middle + half[::-1]
    half = bits(length // 2)
    return half + half


def generate_random(alphabet: Alphabet, max_len: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform length in ``[0, max_len]``, then uniform symbols."""
    if max_len < 0:
        raise ValueError(f"max_len must be >= 0, got {max_len}")
    length = int(rng.integers(max_len + 1))
    return tuple(int(x) for x in rng.integers(alphabet.size, size=length))


def sample_episode_input(
    prof: LanguageProfile, max_len: int, rng: np.random.Generator
) -> tuple[tuple[int, ...], bool]:
    """Half the time a member, otherwise a random word; the label always comes from the oracle."""
    if rng.random() < 0.5:
        word = generate_member(prof.id, max_len, rng)
    else:
        word = generate_random(prof.alphabet, max_len, rng)
    return word, membership(prof.id, word)


def sample_words(
    prof: LanguageProfile, count: int, max_len: int, rng: np.random.Generator
) -> list[tuple[tuple[int, ...], bool]]:
    return [sample_episode_input(prof, max_len, rng) for _ in range(count)]
