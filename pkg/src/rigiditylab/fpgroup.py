"""
Words in free groups, finite presentations and Fox-calculus prefixes.

A word is a tuple of nonzero integers: ``g`` stands for generator number
``g`` (1-based) and ``-g`` for its inverse, so ``(1, -2)`` is a.b^-1.  This
is also the wire format used in scenario files.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

Word = tuple  # tuple[int, ...]

EMPTY: Word = ()


class Letter(NamedTuple):
    generator_index: int  # 0-based
    sign: int

    @classmethod
    def from_int(cls, x: int) -> "Letter":
        if x == 0:
            raise ValueError("0 is not a letter")
        return cls(abs(x) - 1, 1 if x > 0 else -1)

    def to_int(self) -> int:
        return self.sign * (self.generator_index + 1)


class FoxTerm(NamedTuple):
    sign: int
    prefix: Word
    generator_index: int  # 0-based


def letter_key(x: int) -> tuple[int, int]:
    # a < a^-1 < b < b^-1 < ...
    return (abs(x), 0 if x > 0 else 1)


def word_key(w: Sequence[int]) -> tuple:
    return (len(w), tuple(letter_key(x) for x in w))


def free_reduce(w: Iterable[int]) -> Word:
    """Freely reduce ``w`` by cancelling adjacent x.x^-1 pairs (stack based)."""
    out: list[int] = []
    for x in w:
        if x == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return tuple(out)


def word_inverse(u: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(u))


def word_mul(u: Sequence[int], v: Sequence[int]) -> Word:
    return free_reduce(tuple(u) + tuple(v))


def word_power(u: Sequence[int], n: int) -> Word:
    base = tuple(u) if n >= 0 else word_inverse(u)
    return free_reduce(base * abs(n))


def commutator(u: Sequence[int], v: Sequence[int]) -> Word:
    """u v u^-1 v^-1"""
    return free_reduce(tuple(u) + tuple(v) + word_inverse(u) + word_inverse(v))


def alphabet(k: int) -> list[int]:
    return sorted([g for i in range(1, k + 1) for g in (i, -i)], key=letter_key)


def enumerate_ball(k: int, n: int) -> list[Word]:
    """All freely reduced words of length <= n over k generators.

    Words come out in length-lexicographic order.  Extending the previous
    layer (already sorted) by letters in alphabet order keeps each layer
    sorted, so no final sort is needed.
    """
    if k < 1:
        raise ValueError("need at least one generator")
    if n < 0:
        raise ValueError("radius must be nonnegative")
    letters = alphabet(k)
    ball: list[Word] = [EMPTY]
    layer: list[Word] = [EMPTY]
    for _ in range(n):
        nxt = []
        for w in layer:
            last = w[-1] if w else 0
            for x in letters:
                if x != -last:
                    nxt.append(w + (x,))
        ball.extend(nxt)
        layer = nxt
    return ball


def ball_size(k: int, n: int) -> int:
    return 1 + sum(2 * k * (2 * k - 1) ** (i - 1) for i in range(1, n + 1))


def fox_prefixes(w: Sequence[int]) -> list[FoxTerm]:
    """Fox derivative terms of a relator.

    For the letter at position p (1-based), a positive letter g contributes
    ``(+1, w[:p-1], g)`` and an inverse letter g^-1 contributes
    ``(-1, w[:p-1] g^-1, g)``.  Evaluated in a representation, the terms with
    a given generator index sum to that generator's column block of d1.
    """
    terms = []
    for p, x in enumerate(w):
        letter = Letter.from_int(x)
        if letter.sign > 0:
            terms.append(FoxTerm(1, tuple(w[:p]), letter.generator_index))
        else:
            terms.append(FoxTerm(-1, tuple(w[: p + 1]), letter.generator_index))
    return terms


def exponent_sums(w: Sequence[int], k: int) -> list[int]:
    """Image of ``w`` in the abelianization Z^k."""
    sums = [0] * k
    for x in w:
        letter = Letter.from_int(x)
        sums[letter.generator_index] += letter.sign
    return sums


@dataclass(frozen=True)
class Presentation:
    num_generators: int
    relators: tuple = field(default=())

    def __post_init__(self):
        if self.num_generators < 1:
            raise ValueError("a presentation needs at least one generator")
        rels = []
        for r in self.relators:
            for x in r:
                if x == 0 or abs(x) > self.num_generators:
                    raise ValueError(
                        f"letter {x} out of range for {self.num_generators} generators"
                    )
            rels.append(free_reduce(r))
        object.__setattr__(self, "relators", tuple(rels))

    @property
    def k(self) -> int:
        return self.num_generators

    @property
    def r(self) -> int:
        return len(self.relators)

    def abelianization_matrix(self) -> list[list[int]]:
        """Rows are exponent-sum vectors of the relators."""
        return [exponent_sums(w, self.k) for w in self.relators]

    def to_json(self) -> dict:
        return {"generators": self.k, "relators": [list(w) for w in self.relators]}

    @classmethod
    def from_json(cls, obj: dict) -> "Presentation":
        return cls(int(obj["generators"]), tuple(tuple(int(x) for x in w) for w in obj.get("relators", [])))


def free_group(k: int) -> Presentation:
    return Presentation(k, ())


def cyclic_group(n: int) -> Presentation:
    """Z/n = <a | a^n>"""
    return Presentation(1, ((1,) * n,))


def free_abelian_rank2() -> Presentation:
    """Z^2 = <a, b | a b a^-1 b^-1>"""
    return Presentation(2, (commutator((1,), (2,)),))


def trivial_group() -> Presentation:
    """<a | a>"""
    return Presentation(1, ((1,),))


def symmetric_group_s3() -> Presentation:
    """S3 = <a, b | a^3, b^2, (ab)^2>"""
    return Presentation(2, ((1, 1, 1), (2, 2), (1, 2, 1, 2)))


def format_word(w: Sequence[int]) -> str:
    if not w:
        return "e"
    names = "abcdefghijklmnopqrstuvwxyz"
    parts = []
    for x in w:
        name = names[abs(x) - 1] if abs(x) <= len(names) else f"g{abs(x)}"
        parts.append(name if x > 0 else name + "^-1")
    return ".".join(parts)
