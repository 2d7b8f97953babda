"""Partition of a d-sparse term into one-sparse color classes.

The union pattern is treated as a graph: off-diagonal symmetric pairs are
edges, diagonal entries are self-loops.  A proper edge coloring makes every
color class one-sparse.  Greedy first-fit coloring over rows in ascending
order is deterministic and needs at most 2d - 1 colors, well under the 6d^2
worst case the closed-form cost bounds are stated with; the planner keeps the
6d^2 figure for formula evaluation while the executor runs the actual classes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import HamiltonianTerm, sparsity_degree


@dataclass(frozen=True)
class OneSparseTerm:
    """One color class of a parent term's pattern.

    entries holds the symmetric closure: (x, y) present implies (y, x)
    present, and no row or column appears twice.
    """

    parent: int
    color: int
    entries: frozenset

    def row_entry(self, x: int):
        """The unique entry touching row x, or None."""
        for (a, b) in self.entries:
            if a == x:
                return (a, b)
        return None


@dataclass(frozen=True)
class SubspaceRecord:
    """Invariant-subspace classification of one row under a one-sparse term.

    xi = 0 means no element is assigned to the row and the executor leaves it
    untouched.  Otherwise the row belongs to span{m, M}; dim_flag marks
    x == M, one_dim_flag marks a diagonal (m == M) element.
    """

    x: int
    m: int
    M: int
    xi: int
    dim_flag: int
    one_dim_flag: int


def decompose_one_sparse(term: HamiltonianTerm, parent: int = 0) -> list[OneSparseTerm]:
    """Greedy edge-coloring of the union pattern into one-sparse classes.

    Deterministic for a fixed pattern: undirected entries are visited in
    ascending (row, col) order and take the first color not already used at
    either endpoint.  `parent` is the caller's index for the term, echoed into
    each class.
    """
    for (x, y) in term.pattern:
        if (y, x) not in term.pattern:
            raise ValueError(f"pattern not symmetric: ({x},{y}) unpaired")
    edges = sorted({(min(x, y), max(x, y)) for (x, y) in term.pattern})
    used_at: dict[int, set[int]] = {}
    classes: dict[int, set] = {}
    for (a, b) in edges:
        taken = used_at.setdefault(a, set()) | used_at.setdefault(b, set())
        color = 0
        while color in taken:
            color += 1
        used_at[a].add(color)
        used_at[b].add(color)
        bucket = classes.setdefault(color, set())
        bucket.add((a, b))
        if a != b:
            bucket.add((b, a))
    result = [
        OneSparseTerm(parent=parent, color=c, entries=frozenset(entries))
        for c, entries in sorted(classes.items())
    ]
    limit = 6 * sparsity_degree(term) ** 2
    if len(result) > limit:
        raise AssertionError(f"greedy produced {len(result)} classes, above 6 d^2 = {limit}")
    return result


@dataclass
class DecomposedHamiltonian:
    """All terms of a Hamiltonian with their one-sparse color classes.

    Immutable after build(); shared freely across runs.
    """

    terms: tuple
    classes: tuple

    def __post_init__(self):
        self._lookup = {
            (i, cls_.color): cls_
            for i, term_classes in enumerate(self.classes)
            for cls_ in term_classes
        }

    @classmethod
    def build(cls, terms) -> "DecomposedHamiltonian":
        terms = tuple(terms)
        classes = tuple(
            tuple(decompose_one_sparse(term, parent=i)) for i, term in enumerate(terms)
        )
        return cls(terms=terms, classes=classes)

    @property
    def M(self) -> int:
        return len(self.terms)

    @property
    def d(self) -> int:
        return max(sparsity_degree(term) for term in self.terms)

    @property
    def m_actual(self) -> int:
        return sum(len(c) for c in self.classes)

    @property
    def m_paper(self) -> int:
        return 6 * self.M * self.d**2

    @property
    def dim(self) -> int:
        return self.terms[0].dim

    @property
    def n_qubits(self) -> int:
        return self.terms[0].qubits

    def one_sparse(self, term_index: int, color: int) -> OneSparseTerm:
        try:
            return self._lookup[(term_index, color)]
        except KeyError:
            raise KeyError(f"term {term_index} has no color {color}") from None


def classify_subspace(one_sparse: OneSparseTerm, x: int) -> SubspaceRecord:
    """Classify row x into its 1D/2D invariant subspace for this class."""
    entry = one_sparse.row_entry(x)
    if entry is None:
        return SubspaceRecord(x=x, m=x, M=x, xi=0, dim_flag=0, one_dim_flag=0)
    a, b = entry
    m, M = min(a, b), max(a, b)
    return SubspaceRecord(
        x=x,
        m=m,
        M=M,
        xi=1,
        dim_flag=int(x == M),
        one_dim_flag=int(m == M),
    )
