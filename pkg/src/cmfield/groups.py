"""Finite abelian groups presented by generators and relations.

Smith normal form over Z does all the real work: a group presented by a
relation matrix gets canonical invariant-factor coordinates, element
discrete logs, and subgroup membership tests. A generic structure
builder turns any concrete finite abelian multiplication (quadratic
form classes, residue units, ray classes) into such a presentation.
"""

from __future__ import annotations

from math import gcd


def _eye(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(A):
    """Return (U, S, V) with S = U*A*V in Smith normal form, U and V unimodular.

    A is a list of rows of integers; A is not modified. Diagonal entries
    of S are nonnegative and each divides the next.
    """
    S = [list(row) for row in A]
    n = len(S)
    m = len(S[0]) if n else 0
    U = _eye(n)
    V = _eye(m)

    def row_op(i, j, q):  # row_i -= q*row_j
        S[i] = [a - q * b for a, b in zip(S[i], S[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, q):  # col_i -= q*col_j
        for r in range(n):
            S[r][i] -= q * S[r][j]
        for r in range(m):
            V[r][i] -= q * V[r][j]

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in range(n):
            S[r][i], S[r][j] = S[r][j], S[r][i]
        for r in range(m):
            V[r][i], V[r][j] = V[r][j], V[r][i]

    k = 0
    while k < min(n, m):
        # Find a pivot: smallest nonzero entry in the trailing block.
        piv = None
        for i in range(k, n):
            for j in range(k, m):
                if S[i][j] != 0 and (piv is None or abs(S[i][j]) < abs(S[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(k, piv[0])
        swap_cols(k, piv[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(k + 1, n):
                if S[i][k]:
                    q = S[i][k] // S[k][k]
                    row_op(i, k, q)
                    if S[i][k]:
                        swap_rows(k, i)
                        dirty = True
            for j in range(k + 1, m):
                if S[k][j]:
                    q = S[k][j] // S[k][k]
                    col_op(j, k, q)
                    if S[k][j]:
                        swap_cols(k, j)
                        dirty = True
        # Pivot must divide every remaining entry; absorb offenders and redo.
        offender = None
        for i in range(k + 1, n):
            for j in range(k + 1, m):
                if S[i][j] % S[k][k]:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            S[k] = [a + b for a, b in zip(S[k], S[offender])]
            U[k] = [a + b for a, b in zip(U[k], U[offender])]
            continue
        if S[k][k] < 0:
            S[k] = [-a for a in S[k]]
            U[k] = [-a for a in U[k]]
        k += 1
    return U, S, V


def solve_integer_system(A, y):
    """Solve A*x = y over the integers; return one solution or None.

    A is a list of rows. Uses U*A*V = S: x = V*z with S*z = U*y.
    """
    n = len(A)
    m = len(A[0]) if n else 0
    U, S, V = smith_normal_form(A)
    Uy = [sum(U[i][j] * y[j] for j in range(n)) for i in range(n)]
    z = [0] * m
    for i in range(n):
        d = S[i][i] if i < m else 0
        if d == 0:
            if Uy[i] != 0:
                return None
        else:
            if Uy[i] % d:
                return None
            z[i] = Uy[i] // d
    return [sum(V[i][j] * z[j] for j in range(m)) for i in range(m)]


class FinAbGroup:
    """Finite abelian group Z^k modulo the row span of a relation matrix.

    Elements are exponent vectors over the k labelled generators.
    Canonical coordinates live in the invariant-factor decomposition
    computed once via Smith normal form.
    """

    def __init__(self, labels, relations):
        self.labels = list(labels)
        k = len(self.labels)
        rels = [list(r) for r in relations]
        self.relations = rels
        if k == 0:
            self._U = []
            self.diag = []
            return
        if not rels:
            raise ValueError("relations do not define a finite group")
        # Relations as rows; the group is Z^k / rowspan.
        A = [[rels[i][j] for i in range(len(rels))] for j in range(k)]  # transpose: k x r
        U, S, V = smith_normal_form(A)
        self._U = U
        self.diag = []
        for i in range(k):
            d = S[i][i] if i < len(S[0]) else 0
            if d == 0:
                raise ValueError("relations do not define a finite group")
            self.diag.append(d)

    @property
    def ngens(self) -> int:
        return len(self.labels)

    @property
    def order(self) -> int:
        n = 1
        for d in self.diag:
            n *= d
        return n

    @property
    def invariant_factors(self):
        return tuple(d for d in self.diag if d > 1)

    def coords(self, vec):
        """Canonical coordinates of an exponent vector, one residue per invariant factor."""
        k = self.ngens
        if len(vec) != k:
            raise ValueError("exponent vector has wrong length")
        y = [sum(self._U[i][j] * vec[j] for j in range(k)) for i in range(k)]
        return tuple(y[i] % self.diag[i] for i in range(k))

    def same_element(self, v1, v2) -> bool:
        return self.coords(v1) == self.coords(v2)

    def is_identity(self, vec) -> bool:
        return all(c == 0 for c in self.coords(vec))

    def element_order(self, vec) -> int:
        n = 1
        cs = self.coords(vec)
        for c, d in zip(cs, self.diag):
            if c:
                g = gcd(c, d)
                step = d // g
                n = n * step // gcd(n, step)
        return n

    def subgroup_contains(self, subgroup_vecs, vec) -> bool:
        """Does the subgroup generated by the given exponent vectors contain vec?"""
        k = self.ngens
        cols = [list(self.coords(v)) for v in subgroup_vecs]
        # Solve sum a_j * coords(s_j) == coords(vec) mod diag.
        A = []
        for i in range(k):
            row = [c[i] for c in cols] + [self.diag[i] if j == i else 0 for j in range(k)]
            A.append(row)
        y = list(self.coords(vec))
        return solve_integer_system(A, y) is not None

    def subgroup_order(self, subgroup_vecs) -> int:
        """Order of the subgroup generated by the given exponent vectors."""
        k = self.ngens
        # Index of <subgroup, relations-lattice> in Z^k equals |G| / |H|.
        cols = [list(self.coords(v)) for v in subgroup_vecs]
        A = []
        for i in range(k):
            A.append([c[i] for c in cols] + [self.diag[i] if j == i else 0 for j in range(k)])
        _, S, _ = smith_normal_form(A)
        idx = 1
        for i in range(k):
            d = S[i][i] if i < len(S[0]) else 0
            if d == 0:
                raise ValueError("unexpected infinite index")
            idx *= d
        return self.order // idx

    def all_coords(self):
        """Iterate canonical coordinates of every element (desk-scale groups only)."""
        def rec(i, acc):
            if i == len(self.diag):
                yield tuple(acc)
                return
            for c in range(self.diag[i]):
                yield from rec(i + 1, acc + [c])
        yield from rec(0, [])


def group_from_multiplication(identity, candidates, mul):
    """Build a FinAbGroup + discrete-log table from a concrete multiplication.

    Walks the candidate elements, keeping those that enlarge the generated
    subgroup; for each new generator its relative order against the
    previous subgroup is recorded as one relation. Returns
    (group, generators, dlog) where dlog maps every group element
    (hashable) to an exponent vector over the accepted generators.
    """
    table = {identity: ()}
    gens = []
    rels = []
    for cand in candidates:
        if cand in table:
            continue
        old = dict(table)
        g_idx = len(gens)
        gens.append(cand)
        rels = [r + [0] for r in rels]
        table = {e: v + (0,) for e, v in table.items()}
        # Relative order: least e >= 1 with cand^e in the old subgroup.
        power = cand
        e = 1
        while power not in old:
            power = mul(power, cand)
            e += 1
        rel = [0] * (g_idx + 1)
        rel[g_idx] = e
        for i, c in enumerate(old[power]):
            rel[i] -= c
        rels.append(rel)
        # Extend the table by the new coset representatives.
        step = {e_: v for e_, v in table.items()}
        current = step
        for j in range(1, e):
            nxt = {}
            for elem, vec in current.items():
                ne = mul(elem, cand)
                nv = list(vec)
                nv[g_idx] += 1
                nxt[ne] = tuple(nv)
            table.update(nxt)
            current = nxt
    group = FinAbGroup(gens, rels)
    dlog = {e_: tuple(v) for e_, v in table.items()}
    return group, gens, dlog
