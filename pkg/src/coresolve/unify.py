"""The three unifier computations the calculus distinguishes: most general
matcher, most general unifier with occurs check, and rational-tree
unification without occurs check.

``mgu`` is implemented once and classified post hoc into Matcher vs
ProperUnifier by testing whether it leaves the pattern side fixed; the
substitution reduction of the derivation engine needs exactly that
classification ("unifies but does not match").
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .terms import (
    Struct,
    Substitution,
    Term,
    Var,
    apply_raw,
    iter_subterms,
    match,
    variables_of,
)


class UnifyKind(Enum):
    MATCHER = "matcher"
    PROPER_UNIFIER = "proper_unifier"
    RATIONAL_UNIFIER = "rational_unifier"
    FAIL = "fail"


@dataclass(frozen=True)
class UnifyOutcome:
    kind: UnifyKind
    substitution: Optional[Substitution] = None
    reason: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.kind is not UnifyKind.FAIL

    def __bool__(self) -> bool:
        return self.ok


FAIL = UnifyOutcome(UnifyKind.FAIL)


def _fail(reason: str) -> UnifyOutcome:
    return UnifyOutcome(UnifyKind.FAIL, reason=reason)


def occurs_in(v: Var, t: Term) -> bool:
    return any(s == v for s in iter_subterms(t) if isinstance(s, Var))


def mgm(pattern: Term, target: Term) -> UnifyOutcome:
    """Most general matcher: sigma with sigma(pattern) == target, binding
    only pattern variables.  Never produces circular bindings when the
    arguments are standardised apart."""
    sigma = match(pattern, target)
    if sigma is None:
        return _fail("no matcher")
    return UnifyOutcome(UnifyKind.MATCHER, sigma)


def _classify(sigma: Substitution, a: Term, b: Term) -> UnifyOutcome:
    if apply_raw(sigma, a) == b and sigma.domain() <= variables_of(a):
        return UnifyOutcome(UnifyKind.MATCHER, sigma)
    return UnifyOutcome(UnifyKind.PROPER_UNIFIER, sigma)


def _walk(t: Term, bind: dict[Var, Term]) -> Term:
    while isinstance(t, Var):
        nxt = bind.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def _occurs_resolved(v: Var, t: Term, bind: dict[Var, Term]) -> bool:
    stack = [t]
    while stack:
        cur = _walk(stack.pop(), bind)
        if cur == v:
            return True
        if isinstance(cur, Struct):
            stack.extend(cur.args)
    return False


def _resolve_full(t: Term, bind: dict[Var, Term]) -> Term:
    """Fully resolve a term through an acyclic triangular binding map."""
    t = _walk(t, bind)
    if isinstance(t, Var):
        return t
    if not t.args:
        return t
    return Struct(t.symbol, tuple(_resolve_full(a, bind) for a in t.args))


def mgu(a: Term, b: Term) -> UnifyOutcome:
    """Most general unifier with occurs check, in idempotent solved form.

    Variable-variable equations bind the younger (higher-id) variable to the
    older one, so answers are deterministic.
    """
    bind: dict[Var, Term] = {}
    stack: list[tuple[Term, Term]] = [(a, b)]
    while stack:
        s, t = stack.pop()
        s = _walk(s, bind)
        t = _walk(t, bind)
        if s == t:
            continue
        if isinstance(s, Var) and isinstance(t, Var):
            if s.id < t.id:
                bind[t] = s
            else:
                bind[s] = t
            continue
        if isinstance(s, Var) or isinstance(t, Var):
            v, u = (s, t) if isinstance(s, Var) else (t, s)
            if _occurs_resolved(v, u, bind):
                return _fail("occurs check")
            bind[v] = u
            continue
        if s.symbol != t.symbol:
            return _fail(f"clash: {s.symbol} vs {t.symbol}")
        stack.extend(zip(s.args, t.args))
    solved = Substitution({v: _resolve_full(t, bind) for v, t in bind.items()})
    return _classify(solved, a, b)


class _UnionFind:
    """Union-find over term nodes for rational-tree unification.

    Term values (variables or structured subterms) are interned to integer
    handles once, so the hot find/union paths never hash or compare terms.
    Each class keeps its oldest variable (for deterministic answers) and one
    structure witness (symbols of two witnesses in one class must agree).
    """

    def __init__(self) -> None:
        # Variables are interned by value (every occurrence of a variable
        # must share a class); structures by object identity, as in the
        # standard term-graph formulation — equal subterm copies simply
        # start as separate nodes and merge if the worklist demands it.
        self.ids: dict[object, int] = {}
        self.parent: list[int] = []
        self.var_rep: list[Optional[Var]] = []
        self.witness: list[Optional[Struct]] = []
        self._keep: list[Struct] = []  # pins id()-keyed nodes alive

    def add(self, t: Term) -> int:
        key: object = t if isinstance(t, Var) else id(t)
        k = self.ids.get(key)
        if k is None:
            k = len(self.parent)
            self.ids[key] = k
            self.parent.append(k)
            if isinstance(t, Var):
                self.var_rep.append(t)
                self.witness.append(None)
            else:
                self.var_rep.append(None)
                self.witness.append(t)
                self._keep.append(t)
        return k

    def find(self, k: int) -> int:
        parent = self.parent
        root = k
        while parent[root] != root:
            root = parent[root]
        while parent[k] != root:
            parent[k], k = root, parent[k]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        self.parent[rb] = ra
        va, vb = self.var_rep[ra], self.var_rep[rb]
        if va is None or (vb is not None and vb.id < va.id):
            va = vb
        self.var_rep[ra] = va
        if self.witness[ra] is None:
            self.witness[ra] = self.witness[rb]
        return ra


def _rational_solve(a: Term, b: Term) -> Union[_UnionFind, str]:
    """The propagation phase of rational-tree unification: merge equivalence
    classes of subterms until fixpoint or symbol clash.  Returns the
    union-find on success, a failure reason string on clash."""
    uf = _UnionFind()
    work: list[tuple[Term, Term]] = [(a, b)]
    while work:
        s, t = work.pop()
        ks, kt = uf.add(s), uf.add(t)
        if uf.find(ks) == uf.find(kt):
            continue
        ws = uf.witness[uf.find(ks)]
        wt = uf.witness[uf.find(kt)]
        if ws is not None and wt is not None:
            if ws.symbol != wt.symbol:
                return f"clash: {ws.symbol} vs {wt.symbol}"
            uf.union(ks, kt)
            work.extend(zip(ws.args, wt.args))
        else:
            uf.union(ks, kt)
    return uf


def rational_unify(a: Term, b: Term) -> UnifyOutcome:
    """Unification without occurs check over rational trees.  Fails only on
    symbol clash; circular constraints become finite self-referencing
    bindings (the answer format ``X = scons(0,X)``)."""
    uf = _rational_solve(a, b)
    if isinstance(uf, str):
        return _fail(uf)
    sigma = _extract(uf, [a, b])
    if sigma.circular:
        return UnifyOutcome(UnifyKind.RATIONAL_UNIFIER, sigma)
    return _classify(sigma, a, b)


def _extract(uf: _UnionFind, roots: list[Term]) -> Substitution:
    # Register every subterm of the roots so that class rendering can
    # resolve children the solving worklist never had to touch.
    for root in roots:
        for sub in iter_subterms(root):
            uf.add(sub)

    find = uf.find

    def class_of(t: Term) -> int:
        return find(uf.add(t))

    # The class graph: an edge from each class to the classes of its
    # structure witness's arguments.
    all_classes = sorted({find(k) for k in range(len(uf.parent))})
    edges: dict[int, tuple[int, ...]] = {}
    for c in all_classes:
        w = uf.witness[c]
        edges[c] = tuple(class_of(arg) for arg in w.args) if w is not None else ()

    # Classes on a cycle of that graph must be rendered through their
    # canonical variable to stay finite: a class is cyclic iff its strongly
    # connected component has more than one node or a self-edge.
    cyclic: set[int] = set()
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    scc_stack: list[int] = []
    counter = 0
    for start in all_classes:
        if start in index:
            continue
        # Iterative Tarjan: (node, iterator position) frames.
        work = [(start, 0)]
        while work:
            node, pos = work.pop()
            if pos == 0:
                index[node] = low[node] = counter
                counter += 1
                scc_stack.append(node)
                on_stack.add(node)
            advanced = False
            children = edges[node]
            while pos < len(children):
                child = children[pos]
                pos += 1
                if child not in index:
                    work.append((node, pos))
                    work.append((child, 0))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            if low[node] == index[node]:
                component = []
                while True:
                    member = scc_stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or node in edges[node]:
                    cyclic.update(component)
            if work:
                parent_node, _ = work[-1]
                low[parent_node] = min(low[parent_node], low[node])

    def render(cls: int, on_path: frozenset) -> Term:
        w = uf.witness[cls]
        rep = uf.var_rep[cls]
        if w is None:
            assert rep is not None
            return rep
        if cls in on_path or (cls in cyclic and rep is not None):
            assert rep is not None
            return rep
        inner = on_path | {cls}
        return Struct(w.symbol, tuple(render(c, inner) for c in edges[cls]))

    bindings: dict[Var, Term] = {}
    seen_vars: set[Var] = set()
    for root in roots:
        for sub in iter_subterms(root):
            if isinstance(sub, Var) and sub not in seen_vars:
                seen_vars.add(sub)
                cls = class_of(sub)
                rep = uf.var_rep[cls]
                w = uf.witness[cls]
                if w is not None:
                    # Expand one level; self-references inside come back as
                    # the canonical variable, giving the fixpoint form.
                    bindings[sub] = Struct(
                        w.symbol,
                        tuple(
                            render(c, frozenset({cls})) for c in edges[cls]
                        ),
                    )
                elif rep is not None and sub != rep:
                    bindings[sub] = rep
    return Substitution(bindings)
