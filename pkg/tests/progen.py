"""Random feed-forward, silent-free Lucent programs for oracle testing.

Programs are produced as source text so that every generated case also goes
through the lexer and parser.  Expressions are fully parenthesized; the
generator tracks which names may be read instantaneously (parameters and
earlier sequences) and which only under a ``fby`` delay (any sequence, and the
filter's own output).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

TYPES = ("int", "float")


@dataclass
class Helper:
    name: str
    out: str
    params: list[tuple[str, str]]


@dataclass
class Scope:
    now: dict[str, str]  # readable in the current quantum
    delayed: dict[str, str]  # readable only in a fby rest
    helpers: list[Helper]
    params: dict[str, str]
    in_rest: bool = False

    def names(self, ty: str) -> list[str]:
        pool = dict(self.now)
        if self.in_rest:
            pool.update(self.delayed)
        return sorted(n for n, t in pool.items() if t == ty)


@dataclass
class Generated:
    source: str
    top: str
    inputs: list[tuple[str, str]]
    helpers: list[Helper] = field(default_factory=list)


class ProgramGen:
    def __init__(self, rng: random.Random, max_depth: int = 3):
        self.rng = rng
        self.max_depth = max_depth

    # -- expressions

    def literal(self, ty: str) -> str:
        r = self.rng
        if ty == "int":
            v = r.randint(0, 12)
            return str(v) if r.random() < 0.8 else f"(-{v})"
        return r.choice(["0.5", "1.0", "2.0", "0.25", "3.75", "0.1", "10.0", "0.0"])

    def expr(self, ty: str, sc: Scope, depth: int) -> str:
        r = self.rng
        names = sc.names(ty)
        if depth <= 0 or r.random() < 0.2:
            if names and r.random() < 0.75:
                return r.choice(names)
            return self.literal(ty)
        choice = r.choices(
            ["ref", "lit", "arith", "div", "neg", "if", "fby", "call"],
            weights=[4, 1, 5, 1, 1, 2, 3, 2 if sc.helpers else 0])[0]
        d = depth - 1
        if choice == "ref" and names:
            return r.choice(names)
        if choice == "arith":
            op = r.choice("+-*")
            return f"({self.expr(ty, sc, d)} {op} {self.expr(ty, sc, d)})"
        if choice == "div":
            if ty == "int":
                return f"({self.expr(ty, sc, d)} / {r.randint(1, 5)})"
            return f"({self.expr(ty, sc, d)} / {self.expr(ty, sc, d)})"
        if choice == "neg":
            return f"(-{self.expr(ty, sc, d)})"
        if choice == "if":
            return (f"(if ({self.cond(sc, d)}) then {self.expr(ty, sc, d)} "
                    f"else {self.expr(ty, sc, d)} fi)")
        if choice == "fby":
            first = self.expr(ty, sc, d)
            saved = sc.in_rest
            sc.in_rest = True
            rest = self.expr(ty, sc, d)
            sc.in_rest = saved
            return f"({first} fby {rest})"
        if choice == "call":
            fitting = [h for h in sc.helpers if h.out == ty]
            if fitting:
                return self.call(r.choice(fitting), sc, d)
        return self.literal(ty) if not names else r.choice(names)

    def cond(self, sc: Scope, depth: int) -> str:
        r = self.rng
        names = sorted(n for n, _ in sc.now.items())
        if names and r.random() < 0.15:
            return f"{r.choice(names)} {r.choice(['==', '!='])} EOD"
        ty = r.choice(TYPES)
        op = r.choice(["<", "<=", ">", ">=", "==", "!="])
        return f"{self.expr(ty, sc, depth)} {op} {self.expr(ty, sc, depth)}"

    def call(self, h: Helper, sc: Scope, depth: int) -> str:
        """Arguments are parameters, expressions over parameters, or calls."""
        args = []
        arg_scope = Scope(dict(sc.params), {}, [x for x in sc.helpers if x is not h], sc.params)
        for _, pty in h.params:
            same = [n for n, t in sc.params.items() if t == pty]
            roll = self.rng.random()
            if same and roll < 0.6:
                args.append(self.rng.choice(same))
            elif same:
                p = self.rng.choice(same)
                args.append(f"({p} + {self.expr(pty, arg_scope, min(depth, 1))})")
            else:
                other = self.rng.choice(sorted(sc.params))
                lit = self.literal(pty)
                args.append(f"(if ({other} == EOD) then EOD else {lit} fi)")
        return f"{h.name}({', '.join(args)})"

    # -- declarations

    def filter_decl(self, kw: str, name: str, out: str, params: list[tuple[str, str]],
                    helpers: list[Helper], n_seqs: int) -> str:
        r = self.rng
        pmap = dict(params)
        seqs = [(f"s{i}", r.choice(TYPES)) for i in range(n_seqs)]
        delayed = {n: t for n, t in seqs}
        delayed[name] = out
        lines = [f"{kw} {name}:{out}({', '.join(f'{p}:{t}' for p, t in params)}) where:"]
        now = dict(pmap)
        for sname, sty in seqs:
            sc = Scope(dict(now), delayed, helpers, pmap)
            lines.append(f"    {sname}:{sty} = {self.expr(sty, sc, self.max_depth)}")
            now[sname] = sty
        sc = Scope(dict(now), delayed, helpers, pmap)
        body = self.expr(out, sc, self.max_depth)
        if r.random() < 0.6:
            guard = r.choice(sorted(pmap))
            body = f"if ({guard} == EOD) then EOD else {body} fi"
        lines.append(f"    {name} = {body}")
        return "\n".join(lines)

    def program(self) -> Generated:
        r = self.rng
        helpers: list[Helper] = []
        decls = []
        for k in range(r.randint(0, 2)):
            params = [(f"h{j}", r.choice(TYPES)) for j in range(r.randint(1, 2))]
            h = Helper(f"helper{k}", r.choice(TYPES), params)
            decls.append(self.filter_decl("filter", h.name, h.out, params, list(helpers),
                                          r.randint(0, 2)))
            helpers.append(h)
        params = [(f"x{j}", r.choice(TYPES)) for j in range(r.randint(1, 3))]
        out = r.choice(TYPES)
        decls.append(self.filter_decl("external", "top", out, params, helpers, r.randint(0, 3)))
        return Generated("\n\n".join(decls) + "\n", "top", params, helpers)

    # -- inputs

    def values(self, ty: str, n: int) -> list:
        r = self.rng
        if ty == "int":
            return [r.randint(-50, 50) for _ in range(n)]
        out = []
        for _ in range(n):
            if r.random() < 0.5:
                out.append(np.float32(r.choice([0.0, 1.0, -2.5, 0.1, 3.0, 1e-3, 7.25])))
            else:
                out.append(np.float32(r.uniform(-100.0, 100.0)))
        return out

    def inputs(self, g: Generated) -> dict[str, list]:
        n = self.rng.randint(0, 8)
        return {name: self.values(ty, n + self.rng.choice([0, 0, 0, 1, 2]))
                for name, ty in g.inputs}


def generate(seed: int, max_depth: int = 3) -> tuple[Generated, dict[str, list]]:
    gen = ProgramGen(random.Random(seed), max_depth)
    g = gen.program()
    return g, gen.inputs(g)
