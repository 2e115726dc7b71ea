"""Seeded generator of small terminating, error-free programs."""
from __future__ import annotations

import random


class _Gen:
    def __init__(self, seed: int, size: int):
        self.r = random.Random(seed)
        self.size = size
        self.lines: list[str] = []
        self.nums: list[str] = []       # variables holding numbers
        self.strs: list[str] = []       # variables holding strings
        self.objs: list[str] = []       # variables holding {p: number, q: string}
        self.funcs: list[str] = []      # functions (number, number) -> number
        self.n = 0
        self.loops = 0
        self.ctor = False

    def fresh(self, prefix: str) -> str:
        self.n += 1
        return f"{prefix}{self.n}"

    def emit(self, line: str, depth: int):
        self.lines.append("  " * depth + line)

    def num_atom(self, extra=()) -> str:
        pool = self.nums + list(extra)
        if pool and self.r.random() < 0.7:
            return self.r.choice(pool)
        return str(self.r.randint(0, 5))

    def num_expr(self, extra=()) -> str:
        a = self.num_atom(extra)
        k = self.r.random()
        if k < 0.35:
            return a
        if k < 0.8:
            return f"{a} {self.r.choice(['+', '-', '*'])} {self.num_atom(extra)}"
        if self.objs:
            return f"{self.r.choice(self.objs)}.p + {a}"
        return f"{a} + 1"

    def str_expr(self) -> str:
        k = self.r.random()
        if self.strs and k < 0.4:
            return f"{self.r.choice(self.strs)} + \"{self.r.choice('abc')}\""
        if self.nums and k < 0.7:
            return f"\"n\" + {self.r.choice(self.nums)}"
        return f"\"{self.r.choice(['x', 'yy', 'zz'])}\""

    def cond(self, extra=()) -> str:
        op = self.r.choice(["<", ">", "===", "!==", "<="])
        return f"{self.num_atom(extra)} {op} {self.num_atom(extra)}"

    def function(self):
        name = self.fresh("f")
        has_loop = self.r.random() < 0.3
        self.emit(f"function {name}(a, b) {{", 0)
        self.emit(f"var t = {self.num_expr(['a', 'b'])};", 1)
        if self.r.random() < 0.5:
            self.emit(f"if ({self.cond(['a', 'b', 't'])}) {{", 1)
            self.emit(f"t = {self.num_expr(['a', 'b', 't'])};", 2)
            self.emit("}", 1)
        if has_loop:
            self.emit("var k = 0;", 1)
            self.emit(f"while (k < {self.r.randint(1, 2)}) {{", 1)
            self.emit("t = t + k;", 2)
            self.emit("k = k + 1;", 2)
            self.emit("}", 1)
        if self.funcs and self.r.random() < 0.4:
            self.emit(f"t = {self.r.choice(self.funcs)}(t, a);", 1)
        self.emit("return t;", 1)
        self.emit("}", 0)
        self.funcs.append(name)

    def stmt(self, depth: int):
        k = self.r.random()
        if k < 0.22 or not self.nums:
            v = self.fresh("n")
            self.emit(f"var {v} = {self.num_expr()};", depth)
            if depth == 0:
                self.nums.append(v)
        elif k < 0.32:
            v = self.fresh("s")
            self.emit(f"var {v} = {self.str_expr()};", depth)
            if depth == 0:
                self.strs.append(v)
        elif k < 0.44:
            self.emit(f"{self.r.choice(self.nums)} = {self.num_expr()};", depth)
        elif k < 0.54 and depth < 2:
            self.emit(f"if ({self.cond()}) {{", depth)
            self.stmt(depth + 1)
            if self.r.random() < 0.5:
                self.emit("} else {", depth)
                self.stmt(depth + 1)
            self.emit("}", depth)
        elif k < 0.62 and depth < 2 and self.loops < 2:
            self.loops += 1
            i = self.fresh("i")
            self.emit(f"var {i} = 0;", depth)
            self.emit(f"while ({i} < {self.r.randint(1, 3)}) {{", depth)
            self.stmt(depth + 1)
            self.emit(f"{i} = {i} + 1;", depth + 1)
            self.emit("}", depth)
        elif k < 0.74 and self.funcs:
            self.emit(f"{self.r.choice(self.nums)} = {self.r.choice(self.funcs)}({self.num_atom()}, {self.num_atom()});",
                      depth)
        elif k < 0.84:
            if self.objs and self.r.random() < 0.5:
                o = self.r.choice(self.objs)
                if self.r.random() < 0.5:
                    self.emit(f"{o}.p = {self.num_expr()};", depth)
                else:
                    self.emit(f"{o}.q = {self.str_expr()};", depth)
            elif depth == 0:
                o = self.fresh("o")
                if self.ctor and self.r.random() < 0.5:
                    self.emit(f"var {o} = new Box({self.num_atom()});", depth)
                else:
                    self.emit(f"var {o} = {{ p: {self.num_atom()}, q: {self.str_expr()} }};", depth)
                self.objs.append(o)
        elif k < 0.92 and depth == 0:
            a = self.fresh("arr")
            self.emit(f"var {a} = [{self.num_atom()}, {self.num_atom()}];", depth)
            self.emit(f"var {self.fresh('n')} = {a}[1] + {a}.length;", depth)
        elif self.objs:
            o = self.r.choice(self.objs)
            self.emit(f"{self.r.choice(self.nums)} = {o}.get() + 1;", depth)
        else:
            self.emit(f"{self.r.choice(self.nums)} = {self.num_expr()};", depth)

    def program(self) -> str:
        if self.r.random() < 0.5:
            self.ctor = True
            self.emit("function Box(v) {", 0)
            self.emit("this.p = v;", 1)
            self.emit("this.q = \"box\";", 1)
            self.emit("}", 0)
        for _ in range(self.r.randint(0, 2)):
            self.function()
        self.emit(f"var n0 = {self.r.randint(0, 4)};", 0)
        self.nums.append("n0")
        for _ in range(self.size):
            self.stmt(0)
        # objects answer get(); installed last so earlier calls stay well-defined
        body = self.lines
        gets = [f"{o}.get = function () {{ return this.p; }};" for o in self.objs]
        out = []
        for line in body:
            out.append(line)
        text = "\n".join(out)
        if gets:
            # calls to get() must come after installation: rewrite them as plain reads
            for o in self.objs:
                text = text.replace(f"{o}.get()", f"{o}.p")
            extra = self.r.choice(self.objs)
            text += "\n" + "\n".join(gets) + f"\nn0 = {extra}.get() + n0;"
        parts = [p for p in self.nums[:3]]
        text += "\n" + " + ".join(parts) + ";\n"
        return text


def gen_program(seed: int, size: int = 8) -> str:
    """Program text for ``seed``: straight-line code, branches, bounded loops,
    non-recursive calls, objects, arrays, constructors and methods."""
    return _Gen(seed, size).program()
