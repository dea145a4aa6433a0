"""OpenQASM 2 subset: parsing, lowering to the DAG IR, and serialization.

Supported statements: the OPENQASM 2.0 header, include (resolved against the
built-in qelib1-style gate table), qreg/creg, the gate set
{u1,u2,u3,u,p,rx,ry,rz,h,x,y,z,s,sdg,t,tdg,cx,cz,cp,swap,iswap,ccx,cswap},
user `gate` definitions (inlined by substitution), barrier and measure.
Barriers and measures are recorded but stripped when lowering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import CircuitDag, UnsupportedGate, unroll_3q
from .gates import GATE_TABLE


class QasmSyntaxError(ValueError):
    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line, self.col = line, col


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class Statement:
    kind: str  # gate | barrier | measure
    name: str = ""
    params: tuple = ()
    qubits: tuple = ()
    clbits: tuple = ()


@dataclass
class QasmProgram:
    qregs: list = field(default_factory=list)  # (name, size) in declaration order
    cregs: list = field(default_factory=list)
    statements: list = field(default_factory=list)

    @property
    def num_qubits(self) -> int:
        return sum(size for _, size in self.qregs)


# --- tokenizer ---------------------------------------------------------------

_SYMBOLS = ("->", "{", "}", "(", ")", "[", "]", ";", ",", "+", "-", "*", "/")


@dataclass(frozen=True)
class _Tok:
    kind: str  # id | num | str | sym | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise QasmSyntaxError(line, col, "unterminated string")
            toks.append(_Tok("str", text[i + 1:j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        two = text[i:i + 2]
        if two == "->":
            toks.append(_Tok("sym", two, line, col))
            i += 2
            col += 2
            continue
        if ch in "{}()[];,+-*/":
            toks.append(_Tok("sym", ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eE" or
                             (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            toks.append(_Tok("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("id", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise QasmSyntaxError(line, col, f"unexpected character {ch!r}")
    toks.append(_Tok("eof", "", line, col))
    return toks


# --- parser ------------------------------------------------------------------

_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan,
          "exp": math.exp, "ln": math.log, "sqrt": math.sqrt}


@dataclass(frozen=True)
class _UserGate:
    params: tuple
    qargs: tuple
    body: tuple  # of (name, param_exprs, qarg_names, line, col)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.user_gates: dict = {}

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise QasmSyntaxError(tok.line, tok.col,
                                  f"expected {want!r}, got {tok.text!r}")
        return tok

    def accept(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            self.pos += 1
            return True
        return False

    # expressions -------------------------------------------------------------

    def parse_expr(self):
        """Expression AST: nested tuples evaluated against a parameter env."""
        node = self.parse_term()
        while self.peek().kind == "sym" and self.peek().text in "+-":
            op = self.next().text
            node = (op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.peek().kind == "sym" and self.peek().text in "*/":
            op = self.next().text
            node = (op, node, self.parse_factor())
        return node

    def parse_factor(self):
        tok = self.peek()
        if tok.kind == "sym" and tok.text in "+-":
            self.next()
            inner = self.parse_factor()
            return inner if tok.text == "+" else ("neg", inner)
        if tok.kind == "num":
            self.next()
            return ("const", float(tok.text))
        if tok.kind == "id":
            self.next()
            if tok.text == "pi":
                return ("const", math.pi)
            if tok.text in _FUNCS:
                self.expect("sym", "(")
                inner = self.parse_expr()
                self.expect("sym", ")")
                return ("call", tok.text, inner)
            return ("var", tok.text, tok.line, tok.col)
        if tok.kind == "sym" and tok.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect("sym", ")")
            return inner
        raise QasmSyntaxError(tok.line, tok.col, f"bad expression at {tok.text!r}")

    @staticmethod
    def eval_expr(node, env) -> float:
        op = node[0]
        if op == "const":
            return node[1]
        if op == "var":
            _, name, line, col = node
            if name not in env:
                raise QasmSyntaxError(line, col, f"unknown parameter {name!r}")
            return env[name]
        if op == "neg":
            return -_Parser.eval_expr(node[1], env)
        if op == "call":
            return _FUNCS[node[1]](_Parser.eval_expr(node[2], env))
        lhs = _Parser.eval_expr(node[1], env)
        rhs = _Parser.eval_expr(node[2], env)
        return {"+": lhs + rhs, "-": lhs - rhs,
                "*": lhs * rhs, "/": lhs / rhs}[op]

    # program -----------------------------------------------------------------

    def parse_program(self) -> QasmProgram:
        prog = QasmProgram()
        regs: dict = {}
        self.expect("id", "OPENQASM")
        self.expect("num")
        self.expect("sym", ";")
        while self.peek().kind != "eof":
            tok = self.peek()
            if self.accept("id", "include"):
                self.expect("str")
                self.expect("sym", ";")
            elif tok.kind == "id" and tok.text in ("qreg", "creg"):
                self.next()
                name = self.expect("id").text
                self.expect("sym", "[")
                size = int(self.expect("num").text)
                self.expect("sym", "]")
                self.expect("sym", ";")
                if name in regs:
                    raise QasmSyntaxError(tok.line, tok.col,
                                          f"register {name!r} redeclared")
                target = prog.qregs if tok.text == "qreg" else prog.cregs
                offset = sum(s for _, s in target)
                regs[name] = (tok.text, offset, size)
                target.append((name, size))
            elif self.accept("id", "gate"):
                self.parse_gate_def()
            elif self.accept("id", "barrier"):
                qubits = self.parse_operands(regs, "qreg")
                self.expect("sym", ";")
                prog.statements.append(
                    Statement("barrier", qubits=tuple(q for grp in qubits for q in grp)))
            elif self.accept("id", "measure"):
                src = self.parse_operand(regs, "qreg")
                self.expect("sym", "->")
                dst = self.parse_operand(regs, "creg")
                self.expect("sym", ";")
                if len(src) != len(dst):
                    raise QasmSyntaxError(tok.line, tok.col, "measure size mismatch")
                prog.statements.append(Statement("measure", qubits=tuple(src),
                                                 clbits=tuple(dst)))
            elif tok.kind == "id" and tok.text == "opaque":
                raise UnsupportedGate("opaque")
            elif tok.kind == "id":
                self.parse_gate_stmt(prog, regs)
            else:
                raise QasmSyntaxError(tok.line, tok.col,
                                      f"unexpected token {tok.text!r}")
        return prog

    def parse_gate_def(self) -> None:
        name = self.expect("id").text
        params = []
        if self.accept("sym", "("):
            if not self.accept("sym", ")"):
                while True:
                    params.append(self.expect("id").text)
                    if self.accept("sym", ")"):
                        break
                    self.expect("sym", ",")
        qargs = [self.expect("id").text]
        while self.accept("sym", ","):
            qargs.append(self.expect("id").text)
        self.expect("sym", "{")
        body = []
        while not self.accept("sym", "}"):
            tok = self.expect("id")
            if tok.text == "barrier":
                while not self.accept("sym", ";"):
                    self.next()
                continue
            exprs = []
            if self.accept("sym", "("):
                if not self.accept("sym", ")"):
                    while True:
                        exprs.append(self.parse_expr())
                        if self.accept("sym", ")"):
                            break
                        self.expect("sym", ",")
            args = [self.expect("id").text]
            while self.accept("sym", ","):
                args.append(self.expect("id").text)
            self.expect("sym", ";")
            body.append((tok.text, tuple(exprs), tuple(args), tok.line, tok.col))
        self.user_gates[name] = _UserGate(tuple(params), tuple(qargs), tuple(body))

    def parse_operand(self, regs, want: str) -> list:
        """One operand: `name` (whole register) or `name[i]` (single bit)."""
        tok = self.expect("id")
        if tok.text not in regs:
            raise QasmSyntaxError(tok.line, tok.col,
                                  f"undeclared register {tok.text!r}")
        regkind, offset, size = regs[tok.text]
        if regkind != want:
            raise QasmSyntaxError(tok.line, tok.col,
                                  f"{tok.text!r} is not a {want}")
        if self.accept("sym", "["):
            idx_tok = self.expect("num")
            idx = int(idx_tok.text)
            self.expect("sym", "]")
            if not 0 <= idx < size:
                raise IndexOutOfRange(
                    f"line {idx_tok.line}: {tok.text}[{idx}] out of range")
            return [offset + idx]
        return [offset + i for i in range(size)]

    def parse_operands(self, regs, want: str) -> list:
        groups = [self.parse_operand(regs, want)]
        while self.accept("sym", ","):
            groups.append(self.parse_operand(regs, want))
        return groups

    def parse_gate_stmt(self, prog, regs) -> None:
        tok = self.expect("id")
        name = tok.text
        exprs = []
        if self.accept("sym", "("):
            if not self.accept("sym", ")"):
                while True:
                    exprs.append(self.parse_expr())
                    if self.accept("sym", ")"):
                        break
                    self.expect("sym", ",")
        groups = self.parse_operands(regs, "qreg")
        self.expect("sym", ";")
        params = tuple(self.eval_expr(e, {}) for e in exprs)
        for qubits in _broadcast(groups, tok):
            self.emit(prog, name, params, qubits, tok)

    def emit(self, prog, name: str, params: tuple, qubits: tuple, tok) -> None:
        if name in self.user_gates:
            gate = self.user_gates[name]
            if len(params) != len(gate.params) or len(qubits) != len(gate.qargs):
                raise QasmSyntaxError(tok.line, tok.col,
                                      f"bad arity for gate {name!r}")
            env = dict(zip(gate.params, params))
            wires = dict(zip(gate.qargs, qubits))
            for bname, bexprs, bargs, line, col in gate.body:
                bparams = tuple(self.eval_expr(e, env) for e in bexprs)
                try:
                    bqubits = tuple(wires[a] for a in bargs)
                except KeyError as exc:
                    raise QasmSyntaxError(line, col, f"unknown qubit {exc}")
                self.emit(prog, bname, bparams, bqubits,
                          _Tok("id", bname, line, col))
            return
        if name not in GATE_TABLE:
            raise UnsupportedGate(name)
        nq, nparams, _ = GATE_TABLE[name]
        if len(params) != nparams or len(qubits) != nq:
            raise QasmSyntaxError(tok.line, tok.col, f"bad arity for {name!r}")
        if len(set(qubits)) != len(qubits):
            raise QasmSyntaxError(tok.line, tok.col,
                                  f"duplicate operand in {name!r}")
        prog.statements.append(Statement("gate", name, params, tuple(qubits)))


def _broadcast(groups: list, tok) -> list:
    sizes = {len(g) for g in groups}
    if sizes == {1}:
        return [tuple(g[0] for g in groups)]
    width = max(sizes)
    if sizes - {1, width}:
        raise QasmSyntaxError(tok.line, tok.col, "mismatched register sizes")
    return [tuple(g[0] if len(g) == 1 else g[i] for g in groups)
            for i in range(width)]


def parse(text: str) -> QasmProgram:
    """Parse OpenQASM 2 source into a program."""
    return _Parser(text).parse_program()


def lower(prog: QasmProgram) -> CircuitDag:
    """Flatten to a DAG on global qubit indices; 3Q gates are unrolled,
    barriers and measures stripped."""
    gate_list = [(s.name, s.params, s.qubits)
                 for s in prog.statements if s.kind == "gate"]
    dag = CircuitDag.from_gates(prog.num_qubits, gate_list)
    return unroll_3q(dag)


# --- serialization -----------------------------------------------------------

def zyz_angles(mat: np.ndarray) -> tuple:
    """u3 Euler angles of a 2x2 unitary (global phase dropped)."""
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    v = mat / np.sqrt(det)
    theta = 2.0 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[1, 0]) < 1e-12:
        return 0.0, 0.0, float(2.0 * np.angle(v[1, 1]))
    if abs(v[0, 0]) < 1e-12:
        return math.pi, 0.0, float(2.0 * np.angle(v[1, 0]))
    phi_plus = 2.0 * np.angle(v[1, 1])
    phi_minus = 2.0 * np.angle(v[1, 0])
    return (float(theta), float((phi_plus + phi_minus) / 2),
            float((phi_plus - phi_minus) / 2))


def _fmt(x: float) -> str:
    return repr(round(float(x), 12))


def _basis_gate_lines(basis, seed: int = 7) -> tuple:
    """(definition block or '', statement name) for a basis gate."""
    if basis.name == "iswap":
        return "", "iswap"
    from .gates import CX
    from .score import synthesize

    class _CxBasis:
        name, n, unit_cost, matrix = "cx", 1, 1.0, CX
    layers, fid = synthesize(basis.matrix, _CxBasis, 2,
                             rng=np.random.default_rng(seed))
    if fid < 1.0 - 1e-9:
        raise RuntimeError(f"basis gate definition synthesis reached {fid}")
    lines = [f"gate {basis.name} a,b {{"]
    wire = ("a", "b")
    for j in range(3):
        for q in range(2):
            th, ph, lm = layers[2 * j + q]
            lines.append(f"  u3({_fmt(th)},{_fmt(ph)},{_fmt(lm)}) {wire[q]};")
        if j < 2:
            lines.append("  cx a,b;")
    lines.append("}")
    return "\n".join(lines) + "\n", basis.name


def serialize(dag: CircuitDag, basis=None, synth: bool = False, cs=None,
              synth_seed: int = 0) -> str:
    """Emit OpenQASM 2 text for a circuit DAG.

    With synth off, consolidated 2Q blocks appear as opaque `// unitary`
    comments (informational only; they do not re-parse).  With synth on, each
    2Q block is expanded into its basis-gate decomposition, which requires
    `basis` and its coverage set `cs`.
    """
    from .coverage import min_cost
    from .score import synthesize

    out = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    gate_def = ""
    basis_stmt = None
    if synth:
        if basis is None or cs is None:
            raise ValueError("synth output needs a basis and its coverage set")
        gate_def, basis_stmt = _basis_gate_lines(basis)
        if gate_def:
            out.append(gate_def.rstrip())
    if dag.num_qubits:
        out.append(f"qreg q[{dag.num_qubits}];")

    for node in dag.nodes:
        qs = ",".join(f"q[{q}]" for q in node.qubits)
        if node.payload is None and node.name != "unitary":
            if node.params:
                ps = ",".join(_fmt(p) for p in node.params)
                out.append(f"{node.name}({ps}) {qs};")
            else:
                out.append(f"{node.name} {qs};")
            continue
        mat = node.matrix()
        if len(node.qubits) == 1:
            th, ph, lm = zyz_angles(mat)
            out.append(f"u3({_fmt(th)},{_fmt(ph)},{_fmt(lm)}) {qs};")
            continue
        if not synth:
            flat = " ".join(f"{z.real:.12g},{z.imag:.12g}" for z in mat.ravel())
            out.append(f"// unitary {qs} {flat}")
            continue
        k, _ = min_cost(cs, node.coordinates())
        layers, fid = synthesize(mat, basis, k,
                                 rng=np.random.default_rng(synth_seed + node.id))
        if fid < 1.0 - 1e-6:
            raise RuntimeError(
                f"block synthesis reached only {fid:.8f} at depth {k}")
        a, b = node.qubits
        for j in range(k + 1):
            for q, wire in ((0, a), (1, b)):
                th, ph, lm = layers[2 * j + q]
                out.append(f"u3({_fmt(th)},{_fmt(ph)},{_fmt(lm)}) q[{wire}];")
            if j < k:
                out.append(f"{basis_stmt} q[{a}],q[{b}];")
    return "\n".join(out) + "\n"
