//! OpenQASM 2.0 frontend for the supported subset.
//!
//! Accepted programs declare exactly one quantum register and at most one
//! classical register, then use h, x, sx, rz(theta), cx, barrier, and
//! measure. The qelib1 include is recognized and skipped. Angles may be
//! decimal literals or pi fractions (`pi`, `pi/2`, `3*pi/4`, `-pi`).
//! The emitter writes one statement per line and normalizes every angle
//! to a 17-significant-digit decimal, so emit(parse(emit(c))) is
//! byte-stable.

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

pub fn parse_qasm(text: &str) -> Result<Circuit> {
    Parser::new(text).parse()
}

pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits());
    if circuit.num_clbits() > 0 {
        let _ = writeln!(out, "creg c[{}];", circuit.num_clbits());
    }
    for gate in circuit.gates() {
        match gate.kind {
            GateKind::H | GateKind::X | GateKind::Sx => {
                let _ = writeln!(out, "{} q[{}];", gate.kind.name(), gate.qubits[0]);
            }
            GateKind::Rz(theta) => {
                let _ = writeln!(out, "rz({}) q[{}];", format_angle(theta), gate.qubits[0]);
            }
            GateKind::Cx => {
                let _ = writeln!(out, "cx q[{}],q[{}];", gate.qubits[0], gate.qubits[1]);
            }
            GateKind::Barrier => {
                let list: Vec<String> =
                    gate.qubits.iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(out, "barrier {};", list.join(","));
            }
            GateKind::Measure => {
                let _ = writeln!(
                    out,
                    "measure q[{}] -> c[{}];",
                    gate.qubits[0],
                    gate.clbit.expect("measure carries a clbit")
                );
            }
        }
    }
    out
}

/// 17 significant digits: enough to round-trip any f64 exactly.
fn format_angle(theta: f64) -> String {
    format!("{theta:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end_line: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        let (tokens, end_line) = lex(text);
        Parser { tokens, pos: 0, end_line }
    }

    fn parse(mut self) -> Result<Circuit> {
        self.lex_errors()?;
        self.expect_ident("OPENQASM")?;
        let version = self.expect_number()?;
        if version.0 != "2.0" {
            return Err(self.err_at(version.1, format!("unsupported version {}", version.0)));
        }
        self.expect_sym(';')?;

        let mut qreg: Option<(String, usize)> = None;
        let mut creg: Option<(String, usize)> = None;
        let mut gates: Vec<Gate> = Vec::new();

        while let Some(tok) = self.peek() {
            let (line, col) = (tok.line, tok.col);
            let word = match &tok.tok {
                Tok::Ident(s) => s.clone(),
                other => {
                    return Err(self.err_at(
                        (line, col),
                        format!("expected a statement, found `{}`", show(other)),
                    ))
                }
            };
            self.pos += 1;
            match word.as_str() {
                "include" => {
                    let s = self.expect_string()?;
                    if s.0 != "qelib1.inc" {
                        return Err(
                            self.err_at(s.1, format!("unsupported include \"{}\"", s.0))
                        );
                    }
                    self.expect_sym(';')?;
                }
                "qreg" => {
                    let (name, size) = self.parse_reg_decl()?;
                    if qreg.is_some() {
                        return Err(Error::Register(
                            "exactly one qreg is supported".into(),
                        ));
                    }
                    qreg = Some((name, size));
                }
                "creg" => {
                    let (name, size) = self.parse_reg_decl()?;
                    if creg.is_some() {
                        return Err(Error::Register("at most one creg is supported".into()));
                    }
                    creg = Some((name, size));
                }
                "h" | "x" | "sx" => {
                    let q = self.parse_qubit(&qreg)?;
                    self.expect_sym(';')?;
                    gates.push(match word.as_str() {
                        "h" => Gate::h(q),
                        "x" => Gate::x(q),
                        _ => Gate::sx(q),
                    });
                }
                "rz" => {
                    self.expect_sym('(')?;
                    let theta = self.parse_angle()?;
                    self.expect_sym(')')?;
                    let q = self.parse_qubit(&qreg)?;
                    self.expect_sym(';')?;
                    gates.push(Gate::rz(theta, q));
                }
                "cx" => {
                    let a = self.parse_qubit(&qreg)?;
                    self.expect_sym(',')?;
                    let b = self.parse_qubit(&qreg)?;
                    self.expect_sym(';')?;
                    if a == b {
                        return Err(self.err_here("cx control equals target".into()));
                    }
                    gates.push(Gate::cx(a, b));
                }
                "barrier" => {
                    let mut qubits = Vec::new();
                    loop {
                        qubits.extend(self.parse_qubit_or_register(&qreg)?);
                        if self.peek_sym(',') {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    self.expect_sym(';')?;
                    qubits.dedup();
                    gates.push(Gate::barrier(qubits));
                }
                "measure" => {
                    let q = self.parse_qubit(&qreg)?;
                    self.expect_arrow()?;
                    let c = self.parse_clbit(&creg)?;
                    self.expect_sym(';')?;
                    gates.push(Gate::measure(q, c));
                }
                other => return Err(Error::UnsupportedGate(other.to_string())),
            }
        }

        let (_, nq) = qreg.ok_or_else(|| Error::Register("missing qreg declaration".into()))?;
        let nc = creg.map(|(_, n)| n).unwrap_or(0);
        Circuit::new(nq, nc, gates)
    }

    fn lex_errors(&self) -> Result<()> {
        for t in &self.tokens {
            if let Tok::Sym('\u{0}') = t.tok {
                return Err(Error::Syntax {
                    line: t.line,
                    col: t.col,
                    msg: "unrecognized character".into(),
                });
            }
        }
        Ok(())
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|t| (t.line, t.col))
            .unwrap_or((self.end_line, 1))
    }

    fn err_here(&self, msg: String) -> Error {
        let (line, col) = self.here();
        Error::Syntax { line, col, msg }
    }

    fn err_at(&self, at: (usize, usize), msg: String) -> Error {
        Error::Syntax { line: at.0, col: at.1, msg }
    }

    fn expect_ident(&mut self, want: &str) -> Result<()> {
        match self.next() {
            Some(Token { tok: Tok::Ident(s), .. }) if s == want => Ok(()),
            Some(t) => Err(self.err_at(
                (t.line, t.col),
                format!("expected `{want}`, found `{}`", show(&t.tok)),
            )),
            None => Err(self.err_here(format!("expected `{want}`, found end of input"))),
        }
    }

    fn expect_sym(&mut self, want: char) -> Result<()> {
        match self.next() {
            Some(Token { tok: Tok::Sym(s), .. }) if s == want => Ok(()),
            Some(t) => Err(self.err_at(
                (t.line, t.col),
                format!("expected `{want}`, found `{}`", show(&t.tok)),
            )),
            None => Err(self.err_here(format!("expected `{want}`, found end of input"))),
        }
    }

    fn expect_arrow(&mut self) -> Result<()> {
        match self.next() {
            Some(Token { tok: Tok::Arrow, .. }) => Ok(()),
            Some(t) => Err(self.err_at(
                (t.line, t.col),
                format!("expected `->`, found `{}`", show(&t.tok)),
            )),
            None => Err(self.err_here("expected `->`, found end of input".into())),
        }
    }

    fn expect_number(&mut self) -> Result<(String, (usize, usize))> {
        match self.next() {
            Some(Token { tok: Tok::Number(s), line, col }) => Ok((s, (line, col))),
            Some(t) => Err(self.err_at(
                (t.line, t.col),
                format!("expected a number, found `{}`", show(&t.tok)),
            )),
            None => Err(self.err_here("expected a number, found end of input".into())),
        }
    }

    fn expect_string(&mut self) -> Result<(String, (usize, usize))> {
        match self.next() {
            Some(Token { tok: Tok::Str(s), line, col }) => Ok((s, (line, col))),
            Some(t) => Err(self.err_at(
                (t.line, t.col),
                format!("expected a string, found `{}`", show(&t.tok)),
            )),
            None => Err(self.err_here("expected a string, found end of input".into())),
        }
    }

    fn parse_reg_decl(&mut self) -> Result<(String, usize)> {
        let name = match self.next() {
            Some(Token { tok: Tok::Ident(s), .. }) => s,
            Some(t) => {
                return Err(self.err_at(
                    (t.line, t.col),
                    format!("expected a register name, found `{}`", show(&t.tok)),
                ))
            }
            None => return Err(self.err_here("expected a register name".into())),
        };
        self.expect_sym('[')?;
        let (num, at) = self.expect_number()?;
        let size: usize = num
            .parse()
            .map_err(|_| self.err_at(at, format!("invalid register size {num}")))?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        Ok((name, size))
    }

    fn parse_indexed(&mut self, reg: &Option<(String, usize)>, what: &str) -> Result<usize> {
        let (name, at) = match self.next() {
            Some(Token { tok: Tok::Ident(s), line, col }) => (s, (line, col)),
            Some(t) => {
                return Err(self.err_at(
                    (t.line, t.col),
                    format!("expected a {what} reference, found `{}`", show(&t.tok)),
                ))
            }
            None => return Err(self.err_here(format!("expected a {what} reference"))),
        };
        let (reg_name, reg_size) = reg
            .as_ref()
            .ok_or_else(|| Error::Register(format!("{what} register not declared")))?;
        if &name != reg_name {
            return Err(self.err_at(at, format!("unknown register `{name}`")));
        }
        self.expect_sym('[')?;
        let (num, num_at) = self.expect_number()?;
        let idx: usize = num
            .parse()
            .map_err(|_| self.err_at(num_at, format!("invalid index {num}")))?;
        self.expect_sym(']')?;
        if idx >= *reg_size {
            return Err(Error::Register(format!(
                "{reg_name}[{idx}] out of range, size is {reg_size}"
            )));
        }
        Ok(idx)
    }

    fn parse_qubit(&mut self, qreg: &Option<(String, usize)>) -> Result<usize> {
        self.parse_indexed(qreg, "qubit")
    }

    fn parse_clbit(&mut self, creg: &Option<(String, usize)>) -> Result<usize> {
        self.parse_indexed(creg, "classical bit")
    }

    /// `q[i]` gives one qubit, a bare register name gives all of them.
    fn parse_qubit_or_register(
        &mut self,
        qreg: &Option<(String, usize)>,
    ) -> Result<Vec<usize>> {
        let bare_register = matches!(
            (self.peek(), self.tokens.get(self.pos + 1)),
            (Some(Token { tok: Tok::Ident(_), .. }), Some(next))
                if !matches!(next.tok, Tok::Sym('['))
        ) || (self.tokens.len() == self.pos + 1
            && matches!(self.peek(), Some(Token { tok: Tok::Ident(_), .. })));
        if bare_register {
            let (name, at) = match self.next() {
                Some(Token { tok: Tok::Ident(s), line, col }) => (s, (line, col)),
                _ => unreachable!("peeked an identifier"),
            };
            let (reg_name, reg_size) = qreg
                .as_ref()
                .ok_or_else(|| Error::Register("qubit register not declared".into()))?;
            if &name != reg_name {
                return Err(self.err_at(at, format!("unknown register `{name}`")));
            }
            Ok((0..*reg_size).collect())
        } else {
            Ok(vec![self.parse_qubit(qreg)?])
        }
    }

    /// angle := ['-'] (number ['*' 'pi' ['/' number]] | 'pi' ['/' number])
    fn parse_angle(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        if self.peek_sym('-') {
            self.pos += 1;
            sign = -1.0;
        } else if self.peek_sym('+') {
            self.pos += 1;
        }
        let value = match self.next() {
            Some(Token { tok: Tok::Ident(s), line, col }) if s == "pi" => {
                let mut v = std::f64::consts::PI;
                if self.peek_sym('/') {
                    self.pos += 1;
                    let (num, at) = self.expect_number()?;
                    let d: f64 = num
                        .parse()
                        .map_err(|_| self.err_at(at, format!("invalid divisor {num}")))?;
                    if d == 0.0 {
                        return Err(self.err_at(at, "division by zero".into()));
                    }
                    v /= d;
                }
                let _ = (line, col);
                v
            }
            Some(Token { tok: Tok::Number(s), line, col }) => {
                let mut v: f64 = s
                    .parse()
                    .map_err(|_| self.err_at((line, col), format!("invalid number {s}")))?;
                if self.peek_sym('*') {
                    self.pos += 1;
                    self.expect_ident("pi")?;
                    v *= std::f64::consts::PI;
                    if self.peek_sym('/') {
                        self.pos += 1;
                        let (num, at) = self.expect_number()?;
                        let d: f64 = num
                            .parse()
                            .map_err(|_| self.err_at(at, format!("invalid divisor {num}")))?;
                        if d == 0.0 {
                            return Err(self.err_at(at, "division by zero".into()));
                        }
                        v /= d;
                    }
                }
                v
            }
            Some(t) => {
                return Err(self.err_at(
                    (t.line, t.col),
                    format!("expected an angle, found `{}`", show(&t.tok)),
                ))
            }
            None => return Err(self.err_here("expected an angle".into())),
        };
        Ok(sign * value)
    }
}

fn show(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => s.clone(),
        Tok::Number(s) => s.clone(),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(c) => c.to_string(),
        Tok::Arrow => "->".into(),
    }
}

/// Unrecognized characters become the sentinel symbol '\0' so the parser
/// can report them with their position.
fn lex(text: &str) -> (Vec<Token>, usize) {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |chars: &mut std::iter::Peekable<std::str::Chars>,
                        line: &mut usize,
                        col: &mut usize|
         -> Option<char> {
            let c = chars.next()?;
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            Some(c)
        };
        if c.is_whitespace() {
            bump(&mut chars, &mut line, &mut col);
            continue;
        }
        if c == '/' {
            // Lookahead for a // comment; a lone '/' is the division symbol.
            let mut probe = chars.clone();
            probe.next();
            if probe.peek() == Some(&'/') {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    bump(&mut chars, &mut line, &mut col);
                }
                continue;
            }
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&n) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '_' {
                    s.push(n);
                    bump(&mut chars, &mut line, &mut col);
                } else {
                    break;
                }
            }
            tokens.push(Token { tok: Tok::Ident(s), line: tline, col: tcol });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut s = String::new();
            let mut saw_exp = false;
            while let Some(&n) = chars.peek() {
                if n.is_ascii_digit() || n == '.' {
                    s.push(n);
                    bump(&mut chars, &mut line, &mut col);
                } else if (n == 'e' || n == 'E') && !saw_exp {
                    saw_exp = true;
                    s.push(n);
                    bump(&mut chars, &mut line, &mut col);
                    if let Some(&sign) = chars.peek() {
                        if sign == '+' || sign == '-' {
                            s.push(sign);
                            bump(&mut chars, &mut line, &mut col);
                        }
                    }
                } else {
                    break;
                }
            }
            tokens.push(Token { tok: Tok::Number(s), line: tline, col: tcol });
            continue;
        }
        if c == '"' {
            bump(&mut chars, &mut line, &mut col);
            let mut s = String::new();
            let mut closed = false;
            while let Some(&n) = chars.peek() {
                bump(&mut chars, &mut line, &mut col);
                if n == '"' {
                    closed = true;
                    break;
                }
                s.push(n);
            }
            if closed {
                tokens.push(Token { tok: Tok::Str(s), line: tline, col: tcol });
            } else {
                tokens.push(Token { tok: Tok::Sym('\u{0}'), line: tline, col: tcol });
            }
            continue;
        }
        if c == '-' {
            let mut probe = chars.clone();
            probe.next();
            if probe.peek() == Some(&'>') {
                bump(&mut chars, &mut line, &mut col);
                bump(&mut chars, &mut line, &mut col);
                tokens.push(Token { tok: Tok::Arrow, line: tline, col: tcol });
                continue;
            }
        }
        if "();,[]*/+-".contains(c) {
            bump(&mut chars, &mut line, &mut col);
            tokens.push(Token { tok: Tok::Sym(c), line: tline, col: tcol });
            continue;
        }
        bump(&mut chars, &mut line, &mut col);
        tokens.push(Token { tok: Tok::Sym('\u{0}'), line: tline, col: tcol });
    }
    (tokens, line)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BV_SAMPLE: &str = r#"OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
creg c[2];
h q[0];
h q[1];
x q[2];
rz(pi/2) q[2];
cx q[0],q[2];
barrier q[0],q[1],q[2];
measure q[0] -> c[0];
measure q[1] -> c[1];
"#;

    #[test]
    fn parses_supported_subset() {
        let c = parse_qasm(BV_SAMPLE).unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.num_clbits(), 2);
        assert_eq!(c.gates().len(), 8);
        assert_eq!(c.gates()[3].kind, GateKind::Rz(std::f64::consts::FRAC_PI_2));
        assert_eq!(c.gates()[4].qubits, vec![0, 2]);
        assert_eq!(c.gates()[7].clbit, Some(1));
    }

    #[test]
    fn round_trip_is_gate_for_gate_stable() {
        let c = parse_qasm(BV_SAMPLE).unwrap();
        let emitted = emit_qasm(&c);
        let reparsed = parse_qasm(&emitted).unwrap();
        assert!(c.same_gates(&reparsed, 1e-15));
        // Emitted form is a fixed point.
        assert_eq!(emitted, emit_qasm(&reparsed));
    }

    #[test]
    fn angle_forms() {
        let prog = |angle: &str| {
            format!("OPENQASM 2.0;\nqreg q[1];\nrz({angle}) q[0];\n")
        };
        let angle_of = |src: &str| -> f64 {
            match parse_qasm(src).unwrap().gates()[0].kind {
                GateKind::Rz(t) => t,
                _ => unreachable!(),
            }
        };
        let pi = std::f64::consts::PI;
        assert_eq!(angle_of(&prog("pi")), pi);
        assert_eq!(angle_of(&prog("-pi")), -pi);
        assert_eq!(angle_of(&prog("pi/4")), pi / 4.0);
        assert_eq!(angle_of(&prog("3*pi/2")), 3.0 * pi / 2.0);
        assert_eq!(angle_of(&prog("0.5")), 0.5);
        assert_eq!(angle_of(&prog("-2.5e-3")), -2.5e-3);
    }

    #[test]
    fn unsupported_gate_is_named() {
        let src = "OPENQASM 2.0;\nqreg q[1];\nu1(0.3) q[0];\n";
        match parse_qasm(src) {
            Err(Error::UnsupportedGate(name)) => assert_eq!(name, "u1"),
            other => panic!("expected unsupported-gate error, got {other:?}"),
        }
    }

    #[test]
    fn register_range_is_checked() {
        let src = "OPENQASM 2.0;\nqreg q[3];\ncx q[0],q[5];\n";
        assert!(matches!(parse_qasm(src), Err(Error::Register(_))));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let src = "OPENQASM 2.0;\nqreg q[2];\ncx q[0] q[1];\n";
        match parse_qasm(src) {
            Err(Error::Syntax { line, col, .. }) => {
                assert_eq!(line, 3);
                assert!(col > 1);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn missing_creg_rejects_measure() {
        let src = "OPENQASM 2.0;\nqreg q[1];\nmeasure q[0] -> c[0];\n";
        assert!(matches!(parse_qasm(src), Err(Error::Register(_))));
    }

    #[test]
    fn whole_register_barrier_expands() {
        let src = "OPENQASM 2.0;\nqreg q[3];\nbarrier q;\n";
        let c = parse_qasm(src).unwrap();
        assert_eq!(c.gates()[0].qubits, vec![0, 1, 2]);
    }

    #[test]
    fn comments_are_skipped() {
        let src = "// header\nOPENQASM 2.0;\nqreg q[1]; // trailing\nh q[0];\n";
        assert_eq!(parse_qasm(src).unwrap().gates().len(), 1);
    }

    #[test]
    fn second_qreg_is_rejected() {
        let src = "OPENQASM 2.0;\nqreg q[1];\nqreg r[1];\n";
        assert!(matches!(parse_qasm(src), Err(Error::Register(_))));
    }

    #[test]
    fn emitted_angles_round_trip_exactly() {
        let thetas = [0.0, -0.0, 1.0 / 3.0, std::f64::consts::PI, 1e-17, -2.5];
        let gates = thetas.iter().map(|&t| Gate::rz(t, 0)).collect();
        let c = Circuit::new(1, 0, gates).unwrap();
        let reparsed = parse_qasm(&emit_qasm(&c)).unwrap();
        for (a, b) in c.gates().iter().zip(reparsed.gates()) {
            match (a.kind, b.kind) {
                (GateKind::Rz(x), GateKind::Rz(y)) => {
                    assert_eq!(x.to_bits(), y.to_bits(), "{x} vs {y}")
                }
                _ => unreachable!(),
            }
        }
    }
}
