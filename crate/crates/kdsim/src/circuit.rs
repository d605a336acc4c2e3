//! Circuits over the free gate set, and their text format.
//!
//! A circuit acts on `n` qubits with Pauli layers, the global Hadamard
//! `HALL`, CX gates, computational measurements, and Pauli corrections
//! conditioned on the parity of earlier measurement outcomes. The text
//! format is one instruction per line with `#` comments:
//!
//! ```text
//! n 2            # header, required first
//! P 10 01        # Pauli layer with u = 10, v = 01
//! HALL           # Hadamard on every qubit
//! CX 0 1         # controlled-X, control 0, target 1
//! M 0            # measure qubit 0
//! P? 01 00 if 0  # apply P_{01,00} when outcome 0 has odd parity
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::group::BitVector;

/// One instruction of a circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    /// The Pauli `P_{u,v}`.
    Pauli { u: BitVector, v: BitVector },
    /// Hadamard on every qubit.
    Hall,
    /// Controlled-X with the given control and target.
    Cx { control: usize, target: usize },
    /// Computational measurement of one qubit; appends an outcome bit.
    Measure { qubit: usize },
    /// `P_{u,v}` applied when the XOR of the listed earlier outcomes is 1.
    CondPauli {
        u: BitVector,
        v: BitVector,
        outcomes: Vec<usize>,
    },
}

/// A validated gate sequence on `n` qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    measurements: usize,
}

impl Circuit {
    /// Validates qubit ranges, Pauli label lengths, distinct CX wires, and
    /// that conditions reference only measurements already performed.
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        if n == 0 || n > crate::group::MAX_QUBITS {
            return Err(Error::Input(format!(
                "circuit width must be between 1 and {}, got {n}",
                crate::group::MAX_QUBITS
            )));
        }
        let mut measured = 0usize;
        for gate in &gates {
            match gate {
                Gate::Pauli { u, v } | Gate::CondPauli { u, v, .. } => {
                    if u.len() != n {
                        return Err(Error::LengthMismatch(u.len(), n));
                    }
                    if v.len() != n {
                        return Err(Error::LengthMismatch(v.len(), n));
                    }
                    if let Gate::CondPauli { outcomes, .. } = gate {
                        if outcomes.is_empty() {
                            return Err(Error::Input(
                                "conditional Pauli needs at least one outcome index".into(),
                            ));
                        }
                        for &i in outcomes {
                            if i >= measured {
                                return Err(Error::Input(format!(
                                    "condition references outcome {i} but only {measured} \
                                     measurement(s) precede the gate"
                                )));
                            }
                        }
                    }
                }
                Gate::Hall => {}
                Gate::Cx { control, target } => {
                    if *control >= n {
                        return Err(Error::QubitOutOfRange { index: *control, n });
                    }
                    if *target >= n {
                        return Err(Error::QubitOutOfRange { index: *target, n });
                    }
                    if control == target {
                        return Err(Error::ControlEqualsTarget(*control));
                    }
                }
                Gate::Measure { qubit } => {
                    if *qubit >= n {
                        return Err(Error::QubitOutOfRange { index: *qubit, n });
                    }
                    measured += 1;
                }
            }
        }
        Ok(Circuit {
            n,
            gates,
            measurements: measured,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of measurement gates (= length of every shot record).
    pub fn measurements(&self) -> usize {
        self.measurements
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        for gate in &self.gates {
            match gate {
                Gate::Pauli { u, v } => writeln!(f, "P {u} {v}")?,
                Gate::Hall => writeln!(f, "HALL")?,
                Gate::Cx { control, target } => writeln!(f, "CX {control} {target}")?,
                Gate::Measure { qubit } => writeln!(f, "M {qubit}")?,
                Gate::CondPauli { u, v, outcomes } => {
                    let cond = outcomes
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join("^");
                    writeln!(f, "P? {u} {v} if {cond}")?;
                }
            }
        }
        Ok(())
    }
}

/// A whitespace-delimited token with its 1-based starting column.
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(Token {
                    text: &body[s..i],
                    col: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &body[s..],
            col: s + 1,
        });
    }
    tokens
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn parse_index(tok: &Token<'_>, line: usize, what: &str) -> Result<usize> {
    tok.text
        .parse::<usize>()
        .map_err(|_| parse_err(line, tok.col, format!("{what} must be a non-negative integer, got '{}'", tok.text)))
}

fn parse_bits(tok: &Token<'_>, line: usize, n: usize, what: &str) -> Result<BitVector> {
    let bv: BitVector = tok
        .text
        .parse()
        .map_err(|e: Error| parse_err(line, tok.col, format!("{what}: {e}")))?;
    if bv.len() != n {
        return Err(parse_err(
            line,
            tok.col,
            format!("{what} must have {n} bits, got {}", bv.len()),
        ));
    }
    Ok(bv)
}

fn expect_arity(tokens: &[Token<'_>], line: usize, want: usize, form: &str) -> Result<()> {
    if tokens.len() != want + 1 {
        let col = tokens
            .get(want + 1)
            .map(|t| t.col)
            .unwrap_or_else(|| tokens.last().map(|t| t.col + t.text.len()).unwrap_or(1));
        return Err(parse_err(
            line,
            col,
            format!("expected '{form}' with {want} argument(s), got {}", tokens.len() - 1),
        ));
    }
    Ok(())
}

/// Parses the circuit text format, reporting malformed input with 1-based
/// line and column positions.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n: Option<usize> = None;
    let mut gates: Vec<Gate> = Vec::new();
    let mut measured = 0usize;

    for (line_idx, raw) in text.lines().enumerate() {
        let line = line_idx + 1;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let head = &tokens[0];
        if n.is_none() {
            if head.text != "n" {
                return Err(parse_err(
                    line,
                    head.col,
                    format!("expected header 'n <int>' before any gate, got '{}'", head.text),
                ));
            }
            expect_arity(&tokens, line, 1, "n <int>")?;
            let width = parse_index(&tokens[1], line, "qubit count")?;
            if width == 0 || width > crate::group::MAX_QUBITS {
                return Err(parse_err(
                    line,
                    tokens[1].col,
                    format!(
                        "qubit count must be between 1 and {}, got {width}",
                        crate::group::MAX_QUBITS
                    ),
                ));
            }
            n = Some(width);
            continue;
        }
        let width = n.expect("header seen");
        match head.text {
            "n" => {
                return Err(parse_err(line, head.col, "duplicate 'n' header"));
            }
            "P" => {
                expect_arity(&tokens, line, 2, "P <ubits> <vbits>")?;
                let u = parse_bits(&tokens[1], line, width, "u bits")?;
                let v = parse_bits(&tokens[2], line, width, "v bits")?;
                gates.push(Gate::Pauli { u, v });
            }
            "HALL" => {
                expect_arity(&tokens, line, 0, "HALL")?;
                gates.push(Gate::Hall);
            }
            "CX" => {
                expect_arity(&tokens, line, 2, "CX <control> <target>")?;
                let control = parse_index(&tokens[1], line, "control")?;
                let target = parse_index(&tokens[2], line, "target")?;
                if control >= width {
                    return Err(parse_err(
                        line,
                        tokens[1].col,
                        format!("control {control} out of range for {width} qubit(s)"),
                    ));
                }
                if target >= width {
                    return Err(parse_err(
                        line,
                        tokens[2].col,
                        format!("target {target} out of range for {width} qubit(s)"),
                    ));
                }
                if control == target {
                    return Err(parse_err(
                        line,
                        tokens[2].col,
                        format!("control equals target ({control})"),
                    ));
                }
                gates.push(Gate::Cx { control, target });
            }
            "M" => {
                expect_arity(&tokens, line, 1, "M <qubit>")?;
                let qubit = parse_index(&tokens[1], line, "qubit")?;
                if qubit >= width {
                    return Err(parse_err(
                        line,
                        tokens[1].col,
                        format!("qubit {qubit} out of range for {width} qubit(s)"),
                    ));
                }
                gates.push(Gate::Measure { qubit });
                measured += 1;
            }
            "P?" => {
                expect_arity(&tokens, line, 4, "P? <ubits> <vbits> if <i1>^<i2>")?;
                let u = parse_bits(&tokens[1], line, width, "u bits")?;
                let v = parse_bits(&tokens[2], line, width, "v bits")?;
                if tokens[3].text != "if" {
                    return Err(parse_err(
                        line,
                        tokens[3].col,
                        format!("expected 'if', got '{}'", tokens[3].text),
                    ));
                }
                let cond = &tokens[4];
                let mut outcomes = Vec::new();
                for part in cond.text.split('^') {
                    let idx = part.parse::<usize>().map_err(|_| {
                        parse_err(
                            line,
                            cond.col,
                            format!("condition must be outcome indices joined by '^', got '{}'", cond.text),
                        )
                    })?;
                    if idx >= measured {
                        return Err(parse_err(
                            line,
                            cond.col,
                            format!(
                                "condition references outcome {idx} but only {measured} \
                                 measurement(s) precede this gate"
                            ),
                        ));
                    }
                    outcomes.push(idx);
                }
                gates.push(Gate::CondPauli { u, v, outcomes });
            }
            other => {
                return Err(parse_err(
                    line,
                    head.col,
                    format!("unknown instruction '{other}'"),
                ));
            }
        }
    }

    let width = n.ok_or_else(|| parse_err(1, 1, "empty circuit: missing 'n <int>' header"))?;
    Circuit::new(width, gates)
}
