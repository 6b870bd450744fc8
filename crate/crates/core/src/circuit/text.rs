//! Line-oriented circuit format.
//!
//! ```text
//! # comment
//! QUBITS 3
//! R 0 1.5707963267948966 0     # Rot1Q q theta phi
//! VZ 2 pi/4                    # VirtualZ q theta
//! XX 0 1 0.7853981633974483    # XX a b theta
//! H 1
//! CNOT 0 2 STD                 # STD or INV
//! P 1 X                        # error-free Pauli frame change: I, X, Y or Z
//! ```
//!
//! Angles accept plain floats and `pi` forms such as `-pi/2` or `3*pi/4`.
//! Writing uses shortest round-trip float formatting, so parse∘write is the identity.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::Circuit;
use crate::error::{Error, Result};
use crate::gates::{Gate, GateKind, Orientation};
use crate::qmat::Pauli;

fn parse_angle(tok: &str) -> std::result::Result<f64, String> {
    if let Ok(v) = tok.parse::<f64>() {
        return Ok(v);
    }
    let (sign, body) = match tok.strip_prefix('-') {
        Some(b) => (-1.0, b),
        None => (1.0, tok),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (body, None),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c
            .strip_suffix('*')
            .and_then(|c| c.parse::<f64>().ok())
            .ok_or_else(|| format!("bad angle '{tok}'"))?,
        None => return Err(format!("bad angle '{tok}'")),
    };
    let den = match den {
        Some(d) => d.parse::<f64>().map_err(|_| format!("bad angle '{tok}'"))?,
        None => 1.0,
    };
    Ok(sign * coeff * PI / den)
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let perr = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let kind = toks[0].to_ascii_uppercase();
        let args = &toks[1..];
        let expect = |count: usize| {
            if args.len() == count {
                Ok(())
            } else {
                Err(perr(format!(
                    "{kind} takes {count} arguments, got {}",
                    args.len()
                )))
            }
        };
        let qubit = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| perr(format!("bad qubit index '{s}'")))
        };
        let angle = |s: &str| parse_angle(s).map_err(perr);

        if kind == "QUBITS" {
            expect(1)?;
            if circuit.is_some() {
                return Err(perr("duplicate QUBITS line".into()));
            }
            let n = qubit(args[0])?;
            circuit = Some(Circuit::new(n).map_err(|e| perr(e.to_string()))?);
            continue;
        }
        let c = circuit
            .as_mut()
            .ok_or_else(|| perr("gate before QUBITS line".into()))?;
        let gate = match kind.as_str() {
            "R" => {
                expect(3)?;
                Gate::rot(qubit(args[0])?, angle(args[1])?, angle(args[2])?)
            }
            "VZ" => {
                expect(2)?;
                Gate::vz(qubit(args[0])?, angle(args[1])?)
            }
            "XX" => {
                expect(3)?;
                Gate::xx(qubit(args[0])?, qubit(args[1])?, angle(args[2])?)
            }
            "H" => {
                expect(1)?;
                Ok(Gate::h(qubit(args[0])?))
            }
            "P" => {
                expect(2)?;
                let p = match args[1].to_ascii_uppercase().as_str() {
                    "I" => Pauli::I,
                    "X" => Pauli::X,
                    "Y" => Pauli::Y,
                    "Z" => Pauli::Z,
                    other => return Err(perr(format!("Pauli must be I, X, Y or Z, got '{other}'"))),
                };
                Ok(Gate::pauli(qubit(args[0])?, p))
            }
            "CNOT" => {
                expect(3)?;
                let o = match args[2].to_ascii_uppercase().as_str() {
                    "STD" => Orientation::Standard,
                    "INV" => Orientation::Inverse,
                    other => return Err(perr(format!("orientation must be STD or INV, got '{other}'"))),
                };
                Gate::cnot(qubit(args[0])?, qubit(args[1])?, o)
            }
            other => return Err(perr(format!("unknown gate '{other}'"))),
        }
        .map_err(|e| perr(e.to_string()))?;
        c.push(gate).map_err(|e| perr(e.to_string()))?;
    }
    circuit.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing QUBITS line".into(),
    })
}

pub fn write_circuit(c: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "QUBITS {}", c.n());
    for g in c.gates() {
        let q = &g.qubits;
        let _ = match g.kind {
            GateKind::Rot1Q { theta, phi } => writeln!(s, "R {} {theta} {phi}", q[0]),
            GateKind::VirtualZ { theta } => writeln!(s, "VZ {} {theta}", q[0]),
            GateKind::XX { theta } => writeln!(s, "XX {} {} {theta}", q[0], q[1]),
            GateKind::Hadamard => writeln!(s, "H {}", q[0]),
            GateKind::Pauli(p) => writeln!(s, "P {} {}", q[0], p.symbol()),
            GateKind::CnotComposite(o) => writeln!(
                s,
                "CNOT {} {} {}",
                q[0],
                q[1],
                match o {
                    Orientation::Standard => "STD",
                    Orientation::Inverse => "INV",
                }
            ),
        };
    }
    s
}
