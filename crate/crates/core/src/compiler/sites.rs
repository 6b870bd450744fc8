use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{wrap_pi, GateKind, Orientation};

/// A CNOT · W · CNOT motif on the same (control, target).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugationSite {
    pub left_gate_index: usize,
    pub right_gate_index: usize,
    pub enclosed_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationRule {
    threshold: f64,
}

impl Default for OrientationRule {
    fn default() -> Self {
        Self {
            threshold: FRAC_PI_2,
        }
    }
}

impl OrientationRule {
    pub fn new(threshold: f64) -> Result<Self> {
        if threshold > 0.0 && threshold <= PI {
            Ok(Self { threshold })
        } else {
            Err(Error::OutOfRange(format!(
                "orientation threshold {threshold} not in (0, pi]"
            )))
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Whether the closing gate should be the inverse of the opening one.
    pub fn prefers_inverse(&self, enclosed_angle: f64) -> bool {
        wrap_pi(enclosed_angle).abs() <= self.threshold
    }
}

struct Open {
    index: usize,
    control: usize,
    target: usize,
    angle: Option<f64>,
}

/// Pair CNOT composites around virtual-Z rotations of their target.
///
/// Inside an open pair, allowed gates are: VirtualZ on the target (angles add),
/// VirtualZ on the control (commutes), further CNOTs onto the same target from
/// other controls (nested ladders), and anything on unrelated qubits. Any other
/// gate touching the pair's qubits discards it. Closing CNOTs match the most
/// recent open CNOT on the same qubits that encloses a rotation, so nested
/// ladders pair inner to outer and back-to-back blocks pair greedily left to right.
pub fn find_hidden_inverse_sites(c: &Circuit) -> Vec<ConjugationSite> {
    let mut open: Vec<Open> = Vec::new();
    let mut sites = Vec::new();
    for (i, g) in c.gates().iter().enumerate() {
        match g.kind {
            GateKind::CnotComposite(_) => {
                let (ct, tg) = (g.qubits[0], g.qubits[1]);
                let hit = open
                    .iter()
                    .rposition(|o| o.control == ct && o.target == tg && o.angle.is_some());
                if let Some(k) = hit {
                    let o = open.remove(k);
                    sites.push(ConjugationSite {
                        left_gate_index: o.index,
                        right_gate_index: i,
                        enclosed_angle: o.angle.unwrap_or(0.0),
                    });
                    continue;
                }
                open.retain(|o| {
                    let nested = o.target == tg && o.control != ct;
                    let disjoint = o.control != ct && o.control != tg && o.target != ct && o.target != tg;
                    nested || disjoint
                });
                open.push(Open {
                    index: i,
                    control: ct,
                    target: tg,
                    angle: None,
                });
            }
            GateKind::VirtualZ { theta } => {
                let q = g.qubits[0];
                for o in open.iter_mut().filter(|o| o.target == q) {
                    o.angle = Some(o.angle.unwrap_or(0.0) + theta);
                }
            }
            _ => open.retain(|o| !g.qubits.contains(&o.control) && !g.qubits.contains(&o.target)),
        }
    }
    sites.sort_by_key(|s| s.left_gate_index);
    sites
}

/// A site together with the orientation chosen for its closing gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiteDecision {
    pub site: ConjugationSite,
    pub closing: Orientation,
}

/// Orient each site's closing CNOT: the inverse of the opening one when
/// |wrap(θ)| ≤ threshold, otherwise the same orientation.
pub fn apply_orientation_rule(c: &Circuit, rule: &OrientationRule) -> (Circuit, Vec<SiteDecision>) {
    let mut out = c.clone();
    let mut decisions = Vec::new();
    for site in find_hidden_inverse_sites(c) {
        let left = c.gates()[site.left_gate_index]
            .orientation()
            .expect("sites open on CNOT composites");
        let closing = if rule.prefers_inverse(site.enclosed_angle) {
            left.flipped()
        } else {
            left
        };
        out.set_orientation(site.right_gate_index, closing)
            .expect("sites close on CNOT composites");
        decisions.push(SiteDecision { site, closing });
    }
    (out, decisions)
}
