use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One piecewise-constant detuning segment of the drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// Seconds.
    pub duration: f64,
    /// Detuning of the red tone from the reference mode's sideband (rad/s);
    /// the blue tone sits at the mirrored detuning.
    pub detuning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    /// Lamb-Dicke parameter of each ion.
    pub eta: [f64; 2],
    /// Added to the segment detuning for this mode (rad/s).
    #[serde(default)]
    pub offset: f64,
}

/// Pulse-level description of one MS gate on two ions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladSpec {
    /// Red and blue sideband Rabi rates per ion (rad/s).
    pub omega_r: [f64; 2],
    pub omega_b: [f64; 2],
    #[serde(default = "default_phase")]
    pub phi_r: f64,
    #[serde(default = "default_phase")]
    pub phi_b: f64,
    pub segments: Vec<Segment>,
    pub modes: Vec<Mode>,
    /// Per-ion Stark shift added to both tone detunings (rad/s).
    #[serde(default)]
    pub stark: [f64; 2],
    /// Motional coherence time (s); absent means no motional dephasing.
    #[serde(default)]
    pub tau_m: Option<f64>,
    /// Heating rate (quanta/s).
    #[serde(default)]
    pub gamma_heat: f64,
    /// Laser coherence time (s); absent means no laser dephasing.
    #[serde(default)]
    pub tau_l: Option<f64>,
    #[serde(default = "default_fock")]
    pub n_fock: usize,
    /// Mean phonon number of the initial thermal mode state.
    #[serde(default)]
    pub n_bar: f64,
    /// RK4 steps per shortest dynamical period.
    #[serde(default = "default_steps")]
    pub steps_per_period: usize,
}

fn default_phase() -> f64 {
    FRAC_PI_2
}

fn default_fock() -> usize {
    13
}

pub const DEFAULT_STEPS_PER_PERIOD: usize = 200;

fn default_steps() -> usize {
    DEFAULT_STEPS_PER_PERIOD
}

/// Gate time of the synthetic default spec (s).
pub const SYNTHETIC_GATE_TIME: f64 = 200e-6;

impl LindbladSpec {
    /// Two-mode XX(π/4) gate with synthetic parameters: two phase-space loops
    /// on the reference mode, three on a second mode with opposite-sign coupling.
    pub fn synthetic_default() -> Self {
        let t = SYNTHETIC_GATE_TIME;
        let mut s = Self {
            omega_r: [0.0; 2],
            omega_b: [0.0; 2],
            phi_r: FRAC_PI_2,
            phi_b: FRAC_PI_2,
            segments: vec![Segment {
                duration: t,
                detuning: -4.0 * PI / t,
            }],
            modes: vec![
                Mode {
                    eta: [0.1, 0.1],
                    offset: 0.0,
                },
                Mode {
                    eta: [0.05, -0.05],
                    offset: 10.0 * PI / t,
                },
            ],
            stark: [0.0; 2],
            tau_m: None,
            gamma_heat: 0.0,
            tau_l: None,
            n_fock: 13,
            n_bar: 0.0,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
        };
        let omega = s.calibrated_omega(FRAC_PI_4).expect("synthetic modes calibrate");
        s.set_omega(omega);
        s
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_fock < 2 {
            return bad(format!("n_fock must be at least 2, got {}", self.n_fock));
        }
        if self.segments.is_empty() {
            return bad("at least one segment is required".into());
        }
        if self.modes.is_empty() {
            return bad("at least one mode is required".into());
        }
        for (k, seg) in self.segments.iter().enumerate() {
            if !(seg.duration > 0.0 && seg.duration.is_finite()) {
                return bad(format!("segment {k} duration must be positive"));
            }
            if !seg.detuning.is_finite() {
                return bad(format!("segment {k} detuning is not finite"));
            }
        }
        let finite = self
            .omega_r
            .iter()
            .chain(&self.omega_b)
            .chain(&self.stark)
            .chain(self.modes.iter().flat_map(|m| m.eta.iter().chain(std::iter::once(&m.offset))))
            .chain([&self.phi_r, &self.phi_b])
            .all(|x| x.is_finite());
        if !finite {
            return bad("drive parameters must be finite".into());
        }
        if self.omega_r.iter().chain(&self.omega_b).any(|&x| x < 0.0) {
            return bad("Rabi rates must be non-negative".into());
        }
        if !(self.gamma_heat >= 0.0 && self.gamma_heat.is_finite()) {
            return bad("gamma_heat must be a non-negative rate".into());
        }
        for (name, tau) in [("tau_m", self.tau_m), ("tau_l", self.tau_l)] {
            if let Some(t) = tau {
                if !(t > 0.0) {
                    return bad(format!("{name} must be positive"));
                }
            }
        }
        if !(self.n_bar >= 0.0 && self.n_bar.is_finite()) {
            return bad("n_bar must be non-negative".into());
        }
        if self.steps_per_period == 0 {
            return bad("steps_per_period must be positive".into());
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Whether every tone is balanced, so the per-mode Hamiltonians commute.
    pub fn is_balanced(&self) -> bool {
        self.omega_r == self.omega_b && self.stark == [0.0; 2]
    }

    pub fn set_omega(&mut self, omega: f64) {
        self.omega_r = [omega; 2];
        self.omega_b = [omega; 2];
    }

    /// Multiply every Rabi rate by `k`.
    pub fn scale_omega(&mut self, k: f64) {
        for x in self.omega_r.iter_mut().chain(self.omega_b.iter_mut()) {
            *x *= k;
        }
    }

    /// Rabi rate giving spin phase exp(-iθ X⊗X) for a single balanced segment
    /// whose modes all close: Ω² = -2θ / (T Σ_j η1j η2j / ν_j).
    pub fn calibrated_omega(&self, theta: f64) -> Result<f64> {
        if self.segments.len() != 1 {
            return Err(Error::Config("calibration needs a single segment".into()));
        }
        let seg = self.segments[0];
        let sum: f64 = self
            .modes
            .iter()
            .map(|m| m.eta[0] * m.eta[1] / (seg.detuning + m.offset))
            .sum();
        let omega2 = -2.0 * theta / (seg.duration * sum);
        if !(omega2 > 0.0 && omega2.is_finite()) {
            return Err(Error::Config(format!(
                "modes cannot produce a spin phase of {theta} (coupling sum {sum:e})"
            )));
        }
        Ok(omega2.sqrt())
    }

    /// Copy whose spin phase is scaled by θ/(π/4) through Ω.
    pub fn for_angle(&self, theta: f64) -> Self {
        let mut s = self.clone();
        s.scale_omega((theta / FRAC_PI_4).abs().sqrt());
        s
    }

    /// Copy with the spin phase overrotated by the fraction `eps`.
    pub fn with_overrotation(&self, eps: f64) -> Self {
        let mut s = self.clone();
        s.scale_omega((1.0 + eps).sqrt());
        s
    }

    pub fn with_heating(&self, gamma: f64) -> Self {
        Self {
            gamma_heat: gamma,
            ..self.clone()
        }
    }

    /// Segment index and the accumulated detuning phase ∫δ dt at time t.
    pub(crate) fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let total = self.total_time();
        let slack = 1e-12 * total;
        if !(t >= -slack && t <= total + slack) {
            return Err(Error::OutsideSchedule { t, total });
        }
        let mut start = 0.0;
        let mut phase = 0.0;
        for (k, seg) in self.segments.iter().enumerate() {
            let end = start + seg.duration;
            if t <= end || k + 1 == self.segments.len() {
                return Ok((k, phase + seg.detuning * (t - start)));
            }
            phase += seg.detuning * seg.duration;
            start = end;
        }
        unreachable!("schedule has at least one segment")
    }
}
