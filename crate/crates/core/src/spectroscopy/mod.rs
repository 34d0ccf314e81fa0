//! Probe-frequency sweeps and their analysis.
//!
//! A sweep prepares `|ψ_s⟩ ⊗ |probe⟩`, evolves under the assembled
//! Hamiltonian for time `τ` at each grid frequency and records the
//! probability that the probe flipped. Resonances with system transitions
//! show up as peaks in that probability.

mod peaks;
mod prepare;
mod rabi;

pub use peaks::{detect_peaks, Peak, ThresholdPolicy};
pub use prepare::{prepare_eigenstate_chain, ChainReport, ChainStep, PrepareOptions, StepReport};
pub use rabi::{rabi_predict, required_shots, weak_coupling_estimate, WEAK_REGIME_LIMIT};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{
    probe_probability, split_propagate, trotter_propagate, ExactPropagator, FreeEvolution,
    TrotterOrder, TrotterPlan, DEFAULT_STEP_BOUND,
};
use crate::linalg::{kron, CMatrix, ONE, ZERO};
use crate::model::{Model, ProbeState, SystemHamiltonian};
use crate::state::Statevector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Probe starts excited; read the decay probability.
    Absorption,
    /// Probe starts in its ground state; read the excitation probability.
    Emission,
}

impl SweepMode {
    pub fn probe_init(self) -> ProbeState {
        match self {
            Self::Absorption => ProbeState::Excited,
            Self::Emission => ProbeState::Ground,
        }
    }

    /// Probe outcome that signals a transition.
    pub fn flip_outcome(self) -> u8 {
        self.probe_init().flipped().bit()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Absorption => "absorption",
            Self::Emission => "emission",
        }
    }
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absorption" => Ok(Self::Absorption),
            "emission" => Ok(Self::Emission),
            other => Err(Error::parse(other, "expected `absorption` or `emission`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    /// `steps: None` picks the step count per point from `‖H‖·dt ≤ 0.1`.
    Trotter {
        order: TrotterOrder,
        steps: Option<usize>,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Trotter { .. } => "trotter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub omega_min: f64,
    pub omega_max: f64,
    /// Number of grid intervals.
    pub points: usize,
    pub mode: SweepMode,
    pub method: Method,
    pub shots: Option<ShotConfig>,
}

impl SweepPlan {
    pub fn new(omega_min: f64, omega_max: f64, points: usize) -> Self {
        Self {
            omega_min,
            omega_max,
            points,
            mode: SweepMode::Absorption,
            method: Method::Exact,
            shots: None,
        }
    }

    pub fn with_mode(mut self, mode: SweepMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_shots(mut self, shots: u64, seed: u64) -> Self {
        self.shots = Some(ShotConfig { shots, seed });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min.is_finite() && self.omega_max.is_finite()) {
            return Err(Error::Parameter("frequency bounds must be finite".into()));
        }
        if self.omega_max <= self.omega_min {
            return Err(Error::Parameter(format!(
                "omega_max={} must exceed omega_min={}",
                self.omega_max, self.omega_min
            )));
        }
        if self.points == 0 {
            return Err(Error::Parameter(
                "frequency grid needs at least one interval".into(),
            ));
        }
        if let Some(ShotConfig { shots: 0, .. }) = self.shots {
            return Err(Error::Parameter("shot count must be positive".into()));
        }
        if let Method::Trotter { steps: Some(0), .. } = self.method {
            return Err(Error::Parameter(
                "Trotter step count must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn delta_omega(&self) -> f64 {
        (self.omega_max - self.omega_min) / self.points as f64
    }
}

/// Interval midpoints `ω_k = ω_min + (k + ½)Δω`, `k = 0..j`.
pub fn frequency_grid(plan: &SweepPlan) -> Result<Vec<(usize, f64)>> {
    plan.validate()?;
    let dw = plan.delta_omega();
    Ok((0..plan.points)
        .map(|k| (k, plan.omega_min + (k as f64 + 0.5) * dw))
        .collect())
}

/// Returns a warning when the grid spacing exceeds the expected peak width
/// `max[c·M, 1/τ]`. Without a known matrix element only the `1/τ` floor is used.
pub fn resolution_warning(
    delta_omega: f64,
    c: f64,
    tau: f64,
    matrix_element: Option<f64>,
) -> Option<String> {
    let width = (c * matrix_element.unwrap_or(0.0)).max(1.0 / tau);
    (delta_omega > width).then(|| {
        format!("grid spacing {delta_omega} exceeds the expected peak width {width}; narrow peaks may be missed")
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub flips: u64,
    pub shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub k: usize,
    pub omega: f64,
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<ShotCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub omega_min: f64,
    pub omega_max: f64,
    pub mode: SweepMode,
    pub c: f64,
    pub tau: f64,
    pub points: Vec<SpectrumPoint>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Spectrum {
    /// Wraps precomputed probabilities on the standard midpoint grid.
    pub fn from_probabilities(
        omega_min: f64,
        omega_max: f64,
        probabilities: &[f64],
        c: f64,
        tau: f64,
    ) -> Self {
        let dw = (omega_max - omega_min) / probabilities.len().max(1) as f64;
        let points = probabilities
            .iter()
            .enumerate()
            .map(|(k, &p)| SpectrumPoint {
                k,
                omega: omega_min + (k as f64 + 0.5) * dw,
                probability: p,
                counts: None,
            })
            .collect();
        Self {
            omega_min,
            omega_max,
            mode: SweepMode::Absorption,
            c,
            tau,
            points,
            warnings: vec![],
        }
    }

    pub fn delta_omega(&self) -> f64 {
        (self.omega_max - self.omega_min) / self.points.len().max(1) as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.probability).collect()
    }

    pub fn max_probability(&self) -> f64 {
        self.points
            .iter()
            .fold(0.0_f64, |m, p| m.max(p.probability))
    }
}

/// One eigenstate-to-eigenstate transition with its oracle quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    /// Initial eigenstate index (ascending-energy order).
    pub i: usize,
    /// Final eigenstate index.
    pub j: usize,
    /// `|E_j - E_i|`.
    pub delta_e: f64,
    /// `|⟨φ_j|A|φ_i⟩|`.
    pub matrix_element: f64,
    /// `|⟨φ_i|ψ_s⟩|²`.
    pub overlap: f64,
    /// Either end lies in the padding subspace.
    #[serde(default)]
    pub padded: bool,
}

impl TransitionRecord {
    /// Ranking weight proportional to the small-angle peak height.
    pub fn weight(&self) -> f64 {
        self.matrix_element * self.matrix_element * self.overlap
    }

    /// On-resonance height of the closed-form Rabi prediction.
    pub fn predicted_height(&self, c: f64, tau: f64) -> f64 {
        rabi_predict(self, c, tau, self.delta_e)
    }

    pub fn label(&self) -> String {
        format!("{}->{}", self.i, self.j)
    }
}

/// Per-sweep precomputation shared by all grid points.
pub struct SweepEngine<'a> {
    model: &'a Model,
    plan: SweepPlan,
    joint_initial: Statevector,
    /// `H_S ⊗ I + c A ⊗ X`; the probe term is added per frequency.
    exact_base: Option<CMatrix>,
    free: Option<FreeEvolution>,
}

impl<'a> SweepEngine<'a> {
    pub fn new(model: &'a Model, plan: &SweepPlan) -> Result<Self> {
        model.validate()?;
        plan.validate()?;
        let joint_initial = model.initial.with_probe(plan.mode.probe_init().bit())?;
        let mut exact_base = None;
        let mut free = None;
        match plan.method {
            Method::Exact => {
                let hs = model.system.to_dense()?;
                let a = model.coupling.op().to_dense()?;
                let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
                exact_base =
                    Some(kron(&hs, &CMatrix::identity(2, 2)) + kron(&a, &x).scale(model.c));
            }
            Method::Trotter { .. } => {
                if let SystemHamiltonian::Dense { .. } = model.system {
                    free = Some(FreeEvolution::new(&model.system)?);
                }
            }
        }
        Ok(Self {
            model,
            plan: plan.clone(),
            joint_initial,
            exact_base,
            free,
        })
    }

    /// Evolves the joint state at frequency `omega` and returns it.
    pub fn evolve(&self, omega: f64) -> Result<Statevector> {
        let tau = self.model.tau;
        match self.plan.method {
            Method::Exact => {
                let mut h = self
                    .exact_base
                    .clone()
                    .expect("exact base built for exact method");
                let half = 0.5 * omega;
                for s in 0..h.nrows() / 2 {
                    h[(2 * s, 2 * s)].re -= half;
                    h[(2 * s + 1, 2 * s + 1)].re += half;
                }
                ExactPropagator::new(&h)?.propagate(&self.joint_initial, tau)
            }
            Method::Trotter { order, steps } => {
                let total = self.model.total(omega, self.plan.mode.probe_init())?;
                let plan = match steps {
                    Some(s) => TrotterPlan::new(order, s)?,
                    None => match &self.free {
                        Some(free) => {
                            let bound = free.system_norm()
                                + 0.5 * omega.abs()
                                + self.model.c * self.model.coupling.op().one_norm();
                            let s = (bound * tau / DEFAULT_STEP_BOUND).ceil().max(1.0) as usize;
                            TrotterPlan::new(order, s)?
                        }
                        None => TrotterPlan::for_bound(&total, tau, order, DEFAULT_STEP_BOUND)?,
                    },
                };
                match &self.free {
                    Some(free) => split_propagate(free, &total, tau, plan, &self.joint_initial),
                    None => trotter_propagate(&total, tau, plan, &self.joint_initial),
                }
            }
        }
    }

    pub fn point(&self, k: usize, omega: f64) -> Result<SpectrumPoint> {
        let probability = if self.model.c == 0.0 {
            0.0
        } else {
            let psi = self.evolve(omega)?;
            probe_probability(&psi, self.plan.mode.flip_outcome())
        };
        let mut point = SpectrumPoint {
            k,
            omega,
            probability,
            counts: None,
        };
        if let Some(cfg) = self.plan.shots {
            let flips = sample_flips(probability, cfg, k)?;
            point.counts = Some(ShotCounts {
                flips,
                shots: cfg.shots,
            });
            point.probability = flips as f64 / cfg.shots as f64;
        }
        Ok(point)
    }
}

/// Binomial shot sampling; the stream is fixed by `(seed, k)`, so results do
/// not depend on evaluation order.
fn sample_flips(probability: f64, cfg: ShotConfig, k: usize) -> Result<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(k as u64);
    let dist = Binomial::new(cfg.shots, probability.clamp(0.0, 1.0))
        .map_err(|e| Error::Numerical(format!("binomial sampler: {e}")))?;
    Ok(dist.sample(&mut rng))
}

/// Evolves one grid point and reads the probe flip probability.
pub fn run_point(model: &Model, plan: &SweepPlan, k: usize, omega: f64) -> Result<SpectrumPoint> {
    SweepEngine::new(model, plan)?.point(k, omega)
}

/// Runs every grid point (in parallel) and collects them in grid order.
pub fn run_sweep(model: &Model, plan: &SweepPlan) -> Result<Spectrum> {
    let grid = frequency_grid(plan)?;
    let engine = SweepEngine::new(model, plan)?;
    let results: Vec<(usize, Result<SpectrumPoint>)> = grid
        .par_iter()
        .map(|&(k, omega)| (k, engine.point(k, omega)))
        .collect();
    let mut points = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (k, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push((k, e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Sweep(failures));
    }
    let mut warnings = Vec::new();
    if let Some(w) = resolution_warning(plan.delta_omega(), model.c, model.tau, None) {
        log::warn!("{w}");
        warnings.push(w);
    }
    Ok(Spectrum {
        omega_min: plan.omega_min,
        omega_max: plan.omega_max,
        mode: plan.mode,
        c: model.c,
        tau: model.tau,
        points,
        warnings,
    })
}

/// Closed-form spectrum: the Rabi prediction summed over `records` at each
/// grid frequency, clipped to `[0, 1]`.
pub fn predict_spectrum(
    records: &[TransitionRecord],
    c: f64,
    tau: f64,
    plan: &SweepPlan,
) -> Result<Spectrum> {
    let points = frequency_grid(plan)?
        .into_iter()
        .map(|(k, omega)| SpectrumPoint {
            k,
            omega,
            probability: records
                .iter()
                .map(|r| rabi_predict(r, c, tau, omega))
                .sum::<f64>()
                .clamp(0.0, 1.0),
            counts: None,
        })
        .collect();
    Ok(Spectrum {
        omega_min: plan.omega_min,
        omega_max: plan.omega_max,
        mode: plan.mode,
        c,
        tau,
        points,
        warnings: vec![],
    })
}
