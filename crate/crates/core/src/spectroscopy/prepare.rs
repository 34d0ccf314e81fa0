use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{probe_probability, project_probe};
use crate::model::{Model, ProbeState};
use crate::oracle::{eigendecompose, EigenSystem};
use crate::state::Statevector;

use super::{Method, SweepEngine, SweepMode, SweepPlan};

/// One resonant step between eigenstates (ascending-energy indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub from: usize,
    pub to: usize,
}

impl ChainStep {
    pub fn new(from: usize, to: usize) -> Self {
        Self { from, to }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepareOptions {
    /// Steps whose flip probability falls below this abort the chain.
    pub min_flip_probability: f64,
    pub method: Method,
    /// Interaction time per step; `None` uses the resonant π-time `π/(2cM)`.
    pub tau: Option<f64>,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        Self {
            min_flip_probability: 1e-3,
            method: Method::Exact,
            tau: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub from: usize,
    pub to: usize,
    pub omega: f64,
    pub tau: f64,
    pub matrix_element: f64,
    pub flip_probability: f64,
    /// `|⟨φ_to|ψ⟩|²` after the projection.
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub state: Statevector,
    pub steps: Vec<StepReport>,
    /// Target eigenstate of the last step (the dominant one for an empty path).
    pub target: usize,
    pub fidelity: f64,
}

/// Drives the system from `model.initial` along `path` by resonant probe
/// interactions, each followed by a projective probe measurement
/// post-selected on the flipped outcome.
pub fn prepare_eigenstate_chain(
    model: &Model,
    path: &[ChainStep],
    opts: &PrepareOptions,
) -> Result<ChainReport> {
    model.validate()?;
    let eig = eigendecompose(&model.system)?;
    prepare_with_eigensystem(model, &eig, path, opts)
}

pub(crate) fn prepare_with_eigensystem(
    model: &Model,
    eig: &EigenSystem,
    path: &[ChainStep],
    opts: &PrepareOptions,
) -> Result<ChainReport> {
    let mut state = model.initial.clone();
    if path.is_empty() {
        let target = eig.dominant(&state)?;
        let fidelity = eig.vector(target)?.fidelity(&state)?;
        return Ok(ChainReport {
            state,
            steps: vec![],
            target,
            fidelity,
        });
    }
    if model.c == 0.0 {
        return Err(Error::Parameter(
            "state preparation needs a nonzero coupling".into(),
        ));
    }
    let a = model.coupling.op().to_dense()?;
    let mut steps = Vec::with_capacity(path.len());
    for (n, step) in path.iter().enumerate() {
        let phi_from = eig.vector(step.from)?;
        let phi_to = eig.vector(step.to)?;
        let m = phi_to
            .to_cvector()
            .dotc(&(&a * phi_from.to_cvector()))
            .norm();
        let diff = eig.energies[step.to] - eig.energies[step.from];
        let mode = if diff >= 0.0 {
            SweepMode::Absorption
        } else {
            SweepMode::Emission
        };
        let omega = diff.abs();
        let tau = match opts.tau {
            Some(t) => t,
            None if m > 0.0 => PI / (2.0 * model.c * m),
            None => {
                return Err(Error::StepAborted {
                    step: n,
                    probability: 0.0,
                    threshold: opts.min_flip_probability,
                })
            }
        };
        let step_model = Model {
            tau,
            initial: state.clone(),
            probe_init: mode.probe_init(),
            ..model.clone()
        };
        let plan = SweepPlan::new(omega, omega + 1.0, 1)
            .with_mode(mode)
            .with_method(opts.method);
        let joint = SweepEngine::new(&step_model, &plan)?.evolve(omega)?;
        let flip = mode.probe_init().flipped();
        let p = probe_probability(&joint, flip.bit());
        if p < opts.min_flip_probability {
            return Err(Error::StepAborted {
                step: n,
                probability: p,
                threshold: opts.min_flip_probability,
            });
        }
        state = system_after(&joint, flip)?;
        let fidelity = phi_to.fidelity(&state)?;
        log::debug!(
            "step {n}: {}->{} omega={omega} p={p} fidelity={fidelity}",
            step.from,
            step.to
        );
        steps.push(StepReport {
            from: step.from,
            to: step.to,
            omega,
            tau,
            matrix_element: m,
            flip_probability: p,
            fidelity,
        });
    }
    let target = path.last().map(|s| s.to).unwrap_or_default();
    let fidelity = steps.last().map(|s| s.fidelity).unwrap_or_default();
    Ok(ChainReport {
        state,
        steps,
        target,
        fidelity,
    })
}

fn system_after(joint: &Statevector, outcome: ProbeState) -> Result<Statevector> {
    let projected = project_probe(joint, outcome.bit())?;
    let sys = projected.system_component(outcome.bit())?;
    Statevector::normalized(sys.amplitudes().to_vec())
}
