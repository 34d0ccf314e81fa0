//! Time evolution of the joint system ⊗ probe register.
//!
//! Two routes: [`ExactPropagator`] diagonalizes the dense Hamiltonian once and
//! applies `exp(-iHτ)` in its eigenbasis; [`trotter_propagate`] applies a
//! first- or second-order product formula built from closed-form Pauli-string
//! exponentials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianEigen, ZERO};
use crate::model::{SystemHamiltonian, TotalHamiltonian};
use crate::pauli::PauliString;
use crate::state::Statevector;

/// Probabilities below this are treated as zero when projecting.
pub const PROJECTION_MIN_PROBABILITY: f64 = 1e-12;

/// Default bound on `‖H‖·dt` when choosing a Trotter step count.
pub const DEFAULT_STEP_BOUND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrotterOrder {
    First,
    Second,
}

impl TrotterOrder {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            other => Err(Error::Parameter(format!(
                "unsupported Trotter order {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrotterPlan {
    pub order: TrotterOrder,
    pub steps: usize,
}

impl TrotterPlan {
    pub fn new(order: TrotterOrder, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Parameter(
                "Trotter plan needs at least one step".into(),
            ));
        }
        Ok(Self { order, steps })
    }

    /// Smallest step count with `‖H‖·dt ≤ bound`.
    pub fn for_bound(
        h: &TotalHamiltonian,
        tau: f64,
        order: TrotterOrder,
        bound: f64,
    ) -> Result<Self> {
        if bound.is_nan() || bound <= 0.0 {
            return Err(Error::Parameter("step bound must be positive".into()));
        }
        let steps = (h.norm_bound()? * tau.abs() / bound).ceil().max(1.0);
        if steps > 1e9 {
            return Err(Error::Parameter(format!(
                "Trotter plan would need {steps:e} steps"
            )));
        }
        Self::new(order, steps as usize)
    }
}

/// Reduced 2×2 density matrix of the probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeDensity {
    pub rho: [[Complex64; 2]; 2],
}

impl ProbeDensity {
    pub fn trace(&self) -> f64 {
        self.rho[0][0].re + self.rho[1][1].re
    }

    pub fn purity(&self) -> f64 {
        let r = &self.rho;
        r[0][0].norm_sqr() + r[1][1].norm_sqr() + 2.0 * r[0][1].norm_sqr()
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.rho[0][0].re;
        let d = self.rho[1][1].re;
        let b = self.rho[0][1].norm();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d).powi(2) + b * b).sqrt();
        [mid - rad, mid + rad]
    }
}

/// Caches the eigendecomposition of a dense Hamiltonian for repeated use.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    eig: HermitianEigen,
}

impl ExactPropagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        Ok(Self {
            eig: HermitianEigen::new(h)?,
        })
    }

    pub fn for_total(h: &TotalHamiltonian) -> Result<Self> {
        Self::new(&h.to_dense()?)
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn propagate(&self, psi: &Statevector, tau: f64) -> Result<Statevector> {
        if psi.dim() != self.dim() {
            return Err(Error::Structure(format!(
                "statevector dimension {} does not match Hamiltonian dimension {}",
                psi.dim(),
                self.dim()
            )));
        }
        if !tau.is_finite() {
            return Err(Error::Parameter("evolution time must be finite".into()));
        }
        let out = self
            .eig
            .apply(&psi.to_cvector(), |e| Complex64::from_polar(1.0, -e * tau));
        Statevector::from_cvector(&out)
    }
}

/// `exp(-iHτ) ψ` via dense eigendecomposition.
pub fn exact_propagate(h: &TotalHamiltonian, tau: f64, psi: &Statevector) -> Result<Statevector> {
    psi.check_width(h.width())?;
    ExactPropagator::for_total(h)?.propagate(psi, tau)
}

/// `ψ ← exp(-iθP) ψ = cos θ ψ - i sin θ Pψ`, where `P` is the letter string
/// of `term`. The coefficient of `term` is ignored; fold it into `theta`.
pub fn apply_pauli_exponential(
    psi: &mut Statevector,
    term: &PauliString,
    theta: f64,
) -> Result<()> {
    psi.check_width(term.width())?;
    let masks = term.masks();
    let (s, c) = theta.sin_cos();
    let minus_i_sin = Complex64::new(0.0, -s);
    let amps = psi.amplitudes_mut();
    let x = masks.x as usize;
    if x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= c + minus_i_sin * masks.phase(b);
        }
        return Ok(());
    }
    for b in 0..amps.len() {
        let partner = b ^ x;
        if partner < b {
            continue;
        }
        let (ab, ap) = (amps[b], amps[partner]);
        // (Pψ)_b = phase(partner) ψ_partner
        amps[b] = c * ab + minus_i_sin * masks.phase(partner) * ap;
        amps[partner] = c * ap + minus_i_sin * masks.phase(b) * ab;
    }
    Ok(())
}

/// Exact evolution of `H_S ⊗ I + (ω/2) σ_z` from a cached system
/// eigendecomposition; the probe term is diagonal and commutes with it.
#[derive(Debug, Clone)]
pub(crate) struct FreeEvolution {
    system: HermitianEigen,
}

impl FreeEvolution {
    pub(crate) fn new(system: &SystemHamiltonian) -> Result<Self> {
        Ok(Self {
            system: HermitianEigen::new(&system.to_dense()?)?,
        })
    }

    pub(crate) fn system_norm(&self) -> f64 {
        self.system.norm()
    }

    /// Precomputes the step operator for time `dt` at probe frequency `omega`.
    pub(crate) fn step(&self, omega: f64, dt: f64) -> FreeStep {
        FreeStep {
            system: self.system.map(|e| Complex64::from_polar(1.0, -e * dt)),
            probe_phase: [
                Complex64::from_polar(1.0, 0.5 * omega * dt),
                Complex64::from_polar(1.0, -0.5 * omega * dt),
            ],
        }
    }
}

pub(crate) struct FreeStep {
    system: CMatrix,
    probe_phase: [Complex64; 2],
}

impl FreeStep {
    fn apply(&self, psi: &mut Statevector, scratch: &mut CVector) {
        let amps = psi.amplitudes_mut();
        for p in 0..2 {
            for (s, v) in scratch.iter_mut().enumerate() {
                *v = amps[2 * s + p];
            }
            let out = &self.system * &*scratch;
            for (s, v) in out.iter().enumerate() {
                amps[2 * s + p] = v * self.probe_phase[p];
            }
        }
    }
}

fn check_plan(plan: &TrotterPlan, tau: f64) -> Result<()> {
    if plan.steps == 0 {
        return Err(Error::Parameter(
            "Trotter plan needs at least one step".into(),
        ));
    }
    if !tau.is_finite() {
        return Err(Error::Parameter("evolution time must be finite".into()));
    }
    Ok(())
}

fn sweep_terms(psi: &mut Statevector, terms: &[PauliString], dt: f64, reverse: bool) -> Result<()> {
    let mut apply = |t: &PauliString| apply_pauli_exponential(psi, t, t.coeff.re * dt);
    if reverse {
        terms.iter().rev().try_for_each(&mut apply)
    } else {
        terms.iter().try_for_each(&mut apply)
    }
}

/// Product-formula evolution.
///
/// Pauli-form systems split the full Hamiltonian into its canonical terms.
/// Dense-form systems are split into the free part `H_S ⊗ I + (ω/2) σ_z`,
/// evolved exactly, and the Pauli terms of `c A ⊗ σ_x`.
pub fn trotter_propagate(
    h: &TotalHamiltonian,
    tau: f64,
    plan: TrotterPlan,
    psi: &Statevector,
) -> Result<Statevector> {
    psi.check_width(h.width())?;
    check_plan(&plan, tau)?;
    match h.to_pauli() {
        Some(sum) => {
            let terms = sum.terms();
            if terms
                .iter()
                .any(|t| t.coeff.im.abs() > crate::pauli::HERMITIAN_TOL)
            {
                return Err(Error::Validation(
                    "Hamiltonian has complex coefficients".into(),
                ));
            }
            let dt = tau / plan.steps as f64;
            let mut out = psi.clone();
            for _ in 0..plan.steps {
                match plan.order {
                    TrotterOrder::First => sweep_terms(&mut out, terms, dt, false)?,
                    TrotterOrder::Second => {
                        sweep_terms(&mut out, terms, 0.5 * dt, false)?;
                        sweep_terms(&mut out, terms, 0.5 * dt, true)?;
                    }
                }
            }
            Ok(out)
        }
        None => {
            let free = FreeEvolution::new(&h.system)?;
            split_propagate(&free, h, tau, plan, psi)
        }
    }
}

pub(crate) fn split_propagate(
    free: &FreeEvolution,
    h: &TotalHamiltonian,
    tau: f64,
    plan: TrotterPlan,
    psi: &Statevector,
) -> Result<Statevector> {
    psi.check_width(h.width())?;
    check_plan(&plan, tau)?;
    let coupling = h.coupling_terms().canonicalize();
    let terms = coupling.terms();
    let dt = tau / plan.steps as f64;
    let mut out = psi.clone();
    let mut scratch = CVector::from_element(psi.dim() / 2, ZERO);
    match plan.order {
        TrotterOrder::First => {
            let full = free.step(h.probe.omega, dt);
            for _ in 0..plan.steps {
                full.apply(&mut out, &mut scratch);
                sweep_terms(&mut out, terms, dt, false)?;
            }
        }
        TrotterOrder::Second => {
            let half = free.step(h.probe.omega, 0.5 * dt);
            for _ in 0..plan.steps {
                half.apply(&mut out, &mut scratch);
                sweep_terms(&mut out, terms, 0.5 * dt, false)?;
                sweep_terms(&mut out, terms, 0.5 * dt, true)?;
                half.apply(&mut out, &mut scratch);
            }
        }
    }
    Ok(out)
}

/// Probability of reading `outcome` on the probe (qubit 0).
pub fn probe_probability(psi: &Statevector, outcome: u8) -> f64 {
    psi.amplitudes()
        .iter()
        .skip(outcome as usize & 1)
        .step_by(2)
        .map(|a| a.norm_sqr())
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Traces out the system, leaving the probe's 2×2 density matrix.
pub fn partial_trace_probe(psi: &Statevector) -> Result<ProbeDensity> {
    if psi.width() == 0 {
        return Err(Error::Dimension("statevector has no probe qubit".into()));
    }
    let mut rho = [[ZERO; 2]; 2];
    for pair in psi.amplitudes().chunks_exact(2) {
        for a in 0..2 {
            for b in 0..2 {
                rho[a][b] += pair[a] * pair[b].conj();
            }
        }
    }
    Ok(ProbeDensity { rho })
}

/// Projects the probe onto `outcome` and renormalizes.
pub fn project_probe(psi: &Statevector, outcome: u8) -> Result<Statevector> {
    let p = probe_probability(psi, outcome);
    if p <= PROJECTION_MIN_PROBABILITY {
        return Err(Error::Projection {
            outcome,
            probability: p,
        });
    }
    let scale = 1.0 / p.sqrt();
    let amps = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if (i & 1) as u8 == outcome {
                a * scale
            } else {
                ZERO
            }
        })
        .collect();
    Statevector::from_amplitudes(amps)
}
