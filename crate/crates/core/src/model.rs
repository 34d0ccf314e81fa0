//! System Hamiltonians, coupling operators and the assembled probe-system
//! Hamiltonian `H = H_S ⊗ I + (ω/2) σ_z + c A ⊗ σ_x`.
//!
//! The probe is qubit 0 of the joint register. Its `σ_z` is oriented so that
//! the excited state `|1⟩` carries energy `+ω/2`; in the standard Pauli basis
//! that term is `-(ω/2) Z` on the probe.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    check_cap, hermitian_deviation, kron, max_dense_qubits, CMatrix, HermitianEigen, ONE, ZERO,
};
use crate::pauli::{PauliLetter, PauliString, PauliSum};
use crate::state::Statevector;

/// Tolerance accepted on user-supplied dense Hamiltonians.
pub const DENSE_HERMITIAN_TOL: f64 = 1e-10;

/// Padding energy used when a model does not specify one. It sits well
/// above the usual sweep windows so padded states stay off resonance.
pub const DEFAULT_PADDING: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum SystemHamiltonian {
    Pauli(PauliSum),
    /// A `d×d` Hermitian block on basis states `0..d` of an `n`-qubit
    /// register; states `d..2^n` are uncoupled with energy `padding`.
    Dense {
        block: CMatrix,
        width: usize,
        padding: f64,
    },
}

impl SystemHamiltonian {
    pub fn from_pauli(sum: PauliSum) -> Result<Self> {
        if !sum.is_hermitian() {
            return Err(Error::Validation(
                "system Hamiltonian has complex coefficients".into(),
            ));
        }
        Ok(Self::Pauli(sum.canonicalize()))
    }

    pub fn width(&self) -> usize {
        match self {
            Self::Pauli(s) => s.width(),
            Self::Dense { width, .. } => *width,
        }
    }

    /// Number of physical (non-padded) basis states.
    pub fn physical_dim(&self) -> usize {
        match self {
            Self::Pauli(s) => 1 << s.width(),
            Self::Dense { block, .. } => block.nrows(),
        }
    }

    pub fn is_padded(&self, basis_index: usize) -> bool {
        basis_index >= self.physical_dim()
    }

    pub fn pauli(&self) -> Option<&PauliSum> {
        match self {
            Self::Pauli(s) => Some(s),
            Self::Dense { .. } => None,
        }
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        match self {
            Self::Pauli(s) => s.to_dense(),
            Self::Dense {
                block,
                width,
                padding,
            } => {
                check_cap("system Hamiltonian", *width, max_dense_qubits())?;
                let dim = 1usize << width;
                let d = block.nrows();
                let mut m = CMatrix::zeros(dim, dim);
                m.view_mut((0, 0), (d, d)).copy_from(block);
                for k in d..dim {
                    m[(k, k)] = Complex64::new(*padding, 0.0);
                }
                Ok(m)
            }
        }
    }

    /// Adds a Hermitian perturbation given on the full register. For dense
    /// forms only its physical block is kept, so padding stays uncoupled.
    pub fn perturbed(&self, delta: &PauliSum) -> Result<Self> {
        if delta.width() != self.width() {
            return Err(Error::Structure(format!(
                "perturbation width {} does not match system width {}",
                delta.width(),
                self.width()
            )));
        }
        match self {
            Self::Pauli(s) => Self::from_pauli(s.add(delta)?),
            Self::Dense {
                block,
                width,
                padding,
            } => {
                let d = block.nrows();
                let full = delta.to_dense()?;
                let new_block = block + full.view((0, 0), (d, d));
                embed_dense(new_block, *width, *padding)
            }
        }
    }
}

/// Embeds a `d×d` Hermitian matrix into an `n`-qubit register, padding the
/// remaining `2^n - d` basis states with an uncoupled diagonal energy.
pub fn embed_dense(h: CMatrix, n: usize, padding: f64) -> Result<SystemHamiltonian> {
    let d = h.nrows();
    if h.ncols() != d || d == 0 {
        return Err(Error::Dimension(format!(
            "expected a non-empty square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if n >= usize::BITS as usize || d > (1usize << n) {
        return Err(Error::Dimension(format!(
            "{d}-dimensional block does not fit in {n} qubits"
        )));
    }
    if !padding.is_finite() {
        return Err(Error::Parameter("padding energy must be finite".into()));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical(
            "dense Hamiltonian has non-finite entries".into(),
        ));
    }
    let dev = hermitian_deviation(&h);
    if dev > DENSE_HERMITIAN_TOL {
        return Err(Error::Validation(format!(
            "dense Hamiltonian is not Hermitian (deviation {dev:e})"
        )));
    }
    let block = (&h + h.adjoint()).scale(0.5);
    Ok(SystemHamiltonian::Dense {
        block,
        width: n,
        padding,
    })
}

/// A Hermitian, nonzero operator on the system register.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOperator {
    op: PauliSum,
    pub label: String,
}

impl CouplingOperator {
    pub fn new(op: PauliSum, label: impl Into<String>) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::Validation(
                "coupling operator is not Hermitian".into(),
            ));
        }
        let op = op.canonicalize();
        if op.is_empty() {
            return Err(Error::Validation("coupling operator is zero".into()));
        }
        Ok(Self {
            op,
            label: label.into(),
        })
    }

    pub fn op(&self) -> &PauliSum {
        &self.op
    }

    pub fn width(&self) -> usize {
        self.op.width()
    }
}

/// Named coupling operators used by the bundled scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingPreset {
    /// `(X_0 + ... + X_4)/√5` on five qubits, label `eq5`.
    SingleFlips,
    /// Three single flips plus two neighbouring `XX` pairs, `/√5`, label `eq6`.
    PairFlips,
    /// Nine multi-qubit `X` strings weighted `1/3`, label `eq7`.
    Collective,
    /// `(Σ_i X_i)/√n` for any width, label `uniform-x`.
    UniformX,
}

impl CouplingPreset {
    pub fn name(self) -> &'static str {
        match self {
            Self::SingleFlips => "eq5",
            Self::PairFlips => "eq6",
            Self::Collective => "eq7",
            Self::UniformX => "uniform-x",
        }
    }
}

impl fmt::Display for CouplingPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq5" => Ok(Self::SingleFlips),
            "eq6" => Ok(Self::PairFlips),
            "eq7" => Ok(Self::Collective),
            "uniform-x" | "uniform_x" => Ok(Self::UniformX),
            other => Err(Error::parse(other, "unknown coupling preset")),
        }
    }
}

const EQ5: [&str; 5] = ["IIIIX", "IIIXI", "IIXII", "IXIII", "XIIII"];
const EQ6: [&str; 5] = ["IIIIX", "IIIXI", "IIXII", "IIIXX", "IIXXI"];
const EQ7: [&str; 9] = [
    "XXXXI", "XXXIX", "XXIXX", "XIXXX", "XXXII", "XIIXX", "XIXII", "XIIIX", "XXXXX",
];

pub fn preset_coupling(preset: CouplingPreset, n: usize) -> Result<CouplingOperator> {
    let fixed = |labels: &[&str], weight: f64| -> Result<CouplingOperator> {
        if n != 5 {
            return Err(Error::Parameter(format!(
                "preset {preset} is defined on 5 qubits, got {n}"
            )));
        }
        let terms = labels
            .iter()
            .map(|l| PauliString::real(weight, l))
            .collect::<Result<Vec<_>>>()?;
        CouplingOperator::new(PauliSum::new(terms)?, preset.name())
    };
    match preset {
        CouplingPreset::SingleFlips => fixed(&EQ5, 1.0 / 5f64.sqrt()),
        CouplingPreset::PairFlips => fixed(&EQ6, 1.0 / 5f64.sqrt()),
        CouplingPreset::Collective => fixed(&EQ7, 1.0 / 3.0),
        CouplingPreset::UniformX => {
            if n == 0 {
                return Err(Error::Parameter(
                    "uniform-x needs at least one qubit".into(),
                ));
            }
            let w = 1.0 / (n as f64).sqrt();
            let terms = (0..n)
                .map(|q| PauliString::single(n, q, PauliLetter::X, w))
                .collect();
            CouplingOperator::new(PauliSum::new(terms)?, format!("uniform-x({n})"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeState {
    Ground,
    Excited,
}

impl ProbeState {
    pub fn bit(self) -> u8 {
        match self {
            Self::Ground => 0,
            Self::Excited => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::Ground => Self::Excited,
            Self::Excited => Self::Ground,
        }
    }
}

/// Probe frequency `ω`, coupling `c` and evolution time `τ` (Hartree units, ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub omega: f64,
    pub c: f64,
    pub tau: f64,
    pub init: ProbeState,
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::Parameter("probe frequency must be finite".into()));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::Parameter(format!(
                "coupling c={} must be >= 0",
                self.c
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Parameter(format!(
                "evolution time tau={} must be > 0",
                self.tau
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TotalHamiltonian {
    pub system: SystemHamiltonian,
    pub probe: ProbeConfig,
    pub coupling: CouplingOperator,
}

pub fn assemble_total(
    system: SystemHamiltonian,
    probe: ProbeConfig,
    coupling: CouplingOperator,
) -> Result<TotalHamiltonian> {
    probe.validate()?;
    if coupling.width() != system.width() {
        return Err(Error::Structure(format!(
            "coupling acts on {} qubits, system has {}",
            coupling.width(),
            system.width()
        )));
    }
    if let SystemHamiltonian::Pauli(s) = &system {
        if !s.is_hermitian() {
            return Err(Error::Validation(
                "system Hamiltonian is not Hermitian".into(),
            ));
        }
    }
    Ok(TotalHamiltonian {
        system,
        probe,
        coupling,
    })
}

impl TotalHamiltonian {
    /// Qubits in the joint register (system plus probe).
    pub fn width(&self) -> usize {
        self.system.width() + 1
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        let mut h = self.clone();
        h.probe.omega = omega;
        h
    }

    /// `-(ω/2) Z` on the probe qubit.
    pub fn probe_term(&self) -> PauliString {
        PauliString::single(self.width(), 0, PauliLetter::Z, -0.5 * self.probe.omega)
    }

    /// `c A ⊗ X` as Pauli strings on the joint register.
    pub fn coupling_terms(&self) -> PauliSum {
        let x = PauliSum::new(vec![PauliString::real(1.0, "X").expect("valid letter")])
            .expect("single term");
        self.coupling.op().tensor(&x).scale(self.probe.c)
    }

    /// The full Hamiltonian as a canonical Pauli sum, when the system has a
    /// Pauli form.
    pub fn to_pauli(&self) -> Option<PauliSum> {
        let hs = self.system.pauli()?;
        let id = PauliSum::new(vec![PauliString::identity(1, 1.0)]).expect("single term");
        let mut total = hs.tensor(&id);
        total.push(self.probe_term()).ok()?;
        let total = total.add(&self.coupling_terms()).ok()?;
        Some(total.canonicalize())
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        check_cap("total Hamiltonian", self.width(), max_dense_qubits())?;
        let hs = self.system.to_dense()?;
        let a = self.coupling.op().to_dense()?;
        let id2 = CMatrix::identity(2, 2);
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let half = 0.5 * self.probe.omega;
        let probe = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(-half, 0.0),
            Complex64::new(half, 0.0),
        ]));
        let dim_s = hs.nrows();
        Ok(kron(&hs, &id2)
            + kron(&CMatrix::identity(dim_s, dim_s), &probe)
            + kron(&a, &x).scale(self.probe.c))
    }

    /// Upper bound on `‖H‖` used to pick Trotter step sizes.
    pub fn norm_bound(&self) -> Result<f64> {
        let system = match &self.system {
            SystemHamiltonian::Pauli(s) => s.one_norm(),
            other => HermitianEigen::new(&other.to_dense()?)?.norm(),
        };
        Ok(system + 0.5 * self.probe.omega.abs() + self.probe.c * self.coupling.op().one_norm())
    }
}

/// Everything a sweep needs besides the frequency grid.
#[derive(Debug, Clone)]
pub struct Model {
    pub system: SystemHamiltonian,
    pub coupling: CouplingOperator,
    pub c: f64,
    pub tau: f64,
    /// Probe preparation for the default sweep mode.
    pub probe_init: ProbeState,
    /// Initial system state `|ψ_s⟩`.
    pub initial: Statevector,
}

impl Model {
    pub fn new(
        system: SystemHamiltonian,
        coupling: CouplingOperator,
        c: f64,
        tau: f64,
        initial: Statevector,
    ) -> Result<Self> {
        let m = Self {
            system,
            coupling,
            c,
            tau,
            probe_init: ProbeState::Excited,
            initial,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn width(&self) -> usize {
        self.system.width()
    }

    pub fn validate(&self) -> Result<()> {
        self.probe(0.0, self.probe_init).validate()?;
        if self.coupling.width() != self.system.width() {
            return Err(Error::Structure(format!(
                "coupling acts on {} qubits, system has {}",
                self.coupling.width(),
                self.system.width()
            )));
        }
        self.initial.check_width(self.system.width())?;
        self.initial.check_normalized()
    }

    pub fn probe(&self, omega: f64, init: ProbeState) -> ProbeConfig {
        ProbeConfig {
            omega,
            c: self.c,
            tau: self.tau,
            init,
        }
    }

    pub fn total(&self, omega: f64, init: ProbeState) -> Result<TotalHamiltonian> {
        assemble_total(
            self.system.clone(),
            self.probe(omega, init),
            self.coupling.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn half_z() -> SystemHamiltonian {
        SystemHamiltonian::from_pauli(PauliSum::parse_lines("0.5 Z").unwrap()).unwrap()
    }

    fn x1() -> CouplingOperator {
        preset_coupling(CouplingPreset::UniformX, 1).unwrap()
    }

    fn probe(omega: f64, c: f64) -> ProbeConfig {
        ProbeConfig {
            omega,
            c,
            tau: 1.0,
            init: ProbeState::Excited,
        }
    }

    #[test]
    fn two_qubit_total_by_hand() {
        let h = assemble_total(half_z(), probe(1.0, 0.005), x1()).unwrap();
        let m = h.to_dense().unwrap();
        // basis |s p⟩ at index 2s + p; H_S = diag(0.5, -0.5), probe = diag(-0.5, 0.5)
        let c = 0.005;
        let r = |x: f64| Complex64::new(x, 0.0);
        #[rustfmt::skip]
        let expect = CMatrix::from_row_slice(4, 4, &[
            r(0.0),  r(0.0), r(0.0),  r(c),
            r(0.0),  r(1.0), r(c),    r(0.0),
            r(0.0),  r(c),   r(-1.0), r(0.0),
            r(c),    r(0.0), r(0.0),  r(0.0),
        ]);
        assert!((m - &expect).norm() < 1e-15);
        let pauli = h.to_pauli().unwrap().to_dense().unwrap();
        assert!((pauli - expect).norm() < 1e-15);
    }

    #[test]
    fn excited_probe_has_positive_energy() {
        let sys = SystemHamiltonian::from_pauli(PauliSum::zero(1)).unwrap();
        let h = assemble_total(sys, probe(2.0, 0.0), x1()).unwrap();
        let m = h.to_dense().unwrap();
        assert_eq!(m[(1, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(0, 0)], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn width_mismatch_rejected() {
        let a = preset_coupling(CouplingPreset::UniformX, 2).unwrap();
        assert!(matches!(
            assemble_total(half_z(), probe(1.0, 0.1), a),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn non_hermitian_inputs_rejected() {
        let s = PauliSum::new(vec![PauliString::new(I, vec![PauliLetter::X])]).unwrap();
        assert!(SystemHamiltonian::from_pauli(s.clone()).is_err());
        assert!(CouplingOperator::new(s, "bad").is_err());
        assert!(CouplingOperator::new(PauliSum::zero(2), "zero").is_err());
    }

    #[test]
    fn embed_pads_diagonal() {
        let h = CMatrix::from_fn(18, 18, |r, c| {
            if r == c {
                Complex64::new(r as f64 * 0.1, 0.0)
            } else {
                Complex64::new(0.01, 0.0)
            }
        });
        let sys = embed_dense(h.clone(), 5, 3.0).unwrap();
        let m = sys.to_dense().unwrap();
        assert_eq!(m.nrows(), 32);
        assert!((m.view((0, 0), (18, 18)) - &h).norm() < 1e-15);
        let padded = (18..32)
            .filter(|&k| m[(k, k)] == Complex64::new(3.0, 0.0))
            .count();
        assert_eq!(padded, 14);
        for r in 0..32 {
            for c in 0..32 {
                if (r >= 18 || c >= 18) && r != c {
                    assert_eq!(m[(r, c)], ZERO);
                }
            }
        }
    }

    #[test]
    fn embed_full_dimension_is_identity() {
        let h = PauliSum::parse_lines("0.3 XZ\n-0.2 ZZ\n0.7 IY")
            .unwrap()
            .to_dense()
            .unwrap();
        let sys = embed_dense(h.clone(), 2, 99.0).unwrap();
        assert!((sys.to_dense().unwrap() - h).norm() < 1e-15);
    }

    #[test]
    fn embed_errors() {
        assert!(matches!(
            embed_dense(CMatrix::identity(5, 5), 2, 0.0),
            Err(Error::Dimension(_))
        ));
        let mut h = CMatrix::identity(2, 2);
        h[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(embed_dense(h, 1, 0.0), Err(Error::Validation(_))));
    }

    #[test]
    fn presets_match_definitions() {
        let a = preset_coupling(CouplingPreset::SingleFlips, 5).unwrap();
        assert_eq!(a.op().len(), 5);
        for t in a.op().terms() {
            assert!((t.coeff.re - 1.0 / 5f64.sqrt()).abs() < 1e-15);
            assert_eq!(
                t.letters().iter().filter(|&&l| l == PauliLetter::X).count(),
                1
            );
        }

        let a = preset_coupling(CouplingPreset::Collective, 5).unwrap();
        assert_eq!(a.op().len(), 9);
        assert!(a
            .op()
            .terms()
            .iter()
            .all(|t| (t.coeff.re - 1.0 / 3.0).abs() < 1e-15));
        assert!(a.op().terms().iter().any(|t| t.label() == "XXXXX"));

        let a = preset_coupling(CouplingPreset::PairFlips, 5).unwrap();
        let labels: Vec<_> = a.op().terms().iter().map(|t| t.label()).collect();
        assert!(labels.contains(&"IIIXX".to_string()));
        assert!(labels.contains(&"IIXXI".to_string()));

        let a = preset_coupling(CouplingPreset::UniformX, 1).unwrap();
        assert_eq!(a.op().len(), 1);
        assert_eq!(a.op().terms()[0].label(), "X");
        assert_eq!(a.op().terms()[0].coeff.re, 1.0);

        assert!(preset_coupling(CouplingPreset::SingleFlips, 4).is_err());
        assert!("eq9".parse::<CouplingPreset>().is_err());
    }

    #[test]
    fn presets_have_unit_normalized_trace() {
        for p in [CouplingPreset::SingleFlips, CouplingPreset::PairFlips] {
            let a = preset_coupling(p, 5).unwrap().op().to_dense().unwrap();
            let tr = (&a * &a).trace().re / 32.0;
            assert!((tr - 1.0).abs() < 1e-12, "{p}: {tr}");
        }
        let a = preset_coupling(CouplingPreset::Collective, 5)
            .unwrap()
            .op()
            .to_dense()
            .unwrap();
        assert!(hermitian_deviation(&a) < 1e-12);
        assert!(a.iter().all(|z| z.re.is_finite()));
    }

    #[test]
    fn probe_config_validation() {
        assert!(probe(1.0, -0.1).validate().is_err());
        let mut p = probe(1.0, 0.1);
        p.tau = 0.0;
        assert!(p.validate().is_err());
    }
}
