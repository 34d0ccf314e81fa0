//! Classical reference quantities: eigensystems, transition tables and
//! peak assignment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_norm, CMatrix, HermitianEigen, ONE};
use crate::model::SystemHamiltonian;
use crate::pauli::{PauliLetter, PauliString, PauliSum};
use crate::spectroscopy::{
    detect_peaks, Peak, Spectrum, SweepMode, ThresholdPolicy, TransitionRecord,
};
use crate::state::Statevector;

/// Default spacing below which eigenvalues count as degenerate.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Eigenpairs of `H_S` in ascending energy order.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    /// Column `i` is the eigenvector of `energies[i]`.
    pub vectors: CMatrix,
    /// `padded[i]` marks padding basis states of a dense-form system.
    pub padded: Vec<bool>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn width(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn vector(&self, i: usize) -> Result<Statevector> {
        if i >= self.dim() {
            return Err(Error::Parameter(format!(
                "eigenstate index {i} out of range (dimension {})",
                self.dim()
            )));
        }
        Statevector::from_amplitudes(self.vectors.column(i).iter().copied().collect())
    }

    /// `|⟨φ_i|ψ⟩|²` for every eigenstate.
    pub fn overlaps(&self, psi: &Statevector) -> Result<Vec<f64>> {
        psi.check_width(self.width())?;
        let v = psi.to_cvector();
        Ok((0..self.dim())
            .map(|i| self.vectors.column(i).dotc(&v).norm_sqr())
            .collect())
    }

    /// `V† A V`, the operator in the eigenbasis.
    pub fn in_eigenbasis(&self, a: &CMatrix) -> Result<CMatrix> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "operator is {}x{}, eigenbasis has dimension {}",
                a.nrows(),
                a.ncols(),
                self.dim()
            )));
        }
        Ok(self.vectors.adjoint() * a * &self.vectors)
    }

    /// Index of the eigenstate with the largest overlap with `psi`.
    pub fn dominant(&self, psi: &Statevector) -> Result<usize> {
        let ov = self.overlaps(psi)?;
        Ok(ov
            .iter()
            .enumerate()
            .fold(0, |best, (i, &o)| if o > ov[best] { i } else { best }))
    }

    /// Largest `‖H φ_i - E_i φ_i‖`.
    pub fn residual(&self, h: &CMatrix) -> f64 {
        (0..self.dim())
            .map(|i| {
                let v = self.vectors.column(i);
                (h * v - v * num_complex::Complex64::from(self.energies[i])).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Diagonalizes `H_S`. For dense-form systems only the physical block is
/// diagonalized; padding basis states are appended as exact eigenvectors.
pub fn eigendecompose(h: &SystemHamiltonian) -> Result<EigenSystem> {
    match h {
        SystemHamiltonian::Pauli(_) => {
            let eig = HermitianEigen::new(&h.to_dense()?)?;
            let n = eig.dim();
            Ok(EigenSystem {
                energies: eig.values,
                vectors: eig.vectors,
                padded: vec![false; n],
            })
        }
        SystemHamiltonian::Dense {
            block,
            width,
            padding,
        } => {
            let d = block.nrows();
            let full = 1usize << width;
            let eig = HermitianEigen::new(block)?;
            let mut cols: Vec<(f64, bool, usize)> =
                (0..d).map(|i| (eig.values[i], false, i)).collect();
            cols.extend((d..full).map(|k| (*padding, true, k)));
            cols.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut vectors = CMatrix::zeros(full, full);
            for (col, &(_, pad, src)) in cols.iter().enumerate() {
                if pad {
                    vectors[(src, col)] = ONE;
                } else {
                    vectors
                        .view_mut((0, col), (d, 1))
                        .copy_from(&eig.vectors.column(src));
                }
            }
            Ok(EigenSystem {
                energies: cols.iter().map(|c| c.0).collect(),
                vectors,
                padded: cols.iter().map(|c| c.1).collect(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub window: (f64, f64),
    pub mode: SweepMode,
    pub records: Vec<TransitionRecord>,
}

impl TransitionTable {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records that produce a signal (nonzero matrix element and overlap).
    pub fn visible(&self, min_weight: f64) -> impl Iterator<Item = &TransitionRecord> {
        self.records.iter().filter(move |r| r.weight() > min_weight)
    }
}

/// Every eigen-transition whose energy difference falls in `window`.
///
/// In absorption mode record `i → j` has `E_j > E_i` and weights the
/// population of the lower level `i`; in emission mode `E_j < E_i` and the
/// population of the upper level `i` counts. Records are sorted by
/// `delta_e`, with ties broken by `(i, j)`.
pub fn transition_table(
    eig: &EigenSystem,
    a: &PauliSum,
    psi: &Statevector,
    window: (f64, f64),
    mode: SweepMode,
) -> Result<TransitionTable> {
    if !(window.0.is_finite() && window.1.is_finite()) || window.1 < window.0 {
        return Err(Error::Parameter(format!("invalid window {window:?}")));
    }
    if a.width() != eig.width() {
        return Err(Error::Structure(format!(
            "coupling acts on {} qubits, eigensystem has {}",
            a.width(),
            eig.width()
        )));
    }
    let overlaps = eig.overlaps(psi)?;
    let ae = eig.in_eigenbasis(&a.to_dense()?)?;
    let mut records = Vec::new();
    for i in 0..eig.dim() {
        for j in 0..eig.dim() {
            let diff = eig.energies[j] - eig.energies[i];
            let upward = diff > 0.0;
            let wanted = match mode {
                SweepMode::Absorption => upward,
                SweepMode::Emission => diff < 0.0,
            };
            let delta_e = diff.abs();
            if !wanted || delta_e < window.0 || delta_e > window.1 {
                continue;
            }
            records.push(TransitionRecord {
                i,
                j,
                delta_e,
                matrix_element: ae[(j, i)].norm(),
                overlap: overlaps[i],
                padded: eig.padded[i] || eig.padded[j],
            });
        }
    }
    records.sort_by(|x, y| {
        x.delta_e
            .total_cmp(&y.delta_e)
            .then((x.i, x.j).cmp(&(y.i, y.j)))
    });
    Ok(TransitionTable {
        window,
        mode,
        records,
    })
}

/// One peak mapped to a transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub peak: usize,
    pub record: TransitionRecord,
    /// More than one candidate lay within tolerance.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub assignments: Vec<Assignment>,
    /// Indices of peaks with no candidate within tolerance.
    pub unmatched_peaks: Vec<usize>,
    /// Candidate transitions that no peak was assigned to.
    pub missing: Vec<TransitionRecord>,
}

/// Assigns each peak to the candidate with the nearest `delta_e` within
/// `tolerance`, preferring the larger `M²·overlap` among equally near ones.
pub fn match_peaks(peaks: &[Peak], candidates: &[TransitionRecord], tolerance: f64) -> MatchReport {
    match_peaks_by(peaks, candidates, |_| tolerance)
}

/// Like [`match_peaks`] with a per-peak tolerance, e.g. derived from its width.
pub fn match_peaks_by(
    peaks: &[Peak],
    candidates: &[TransitionRecord],
    tolerance: impl Fn(&Peak) -> f64,
) -> MatchReport {
    let mut report = MatchReport::default();
    let mut used = vec![false; candidates.len()];
    for (pi, peak) in peaks.iter().enumerate() {
        let tol = tolerance(peak);
        let near: Vec<usize> = (0..candidates.len())
            .filter(|&r| (candidates[r].delta_e - peak.center).abs() <= tol)
            .collect();
        let best = near.iter().copied().min_by(|&x, &y| {
            let dx = (candidates[x].delta_e - peak.center).abs();
            let dy = (candidates[y].delta_e - peak.center).abs();
            // distances within 1e-9 are treated as a tie
            if (dx - dy).abs() > 1e-9 {
                dx.total_cmp(&dy)
            } else {
                candidates[y].weight().total_cmp(&candidates[x].weight())
            }
        });
        match best {
            Some(r) => {
                for &n in &near {
                    used[n] = true;
                }
                report.assignments.push(Assignment {
                    peak: pi,
                    record: candidates[r],
                    ambiguous: near.len() > 1,
                });
            }
            None => report.unmatched_peaks.push(pi),
        }
    }
    report.missing = candidates
        .iter()
        .zip(&used)
        .filter(|(_, &u)| !u)
        .map(|(r, _)| *r)
        .collect();
    report
}

/// Matrix elements at or below this count as forbidden by selection rules.
pub const SELECTION_RULE_EPS: f64 = 1e-8;

/// Sweep-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Detection floor: the peak threshold applied to this spectrum.
    pub floor: f64,
    pub peaks: Vec<Peak>,
    pub matches: MatchReport,
    /// Transitions predicted at least twice the floor on resonance.
    pub expected: Vec<TransitionRecord>,
    /// Expected transitions with no detected peak.
    pub missing: Vec<TransitionRecord>,
    /// Peaks with no candidate transition nearby.
    pub spurious: Vec<Peak>,
    /// Populated transitions that stay dark because `M` vanishes.
    pub selection_rule: Vec<TransitionRecord>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Detects peaks in `spectrum` and matches them against `table`.
///
/// The on-resonance Rabi height of each record decides its role: records at
/// or above twice the detection floor are expected, records above a quarter
/// of it may explain a peak. A peak matches a record within
/// `max(2Δω, FWHM)` of its center.
pub fn validate_spectrum(
    spectrum: &Spectrum,
    table: &TransitionTable,
    policy: &ThresholdPolicy,
) -> ValidationReport {
    let floor = policy.threshold(spectrum);
    let peaks = detect_peaks(spectrum, policy);
    let height = |r: &TransitionRecord| r.predicted_height(spectrum.c, spectrum.tau);
    let candidates: Vec<TransitionRecord> = table
        .records
        .iter()
        .filter(|r| height(r) >= 0.25 * floor)
        .copied()
        .collect();
    let expected: Vec<TransitionRecord> = candidates
        .iter()
        .filter(|r| height(r) >= 2.0 * floor)
        .copied()
        .collect();
    let dw = spectrum.delta_omega();
    let matches = match_peaks_by(&peaks, &candidates, |p| (2.0 * dw).max(p.fwhm));
    let missing = expected
        .iter()
        .filter(|r| matches.missing.contains(r))
        .copied()
        .collect();
    let spurious = matches
        .unmatched_peaks
        .iter()
        .map(|&i| peaks[i].clone())
        .collect();
    let selection_rule = table
        .records
        .iter()
        .filter(|r| r.matrix_element <= SELECTION_RULE_EPS && r.overlap >= 2.0 * floor)
        .copied()
        .collect();
    let mut peaks = peaks;
    for a in &matches.assignments {
        peaks[a.peak].assignment = Some(a.record.label());
    }
    ValidationReport {
        floor,
        peaks,
        matches,
        expected,
        missing,
        spurious,
        selection_rule,
    }
}

/// Groups eigenvalues whose consecutive spacing is below `gap_tol`.
pub fn detect_degeneracy(eig: &EigenSystem, gap_tol: f64) -> Result<Vec<Vec<usize>>> {
    if gap_tol.is_nan() || gap_tol <= 0.0 {
        return Err(Error::Parameter(format!(
            "gap tolerance {gap_tol} must be positive"
        )));
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..eig.dim() {
        match groups.last_mut() {
            Some(g) if eig.energies[i] - eig.energies[*g.last().unwrap()] < gap_tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    Ok(groups)
}

/// Adds a seeded random Hermitian perturbation of 1- and 2-qubit Pauli terms
/// with operator norm `epsilon`. Each eigenvalue moves by at most `epsilon`.
pub fn lift_degeneracies(
    h: &SystemHamiltonian,
    epsilon: f64,
    seed: u64,
) -> Result<SystemHamiltonian> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!(
            "perturbation strength {epsilon} must be non-negative"
        )));
    }
    if epsilon == 0.0 {
        return Ok(h.clone());
    }
    let n = h.width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = [PauliLetter::X, PauliLetter::Y, PauliLetter::Z];
    let mut terms = Vec::new();
    for q in 0..n {
        for &l in &letters {
            terms.push(PauliString::single(n, q, l, rng.random_range(-1.0..1.0)));
        }
    }
    for q1 in 0..n {
        for q2 in q1 + 1..n {
            let a = letters[rng.random_range(0..3)];
            let b = letters[rng.random_range(0..3)];
            let coeff = rng.random_range(-1.0..1.0);
            let s = PauliString::single(n, q1, a, coeff)
                .multiply(&PauliString::single(n, q2, b, 1.0))?;
            terms.push(s);
        }
    }
    let delta = PauliSum::new_checked(n, terms)?.canonicalize();
    let norm = hermitian_norm(&delta.to_dense()?)?;
    if norm == 0.0 {
        return Ok(h.clone());
    }
    h.perturbed(&delta.scale(epsilon / norm))
}
