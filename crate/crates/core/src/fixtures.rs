//! Reproducible test models.
//!
//! The shipped JSON files under `fixtures/` are generated from these
//! builders by `cargo run -p qprobe --example write_fixtures`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::{CouplingSpec, Entry, InitialSpec, ModelFile, ProbeSpec, SystemSpec};
use crate::linalg::CMatrix;
use crate::model::{CouplingOperator, CouplingPreset, Model, SystemHamiltonian};
use crate::pauli::{PauliLetter, PauliString, PauliSum};
use crate::state::Statevector;

/// Seed of the shipped water-analog matrix.
pub const WATER_SEED: u64 = 2021;
/// Physical dimension of the water-analog system.
pub const WATER_DIM: usize = 18;
pub const WATER_QUBITS: usize = 5;
/// Basis state with the largest weight on the water-analog ground state.
pub const WATER_GROUND_BASIS: usize = 2;
/// Lowest physical level of the water-analog matrix.
pub const WATER_GROUND_ENERGY: f64 = 0.45;

/// `H_S = -0.5 Z` (levels ±0.5, gap 1), `A = X`, system in its ground state.
pub fn two_level_model(c: f64, tau: f64) -> Result<Model> {
    let hs = SystemHamiltonian::from_pauli(PauliSum::parse_lines("-0.5 Z")?)?;
    let a = CouplingOperator::new(PauliSum::parse_lines("1 X")?, "X")?;
    Model::new(hs, a, c, tau, Statevector::basis(1, 0)?)
}

pub fn two_level_file(c: f64, tau: f64) -> Result<ModelFile> {
    Ok(ModelFile {
        n: 1,
        system: SystemSpec {
            pauli: Some(vec![PauliString::real(-0.5, "Z")?]),
            dense: None,
            padding: None,
        },
        coupling: CouplingSpec {
            preset: Some(CouplingPreset::UniformX.name().into()),
            pauli: None,
        },
        probe: ProbeSpec {
            c,
            tau,
            init: Some("excited".into()),
        },
        initial: Some(InitialSpec::Bitstring("0".into())),
    })
}

/// Seeded real symmetric 18×18 matrix standing in for a small molecular
/// Hamiltonian in a configuration basis.
///
/// Basis state 2 (`|00010⟩`) is the lowest level at 0.45. The remaining
/// diagonal energies sit on a jittered lattice, and the states reachable
/// from basis 2 by the single- and pair-flip couplings land in
/// `[0.85, 2.45]`, so their transitions fall in the `[0.4, 2.0]` window.
/// Small off-diagonal elements mix the basis states slightly.
pub fn water_analog_block(seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots: Vec<f64> = (0..WATER_DIM - 1)
        .map(|s| 0.62 + 0.13 * s as f64 + rng.random_range(-0.03..0.03))
        .collect();
    // states one single- or pair-flip away from basis 2
    let targets = [0usize, 1, 3, 4, 6, 10];
    let mut inner: Vec<usize> = (0..slots.len())
        .filter(|&s| (0.9..=2.4).contains(&slots[s]))
        .collect();
    inner.shuffle(&mut rng);
    let mut energies = [0.0; WATER_DIM];
    energies[WATER_GROUND_BASIS] = WATER_GROUND_ENERGY;
    for (t, &s) in targets.iter().zip(&inner) {
        energies[*t] = slots[s];
    }
    let mut rest: Vec<usize> = (0..slots.len())
        .filter(|s| !inner[..targets.len()].contains(s))
        .collect();
    rest.shuffle(&mut rng);
    let others = (0..WATER_DIM).filter(|i| *i != WATER_GROUND_BASIS && !targets.contains(i));
    for (i, s) in others.zip(rest) {
        energies[i] = slots[s];
    }
    let mut h = CMatrix::zeros(WATER_DIM, WATER_DIM);
    for i in 0..WATER_DIM {
        h[(i, i)] = energies[i].into();
        for j in 0..i {
            let v: f64 = rng.random_range(-0.01..0.01);
            h[(i, j)] = v.into();
            h[(j, i)] = v.into();
        }
    }
    h
}

/// Water-analog model file. Padding sits at energy 0, below the physical
/// spectrum, so a padded start such as `|11111⟩` absorbs at `ω = E_j`.
pub fn water_analog_file(preset: CouplingPreset, c: f64, tau: f64, initial: &str) -> ModelFile {
    let h = water_analog_block(WATER_SEED);
    let dense = (0..h.nrows())
        .map(|i| (0..h.ncols()).map(|j| Entry::from(h[(i, j)])).collect())
        .collect();
    ModelFile {
        n: WATER_QUBITS,
        system: SystemSpec {
            pauli: None,
            dense: Some(dense),
            padding: Some(0.0),
        },
        coupling: CouplingSpec {
            preset: Some(preset.name().into()),
            pauli: None,
        },
        probe: ProbeSpec {
            c,
            tau,
            init: Some("excited".into()),
        },
        initial: Some(InitialSpec::Bitstring(initial.into())),
    }
}

pub fn water_analog_model(
    preset: CouplingPreset,
    c: f64,
    tau: f64,
    initial: &str,
) -> Result<Model> {
    water_analog_file(preset, c, tau, initial).to_model()
}

/// Random Hermitian Pauli sum of `terms` non-identity strings with real
/// coefficients in `[-1, 1)`.
pub fn random_pauli_hamiltonian(n: usize, terms: usize, seed: u64) -> Result<PauliSum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = [
        PauliLetter::I,
        PauliLetter::X,
        PauliLetter::Y,
        PauliLetter::Z,
    ];
    let mut out = Vec::with_capacity(terms);
    while out.len() < terms {
        let s: Vec<PauliLetter> = (0..n).map(|_| letters[rng.random_range(0..4)]).collect();
        if s.iter().all(|l| *l == PauliLetter::I) {
            continue;
        }
        out.push(PauliString::new(rng.random_range(-1.0..1.0).into(), s));
    }
    Ok(PauliSum::new_checked(n, out)?.canonicalize())
}

/// Weakly transverse Ising-type model on `n` qubits with `A = uniform-x`
/// and the system in `|0…0⟩`, which lies close to the ground state.
///
/// Single flips cost between 0.5 and 1.9, so the dominant transitions fall
/// inside `[0.4, 2.0]`.
pub fn random_spin_model(n: usize, seed: u64, c: f64, tau: f64) -> Result<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for q in 0..n {
        let h: f64 = rng.random_range(0.5..1.9);
        terms.push(PauliString::single(n, q, PauliLetter::Z, -0.5 * h));
        terms.push(PauliString::single(
            n,
            q,
            PauliLetter::X,
            rng.random_range(-0.04..0.04),
        ));
        terms.push(PauliString::single(
            n,
            q,
            PauliLetter::Y,
            rng.random_range(-0.04..0.04),
        ));
        for r in q + 1..n {
            let zz = PauliString::single(n, q, PauliLetter::Z, rng.random_range(-0.08..0.08))
                .multiply(&PauliString::single(n, r, PauliLetter::Z, 1.0))?;
            terms.push(zz);
        }
    }
    let hs = SystemHamiltonian::from_pauli(PauliSum::new_checked(n, terms)?)?;
    let a = crate::model::preset_coupling(CouplingPreset::UniformX, n)?;
    Model::new(hs, a, c, tau, Statevector::basis(n, 0)?)
}
