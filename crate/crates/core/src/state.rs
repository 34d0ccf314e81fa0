//! Statevectors over qubit registers.
//!
//! Joint registers place the probe on qubit 0, so the amplitude of
//! `|s⟩_system ⊗ |p⟩_probe` lives at index `2s + p`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{check_cap, max_dense_qubits, CVector, ONE, ZERO};

/// Tolerance on `‖ψ‖ = 1`.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amps: Vec<Complex64>,
    width: usize,
}

impl Statevector {
    /// Wraps amplitudes without renormalizing; the length must be `2^width`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "statevector length {len} is not a power of two"
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Numerical("non-finite amplitude".into()));
        }
        let width = len.trailing_zeros() as usize;
        check_cap("statevector", width, max_dense_qubits() + 1)?;
        Ok(Self { amps, width })
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but rescales to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::from_amplitudes(amps)?;
        let n = s.norm();
        if n <= f64::EPSILON {
            return Err(Error::Numerical("cannot normalize a zero vector".into()));
        }
        s.amps.iter_mut().for_each(|a| *a /= n);
        Ok(s)
    }

    pub fn basis(width: usize, index: usize) -> Result<Self> {
        check_cap("statevector", width, max_dense_qubits() + 1)?;
        let dim = 1usize << width;
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} out of range for {width} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { amps, width })
    }

    /// Basis state from a bitstring written most-significant qubit first,
    /// e.g. `"00010"` is index 2 on five qubits.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        if bits.is_empty() || bits.chars().any(|c| c != '0' && c != '1') {
            return Err(Error::parse(bits, "expected a non-empty string of 0/1"));
        }
        let index =
            usize::from_str_radix(bits, 2).map_err(|_| Error::parse(bits, "bitstring too long"))?;
        Self::basis(bits.len(), index)
    }

    pub fn from_cvector(v: &CVector) -> Result<Self> {
        Self::from_amplitudes(v.iter().copied().collect())
    }

    pub fn to_cvector(&self) -> CVector {
        CVector::from_column_slice(&self.amps)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.check_width(other.width)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn distance(&self, other: &Statevector) -> Result<f64> {
        self.check_width(other.width)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// `self ⊗ |probe⟩`, the probe becoming qubit 0 of the result.
    pub fn with_probe(&self, probe_bit: u8) -> Result<Self> {
        check_cap("joint statevector", self.width + 1, max_dense_qubits())?;
        let mut amps = vec![ZERO; self.dim() * 2];
        for (s, &a) in self.amps.iter().enumerate() {
            amps[2 * s + probe_bit as usize] = a;
        }
        Ok(Self {
            amps,
            width: self.width + 1,
        })
    }

    /// The (unnormalized) system amplitudes paired with one probe outcome.
    pub fn system_component(&self, probe_bit: u8) -> Result<Self> {
        if self.width == 0 {
            return Err(Error::Dimension("no probe qubit to split off".into()));
        }
        let amps = self
            .amps
            .iter()
            .skip(probe_bit as usize)
            .step_by(2)
            .copied()
            .collect();
        Ok(Self {
            amps,
            width: self.width - 1,
        })
    }

    pub(crate) fn check_width(&self, width: usize) -> Result<()> {
        if self.width != width {
            return Err(Error::Structure(format!(
                "width mismatch: statevector has {} qubits, operator has {width}",
                self.width
            )));
        }
        Ok(())
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        if !self.is_normalized() {
            return Err(Error::Validation(format!(
                "statevector norm {} differs from 1",
                self.norm()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitstring_is_msb_first() {
        let s = Statevector::from_bitstring("00010").unwrap();
        assert_eq!(s.width(), 5);
        assert_eq!(s.amplitudes()[2], ONE);
        assert!(Statevector::from_bitstring("0012").is_err());
        assert!(Statevector::from_bitstring("").is_err());
    }

    #[test]
    fn probe_is_least_significant() {
        let s = Statevector::basis(2, 1).unwrap();
        let j = s.with_probe(1).unwrap();
        assert_eq!(j.width(), 3);
        assert_eq!(j.amplitudes()[3], ONE);
        let back = j.system_component(1).unwrap();
        assert_eq!(back, s);
        assert!(j.system_component(0).unwrap().norm() == 0.0);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(Statevector::from_amplitudes(vec![ONE; 3]).is_err());
        assert!(Statevector::normalized(vec![ZERO; 4]).is_err());
    }
}
