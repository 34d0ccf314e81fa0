//! Pauli strings and weighted Pauli sums.
//!
//! Letters are written most-significant qubit first: in `IIIIX` the `X` acts
//! on qubit 0, which is the least-significant bit of a computational basis
//! index. The dense realization of `L_{n-1} ... L_1 L_0` is therefore the
//! Kronecker product `L_{n-1} ⊗ ... ⊗ L_0` in that order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_cap, max_dense_qubits, CMatrix, I, ONE, ZERO};

/// Coefficients with magnitude at or below this are dropped by canonicalization.
pub const COEFF_EPS: f64 = 1e-14;

/// Imaginary parts above this make a canonical sum non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Self::I),
            'X' => Some(Self::X),
            'Y' => Some(Self::Y),
            'Z' => Some(Self::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::I => 'I',
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }

    /// Single-qubit product `self · other = phase · letter`.
    pub fn product(self, other: Self) -> (Complex64, Self) {
        use PauliLetter::*;
        match (self, other) {
            (I, p) | (p, I) => (ONE, p),
            (X, X) | (Y, Y) | (Z, Z) => (ONE, I),
            (X, Y) => (I_PHASE, Z),
            (Y, X) => (-I_PHASE, Z),
            (Y, Z) => (I_PHASE, X),
            (Z, Y) => (-I_PHASE, X),
            (Z, X) => (I_PHASE, Y),
            (X, Z) => (-I_PHASE, Y),
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            Self::I => [[ONE, ZERO], [ZERO, ONE]],
            Self::X => [[ZERO, ONE], [ONE, ZERO]],
            Self::Y => [[ZERO, -I], [I, ZERO]],
            Self::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

const I_PHASE: Complex64 = Complex64::new(0.0, 1.0);

/// A coefficient times a tensor product of Pauli letters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PauliTermJson", into = "PauliTermJson")]
pub struct PauliString {
    pub coeff: Complex64,
    letters: Vec<PauliLetter>,
}

impl PauliString {
    pub fn new(coeff: Complex64, letters: Vec<PauliLetter>) -> Self {
        Self { coeff, letters }
    }

    pub fn real(coeff: f64, letters: &str) -> Result<Self> {
        Ok(Self::new(
            Complex64::new(coeff, 0.0),
            parse_letters(letters)?,
        ))
    }

    pub fn identity(width: usize, coeff: f64) -> Self {
        Self::new(Complex64::new(coeff, 0.0), vec![PauliLetter::I; width])
    }

    /// A single non-identity letter on `qubit` of an `width`-qubit register.
    pub fn single(width: usize, qubit: usize, letter: PauliLetter, coeff: f64) -> Self {
        let mut letters = vec![PauliLetter::I; width];
        letters[width - 1 - qubit] = letter;
        Self::new(Complex64::new(coeff, 0.0), letters)
    }

    pub fn width(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    pub fn letter_on(&self, qubit: usize) -> PauliLetter {
        self.letters[self.width() - 1 - qubit]
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|l| l.as_char()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == PauliLetter::I)
    }

    pub fn with_coeff(&self, coeff: Complex64) -> Self {
        Self::new(coeff, self.letters.clone())
    }

    /// Appends letters on the low side, i.e. `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self::new(self.coeff * other.coeff, letters)
    }

    pub fn masks(&self) -> PauliMasks {
        let n = self.width();
        let mut m = PauliMasks::default();
        for (pos, &l) in self.letters.iter().enumerate() {
            let bit = 1u64 << (n - 1 - pos);
            match l {
                PauliLetter::I => {}
                PauliLetter::X => m.x |= bit,
                PauliLetter::Z => m.z |= bit,
                PauliLetter::Y => {
                    m.x |= bit;
                    m.z |= bit;
                    m.y_count += 1;
                }
            }
        }
        m
    }

    /// Symbolic product `self · other`, phases included.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.width() != other.width() {
            return Err(Error::Structure(format!(
                "cannot multiply strings of width {} and {}",
                self.width(),
                other.width()
            )));
        }
        let mut coeff = self.coeff * other.coeff;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (phase, l) = a.product(b);
                coeff *= phase;
                l
            })
            .collect();
        Ok(Self::new(coeff, letters))
    }

    /// Dense realization of this single string.
    pub fn to_dense(&self) -> Result<CMatrix> {
        PauliSum::new_checked(self.width(), vec![self.clone()])?.to_dense()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff.im == 0.0 {
            write!(f, "{} {}", self.coeff.re, self.label())
        } else {
            write!(f, "{}{:+}i {}", self.coeff.re, self.coeff.im, self.label())
        }
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_pauli_term(s)
    }
}

/// Bit masks for applying a Pauli string to basis states.
///
/// `P|b⟩ = i^y_count · (-1)^popcount(b & z) · |b ^ x⟩`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PauliMasks {
    pub x: u64,
    pub z: u64,
    pub y_count: u32,
}

impl PauliMasks {
    /// Phase picked up by basis state `b`: `P|b⟩ = phase(b)|b ^ x⟩`.
    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        let sign = if (b as u64 & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        match self.y_count % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }
}

fn parse_letters(text: &str) -> Result<Vec<PauliLetter>> {
    if text.is_empty() {
        return Err(Error::parse(text, "empty letter sequence"));
    }
    text.chars()
        .map(|c| {
            PauliLetter::from_char(c)
                .ok_or_else(|| Error::parse(text, format!("illegal Pauli letter '{c}'")))
        })
        .collect()
}

fn parse_coeff(text: &str) -> Result<Complex64> {
    let bad = || Error::parse(text, "malformed coefficient");
    let Some(body) = text.strip_suffix('i') else {
        let re: f64 = text.parse().map_err(|_| bad())?;
        return Ok(Complex64::new(re, 0.0));
    };
    // Split `<re><+|-><im>` at the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im_text = &body[split..];
    let im: f64 = match im_text {
        "+" => 1.0,
        "-" => -1.0,
        t => t.parse().map_err(|_| bad())?,
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Parses `<real>[+<imag>i] <letters>`, e.g. `1.0 IIIIX` or `0.5-0.25i XY`.
pub fn parse_pauli_term(text: &str) -> Result<PauliString> {
    let mut parts = text.split_whitespace();
    let (Some(coeff), Some(letters)) = (parts.next(), parts.next()) else {
        return Err(Error::parse(text, "expected `<coefficient> <letters>`"));
    };
    if let Some(extra) = parts.next() {
        return Err(Error::parse(extra, "unexpected trailing token"));
    }
    let coeff = parse_coeff(coeff)?;
    if !coeff.re.is_finite() || !coeff.im.is_finite() {
        return Err(Error::parse(text, "non-finite coefficient"));
    }
    Ok(PauliString::new(coeff, parse_letters(letters)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PauliTermJson {
    coef: [f64; 2],
    paulis: String,
}

impl TryFrom<PauliTermJson> for PauliString {
    type Error = Error;

    fn try_from(j: PauliTermJson) -> Result<Self> {
        Ok(PauliString::new(
            Complex64::new(j.coef[0], j.coef[1]),
            parse_letters(&j.paulis)?,
        ))
    }
}

impl From<PauliString> for PauliTermJson {
    fn from(p: PauliString) -> Self {
        PauliTermJson {
            coef: [p.coeff.re, p.coeff.im],
            paulis: p.label(),
        }
    }
}

/// A weighted sum of equal-width Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    width: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    /// Builds a sum from non-empty terms, inferring the width.
    pub fn new(terms: Vec<PauliString>) -> Result<Self> {
        let width = terms
            .first()
            .map(PauliString::width)
            .ok_or_else(|| Error::Structure("cannot infer width of an empty sum".into()))?;
        Self::new_checked(width, terms)
    }

    pub fn new_checked(width: usize, terms: Vec<PauliString>) -> Result<Self> {
        if let Some(bad) = terms.iter().find(|t| t.width() != width) {
            return Err(Error::Structure(format!(
                "term `{bad}` has width {}, expected {width}",
                bad.width()
            )));
        }
        Ok(Self { width, terms })
    }

    pub fn zero(width: usize) -> Self {
        Self {
            width,
            terms: vec![],
        }
    }

    pub fn parse_lines(text: &str) -> Result<Self> {
        let terms = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(parse_pauli_term)
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let terms: Vec<PauliString> = serde_json::from_str(text)?;
        Self::new(terms)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.terms).expect("pauli terms serialize")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if term.width() != self.width {
            return Err(Error::Structure(format!(
                "term `{term}` has width {}, expected {}",
                term.width(),
                self.width
            )));
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            width: self.width,
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coeff(t.coeff * factor))
                .collect(),
        }
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone())?;
        }
        Ok(out)
    }

    /// `self ⊗ other` term by term.
    pub fn tensor(&self, other: &PauliSum) -> Self {
        let terms = self
            .terms
            .iter()
            .flat_map(|a| other.terms.iter().map(move |b| a.tensor(b)))
            .collect();
        Self {
            width: self.width + other.width,
            terms,
        }
    }

    /// Merges identical letter sequences, drops zero terms and sorts
    /// lexicographically by letters (I < X < Y < Z).
    pub fn canonicalize(&self) -> Self {
        let mut sorted: Vec<&PauliString> = self.terms.iter().collect();
        sorted.sort_by(|a, b| a.letters.cmp(&b.letters));
        let mut merged: Vec<PauliString> = Vec::with_capacity(sorted.len());
        for t in sorted {
            match merged.last_mut() {
                Some(last) if last.letters == t.letters => last.coeff += t.coeff,
                _ => merged.push(t.clone()),
            }
        }
        merged.retain(|t| t.coeff.norm() > COEFF_EPS);
        Self {
            width: self.width,
            terms: merged,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.canonicalize()
            .terms
            .iter()
            .all(|t| t.coeff.im.abs() <= HERMITIAN_TOL)
    }

    /// Sum of coefficient magnitudes, an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        self.to_dense_capped(max_dense_qubits())
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<CMatrix> {
        check_cap("Pauli sum", self.width, cap)?;
        let dim = 1usize << self.width;
        let mut m = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let masks = t.masks();
            for b in 0..dim {
                let row = b ^ masks.x as usize;
                m[(row, b)] += t.coeff * masks.phase(b);
            }
        }
        Ok(m)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
