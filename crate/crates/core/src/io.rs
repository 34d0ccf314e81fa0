//! File formats: model JSON, spectrum CSV/JSON and two-column plot data.
//!
//! Model file:
//!
//! ```json
//! {"n": 1,
//!  "system": {"pauli": [{"coef": [-0.5, 0.0], "paulis": "Z"}]},
//!  "coupling": {"preset": "uniform-x"},
//!  "probe": {"c": 0.005, "tau": 300.0, "init": "excited"},
//!  "initial": "0"}
//! ```
//!
//! `system` holds either `pauli` terms or a `dense` matrix (rows of reals or
//! `[re, im]` pairs) with an optional `padding` energy. `coupling` is a
//! `preset` name or `pauli` terms. `initial` is optional: a bitstring
//! (most-significant qubit first) or an amplitude list; it defaults to
//! `|0…0⟩`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{
    embed_dense, preset_coupling, CouplingOperator, CouplingPreset, Model, ProbeState,
    SystemHamiltonian, DEFAULT_PADDING,
};
use crate::oracle::Assignment;
use crate::pauli::{PauliString, PauliSum};
use crate::spectroscopy::{Peak, ShotCounts, Spectrum, SpectrumPoint};
use crate::state::Statevector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Real(r) => Complex64::new(r, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for Entry {
    fn from(z: Complex64) -> Self {
        if z.im == 0.0 {
            Entry::Real(z.re)
        } else {
            Entry::Complex([z.re, z.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<Vec<PauliString>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<Vec<PauliString>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub c: f64,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Bitstring(String),
    Amplitudes(Vec<Entry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub system: SystemSpec,
    pub coupling: CouplingSpec,
    pub probe: ProbeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn system(&self) -> Result<SystemHamiltonian> {
        match (&self.system.pauli, &self.system.dense) {
            (Some(terms), None) => {
                let sum = PauliSum::new_checked(self.n, terms.clone())?;
                SystemHamiltonian::from_pauli(sum)
            }
            (None, Some(rows)) => {
                let d = rows.len();
                if rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Dimension(format!(
                        "dense system matrix is not square ({d} rows)"
                    )));
                }
                let m = CMatrix::from_fn(d, d, |i, j| rows[i][j].into());
                embed_dense(m, self.n, self.system.padding.unwrap_or(DEFAULT_PADDING))
            }
            _ => Err(Error::Structure(
                "system needs exactly one of `pauli` or `dense`".into(),
            )),
        }
    }

    pub fn coupling(&self) -> Result<CouplingOperator> {
        match (&self.coupling.preset, &self.coupling.pauli) {
            (Some(name), None) => preset_coupling(name.parse::<CouplingPreset>()?, self.n),
            (None, Some(terms)) => {
                CouplingOperator::new(PauliSum::new_checked(self.n, terms.clone())?, "custom")
            }
            _ => Err(Error::Structure(
                "coupling needs exactly one of `preset` or `pauli`".into(),
            )),
        }
    }

    pub fn probe_init(&self) -> Result<ProbeState> {
        match self.probe.init.as_deref() {
            None | Some("excited") => Ok(ProbeState::Excited),
            Some("ground") => Ok(ProbeState::Ground),
            Some(other) => Err(Error::parse(
                other,
                "probe init must be `excited` or `ground`",
            )),
        }
    }

    pub fn initial(&self) -> Result<Statevector> {
        let psi = match &self.initial {
            None => Statevector::basis(self.n, 0)?,
            Some(InitialSpec::Bitstring(bits)) => Statevector::from_bitstring(bits)?,
            Some(InitialSpec::Amplitudes(amps)) => {
                Statevector::normalized(amps.iter().map(|&a| a.into()).collect())?
            }
        };
        if psi.width() != self.n {
            return Err(Error::Structure(format!(
                "initial state has {} qubits, model has {}",
                psi.width(),
                self.n
            )));
        }
        Ok(psi)
    }

    pub fn to_model(&self) -> Result<Model> {
        let mut m = Model::new(
            self.system()?,
            self.coupling()?,
            self.probe.c,
            self.probe.tau,
            self.initial()?,
        )?;
        m.probe_init = self.probe_init()?;
        Ok(m)
    }
}

pub fn parse_model(text: &str) -> Result<Model> {
    ModelFile::parse(text)?.to_model()
}

pub fn load_model(path: &Path) -> Result<Model> {
    parse_model(&fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    k: usize,
    omega: f64,
    probability: f64,
}

#[derive(Serialize, Deserialize)]
struct CsvShotRow {
    k: usize,
    omega: f64,
    probability: f64,
    flips: u64,
    shots: u64,
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::parse("csv", format!("{other:?}")),
    }
}

/// Writes `k,omega,probability` rows, plus `flips,shots` when every point
/// carries shot counts.
pub fn write_spectrum_csv<W: Write>(spectrum: &Spectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_shots =
        !spectrum.points.is_empty() && spectrum.points.iter().all(|p| p.counts.is_some());
    for p in &spectrum.points {
        if with_shots {
            let c = p.counts.expect("checked above");
            w.serialize(CsvShotRow {
                k: p.k,
                omega: p.omega,
                probability: p.probability,
                flips: c.flips,
                shots: c.shots,
            })
        } else {
            w.serialize(CsvRow {
                k: p.k,
                omega: p.omega,
                probability: p.probability,
            })
        }
        .map_err(csv_error)?;
    }
    if spectrum.points.is_empty() {
        w.write_record(["k", "omega", "probability"])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV spectrum. The grid bounds are inferred from the midpoint
/// spacing; `c` and `tau` are unknown and set to zero.
pub fn read_spectrum_csv<R: Read>(input: R) -> Result<Spectrum> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let with_shots = match names.as_slice() {
        ["k", "omega", "probability"] => false,
        ["k", "omega", "probability", "flips", "shots"] => true,
        _ => {
            return Err(Error::parse(
                headers.iter().collect::<Vec<_>>().join(","),
                "unexpected CSV header",
            ))
        }
    };
    let mut points = Vec::new();
    if with_shots {
        for row in r.deserialize::<CsvShotRow>() {
            let row = row.map_err(csv_error)?;
            points.push(SpectrumPoint {
                k: row.k,
                omega: row.omega,
                probability: row.probability,
                counts: Some(ShotCounts {
                    flips: row.flips,
                    shots: row.shots,
                }),
            });
        }
    } else {
        for row in r.deserialize::<CsvRow>() {
            let row = row.map_err(csv_error)?;
            points.push(SpectrumPoint {
                k: row.k,
                omega: row.omega,
                probability: row.probability,
                counts: None,
            });
        }
    }
    spectrum_from_points(points)
}

fn spectrum_from_points(points: Vec<SpectrumPoint>) -> Result<Spectrum> {
    if points.is_empty() {
        return Err(Error::Validation("spectrum has no points".into()));
    }
    if points.iter().enumerate().any(|(i, p)| p.k != i) {
        return Err(Error::Validation(
            "spectrum rows are not numbered 0..j in order".into(),
        ));
    }
    if points
        .iter()
        .any(|p| !(p.omega.is_finite() && (0.0..=1.0).contains(&p.probability)))
    {
        return Err(Error::Validation(
            "spectrum has non-finite frequencies or probabilities outside [0, 1]".into(),
        ));
    }
    let dw = if points.len() > 1 {
        (points[points.len() - 1].omega - points[0].omega) / (points.len() - 1) as f64
    } else {
        return Err(Error::Validation(
            "cannot infer grid spacing from a single row".into(),
        ));
    };
    if dw.is_nan() || dw <= 0.0 {
        return Err(Error::Validation("frequencies are not increasing".into()));
    }
    Ok(Spectrum {
        omega_min: points[0].omega - 0.5 * dw,
        omega_max: points[points.len() - 1].omega + 0.5 * dw,
        mode: crate::spectroscopy::SweepMode::Absorption,
        c: 0.0,
        tau: 0.0,
        points,
        warnings: vec![],
    })
}

/// Spectrum together with its detected peaks and oracle assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub spectrum: Spectrum,
    #[serde(default)]
    pub peaks: Vec<Peak>,
    #[serde(default)]
    pub assignments: Vec<Assignment>,
}

pub fn write_spectrum_json<W: Write>(doc: &SpectrumDocument, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, doc)?;
    writeln!(out)?;
    Ok(())
}

/// Reads a JSON spectrum document or a CSV spectrum, chosen by content.
pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let doc: SpectrumDocument = serde_json::from_str(&text)?;
        Ok(doc.spectrum)
    } else {
        read_spectrum_csv(text.as_bytes())
    }
}

/// Whitespace-separated `omega probability` lines with a comment header.
pub fn write_plot_data<W: Write>(spectrum: &Spectrum, mut out: W) -> Result<()> {
    writeln!(out, "# omega probability")?;
    for p in &spectrum.points {
        writeln!(out, "{} {}", p.omega, p.probability)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_LEVEL: &str = r#"{"n": 1,
        "system": {"pauli": [{"coef": [-0.5, 0.0], "paulis": "Z"}]},
        "coupling": {"preset": "uniform-x"},
        "probe": {"c": 0.005, "tau": 300.0, "init": "excited"}}"#;

    #[test]
    fn parses_pauli_model() {
        let m = parse_model(TWO_LEVEL).unwrap();
        assert_eq!(m.width(), 1);
        assert_eq!(m.c, 0.005);
        assert_eq!(m.probe_init, ProbeState::Excited);
        assert_eq!(m.initial, Statevector::basis(1, 0).unwrap());
    }

    #[test]
    fn parses_dense_model_with_initial() {
        let text = r#"{"n": 2,
            "system": {"dense": [[0.0, [0.1, 0.2], 0.0], [[0.1, -0.2], 1.0, 0.0], [0.0, 0.0, 2.0]], "padding": 7.0},
            "coupling": {"pauli": [{"coef": [1.0, 0.0], "paulis": "XI"}]},
            "probe": {"c": 0.01, "tau": 10.0, "init": "ground"},
            "initial": "10"}"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.system.physical_dim(), 3);
        assert_eq!(m.probe_init, ProbeState::Ground);
        assert_eq!(m.initial, Statevector::basis(2, 2).unwrap());
        let h = m.system.to_dense().unwrap();
        assert_eq!(h[(3, 3)], Complex64::new(7.0, 0.0));
        assert_eq!(h[(0, 1)], Complex64::new(0.1, 0.2));
    }

    #[test]
    fn rejects_malformed_models() {
        let both = TWO_LEVEL.replace(
            r#""preset": "uniform-x""#,
            r#""preset": "eq5", "pauli": []"#,
        );
        assert!(matches!(parse_model(&both), Err(Error::Structure(_))));
        let bad_preset = TWO_LEVEL.replace("uniform-x", "eq9");
        assert!(matches!(parse_model(&bad_preset), Err(Error::Parse { .. })));
        let bad_init = TWO_LEVEL.replace(r#""excited""#, r#""up""#);
        assert!(parse_model(&bad_init).is_err());
        assert!(parse_model("{not json").is_err());
        let wide = TWO_LEVEL.replace(
            r#""init": "excited"}"#,
            r#""init": "excited"}, "initial": "01""#,
        );
        assert!(parse_model(&wide).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let f = ModelFile::parse(TWO_LEVEL).unwrap();
        assert_eq!(ModelFile::parse(&f.to_json_string()).unwrap(), f);
    }

    fn sample() -> Spectrum {
        Spectrum::from_probabilities(0.4, 2.0, &[0.0, 0.1, 1.0 / 3.0, 1e-7], 0.005, 500.0)
    }

    #[test]
    fn csv_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,omega,probability\n"));
        assert_eq!(text.lines().count(), 5);
        let back = read_spectrum_csv(buf.as_slice()).unwrap();
        assert_eq!(back.probabilities(), s.probabilities());
        assert!((back.omega_min - 0.4).abs() < 1e-12);
        assert!((back.omega_max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_with_shots() {
        let mut s = sample();
        for p in &mut s.points {
            p.counts = Some(ShotCounts {
                flips: 3,
                shots: 10,
            });
        }
        let mut buf = Vec::new();
        write_spectrum_csv(&s, &mut buf).unwrap();
        assert!(buf.starts_with(b"k,omega,probability,flips,shots\n"));
        let back = read_spectrum_csv(buf.as_slice()).unwrap();
        assert_eq!(
            back.points[2].counts,
            Some(ShotCounts {
                flips: 3,
                shots: 10
            })
        );
    }

    #[test]
    fn corrupted_csv_is_rejected() {
        assert!(read_spectrum_csv("k,omega,probability\n0,0.5,abc\n".as_bytes()).is_err());
        assert!(read_spectrum_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(
            read_spectrum_csv("k,omega,probability\n0,0.5,1.5\n1,0.6,0.1\n".as_bytes()).is_err()
        );
    }

    #[test]
    fn json_document_round_trip() {
        let doc = SpectrumDocument {
            spectrum: sample(),
            peaks: vec![],
            assignments: vec![],
        };
        let mut buf = Vec::new();
        write_spectrum_json(&doc, &mut buf).unwrap();
        let back: SpectrumDocument = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, doc);
    }
}
