use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Spectrum;

/// Peak-finding thresholds.
///
/// A sample belongs to a peak when its probability is strictly above
/// `max(floor, relative · max_k P(ω_k))`. Above-threshold runs separated by
/// at most `merge_gap` are merged, which absorbs the sinc side-lobes of a
/// finite-time resonance. `merge_gap: None` uses `max(4π/τ, 2Δω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub floor: f64,
    pub relative: f64,
    pub merge_gap: Option<f64>,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            floor: 1e-4,
            relative: 0.05,
            merge_gap: None,
        }
    }
}

impl ThresholdPolicy {
    pub fn threshold(&self, spectrum: &Spectrum) -> f64 {
        self.floor.max(self.relative * spectrum.max_probability())
    }

    pub fn merge_gap_for(&self, spectrum: &Spectrum) -> f64 {
        self.merge_gap.unwrap_or_else(|| {
            let dw = 2.0 * spectrum.delta_omega();
            if spectrum.tau > 0.0 && spectrum.tau.is_finite() {
                dw.max(4.0 * PI / spectrum.tau)
            } else {
                dw
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Grid frequency of the maximum.
    pub center: f64,
    pub height: f64,
    /// Full width at half maximum, interpolated between grid points.
    pub fwhm: f64,
    /// Grid index of the maximum.
    pub index: usize,
    /// First and last grid index of the above-threshold region.
    pub span: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<String>,
}

/// Finds local-maximum regions above the policy threshold.
pub fn detect_peaks(spectrum: &Spectrum, policy: &ThresholdPolicy) -> Vec<Peak> {
    let p = spectrum.probabilities();
    if p.is_empty() {
        return vec![];
    }
    let omega: Vec<f64> = spectrum.points.iter().map(|pt| pt.omega).collect();
    let threshold = policy.threshold(spectrum);
    let gap = policy.merge_gap_for(spectrum) * (1.0 + 1e-9);

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < p.len() {
        if p[k] > threshold {
            let start = k;
            while k + 1 < p.len() && p[k + 1] > threshold {
                k += 1;
            }
            match runs.last_mut() {
                Some(last) if omega[start] - omega[last.1] <= gap => last.1 = k,
                _ => runs.push((start, k)),
            }
        }
        k += 1;
    }

    runs.into_iter()
        .map(|(lo, hi)| {
            let mut index = lo;
            for k in lo..=hi {
                if p[k] > p[index] {
                    index = k;
                }
            }
            Peak {
                center: omega[index],
                height: p[index],
                fwhm: fwhm(&omega, &p, index, (lo, hi), spectrum.delta_omega()),
                index,
                span: (lo, hi),
                assignment: None,
            }
        })
        .collect()
}

fn fwhm(omega: &[f64], p: &[f64], index: usize, span: (usize, usize), dw: f64) -> f64 {
    let half = 0.5 * p[index];
    let left = (0..index).rev().find(|&k| p[k] < half).map(|k| {
        let x = omega[k] + (half - p[k]) / (p[k + 1] - p[k]) * (omega[k + 1] - omega[k]);
        omega[index] - x
    });
    let right = (index + 1..p.len()).find(|&k| p[k] < half).map(|k| {
        let x = omega[k - 1] + (p[k - 1] - half) / (p[k - 1] - p[k]) * (omega[k] - omega[k - 1]);
        x - omega[index]
    });
    match (left, right) {
        (Some(l), Some(r)) => l + r,
        (Some(h), None) | (None, Some(h)) => 2.0 * h,
        (None, None) => omega[span.1] - omega[span.0] + dw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentzian(center: f64, gamma: f64, height: f64, lo: f64, hi: f64, n: usize) -> Spectrum {
        let dw = (hi - lo) / n as f64;
        let p: Vec<f64> = (0..n)
            .map(|k| {
                let w = lo + (k as f64 + 0.5) * dw;
                height * gamma * gamma / ((w - center).powi(2) + gamma * gamma)
            })
            .collect();
        Spectrum::from_probabilities(lo, hi, &p, 0.0, f64::INFINITY)
    }

    #[test]
    fn lorentzian_center_and_width() {
        let s = lorentzian(1.0, 0.02, 0.5, 0.5, 1.5, 1000);
        let peaks = detect_peaks(&s, &ThresholdPolicy::default());
        assert_eq!(peaks.len(), 1);
        let pk = &peaks[0];
        assert!((pk.center - 1.0).abs() <= 0.5 * s.delta_omega() + 1e-12);
        assert!((pk.fwhm - 0.04).abs() / 0.04 < 0.05, "fwhm {}", pk.fwhm);
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let s = Spectrum::from_probabilities(0.0, 1.0, &[0.0; 50], 0.0, 100.0);
        assert!(detect_peaks(&s, &ThresholdPolicy::default()).is_empty());
        let s = Spectrum::from_probabilities(0.0, 1.0, &[5e-5; 50], 0.0, 100.0);
        assert!(detect_peaks(&s, &ThresholdPolicy::default()).is_empty());
    }

    #[test]
    fn separated_peaks_stay_separate() {
        let mut p = vec![0.0; 100];
        p[20] = 0.3;
        p[21] = 0.2;
        p[70] = 0.1;
        let s = Spectrum::from_probabilities(0.0, 1.0, &p, 0.0, 1e6);
        let peaks = detect_peaks(&s, &ThresholdPolicy::default());
        assert_eq!(peaks.len(), 2);
        assert_eq!(peaks[0].index, 20);
        assert_eq!(peaks[1].index, 70);
    }

    #[test]
    fn side_lobes_merge_into_main_peak() {
        // sinc² shape of a weak finite-time resonance
        let tau = 200.0;
        let n = 800;
        let p: Vec<f64> = (0..n)
            .map(|k| {
                let d = (k as f64 + 0.5) / n as f64 * 2.0 - 1.0;
                let x = 0.5 * d * tau;
                0.01 * if x == 0.0 { 1.0 } else { (x.sin() / x).powi(2) }
            })
            .collect();
        let s = Spectrum::from_probabilities(-1.0, 1.0, &p, 0.0, tau);
        let policy = ThresholdPolicy {
            relative: 0.01,
            ..Default::default()
        };
        assert_eq!(detect_peaks(&s, &policy).len(), 1);
        let split = ThresholdPolicy {
            merge_gap: Some(0.0),
            ..policy
        };
        assert!(detect_peaks(&s, &split).len() > 1);
    }

    #[test]
    fn edge_peak_width_falls_back() {
        let p = [0.5, 0.4, 0.1, 0.0, 0.0];
        let s = Spectrum::from_probabilities(0.0, 5.0, &p, 0.0, 1e6);
        let peaks = detect_peaks(&s, &ThresholdPolicy::default());
        assert_eq!(peaks.len(), 1);
        assert!(peaks[0].fwhm > 0.0);
    }
}
