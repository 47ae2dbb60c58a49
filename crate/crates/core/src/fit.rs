//! Weighted least-squares lines and power-law fits.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Weighted root-mean-square residual.
    pub residual: f64,
    /// Standard error of the slope (zero with two points).
    pub slope_stderr: f64,
}

/// Fit `y = slope x + intercept`, optionally weighted.
pub fn least_squares(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() || weights.is_some_and(|w| w.len() != n) {
        return Err(Error::InvalidArgument("sample arrays differ in length".into()));
    }
    if n < 2 {
        return Err(Error::TooFewSamples {
            valid: n,
            required: 2,
        });
    }
    let w: Vec<f64> = weights.map_or_else(|| alloc::vec![1.0; n], |w| w.to_vec());
    let sw: f64 = w.iter().sum();
    let mx = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (ys[i] - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = (0..n)
        .map(|i| {
            let r = ys[i] - slope * xs[i] - intercept;
            w[i] * r * r
        })
        .sum();
    let residual = (sse / sw).sqrt();
    let slope_stderr = if n > 2 {
        (sse / ((n - 2) as f64 * sxx)).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        residual,
        slope_stderr,
    })
}

/// `measure ~ C beta^{-tau}` fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub tau: f64,
    pub c: f64,
    /// Residual in log space.
    pub residual: f64,
    pub tau_stderr: f64,
    pub samples: usize,
}

pub const MIN_DECAY_SAMPLES: usize = 5;

/// Fit a power decay to `(beta, measure)` samples. Samples with measure at
/// most `min_measure` are discarded; the rest are weighted by measure so the
/// resolved part of the tail dominates.
pub fn decay_fit(samples: &[(f64, f64)], min_measure: f64) -> Result<DecayFit> {
    let valid: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(b, m)| b > 0.0 && m > min_measure && m.is_finite())
        .collect();
    if valid.len() < MIN_DECAY_SAMPLES {
        return Err(Error::TooFewSamples {
            valid: valid.len(),
            required: MIN_DECAY_SAMPLES,
        });
    }
    let xs: Vec<f64> = valid.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = valid.iter().map(|s| s.1.ln()).collect();
    let ws: Vec<f64> = valid.iter().map(|s| s.1).collect();
    let line = least_squares(&xs, &ys, Some(&ws))?;
    Ok(DecayFit {
        tau: -line.slope,
        c: line.intercept.exp(),
        residual: line.residual,
        tau_stderr: line.slope_stderr,
        samples: valid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_power_laws() {
        let s: Vec<(f64, f64)> = (1..=8).map(|k| (k as f64, (k as f64).powf(-2.0))).collect();
        let f = decay_fit(&s, 0.0).unwrap();
        assert!((f.tau - 2.0).abs() < 1e-12 && (f.c - 1.0).abs() < 1e-12);
        let s: Vec<(f64, f64)> = (1..=8)
            .map(|k| (k as f64, 3.0 * (k as f64).powf(-0.5)))
            .collect();
        let f = decay_fit(&s, 0.0).unwrap();
        assert!((f.tau - 0.5).abs() < 1e-12 && (f.c - 3.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let s = [(1.0, 1.0), (2.0, 0.5), (3.0, 0.0), (4.0, 0.0), (5.0, 0.0)];
        assert_eq!(
            decay_fit(&s, 0.01).unwrap_err(),
            Error::TooFewSamples {
                valid: 2,
                required: 5
            }
        );
    }
}
