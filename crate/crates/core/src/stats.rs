//! Sample summaries and least-squares fits.

use crate::error::{invalid, Result};

/// Mean with standard error `sd / √n` (zero for a single sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(invalid("cannot summarize an empty sample"));
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let stderr = if n > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (nf - 1.0) / nf).sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, stderr, n })
    }
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of the slope; zero when fewer than three points.
    pub slope_stderr: f64,
}

impl LinearFit {
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(invalid("a line fit needs at least two paired points"));
        }
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(invalid("a line fit needs distinct abscissae"));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - slope * a - intercept).powi(2))
            .sum();
        let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
        let slope_stderr = if x.len() > 2 {
            (sse / (n - 2.0) / sxx).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            slope,
            intercept,
            r2,
            slope_stderr,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_and_fit() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.stderr - (5.0_f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(Summary::of(&[7.0]).unwrap().stderr, 0.0);
        let f = LinearFit::fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!(
            (f.slope - 2.0).abs() < 1e-15
                && (f.intercept - 1.0).abs() < 1e-15
                && (f.r2 - 1.0).abs() < 1e-15
        );
        assert!(LinearFit::fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
