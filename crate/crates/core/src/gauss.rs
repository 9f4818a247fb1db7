//! Diagonal-covariance Gaussian algebra.
//!
//! Every distribution the search model touches (the prior, the evidence
//! posterior `P(Z|X)` and the reverse encoder `Q(Z|Y)`) is a
//! [`DiagGaussian`]. A diagonal Gaussian density can be written per dimension
//! as `exp(a z^2 + b z + c)`; products and quotients of such densities stay
//! in that family, which is what makes the closed-form [`convolution_score`]
//! possible.
//!
//! All quantities are kept in log space.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// `ln(2π)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagGaussian {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl DiagGaussian {
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::InvalidGaussian(
                "dimension must be at least 1".into(),
            ));
        }
        if mean.len() != var.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: var.len(),
            });
        }
        if let Some(i) = var.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidGaussian(format!(
                "variance[{i}] = {} is not strictly positive and finite",
                var[i]
            )));
        }
        if let Some(i) = mean.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidGaussian(format!("mean[{i}] is not finite")));
        }
        Ok(Self { mean, var })
    }

    /// The unit prior `N(0, I)`.
    pub fn standard(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            mean: vec![0.0; dim],
            var: vec![1.0; dim],
        }
    }

    /// Isotropic Gaussian `N(mean, var * I)`.
    pub fn isotropic(mean: Vec<f64>, var: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, vec![var; d])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.mean, self.var)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    pub fn log_density(&self, z: &[f64]) -> Result<f64> {
        self.check_dim(z.len())?;
        let mut quad = 0.0;
        let mut log_det = 0.0;
        for ((zi, mi), vi) in z.iter().zip(&self.mean).zip(&self.var) {
            let diff = zi - mi;
            quad += diff * diff / vi;
            log_det += vi.ln();
        }
        Ok(-0.5 * quad - 0.5 * self.dim() as f64 * LN_2PI - 0.5 * log_det)
    }

    /// `KL(self ‖ other)`.
    pub fn kl_divergence(&self, other: &DiagGaussian) -> Result<f64> {
        other.check_dim(self.dim())?;
        let mut acc = 0.0;
        for i in 0..self.dim() {
            let (m1, v1) = (self.mean[i], self.var[i]);
            let (m2, v2) = (other.mean[i], other.var[i]);
            let diff = m2 - m1;
            acc += v2.ln() - v1.ln() - 1.0 + v1 / v2 + diff * diff / v2;
        }
        Ok(0.5 * acc)
    }

    /// Draws `mean + sqrt(var) * eps` with `eps ~ N(0, I)` into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for ((o, m), v) in out.iter_mut().zip(&self.mean).zip(&self.var) {
            let eps: f64 = rng.sample(StandardNormal);
            *o = m + v.sqrt() * eps;
        }
    }

    pub fn to_normal_form(&self) -> NormalForm {
        let d = self.dim();
        let mut a = Vec::with_capacity(d);
        let mut b = Vec::with_capacity(d);
        let mut c = Vec::with_capacity(d);
        for (m, v) in self.mean.iter().zip(&self.var) {
            a.push(-1.0 / (2.0 * v));
            b.push(m / v);
            c.push(-m * m / (2.0 * v) - 0.5 * LN_2PI - 0.5 * v.ln());
        }
        NormalForm { a, b, c }
    }
}

/// Per-dimension coefficients of `exp(A z^2 + B z + C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl NormalForm {
    /// The normalizing constant implied by `a` and `b` for a density:
    /// `c = b^2 / (4a) + ln(-a/π) / 2`.
    pub fn implied_c(a: f64, b: f64) -> f64 {
        b * b / (4.0 * a) + 0.5 * (-a / std::f64::consts::PI).ln()
    }

    pub fn to_gaussian(&self) -> Result<DiagGaussian> {
        from_normal_form(self)
    }
}

pub fn to_normal_form(g: &DiagGaussian) -> NormalForm {
    g.to_normal_form()
}

/// Recovers the Gaussian from `A` and `B`; `C` is implied and not read.
pub fn from_normal_form(nf: &NormalForm) -> Result<DiagGaussian> {
    if nf.a.len() != nf.b.len() {
        return Err(Error::DimensionMismatch {
            expected: nf.a.len(),
            got: nf.b.len(),
        });
    }
    let mut mean = Vec::with_capacity(nf.a.len());
    let mut var = Vec::with_capacity(nf.a.len());
    for (i, (&a, &b)) in nf.a.iter().zip(&nf.b).enumerate() {
        if !(a < 0.0) {
            return Err(Error::NonIntegrableForm { index: i, value: a });
        }
        mean.push(-b / (2.0 * a));
        var.push(-1.0 / (2.0 * a));
    }
    DiagGaussian::new(mean, var)
}

/// Decomposition of the closed-form `log P(Y|X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBreakdown {
    pub total: f64,
    pub log_py: f64,
    /// `Σ ½ ln(−2 a_X a_Y / (a_X + a_Y + ½))`
    pub log_ratio_term: f64,
    /// `Σ b_X²/4a_X + b_Y²/4a_Y − (b_X + b_Y)²/4(a_X + a_Y + ½)`
    pub quad_terms: f64,
}

/// `log P(Y|X) = log P(Y) + log ∫ P(z|X) Q(z|Y) / N(z; 0, I) dz`.
///
/// Fails when some dimension has `a_X + a_Y + ½ ≥ 0`: the integrand is then
/// not integrable and no finite score exists.
pub fn convolution_score(
    gx: &DiagGaussian,
    gy: &DiagGaussian,
    log_py: f64,
) -> Result<ScoreBreakdown> {
    gx.check_dim(gy.dim())?;
    let mut log_ratio_term = 0.0;
    let mut quad_terms = 0.0;
    for i in 0..gx.dim() {
        let ax = -1.0 / (2.0 * gx.var[i]);
        let ay = -1.0 / (2.0 * gy.var[i]);
        let bx = gx.mean[i] / gx.var[i];
        let by = gy.mean[i] / gy.var[i];
        let s = ax + ay + 0.5;
        if !(s < 0.0) {
            return Err(Error::NonIntegrableConvolution { index: i, value: s });
        }
        log_ratio_term += 0.5 * (-2.0 * ax * ay / s).ln();
        quad_terms +=
            bx * bx / (4.0 * ax) + by * by / (4.0 * ay) - (bx + by) * (bx + by) / (4.0 * s);
    }
    Ok(ScoreBreakdown {
        total: log_py + log_ratio_term + quad_terms,
        log_py,
        log_ratio_term,
        quad_terms,
    })
}

/// `ln((1/n) Σ exp(x_i))`, stable. Exact when all inputs are equal.
pub fn log_mean_exp(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NEG_INFINITY;
    }
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + (s.ln() - (xs.len() as f64).ln())
}

/// Delta-method standard error of [`log_mean_exp`] as an estimator of
/// `ln E[exp(X)]`.
pub fn log_mean_exp_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let mean = w.iter().sum::<f64>() / n as f64;
    let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt() / mean
}
