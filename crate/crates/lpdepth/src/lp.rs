//! L_p geometry: norms, depth values, and the density-from-depth identity.
//!
//! A class distribution is modelled as `f(x) = psi(||A (x - b)||_p)` for a
//! location `b`, a nonsingular transform `A` and an exponent `p >= 1`. The
//! depth of a point is `delta = 1 / (1 + ||A (x - b)||_p)`, and the density
//! can be recovered from the one-dimensional density `g` of the depth via
//!
//! ```text
//! f(x) = |det A| * C(p, d) * g(delta) * delta^(d+1) / (1 - delta)^(d-1)
//! ```
//!
//! with `C(p, d) = p^(d-1) Gamma(d/p) / (2^d Gamma(1/p)^d)`. Everything here
//! is a pure function of its inputs; all values are immutable once built.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gamma;

/// Density floor applied before logarithms so that far-out stragglers never
/// produce `-inf` in likelihood sums.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Depth is capped at `1 - DEPTH_CAP_MARGIN` when evaluating densities in
/// dimension > 1, where the identity is singular at depth exactly 1.
pub const DEPTH_CAP_MARGIN: f64 = 1e-12;

/// |x|^p computed as exp(p ln|x|), with 0^p = 0.
#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        0.0
    } else {
        (p * a.ln()).exp()
    }
}

/// The L_p norm (sum |z_i|^p)^(1/p) for p >= 1.
///
/// The largest coordinate is factored out before exponentiation, so large
/// exponents cannot overflow. Returns exactly 0 iff `z` is the zero vector.
pub fn lp_norm(z: &[f64], p: f64) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent { p });
    }
    if z.is_empty() {
        return Err(Error::EmptyVector);
    }
    let m = z.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = z.iter().map(|&v| abs_pow(v / m, p)).sum();
    Ok(m * (sum.ln() / p).exp())
}

/// A depth value in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DepthValue(f64);

impl DepthValue {
    pub fn new(delta: f64) -> Result<Self> {
        if delta.is_finite() && delta > 0.0 && delta <= 1.0 {
            Ok(Self(delta))
        } else {
            Err(Error::InvalidDepth { delta })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// One class's fitted L_p geometry: exponent, location and transform.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    p: f64,
    location: DVector<f64>,
    transform: DMatrix<f64>,
    abs_det: f64,
}

impl LpModel {
    /// Builds a model, validating `p >= 1`, square dimensions and
    /// nonsingularity of the transform.
    pub fn new(p: f64, location: DVector<f64>, transform: DMatrix<f64>) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidExponent { p });
        }
        let d = location.len();
        if d == 0 {
            return Err(Error::InvalidDimension);
        }
        if transform.nrows() != d || transform.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: transform.nrows().max(transform.ncols()),
            });
        }
        let det = transform.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::SingularTransform { det });
        }
        Ok(Self {
            p,
            location,
            transform,
            abs_det: det.abs(),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn location(&self) -> &DVector<f64> {
        &self.location
    }

    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    /// |det A|, cached at construction.
    pub fn abs_det_transform(&self) -> f64 {
        self.abs_det
    }

    /// The radius ||A (x - b)||_p.
    pub fn radius(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let centered = &self.transform * (x - &self.location);
        lp_norm(centered.as_slice(), self.p)
    }

    /// The depth 1 / (1 + radius); equals 1 exactly at the location.
    pub fn depth(&self, x: &DVector<f64>) -> Result<DepthValue> {
        let r = self.radius(x)?;
        DepthValue::new(1.0 / (1.0 + r))
    }
}

/// The family constant C(p, d) = p^(d-1) Gamma(d/p) / (2^d Gamma(1/p)^d).
pub fn lp_constant(p: f64, d: usize) -> Result<f64> {
    Ok(ln_lp_constant(p, d)?.exp())
}

/// Natural log of [`lp_constant`]; preferred in likelihood sums.
pub fn ln_lp_constant(p: f64, d: usize) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent { p });
    }
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    let df = d as f64;
    Ok((df - 1.0) * p.ln() + gamma::ln_gamma(df / p)
        - df * std::f64::consts::LN_2
        - df * gamma::ln_gamma(1.0 / p))
}

/// Reconstructs the density value at a point from its depth and the value of
/// the depth density `g` there.
///
/// In one dimension the `(1 - delta)^(d-1)` factor degenerates to 1, so
/// `delta = 1` is allowed there; for `d > 1` it is a singularity and the
/// caller must trim or cap.
pub fn density_from_depth(delta: DepthValue, g_at_delta: f64, model: &LpModel) -> Result<f64> {
    let d = model.dim();
    let dv = delta.get();
    if dv == 1.0 && d > 1 {
        return Err(Error::DepthSingularity { dim: d });
    }
    let c = lp_constant(model.p(), d)?;
    let denom = if d == 1 {
        1.0
    } else {
        (1.0 - dv).powi(d as i32 - 1)
    };
    Ok(model.abs_det_transform() * c * g_at_delta * dv.powi(d as i32 + 1) / denom)
}

/// Log-density via the identity, with the conventions the estimation pipeline
/// uses everywhere: `g` is floored at [`DENSITY_FLOOR`] before the log, and
/// the depth is capped just below 1 when `d > 1`.
pub fn ln_density_from_depth(delta: DepthValue, g_at_delta: f64, model: &LpModel) -> f64 {
    let d = model.dim();
    let dv = if d > 1 {
        delta.get().min(1.0 - DEPTH_CAP_MARGIN)
    } else {
        delta.get()
    };
    let ln_c = ln_lp_constant(model.p(), d).expect("model invariants guarantee valid arguments");
    let tail = if d == 1 {
        0.0
    } else {
        (d as f64 - 1.0) * (1.0 - dv).ln()
    };
    model.abs_det_transform().ln()
        + ln_c
        + g_at_delta.max(DENSITY_FLOOR).ln()
        + (d as f64 + 1.0) * dv.ln()
        - tail
}
