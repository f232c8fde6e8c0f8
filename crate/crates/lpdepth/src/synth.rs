//! Samplers for l_p-symmetric test distributions, the Monte-Carlo Bayes-risk
//! oracle, and contour-grid emitters for plotting.
//!
//! The concrete family is exponential-power: psi(r) = c exp(-r^p / sigma).
//! Coordinates are drawn as sign * (sigma * G)^(1/p) with G ~ Gamma(1/p, 1),
//! then mapped through the inverse transform, which gives a density
//! proportional to exp(-||A (x - b)||_p^p / sigma).

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::gamma;
use crate::lp::{abs_pow, lp_norm, LpModel};

/// An exponential-power l_p-symmetric distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSymmetricSpec {
    p: f64,
    location: DVector<f64>,
    transform: DMatrix<f64>,
    sigma: f64,
    inv_transform: DMatrix<f64>,
    abs_det: f64,
}

impl LpSymmetricSpec {
    pub fn new(
        p: f64,
        location: DVector<f64>,
        transform: DMatrix<f64>,
        sigma: f64,
    ) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidExponent { p });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!(
                "scale sigma must be positive, got {sigma}"
            )));
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
        let inv_transform = transform
            .clone()
            .try_inverse()
            .ok_or(Error::SingularTransform { det })?;
        Ok(Self {
            p,
            location,
            transform,
            sigma,
            inv_transform,
            abs_det: det.abs(),
        })
    }

    /// Standard spec: location 0, identity transform, sigma 1.
    pub fn standard(p: f64, d: usize) -> Result<Self> {
        Self::new(p, DVector::zeros(d), DMatrix::identity(d, d), 1.0)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn location(&self) -> &DVector<f64> {
        &self.location
    }

    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
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

    /// Exact log density, including the normalizing constant
    /// |det A| (p / (2 Gamma(1/p)))^d sigma^(-d/p).
    pub fn ln_density(&self, x: &DVector<f64>) -> Result<f64> {
        let r = self.radius(x)?;
        let d = self.dim() as f64;
        let ln_norm = self.abs_det.ln()
            + d * (self.p.ln() - std::f64::consts::LN_2 - gamma::ln_gamma(1.0 / self.p))
            - d / self.p * self.sigma.ln();
        Ok(ln_norm - abs_pow(r, self.p) / self.sigma)
    }

    pub fn density(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.ln_density(x)?.exp())
    }

    /// Draws n rows; deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<f64> {
        let d = self.dim();
        let gamma_dist =
            Gamma::new(1.0 / self.p, 1.0).expect("shape 1/p is positive and finite");
        let mut out = DMatrix::zeros(n, d);
        let mut z = DVector::zeros(d);
        for i in 0..n {
            for k in 0..d {
                let g: f64 = gamma_dist.sample(rng);
                let magnitude = if g > 0.0 {
                    ((self.sigma * g).ln() / self.p).exp()
                } else {
                    0.0
                };
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                z[k] = sign * magnitude;
            }
            let x = &self.location + &self.inv_transform * &z;
            out.set_row(i, &x.transpose());
        }
        out
    }

    /// The depth model with the same geometry (exponent, location,
    /// transform); useful for true-contour emission.
    pub fn to_model(&self) -> LpModel {
        LpModel::new(self.p, self.location.clone(), self.transform.clone())
            .expect("spec invariants imply a valid model")
    }
}

/// A two-class problem with known class densities.
#[derive(Debug, Clone)]
pub struct TwoClassProblem {
    pub spec_a: LpSymmetricSpec,
    pub spec_b: LpSymmetricSpec,
    priors: (f64, f64),
}

impl TwoClassProblem {
    pub fn new(spec_a: LpSymmetricSpec, spec_b: LpSymmetricSpec, priors: (f64, f64)) -> Result<Self> {
        if spec_a.dim() != spec_b.dim() {
            return Err(Error::DimensionMismatch {
                expected: spec_a.dim(),
                got: spec_b.dim(),
            });
        }
        let (pa, pb) = priors;
        if !(pa > 0.0 && pb > 0.0 && (pa + pb - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidPriors(format!(
                "priors must be positive and sum to 1, got ({pa}, {pb})"
            )));
        }
        Ok(Self {
            spec_a,
            spec_b,
            priors,
        })
    }

    pub fn priors(&self) -> (f64, f64) {
        self.priors
    }

    /// The optimal rule: class a iff pi_a f_a(x) > pi_b f_b(x).
    pub fn bayes_assigns_a(&self, x: &DVector<f64>) -> Result<bool> {
        let lhs = self.priors.0.ln() + self.spec_a.ln_density(x)?;
        let rhs = self.priors.1.ln() + self.spec_b.ln_density(x)?;
        Ok(lhs > rhs)
    }
}

/// Estimates the Bayes risk by classifying mixture draws with the true
/// density ratio. Returns the error frequency and its binomial standard
/// error. Requires at least 10^4 draws.
pub fn bayes_risk_mc<R: Rng + ?Sized>(
    problem: &TwoClassProblem,
    n_mc: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if n_mc < 10_000 {
        return Err(Error::Config(format!(
            "Monte-Carlo Bayes risk needs at least 10000 draws, got {n_mc}"
        )));
    }
    let mut errors = 0usize;
    for _ in 0..n_mc {
        let from_a = rng.random::<f64>() < problem.priors.0;
        let x = if from_a {
            problem.spec_a.sample(1, rng)
        } else {
            problem.spec_b.sample(1, rng)
        };
        let x = x.row(0).transpose();
        let assigned_a = problem.bayes_assigns_a(&x)?;
        if assigned_a != from_a {
            errors += 1;
        }
    }
    let risk = errors as f64 / n_mc as f64;
    let se = (risk * (1.0 - risk) / n_mc as f64).sqrt();
    Ok((risk, se))
}

/// Rectangular evaluation window for contour grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl GridBounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max)
            || ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite())
        {
            return Err(Error::Config(format!(
                "invalid bounds ({x_min}, {x_max}) x ({y_min}, {y_max})"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width)
    }
}

/// A row-major grid of values over a 2-d window: `values[row * nx + col]`
/// with rows indexed by y and columns by x.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Vec<f64>,
}

impl ContourGrid {
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.xs.len() + col]
    }

    /// Writes `x,y,value` rows (row-major) with 17-significant-digit floats.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "x,y,value")?;
        for (row, &y) in self.ys.iter().enumerate() {
            for (col, &x) in self.xs.iter().enumerate() {
                writeln!(writer, "{:.16e},{:.16e},{:.16e}", x, y, self.value(row, col))?;
            }
        }
        Ok(())
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + i as f64 * step).collect()
}

fn grid_of(
    dim: usize,
    bounds: &GridBounds,
    resolution: usize,
    mut f: impl FnMut(&DVector<f64>) -> Result<f64>,
) -> Result<ContourGrid> {
    if dim != 2 {
        return Err(Error::UnsupportedDimension { dim });
    }
    if resolution < 16 {
        return Err(Error::Config(format!(
            "resolution must be at least 16, got {resolution}"
        )));
    }
    let xs = linspace(bounds.x_min, bounds.x_max, resolution);
    let ys = linspace(bounds.y_min, bounds.y_max, resolution);
    let mut values = Vec::with_capacity(resolution * resolution);
    let mut point = DVector::zeros(2);
    for &y in &ys {
        for &x in &xs {
            point[0] = x;
            point[1] = y;
            values.push(f(&point)?);
        }
    }
    Ok(ContourGrid { xs, ys, values })
}

/// Depth values of a fitted model over a 2-d grid.
pub fn depth_contour_grid(
    model: &LpModel,
    bounds: &GridBounds,
    resolution: usize,
) -> Result<ContourGrid> {
    grid_of(model.dim(), bounds, resolution, |x| {
        Ok(model.depth(x)?.get())
    })
}

/// True density values of a spec over a 2-d grid.
pub fn density_contour_grid(
    spec: &LpSymmetricSpec,
    bounds: &GridBounds,
    resolution: usize,
) -> Result<ContourGrid> {
    grid_of(spec.dim(), bounds, resolution, |x| spec.density(x))
}
