//! Independent oracles for the acceptance suite. Everything here is coded
//! from first principles (separate gamma coefficients, exact pair sums,
//! quadrature) so it shares no implementation path with the library code it
//! checks.

use std::f64::consts::PI;

/// Lanczos gamma with the classic g = 7, n = 9 coefficient set (distinct
/// from the library's internal approximation).
pub fn gamma(x: f64) -> f64 {
    const P: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut t = P[0];
    for (i, &p) in P.iter().enumerate().skip(1) {
        t += p / (x + i as f64);
    }
    let w = x + 7.5;
    (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * t
}

/// Radial density of R = ||A (X - b)||_p for the exponential-power family
/// psi(r) = c exp(-r^p / sigma): tau(r) = p / (sigma^(d/p) Gamma(d/p))
/// exp(-r^p / sigma) r^(d-1).
pub fn ep_radial_density(r: f64, p: f64, d: usize, sigma: f64) -> f64 {
    let df = d as f64;
    p / (sigma.powf(df / p) * gamma(df / p)) * (-r.powf(p) / sigma).exp() * r.powi(d as i32 - 1)
}

/// Analytic depth density g(delta) for the exponential-power family: the
/// density of 1 / (1 + R) via change of variables.
pub fn ep_depth_density(delta: f64, p: f64, d: usize, sigma: f64) -> f64 {
    let r = 1.0 / delta - 1.0;
    ep_radial_density(r, p, d, sigma) / (delta * delta)
}

/// Normalized exponential-power density value at radius r:
/// |det A| (p / (2 Gamma(1/p)))^d sigma^(-d/p) exp(-r^p / sigma).
pub fn ep_density_at_radius(r: f64, p: f64, d: usize, sigma: f64, abs_det: f64) -> f64 {
    let df = d as f64;
    abs_det
        * (p / (2.0 * gamma(1.0 / p))).powf(df)
        * sigma.powf(-df / p)
        * (-r.powf(p) / sigma).exp()
}

/// Exhaustive evaluation of the leave-one-out cross-validation error at a
/// threshold: class-a points err when their a-oriented ratio is <= k, class-b
/// points when their b-oriented ratio (the reciprocal) is <= 1/k.
pub fn cv_error(ratios_a: &[f64], ratios_b: &[f64], prior_a: f64, prior_b: f64, k: f64) -> f64 {
    let errs_a = ratios_a.iter().filter(|&&r| r <= k).count() as f64;
    let errs_b = ratios_b.iter().filter(|&&r| 1.0 / r <= 1.0 / k).count() as f64;
    prior_a / ratios_a.len() as f64 * errs_a + prior_b / ratios_b.len() as f64 * errs_b
}

/// Brute-force minimizer of [`cv_error`] over a dense threshold sweep plus
/// every observed ratio; returns (best_k, best_error).
pub fn cv_minimum_brute_force(
    ratios_a: &[f64],
    ratios_b: &[f64],
    prior_a: f64,
    prior_b: f64,
) -> (f64, f64) {
    let mut candidates: Vec<f64> = Vec::new();
    let lo = ratios_a
        .iter()
        .chain(ratios_b)
        .cloned()
        .fold(f64::INFINITY, f64::min)
        * 0.25;
    let hi = ratios_a
        .iter()
        .chain(ratios_b)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        * 4.0;
    for i in 0..=4000 {
        candidates.push(lo + (hi - lo) * i as f64 / 4000.0);
    }
    candidates.extend(ratios_a.iter().chain(ratios_b).cloned());
    let mut best = (candidates[0], f64::INFINITY);
    for &k in &candidates {
        if k <= 0.0 {
            continue;
        }
        let e = cv_error(ratios_a, ratios_b, prior_a, prior_b, k);
        if e < best.1 {
            best = (k, e);
        }
    }
    best
}

/// Direct-plug-in Sheather–Jones bandwidth with exact O(n^2) pair sums: an
/// independent route to the same asymptotic target as the solve-the-equation
/// variant (pilot from the normal reference, no fixed point).
pub fn sj_direct_plugin(samples: &[f64]) -> f64 {
    let n = samples.len();
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| {
        let pos = (n - 1) as f64 * p;
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        if lo + 1 >= n {
            sorted[n - 1]
        } else {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        }
    };
    let iqr = q(0.75) - q(0.25);
    let lambda = sd.min(iqr / 1.349);

    let phi4 = |x: f64| (x.powi(4) - 6.0 * x * x + 3.0) * (-0.5 * x * x).exp();
    let phi6 = |x: f64| {
        (x.powi(6) - 15.0 * x.powi(4) + 45.0 * x * x - 15.0) * (-0.5 * x * x).exp()
    };
    let sum_over_pairs = |f: &dyn Fn(f64) -> f64, h: f64| -> f64 {
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += f((samples[i] - samples[j]) / h);
            }
        }
        total
    };
    let sdh = |h: f64| sum_over_pairs(&phi4, h) / (nf * (nf - 1.0) * h.powi(5) * (2.0 * PI).sqrt());
    let tdh = |h: f64| sum_over_pairs(&phi6, h) / (nf * (nf - 1.0) * h.powi(7) * (2.0 * PI).sqrt());

    let b = 1.23 * lambda * nf.powf(-1.0 / 9.0);
    let td = -tdh(b);
    let alpha2 = (2.394 / (nf * td)).powf(1.0 / 7.0);
    let c1 = 1.0 / (2.0 * PI.sqrt() * nf);
    (c1 / sdh(alpha2)).powf(0.2)
}

/// E_{p0}[ln f_p(X)] for d = 2, A = I, sigma = 1, where f_p is the
/// l_p-symmetrization of the true exponential-power density with exponent
/// p0. Up to a p-free constant this is -KL(p0, p), so its argmax over a grid
/// is the Kullback-Leibler projection. Computed by nested quadrature over the
/// radial density of ||X||_p.
pub fn ep_symmetrized_loglik(p0: f64, p: f64) -> f64 {
    let k0 = (p0 / (2.0 * gamma(1.0 / p0))).powi(2);
    let f0 = |x1: f64, x2: f64| k0 * (-(x1.abs().powf(p0) + x2.abs().powf(p0))).exp();

    // Radial density of ||X||_p: tau(r) = 8 r * I(r) with the integral over
    // the lower half of the first-quadrant l_p arc (the two halves agree by
    // symmetry), which keeps (1 - xi^p)^(1/p - 1) away from its singularity.
    let xi_max = 2.0_f64.powf(-1.0 / p);
    let m_inner = 200;
    let tau = |r: f64| -> f64 {
        let step = xi_max / m_inner as f64;
        let mut total = 0.0;
        for i in 0..=m_inner {
            let xi = i as f64 * step;
            let w = simpson_weight(i, m_inner);
            let one_minus = 1.0 - xi.powf(p);
            let x1 = r * one_minus.powf(1.0 / p);
            let x2 = r * xi;
            total += w * f0(x1, x2) * one_minus.powf(1.0 / p - 1.0);
        }
        8.0 * r * total * step / 3.0
    };

    let r_max = 9.0;
    let m_outer = 1600;
    let step = r_max / m_outer as f64;
    let mut mass = 0.0;
    let mut integral = 0.0;
    for i in 0..=m_outer {
        let r = i as f64 * step;
        let w = simpson_weight(i, m_outer);
        let t = if r == 0.0 { 0.0 } else { tau(r) };
        mass += w * t;
        if t > 1e-280 && r > 0.0 {
            integral += w * t * (t.ln() - r.ln());
        }
    }
    mass *= step / 3.0;
    integral *= step / 3.0;
    assert!(
        (mass - 1.0).abs() < 1e-4,
        "radial density quadrature off: mass = {mass} at p = {p}"
    );

    // ln C(p, 2) = ln p + ln Gamma(2/p) - 2 ln 2 - 2 ln Gamma(1/p).
    let ln_c = p.ln() + gamma(2.0 / p).ln() - 2.0 * (2.0_f64).ln() - 2.0 * gamma(1.0 / p).ln();
    ln_c + integral
}

fn simpson_weight(i: usize, m: usize) -> f64 {
    if i == 0 || i == m {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// KL-optimal exponent over a grid: the grid point maximizing
/// [`ep_symmetrized_loglik`].
pub fn kl_optimal_grid_exponent(p0: f64, grid: &[f64]) -> f64 {
    let mut best = (grid[0], f64::NEG_INFINITY);
    for &p in grid {
        let v = ep_symmetrized_loglik(p0, p);
        if v > best.1 {
            best = (p, v);
        }
    }
    best.0
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn oracle_gamma_known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-10);
        assert!((gamma(5.0) - 24.0).abs() < 1e-9);
    }

    #[test]
    fn symmetrized_loglik_peaks_at_the_truth() {
        // -KL is maximal at p = p0 itself.
        let at_truth = ep_symmetrized_loglik(3.0, 3.0);
        for p in [1.5, 2.0, 4.0, 8.0] {
            assert!(at_truth > ep_symmetrized_loglik(3.0, p), "p = {p}");
        }
    }
}
