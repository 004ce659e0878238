//! Regular solutions of the radial equation
//!
//! ```text
//! φ_m″ + (n−1)(φ′/φ) φ_m′ − (λ_m²/φ²) φ_m = 0
//! ```
//!
//! The profile is never formed directly. With `v = φ_m′/φ_m` and the scaled
//! log-derivative `w = r v`, the equation becomes a Riccati equation in
//! `t = ln r`:
//!
//! ```text
//! dw/dt = w + λ² r²/φ² − w² − (n−1) (r φ′/φ) w,     d(ln φ_m)/dt = w,
//! ```
//!
//! whose coefficients stay bounded at the tip. The regular branch is selected
//! by starting from the Frobenius expansion `v = γ/r + c₀ + c₁ r + O(r²)`,
//! where `γ` is the positive indicial root; the other branch is repelled
//! under forward integration.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ode::{DormandPrince, StepControl};
use crate::quadrature::{integrate, QuadOptions};
use crate::warping::WarpingFunction;

/// Default start radius of the Riccati integration.
pub const FROBENIUS_START: f64 = 1e-4;

/// Positive root of `γ² + (n−2)γ − λ² = 0`.
pub fn indicial_exponent(n: usize, lambda_sq: f64) -> f64 {
    let a = n as f64 - 2.0;
    if lambda_sq == 0.0 {
        return 0.0;
    }
    let disc = (a * a + 4.0 * lambda_sq).sqrt();
    // 2λ² / (a + disc) avoids cancellation when a ≫ λ
    if a >= 0.0 {
        2.0 * lambda_sq / (a + disc)
    } else {
        0.5 * (disc - a)
    }
}

/// `(c₀, c₁)` of the Frobenius expansion `v = γ/r + c₀ + c₁ r` for a warping
/// with tip expansion `φ = r + a r² + b r³`.
fn frobenius_correction(n: usize, lambda_sq: f64, gamma: f64, (a, b): (f64, f64)) -> (f64, f64) {
    let nm1 = n as f64 - 1.0;
    let c0 = -a * (nm1 * gamma + 2.0 * lambda_sq) / (2.0 * gamma + nm1);
    let c1 = (lambda_sq * (3.0 * a * a - 2.0 * b) - c0 * c0 - nm1 * (a * c0 + (2.0 * b - a * a) * gamma))
        / (2.0 * gamma + n as f64);
    (c0, c1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub r: f64,
    /// `ln φ_m(r)` relative to the anchor.
    pub log_phi: f64,
    /// `v = φ_m′/φ_m`.
    pub v: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub control: StepControl,
    /// Integrate the Riccati equation even where a closed form exists.
    pub force_integration: bool,
    /// For `n = 2`, compare against `exp(∫₁ʳ λ/φ)` and record the deviation.
    pub cross_check_2d: bool,
    pub r_start: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            control: StepControl {
                rtol: 1e-10,
                atol: 1e-12,
                max_steps: 2_000_000,
            },
            force_integration: false,
            cross_check_2d: false,
            r_start: FROBENIUS_START,
        }
    }
}

/// Regular radial profile stored in log space, normalized to
/// `ln φ_m(anchor) = 0`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    lambda_sq: f64,
    n: usize,
    gamma: f64,
    frobenius: (f64, f64),
    anchor: f64,
    samples: Vec<ProfileSample>,
    warping: WarpingFunction,
    closed_form_deviation: Option<f64>,
}

impl RadialProfile {
    pub fn lambda_sq(&self) -> f64 {
        self.lambda_sq
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indicial_exponent(&self) -> f64 {
        self.gamma
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.warping
    }

    /// Largest `|Δ ln φ_m|` against the two-dimensional closed form, when
    /// requested at solve time.
    pub fn closed_form_deviation(&self) -> Option<f64> {
        self.closed_form_deviation
    }

    pub fn r_min(&self) -> f64 {
        self.samples[0].r
    }

    pub fn r_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].r
    }

    /// `ln φ_m(r)` for `0 < r ≤ r_max`. Below the first sample the Frobenius
    /// expansion is used; at `r = 0` the result is `−∞` unless `λ² = 0`.
    pub fn log_value(&self, r: f64) -> Result<f64> {
        if self.lambda_sq == 0.0 {
            if r < 0.0 || r > self.r_max() {
                return Err(Error::domain(format!(
                    "radius {r} outside profile range [0, {}]",
                    self.r_max()
                )));
            }
            return Ok(0.0);
        }
        if r.is_nan() || r < 0.0 || r > self.r_max() * (1.0 + 1e-14) {
            return Err(Error::domain(format!(
                "radius {r} outside profile range [0, {}]",
                self.r_max()
            )));
        }
        let first = self.samples[0];
        if r < first.r {
            if r == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            let (c0, c1) = self.frobenius;
            return Ok(first.log_phi
                + self.gamma * (r / first.r).ln()
                + c0 * (r - first.r)
                + 0.5 * c1 * (r * r - first.r * first.r));
        }
        let idx = self.samples.partition_point(|s| s.r < r);
        if idx < self.samples.len() && self.samples[idx].r == r {
            return Ok(self.samples[idx].log_phi);
        }
        let idx = idx.min(self.samples.len() - 1);
        let lo = self.samples[idx - 1];
        let hi = self.samples[idx];
        // quintic Hermite in t = ln r on (L, w, dw/dt) with w = r v
        let (t0, t1) = (lo.r.ln(), hi.r.ln());
        let h = t1 - t0;
        let s = (r.ln() - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let (w0, w1) = (lo.r * lo.v, hi.r * hi.v);
        let (a0, a1) = (self.riccati_slope(lo.r, w0), self.riccati_slope(hi.r, w1));
        Ok((1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5) * lo.log_phi
            + (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5) * h * w0
            + 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5) * h * h * a0
            + (10.0 * s3 - 15.0 * s4 + 6.0 * s5) * hi.log_phi
            + (-4.0 * s3 + 7.0 * s4 - 3.0 * s5) * h * w1
            + 0.5 * (s3 - 2.0 * s4 + s5) * h * h * a1)
    }

    /// `dw/dt` from the Riccati equation.
    fn riccati_slope(&self, r: f64, w: f64) -> f64 {
        let potential = self.lambda_sq * (2.0 * (r.ln() - self.warping.ln_phi_unchecked(r))).exp();
        let friction = (self.n as f64 - 1.0) * r * self.warping.log_derivative_unchecked(r);
        w + potential - w * w - friction * w
    }

    /// The same profile re-anchored so that `ln φ_m(anchor) = 0`.
    pub fn reanchored(&self, anchor: f64) -> Result<Self> {
        let shift = self.log_value(anchor)?;
        let mut out = self.clone();
        out.anchor = anchor;
        for s in &mut out.samples {
            s.log_phi -= shift;
        }
        Ok(out)
    }

    /// Writes `r,log_phi_m,v`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "log_phi_m", "v"])?;
        for s in &self.samples {
            w.write_record([s.r.to_string(), s.log_phi.to_string(), s.v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Solves for the regular profile on `r_grid` with default options.
pub fn solve_profile(w: &WarpingFunction, n: usize, lambda_sq: f64, r_grid: &[f64]) -> Result<RadialProfile> {
    solve_profile_with(w, n, lambda_sq, r_grid, &SolveOptions::default())
}

pub fn solve_profile_with(
    w: &WarpingFunction,
    n: usize,
    lambda_sq: f64,
    r_grid: &[f64],
    opts: &SolveOptions,
) -> Result<RadialProfile> {
    if !(lambda_sq >= 0.0) || !lambda_sq.is_finite() {
        return Err(Error::validation(format!(
            "λ² must be a nonnegative number, got {lambda_sq}"
        )));
    }
    if n < 2 {
        return Err(Error::config(format!("cone dimension must be at least 2, got {n}")));
    }
    if r_grid.is_empty() {
        return Err(Error::config("empty radial grid"));
    }
    if r_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::config("radial grid must be strictly increasing"));
    }
    if r_grid[0] <= 0.0 || r_grid[r_grid.len() - 1] > w.r_max() {
        return Err(Error::domain(format!(
            "radial grid [{}, {}] must lie in (0, r_max = {}]",
            r_grid[0],
            r_grid[r_grid.len() - 1],
            w.r_max()
        )));
    }

    let gamma = indicial_exponent(n, lambda_sq);
    let frobenius = frobenius_correction(n, lambda_sq, gamma, w.tip_taylor());
    let anchor = if w.r_max() >= 1.0 { 1.0 } else { w.r_max() };

    let r_start = opts.r_start.min(r_grid[0]);
    let mut radii: Vec<f64> = Vec::with_capacity(r_grid.len() + 2);
    radii.push(r_start);
    radii.extend_from_slice(r_grid);
    radii.push(anchor);
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let mut samples = if lambda_sq == 0.0 {
        radii
            .iter()
            .map(|&r| ProfileSample {
                r,
                log_phi: 0.0,
                v: 0.0,
            })
            .collect()
    } else if w.is_euclidean() && !opts.force_integration {
        radii
            .iter()
            .map(|&r| ProfileSample {
                r,
                log_phi: gamma * r.ln(),
                v: gamma / r,
            })
            .collect()
    } else {
        integrate_riccati(w, n, lambda_sq, gamma, frobenius, &radii, &opts.control)?
    };

    let shift = samples
        .iter()
        .find(|s| s.r == anchor)
        .map(|s| s.log_phi)
        .expect("anchor is part of the integration grid");
    for s in &mut samples {
        s.log_phi -= shift;
    }

    let mut profile = RadialProfile {
        lambda_sq,
        n,
        gamma,
        frobenius,
        anchor,
        samples,
        warping: w.clone(),
        closed_form_deviation: None,
    };

    if opts.cross_check_2d && n == 2 {
        let m = lambda_sq.sqrt();
        let mut worst: f64 = 0.0;
        for s in &profile.samples {
            let reference = closed_form_2d_log_real(w, m, s.r, anchor)?;
            worst = worst.max((s.log_phi - reference).abs());
        }
        profile.closed_form_deviation = Some(worst);
    }
    Ok(profile)
}

fn integrate_riccati(
    w: &WarpingFunction,
    n: usize,
    lambda_sq: f64,
    gamma: f64,
    (c0, c1): (f64, f64),
    radii: &[f64],
    control: &StepControl,
) -> Result<Vec<ProfileSample>> {
    let nm1 = n as f64 - 1.0;
    let r0 = radii[0];
    let mut y = [
        gamma + c0 * r0 + c1 * r0 * r0,
        gamma * r0.ln() + c0 * r0 + 0.5 * c1 * r0 * r0,
    ];

    let mut rhs = |t: f64, y: &[f64; 2]| {
        let r = t.exp();
        let ln_phi = w.ln_phi_unchecked(r);
        let scaled_potential = lambda_sq * (2.0 * (t - ln_phi)).exp();
        let friction = nm1 * r * w.log_derivative_unchecked(r);
        let wv = y[0];
        [wv + scaled_potential - wv * wv - friction * wv, wv]
    };

    let mut solver = DormandPrince::<2>::new(*control);
    let mut samples = Vec::with_capacity(radii.len());
    samples.push(ProfileSample {
        r: r0,
        log_phi: y[1],
        v: y[0] / r0,
    });
    let mut t = r0.ln();
    for &r in &radii[1..] {
        let t_next = r.ln();
        solver.advance(&mut rhs, t, &mut y, t_next).map_err(|e| match e {
            Error::Numerical { at, message } => Error::numerical(at.exp(), message),
            other => other,
        })?;
        t = t_next;
        samples.push(ProfileSample {
            r,
            log_phi: y[1],
            v: y[0] / r,
        });
    }
    Ok(samples)
}

/// `φ_m(r)/φ_m(R)`, computed as `exp(ln φ_m(r) − ln φ_m(R))`.
pub fn profile_ratio(p: &RadialProfile, r: f64, big_r: f64) -> Result<f64> {
    if !(big_r > 0.0) {
        return Err(Error::domain(format!("outer radius must be positive, got {big_r}")));
    }
    if r == big_r {
        p.log_value(r)?;
        return Ok(1.0);
    }
    Ok((p.log_value(r)? - p.log_value(big_r)?).exp())
}

fn closed_form_2d_log_real(w: &WarpingFunction, m: f64, r: f64, anchor: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("closed form needs r > 0, got {r}")));
    }
    if r > w.r_max() {
        return Err(Error::domain(format!("radius {r} exceeds r_max = {}", w.r_max())));
    }
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        max_intervals: 8192,
    };
    // integrate in t = ln s: ∫ m/φ(s) ds = ∫ m exp(t − ln φ(e^t)) dt
    let res = integrate(
        |t| {
            let s = t.exp();
            m * (t - w.ln_phi_unchecked(s)).exp()
        },
        anchor.ln(),
        r.ln(),
        &opts,
    )
    .map_err(|e| match e {
        Error::Numerical { message, .. } => Error::numerical(r, message),
        other => other,
    })?;
    Ok(res.value)
}

/// `ln φ_m(r) = ∫₁ʳ m/φ(s) ds`, the two-dimensional profile.
pub fn closed_form_2d_log(w: &WarpingFunction, m: usize, r: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::validation("closed form needs a positive mode number"));
    }
    closed_form_2d_log_real(w, m as f64, r, 1.0)
}

/// `φ_m(r) = exp(∫₁ʳ m/φ(s) ds)`; may overflow, see [`closed_form_2d_log`].
pub fn closed_form_2d(w: &WarpingFunction, m: usize, r: f64) -> Result<f64> {
    Ok(closed_form_2d_log(w, m, r)?.exp())
}

/// Geometric grid with `per_decade` points per decade covering `[lo, hi]`,
/// both endpoints included exactly.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && per_decade > 0);
    if hi == lo {
        return vec![lo];
    }
    let decades = (hi / lo).log10();
    let steps = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut grid: Vec<f64> = (0..steps)
        .map(|i| lo * 10f64.powf(decades * i as f64 / steps as f64))
        .collect();
    grid.push(hi);
    grid
}
