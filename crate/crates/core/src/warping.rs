//! Warping functions `φ` of the cone metric `dr² + φ(r)² g_ω`.
//!
//! Built-in kinds have closed forms. Every kind also exposes log-space
//! accessors (`ln φ`, `φ′/φ`) that remain finite where `φ` itself overflows,
//! e.g. `sinh r` beyond `r ≈ 710`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest radius supported unless stated otherwise.
pub const DEFAULT_R_MAX: f64 = 1e3;

/// `|φ″|` at or below this is treated as zero when classifying curvature.
pub const CURVATURE_SIGN_TOL: f64 = 1e-12;

/// One tabulated sample `(r, φ, φ′, φ″)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpingSample {
    pub r: f64,
    pub phi: f64,
    pub phi_p: f64,
    pub phi_pp: f64,
}

/// User-supplied warping samples on a strictly increasing grid.
///
/// `φ` is interpolated by the cubic Hermite polynomial matching `(φ, φ′)` at
/// the nodes and `φ′` by the cubic Hermite polynomial matching `(φ′, φ″)`, so
/// both are C¹. Below the first node the table is closed by a virtual node at
/// `r = 0` carrying `(0, 1, φ″(0))`, with `φ″(0)` extrapolated linearly
/// from the first two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingTable {
    samples: Vec<WarpingSample>,
}

impl WarpingTable {
    pub fn new(samples: Vec<WarpingSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::validation("tabulated warping needs at least two samples"));
        }
        if samples
            .iter()
            .any(|s| !(s.r.is_finite() && s.phi.is_finite() && s.phi_p.is_finite() && s.phi_pp.is_finite()))
        {
            return Err(Error::validation("tabulated warping contains non-finite values"));
        }
        if samples.windows(2).any(|w| w[1].r <= w[0].r) {
            return Err(Error::validation("tabulated warping grid must be strictly increasing"));
        }
        let first = samples[0];
        if first.r <= 0.0 || first.r > 1e-3 {
            return Err(Error::validation(format!(
                "first tabulated radius must lie in (0, 1e-3], got {}",
                first.r
            )));
        }
        if let Some(s) = samples.iter().find(|s| s.phi <= 0.0) {
            return Err(Error::validation(format!(
                "φ must be positive, got φ({}) = {}",
                s.r, s.phi
            )));
        }
        // Taylor extrapolation of the first node back to the tip.
        let phi_at_tip = first.phi - first.r * first.phi_p + 0.5 * first.r * first.r * first.phi_pp;
        let slope_at_tip = first.phi_p - first.r * first.phi_pp;
        if phi_at_tip.abs() > 1e-6 * first.r.max(1e-3) || (slope_at_tip - 1.0).abs() > 1e-4 {
            return Err(Error::validation(format!(
                "tabulated warping must satisfy φ(0) = 0 and φ′(0) = 1 (extrapolated {phi_at_tip:e}, {slope_at_tip})"
            )));
        }
        Ok(Self { samples })
    }

    /// Reads a CSV with header `r,phi,phi_p,phi_pp`.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        Self::from_reader(&mut reader)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        Self::from_reader(&mut reader)
    }

    fn from_reader<R: std::io::Read>(reader: &mut csv::Reader<R>) -> Result<Self> {
        let headers = reader.headers()?.clone();
        let expected = ["r", "phi", "phi_p", "phi_pp"];
        if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::config(format!(
                "tabulated warping header must be `r,phi,phi_p,phi_pp`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let samples = reader
            .deserialize()
            .collect::<std::result::Result<Vec<WarpingSample>, _>>()?;
        Self::new(samples)
    }

    pub fn samples(&self) -> &[WarpingSample] {
        &self.samples
    }

    fn r_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].r
    }

    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let first = self.samples[0];
        let (lo, hi) = if r <= first.r {
            let tip = WarpingSample {
                r: 0.0,
                phi: 0.0,
                phi_p: 1.0,
                phi_pp: 2.0 * self.tip_taylor().0,
            };
            (tip, first)
        } else {
            let idx = self.samples.partition_point(|s| s.r < r).min(self.samples.len() - 1);
            (self.samples[idx - 1], self.samples[idx])
        };
        let (phi, _, _) = hermite(lo.r, hi.r, lo.phi, lo.phi_p, hi.phi, hi.phi_p, r);
        let (phi_p, phi_pp, _) = hermite(lo.r, hi.r, lo.phi_p, lo.phi_pp, hi.phi_p, hi.phi_pp, r);
        (phi, phi_p, phi_pp)
    }

    /// `(φ″(0)/2, φ‴(0)/6)` estimated from the first two nodes.
    fn tip_taylor(&self) -> (f64, f64) {
        let a = self.samples[0];
        let b = self.samples[1];
        let third = (b.phi_pp - a.phi_pp) / (b.r - a.r);
        let second_at_tip = a.phi_pp - a.r * third;
        (0.5 * second_at_tip, third / 6.0)
    }
}

/// Cubic Hermite interpolant and its first two derivatives at `x`.
fn hermite(x0: f64, x1: f64, f0: f64, d0: f64, f1: f64, d1: f64, x: f64) -> (f64, f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let deriv = (dh00 * f0 + dh01 * f1) / h + dh10 * d0 + dh11 * d1;
    let ddh00 = 12.0 * t - 6.0;
    let ddh10 = 6.0 * t - 4.0;
    let ddh01 = -12.0 * t + 6.0;
    let ddh11 = 6.0 * t - 2.0;
    let second = (ddh00 * f0 + ddh01 * f1) / (h * h) + (ddh10 * d0 + ddh11 * d1) / h;
    (value, deriv, second)
}

#[derive(Debug, Clone, PartialEq)]
pub enum WarpingKind {
    /// `φ(r) = r`: the flat metric cone.
    Euclidean,
    /// `φ(r) = sinh r`.
    Hyperbolic,
    /// `φ(r) = r / (1 + r)`: bounded, with positive radial curvature.
    Bounded,
    Tabulated(Arc<WarpingTable>),
}

/// Sign class of the radial curvature `K = −φ″/φ` over a probe grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurvatureSign {
    /// `φ″ ≤ 0` at every probe (`K ≥ 0`).
    Nonnegative,
    /// `φ″ ≥ 0` at every probe (`K ≤ 0`, hence `φ′ ≥ 1`).
    Nonpositive,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpingFunction {
    kind: WarpingKind,
    r_max: f64,
}

impl WarpingFunction {
    pub fn new(kind: WarpingKind, r_max: f64) -> Result<Self> {
        if !(r_max > 0.0) || r_max.is_nan() {
            return Err(Error::validation(format!("r_max must be positive, got {r_max}")));
        }
        if let WarpingKind::Tabulated(table) = &kind {
            if r_max > table.r_max() {
                return Err(Error::validation(format!(
                    "r_max {r_max} exceeds the last tabulated radius {}",
                    table.r_max()
                )));
            }
        }
        Ok(Self { kind, r_max })
    }

    pub fn euclidean() -> Self {
        Self {
            kind: WarpingKind::Euclidean,
            r_max: DEFAULT_R_MAX,
        }
    }

    pub fn hyperbolic() -> Self {
        Self {
            kind: WarpingKind::Hyperbolic,
            r_max: DEFAULT_R_MAX,
        }
    }

    pub fn bounded() -> Self {
        Self {
            kind: WarpingKind::Bounded,
            r_max: DEFAULT_R_MAX,
        }
    }

    /// Tabulated warping supported up to the last grid point.
    pub fn tabulated(table: WarpingTable) -> Self {
        let r_max = table.r_max();
        Self {
            kind: WarpingKind::Tabulated(Arc::new(table)),
            r_max,
        }
    }

    pub fn with_r_max(self, r_max: f64) -> Result<Self> {
        Self::new(self.kind, r_max)
    }

    pub fn kind(&self) -> &WarpingKind {
        &self.kind
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, WarpingKind::Euclidean)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            WarpingKind::Euclidean => "euclidean",
            WarpingKind::Hyperbolic => "hyperbolic",
            WarpingKind::Bounded => "bounded",
            WarpingKind::Tabulated(_) => "tabulated",
        }
    }

    fn check(&self, r: f64) -> Result<()> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::domain(format!("warping evaluated at negative radius {r}")));
        }
        if r > self.r_max {
            return Err(Error::domain(format!("radius {r} exceeds r_max = {}", self.r_max)));
        }
        Ok(())
    }

    /// `(φ, φ′, φ″)` at `r`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.check(r)?;
        Ok(self.eval_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> (f64, f64, f64) {
        match &self.kind {
            WarpingKind::Euclidean => (r, 1.0, 0.0),
            WarpingKind::Hyperbolic => {
                let s = r.sinh();
                (s, r.cosh(), s)
            }
            WarpingKind::Bounded => {
                let d = 1.0 + r;
                (r / d, 1.0 / (d * d), -2.0 / (d * d * d))
            }
            WarpingKind::Tabulated(t) => t.eval(r),
        }
    }

    /// `ln φ(r)` for `r > 0`, finite even where `φ` overflows.
    pub fn ln_phi(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.ln_phi_unchecked(r))
    }

    pub(crate) fn ln_phi_unchecked(&self, r: f64) -> f64 {
        match &self.kind {
            WarpingKind::Euclidean => r.ln(),
            WarpingKind::Hyperbolic => {
                if r < 20.0 {
                    r.sinh().ln()
                } else {
                    r - std::f64::consts::LN_2 + (-(-2.0 * r).exp()).ln_1p()
                }
            }
            WarpingKind::Bounded => r.ln() - r.ln_1p(),
            WarpingKind::Tabulated(t) => t.eval(r).0.ln(),
        }
    }

    /// `φ′(r)/φ(r)` for `r > 0`.
    pub fn log_derivative(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.log_derivative_unchecked(r))
    }

    pub(crate) fn log_derivative_unchecked(&self, r: f64) -> f64 {
        match &self.kind {
            WarpingKind::Euclidean => 1.0 / r,
            WarpingKind::Hyperbolic => 1.0 / r.tanh(),
            WarpingKind::Bounded => 1.0 / (r * (1.0 + r)),
            WarpingKind::Tabulated(t) => {
                let (phi, phi_p, _) = t.eval(r);
                phi_p / phi
            }
        }
    }

    /// Taylor coefficients `(a, b)` of `φ(r) = r + a r² + b r³ + O(r⁴)` at the tip.
    pub fn tip_taylor(&self) -> (f64, f64) {
        match &self.kind {
            WarpingKind::Euclidean => (0.0, 0.0),
            WarpingKind::Hyperbolic => (0.0, 1.0 / 6.0),
            WarpingKind::Bounded => (-1.0, 1.0),
            WarpingKind::Tabulated(t) => t.tip_taylor(),
        }
    }
}

/// `K(r) = −φ″(r)/φ(r)`.
pub fn radial_curvature(w: &WarpingFunction, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::domain("radial curvature is indeterminate at the tip r = 0"));
    }
    let (phi, _, phi_pp) = w.eval(r)?;
    if matches!(w.kind, WarpingKind::Hyperbolic) {
        // sinh″/sinh is identically one; avoids inf/inf far out.
        return Ok(-1.0);
    }
    Ok(-phi_pp / phi)
}

/// Probe-based sign class of the radial curvature on a geometric grid in
/// `(0, r_max]`. A flat warping (`φ″ ≡ 0`) is reported as `Nonpositive`.
pub fn classify_curvature(w: &WarpingFunction, r_probe_count: usize) -> Result<CurvatureSign> {
    if r_probe_count < 16 {
        return Err(Error::config(format!(
            "need at least 16 curvature probes, got {r_probe_count}"
        )));
    }
    let hi = w.r_max();
    let lo = (hi * 1e-6).min(1e-3);
    let ratio = (hi / lo).powf(1.0 / (r_probe_count - 1) as f64);
    let mut negative = false;
    let mut positive = false;
    for i in 0..r_probe_count {
        let r = if i + 1 == r_probe_count {
            hi
        } else {
            lo * ratio.powi(i as i32)
        };
        let (_, _, phi_pp) = w.eval(r)?;
        if phi_pp > CURVATURE_SIGN_TOL {
            positive = true;
        } else if phi_pp < -CURVATURE_SIGN_TOL {
            negative = true;
        }
    }
    Ok(match (negative, positive) {
        (true, true) => CurvatureSign::Mixed,
        (true, false) => CurvatureSign::Nonnegative,
        (false, _) => CurvatureSign::Nonpositive,
    })
}
