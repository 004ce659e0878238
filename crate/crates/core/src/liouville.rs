//! Growth bounds `A(r)` below which harmonic functions on the cone must be
//! constant, in two curvature regimes:
//!
//! ```text
//! general (φ′ ≥ 1, n ≥ 3): ln A(r) = c ∫₁ʳ φ^{1−n}(σ) ∫₀^σ φ^{n−3}(τ) dτ dσ
//! nonnegative curvature:   ln A(r) = c ∫₁ʳ ds / φ(s)
//! ```
//!
//! with `c = λ₁² min{1/(√2 λ₁), 1/2}`. Everything is kept in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::radial::{log_grid, RadialProfile};
use crate::warping::{classify_curvature, CurvatureSign, WarpingFunction};

/// Below this radius the inner integral uses the tip expansion of `φ`.
const INNER_TIP: f64 = 1e-3;
const TABLE_PER_DECADE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Requires `φ′ ≥ 1` (nonpositive radial curvature) and `n ≥ 3`.
    General,
    NonnegCurvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Diverges,
    Inconclusive,
}

/// `λ₁² min{1/(√2 λ₁), 1/2}`: `λ₁/√2` for `λ₁ ≥ √2`, `λ₁²/2` below.
pub fn prefactor(lambda1: f64) -> f64 {
    lambda1 * lambda1 * (1.0 / (std::f64::consts::SQRT_2 * lambda1)).min(0.5)
}

/// Exponent of `A(r) = r^e` on the flat cone `φ = r`: `prefactor/(n − 2)`.
pub fn euclidean_exponent(n: usize, lambda1: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Capability(format!(
            "the general bound carries a 1/(n−2) factor and needs n ≥ 3, got n = {n}"
        )));
    }
    if !(lambda1 > 0.0) {
        return Err(Error::validation(format!("λ₁ must be positive, got {lambda1}")));
    }
    Ok(prefactor(lambda1) / (n as f64 - 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    r: f64,
    /// accumulated outer integral `∫₁ʳ`
    integral: f64,
    /// general regime: `J(r) = φ(r)^{3−n} ∫₀ʳ φ^{n−3}`
    inner_scaled: f64,
}

/// Growth bound with a cached quadrature table on `[1, r_max]`.
#[derive(Debug, Clone)]
pub struct GrowthBound {
    regime: Regime,
    n: usize,
    lambda1: f64,
    prefactor: f64,
    warping: WarpingFunction,
    applicability: CurvatureSign,
    table: Vec<Node>,
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        max_intervals: 4096,
    }
}

impl GrowthBound {
    pub fn new(regime: Regime, n: usize, lambda1: f64, warping: &WarpingFunction) -> Result<Self> {
        if !(lambda1 > 0.0) || !lambda1.is_finite() {
            return Err(Error::validation(format!("λ₁ must be positive, got {lambda1}")));
        }
        if regime == Regime::General && n < 3 {
            return Err(Error::Capability(format!(
                "general growth bound needs n ≥ 3, got n = {n}"
            )));
        }
        if n < 2 {
            return Err(Error::config(format!("cone dimension must be at least 2, got {n}")));
        }
        if warping.r_max() < 1.0 {
            return Err(Error::domain(
                "growth bounds start at r = 1, beyond this warping's r_max",
            ));
        }
        let applicability = classify_curvature(warping, 64)?;
        let expected = match regime {
            Regime::General => CurvatureSign::Nonpositive,
            Regime::NonnegCurvature => CurvatureSign::Nonnegative,
        };
        if applicability != expected {
            log::warn!(
                "{regime:?} growth bound applied to a `{}` warping whose probed curvature class is {applicability:?}",
                warping.name()
            );
        }
        let mut bound = Self {
            regime,
            n,
            lambda1,
            prefactor: prefactor(lambda1),
            warping: warping.clone(),
            applicability,
            table: Vec::new(),
        };
        bound.build_table()?;
        Ok(bound)
    }

    fn build_table(&mut self) -> Result<()> {
        let radii = log_grid(1.0, self.warping.r_max(), TABLE_PER_DECADE);
        let mut table = Vec::with_capacity(radii.len());
        let mut node = Node {
            r: 1.0,
            integral: 0.0,
            inner_scaled: match self.regime {
                Regime::General => self.inner_from_tip(1.0)?,
                Regime::NonnegCurvature => 0.0,
            },
        };
        table.push(node);
        for &r in &radii[1..] {
            node = self.advance(&node, r)?;
            table.push(node);
        }
        self.table = table;
        Ok(())
    }

    /// `J(r)` computed from the tip: `ln`-scaled inner integral over `[0, r]`.
    fn inner_from_tip(&self, r: f64) -> Result<f64> {
        let w = &self.warping;
        let p = self.n as f64 - 3.0;
        let eps = INNER_TIP.min(r);
        // φ(τ) ≈ τ(1 + aτ) ⇒ ∫₀^ε φ^{n−3} ≈ ε^{n−2}/(n−2) + (n−3) a ε^{n−1}/(n−1)
        let (a, _) = w.tip_taylor();
        let head = eps.powf(p + 1.0) / (p + 1.0) + p * a * eps.powf(p + 2.0) / (p + 2.0);
        let ln_phi_r = w.ln_phi_unchecked(r);
        let head_scaled = head * (-p * ln_phi_r).exp();
        if eps == r {
            return Ok(head_scaled);
        }
        let rest = integrate(
            |tau| (p * (w.ln_phi_unchecked(tau) - ln_phi_r)).exp(),
            eps,
            r,
            &quad_opts(),
        )?;
        Ok(head_scaled + rest.value)
    }

    /// Inner scaled integral `J(σ)` given `J` at an earlier node.
    fn inner_at(&self, from: &Node, sigma: f64) -> Result<f64> {
        let w = &self.warping;
        let p = self.n as f64 - 3.0;
        if p == 0.0 {
            return Ok(from.inner_scaled + (sigma - from.r));
        }
        let ln_phi_s = w.ln_phi_unchecked(sigma);
        let carried = from.inner_scaled * (p * (w.ln_phi_unchecked(from.r) - ln_phi_s)).exp();
        let fresh = integrate(
            |tau| (p * (w.ln_phi_unchecked(tau) - ln_phi_s)).exp(),
            from.r,
            sigma,
            &quad_opts(),
        )?;
        Ok(carried + fresh.value)
    }

    fn advance(&self, from: &Node, r: f64) -> Result<Node> {
        let w = &self.warping;
        match self.regime {
            Regime::NonnegCurvature => {
                let inc = integrate(|s| (-w.ln_phi_unchecked(s)).exp(), from.r, r, &quad_opts())?;
                Ok(Node {
                    r,
                    integral: from.integral + inc.value,
                    inner_scaled: 0.0,
                })
            }
            Regime::General => {
                // φ^{1−n}(σ) I(σ) = J(σ)/φ(σ)²
                let mut failure = None;
                let inc = integrate(
                    |sigma| match self.inner_at(from, sigma) {
                        Ok(j) => j * (-2.0 * w.ln_phi_unchecked(sigma)).exp(),
                        Err(e) => {
                            failure.get_or_insert(e);
                            0.0
                        }
                    },
                    from.r,
                    r,
                    &quad_opts(),
                )?;
                if let Some(e) = failure {
                    return Err(e);
                }
                Ok(Node {
                    r,
                    integral: from.integral + inc.value,
                    inner_scaled: self.inner_at(from, r)?,
                })
            }
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.warping
    }

    /// Probed curvature class of the warping.
    pub fn curvature_class(&self) -> CurvatureSign {
        self.applicability
    }

    /// Whether the warping's probed curvature class matches the regime's
    /// hypothesis.
    pub fn hypotheses_hold(&self) -> bool {
        matches!(
            (self.regime, self.applicability),
            (Regime::General, CurvatureSign::Nonpositive) | (Regime::NonnegCurvature, CurvatureSign::Nonnegative)
        )
    }

    pub fn r_max(&self) -> f64 {
        self.table[self.table.len() - 1].r
    }

    /// `ln A(r)` for `1 ≤ r ≤ r_max`.
    pub fn log_value(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::domain(format!("growth bound is defined for r ≥ 1, got {r}")));
        }
        if r > self.r_max() {
            return Err(Error::domain(format!("radius {r} beyond r_max = {}", self.r_max())));
        }
        let idx = self.table.partition_point(|node| node.r <= r) - 1;
        let node = &self.table[idx];
        let integral = if node.r == r {
            node.integral
        } else {
            self.advance(node, r)?.integral
        };
        Ok(self.prefactor * integral)
    }

    /// `A(r)`; overflows to `∞` for large arguments, prefer [`Self::log_value`].
    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.log_value(r)?.exp())
    }

    /// `(r, ln A(r))` at the cached table nodes.
    pub fn table(&self) -> Vec<(f64, f64)> {
        self.table.iter().map(|n| (n.r, self.prefactor * n.integral)).collect()
    }
}

/// `A(r)` in the general regime.
pub fn growth_bound_general(n: usize, lambda1: f64, w: &WarpingFunction, r: f64) -> Result<f64> {
    GrowthBound::new(Regime::General, n, lambda1, &truncated(w, r)?)?.value(r)
}

/// `A(r)` in the nonnegative-curvature regime.
pub fn growth_bound_nonneg(n: usize, lambda1: f64, w: &WarpingFunction, r: f64) -> Result<f64> {
    GrowthBound::new(Regime::NonnegCurvature, n, lambda1, &truncated(w, r)?)?.value(r)
}

fn truncated(w: &WarpingFunction, r: f64) -> Result<WarpingFunction> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::domain(format!("growth bound is defined for r ≥ 1, got {r}")));
    }
    if r > w.r_max() {
        return Err(Error::domain(format!("radius {r} beyond r_max = {}", w.r_max())));
    }
    w.clone().with_r_max(r.max(1.0))
}

#[derive(Debug, Clone, Copy)]
pub struct DivergenceOptions {
    /// `ln A` must exceed this at the last probe.
    pub threshold: f64,
    /// The last-decade increment may shrink by at most this fraction of the
    /// previous one.
    pub shrink_tolerance: f64,
}

impl Default for DivergenceOptions {
    fn default() -> Self {
        Self {
            threshold: 50.0,
            shrink_tolerance: 0.05,
        }
    }
}

pub fn divergence_verdict(bound: &GrowthBound, r_probe_max: f64) -> Result<Verdict> {
    divergence_verdict_with(bound, r_probe_max, &DivergenceOptions::default())
}

/// Numerical evidence that `ln A(r) → ∞`: the value must exceed the threshold
/// at `r_probe_max` and its per-decade increments must not be shrinking.
pub fn divergence_verdict_with(bound: &GrowthBound, r_probe_max: f64, opts: &DivergenceOptions) -> Result<Verdict> {
    if r_probe_max > bound.r_max() {
        return Err(Error::domain(format!(
            "probe radius {r_probe_max} beyond r_max = {}",
            bound.r_max()
        )));
    }
    if r_probe_max < 100.0 {
        return Ok(Verdict::Inconclusive);
    }
    let top = bound.log_value(r_probe_max)?;
    let mid = bound.log_value(r_probe_max / 10.0)?;
    let low = bound.log_value(r_probe_max / 100.0)?;
    let last = top - mid;
    let previous = mid - low;
    let growing = last > 0.0 && last >= (1.0 - opts.shrink_tolerance) * previous;
    Ok(if top > opts.threshold && growing {
        Verdict::Diverges
    } else {
        Verdict::Inconclusive
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceRow {
    pub r: f64,
    pub log_a: f64,
    pub log_phi: Vec<f64>,
    pub gap: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDominance {
    pub lambda_sq: f64,
    /// Gap strictly increasing over the second half of the grid.
    pub dominant: bool,
    /// Gap indistinguishable from zero over the whole grid.
    pub boundary_case: bool,
    /// Gap at the largest radius.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub rows: Vec<DominanceRow>,
    pub modes: Vec<ModeDominance>,
    pub all_dominant: bool,
    pub min_margin: f64,
}

impl DominanceReport {
    /// Writes `R,log_A,log_phi_m...,gap_m...` with one column per checked mode.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let k = self.modes.len();
        let mut header = vec!["R".to_string(), "log_A".to_string()];
        header.extend((1..=k).map(|m| format!("log_phi_{m}")));
        header.extend((1..=k).map(|m| format!("gap_{m}")));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.r.to_string(), row.log_a.to_string()];
            rec.extend(row.log_phi.iter().map(|v| v.to_string()));
            rec.extend(row.gap.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tabulates `ln φ_m(R) − ln A(R)` for every nonconstant profile and reports
/// whether each gap is eventually increasing.
pub fn dominance_check(bound: &GrowthBound, profiles: &[RadialProfile], r_grid: &[f64]) -> Result<DominanceReport> {
    if r_grid.len() < 2 {
        return Err(Error::config("dominance check needs at least two radii"));
    }
    if r_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::config("dominance grid must be strictly increasing"));
    }
    let checked: Vec<&RadialProfile> = profiles.iter().filter(|p| p.lambda_sq() > 0.0).collect();
    for p in &checked {
        if p.n() != bound.n() || p.warping().kind() != bound.warping().kind() {
            return Err(Error::config("profile and growth bound use different cones"));
        }
        if r_grid[r_grid.len() - 1] > p.r_max() {
            return Err(Error::domain(format!(
                "dominance grid ends at {} beyond the profile range {}",
                r_grid[r_grid.len() - 1],
                p.r_max()
            )));
        }
    }

    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let log_a = bound.log_value(r)?;
        let log_phi = checked.iter().map(|p| p.log_value(r)).collect::<Result<Vec<_>>>()?;
        let gap = log_phi.iter().map(|l| l - log_a).collect();
        rows.push(DominanceRow { r, log_a, log_phi, gap });
    }

    let half = rows.len() / 2;
    let modes: Vec<ModeDominance> = checked
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let gaps: Vec<f64> = rows.iter().map(|row| row.gap[j]).collect();
            let scale = rows
                .iter()
                .map(|row| row.log_a.abs().max(row.log_phi[j].abs()))
                .fold(1.0, f64::max);
            let noise = 1e-8 * scale;
            let dominant = gaps[half..].windows(2).all(|g| g[1] - g[0] > noise);
            let boundary_case = gaps.iter().all(|g| g.abs() <= noise);
            ModeDominance {
                lambda_sq: p.lambda_sq(),
                dominant,
                boundary_case,
                margin: gaps[gaps.len() - 1],
            }
        })
        .collect();
    let all_dominant = !modes.is_empty() && modes.iter().all(|m| m.dominant);
    let min_margin = modes.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
    Ok(DominanceReport {
        rows,
        modes,
        all_dominant,
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::solve_profile;
    use approx::assert_relative_eq;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn prefactor_branches() {
        assert_relative_eq!(prefactor(2.0), 2.0 / SQRT2, max_relative = 1e-15);
        assert_relative_eq!(prefactor(1.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(prefactor(SQRT2), 1.0, max_relative = 1e-15);
        let below = prefactor(SQRT2 * (1.0 - 1e-12));
        let above = prefactor(SQRT2 * (1.0 + 1e-12));
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn euclidean_exponent_examples() {
        assert_relative_eq!(euclidean_exponent(3, SQRT2).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            euclidean_exponent(4, 3f64.sqrt()).unwrap(),
            6f64.sqrt() / 4.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(euclidean_exponent(5, 1.0).unwrap(), 1.0 / 6.0, max_relative = 1e-15);
        assert!(matches!(euclidean_exponent(2, 1.0), Err(Error::Capability(_))));
    }

    #[test]
    fn bound_starts_at_one() {
        let w = WarpingFunction::euclidean();
        assert_eq!(growth_bound_general(3, SQRT2, &w, 1.0).unwrap(), 1.0);
        assert_eq!(growth_bound_nonneg(3, SQRT2, &w, 1.0).unwrap(), 1.0);
        assert!(matches!(growth_bound_general(3, SQRT2, &w, 0.5), Err(Error::Domain(_))));
        assert!(matches!(
            growth_bound_general(2, SQRT2, &w, 2.0),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn flat_cone_round_sphere_is_linear() {
        let w = WarpingFunction::euclidean();
        let b = GrowthBound::new(Regime::General, 3, SQRT2, &w).unwrap();
        for r in [2.0, 10.0, 77.7, 1000.0] {
            assert_relative_eq!(b.log_value(r).unwrap(), r.ln(), max_relative = 1e-12);
        }
        assert!(b.hypotheses_hold());
    }

    #[test]
    fn bounded_warping_nonneg_closed_form() {
        let w = WarpingFunction::bounded();
        let b = GrowthBound::new(Regime::NonnegCurvature, 3, 1.0, &w).unwrap();
        let c = 0.5;
        for r in [1.5, 4.0, 250.0] {
            assert_relative_eq!(b.log_value(r).unwrap(), c * ((r - 1.0) + r.ln()), max_relative = 1e-12);
        }
        let e = GrowthBound::new(Regime::NonnegCurvature, 2, 3.0, &WarpingFunction::euclidean()).unwrap();
        assert_relative_eq!(
            e.log_value(40.0).unwrap(),
            prefactor(3.0) * 40f64.ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn verdicts() {
        let flat = WarpingFunction::euclidean().with_r_max(1e25).unwrap();
        let b = GrowthBound::new(Regime::General, 3, SQRT2, &flat).unwrap();
        assert_eq!(divergence_verdict(&b, 1e25).unwrap(), Verdict::Diverges);
        // same growth, probed too close in
        assert_eq!(divergence_verdict(&b, 1e3).unwrap(), Verdict::Inconclusive);

        let bounded = GrowthBound::new(Regime::NonnegCurvature, 3, SQRT2, &WarpingFunction::bounded()).unwrap();
        assert_eq!(divergence_verdict(&bounded, 1e3).unwrap(), Verdict::Diverges);

        let hyper = GrowthBound::new(Regime::NonnegCurvature, 3, SQRT2, &WarpingFunction::hyperbolic()).unwrap();
        assert!(!hyper.hypotheses_hold());
        assert_eq!(divergence_verdict(&hyper, 1e3).unwrap(), Verdict::Inconclusive);
        assert!(divergence_verdict(&hyper, 1e4).is_err());
    }

    #[test]
    fn dominance_on_flat_cone() {
        let w = WarpingFunction::euclidean();
        let b = GrowthBound::new(Regime::General, 3, SQRT2, &w).unwrap();
        let grid = log_grid(1.0, 100.0, 4);
        let profiles: Vec<RadialProfile> = [0.0, 2.0, 6.0]
            .iter()
            .map(|&l| solve_profile(&w, 3, l, &grid).unwrap())
            .collect();
        let report = dominance_check(&b, &profiles, &grid).unwrap();
        assert_eq!(report.modes.len(), 2);
        assert!(!report.modes[0].dominant);
        assert!(report.modes[0].boundary_case);
        assert!(report.modes[1].dominant);
        assert_relative_eq!(report.modes[1].margin, 100f64.ln(), max_relative = 1e-10);
        assert!(!report.all_dominant);
        assert!(report.min_margin.abs() < 1e-10);

        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("R,log_A,log_phi_1,log_phi_2,gap_1,gap_2\n"));

        let too_far = log_grid(1.0, 500.0, 4);
        assert!(matches!(
            dominance_check(&b, &profiles, &too_far),
            Err(Error::Domain(_))
        ));
    }
}
