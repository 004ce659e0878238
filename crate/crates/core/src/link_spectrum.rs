//! Laplace spectrum of the link `(N, g_ω)` and quadrature projection onto
//! its eigenmodes.
//!
//! Eigenfunctions are real and normalized to unit `L²(N)` norm:
//! * circle: `1/√(2π)`, `cos(mθ)/√π`, `sin(mθ)/√π`;
//! * round `S²`: real spherical harmonics without the Condon–Shortley phase.
//!
//! Within a band `m` the index `k` runs over `0..multiplicity`. On the circle
//! `k = 0` is the cosine and `k = 1` the sine. On `S²`, `k = 0` is the zonal
//! harmonic, `k = 2j − 1` carries `cos(jφ)` and `k = 2j` carries `sin(jφ)`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// A point of the link. `Node(i)` addresses the `i`-th quadrature node and is
/// the only point type supported by sampled custom spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkPoint {
    Angle(f64),
    /// Colatitude `theta ∈ [0, π]` and longitude `phi`.
    Sphere {
        theta: f64,
        phi: f64,
    },
    Node(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EigenMode {
    pub m: usize,
    pub k: usize,
}

impl EigenMode {
    pub const fn new(m: usize, k: usize) -> Self {
        Self { m, k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lambda_sq: f64,
    pub multiplicity: usize,
}

/// Eigenfunction samples for a custom link: `values[node][mode]` in flat mode
/// order, with one quadrature weight per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledModes {
    pub weights: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SampledModes {
    /// Reads a CSV whose first column is `weight` and whose remaining columns
    /// are the modes in flat order; one row per quadrature node.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers = reader.headers()?.clone();
        if headers.get(0) != Some("weight") || headers.len() < 2 {
            return Err(Error::config(
                "eigenfunction sample file must start with a `weight` column followed by mode columns",
            ));
        }
        let mut weights = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::validation(format!("bad number `{f}`: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            weights.push(row[0]);
            values.push(row[1..].to_vec());
        }
        Ok(Self { weights, values })
    }
}

/// User-supplied eigenvalue table.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpectrum {
    pub bands: Vec<Band>,
    pub samples: Option<SampledModes>,
}

impl CustomSpectrum {
    /// Builds a table from `λ_m²` values; multiplicities default to one.
    pub fn from_eigenvalues(lambda_sq: &[f64]) -> Self {
        Self {
            bands: lambda_sq
                .iter()
                .map(|&l| Band {
                    lambda_sq: l,
                    multiplicity: 1,
                })
                .collect(),
            samples: None,
        }
    }

    /// Reads a CSV with header `m,lambda_sq,multiplicity` (the multiplicity
    /// column may be omitted or left blank).
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            m: usize,
            lambda_sq: f64,
            #[serde(default)]
            multiplicity: Option<usize>,
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.get(0) != Some("m") || headers.get(1) != Some("lambda_sq") {
            return Err(Error::config(
                "custom spectrum header must be `m,lambda_sq,multiplicity`",
            ));
        }
        let mut bands = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row?;
            if row.m != i {
                return Err(Error::validation(format!(
                    "custom spectrum rows must be m = 0, 1, 2, ...; row {i} has m = {}",
                    row.m
                )));
            }
            bands.push(Band {
                lambda_sq: row.lambda_sq,
                multiplicity: row.multiplicity.unwrap_or(1),
            });
        }
        Ok(Self { bands, samples: None })
    }

    pub fn with_samples(mut self, samples: SampledModes) -> Self {
        self.samples = Some(samples);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinkKind {
    /// `N = S¹`, cone dimension 2.
    Circle,
    /// Round `S²`, cone dimension 3.
    RoundSphere2,
    /// Round `S^{n−1}`; eigenvalues and multiplicities only.
    RoundSphereGeneral,
    Custom(CustomSpectrum),
}

impl LinkKind {
    pub fn name(&self) -> &'static str {
        match self {
            LinkKind::Circle => "circle",
            LinkKind::RoundSphere2 => "sphere2",
            LinkKind::RoundSphereGeneral => "sphere",
            LinkKind::Custom(_) => "custom",
        }
    }
}

/// Quadrature rule on the link together with the orthonormal modes sampled
/// at its nodes.
#[derive(Debug, Clone)]
struct LinkGrid {
    points: Vec<LinkPoint>,
    weights: Vec<f64>,
    /// `basis[node * mode_count + mode]`
    basis: Vec<f64>,
}

/// Coefficients `c_{m,k}` in flat mode order.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    values: Vec<f64>,
}

impl Coefficients {
    pub fn from_vec(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LinkSpectrum {
    kind: LinkKind,
    n: usize,
    m_max: usize,
    bands: Vec<Band>,
    /// First flat index of each band, plus the total mode count.
    offsets: Vec<usize>,
    grid: Option<LinkGrid>,
}

/// Builds the spectrum of `kind` truncated at band `m_max`.
pub fn build_spectrum(kind: LinkKind, n: usize, m_max: usize) -> Result<LinkSpectrum> {
    LinkSpectrum::build(kind, n, m_max)
}

fn binomial(n: i64, k: i64) -> u128 {
    if n < 0 || k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of degree-`m` spherical harmonics on `S^{n−1}`.
fn sphere_multiplicity(n: usize, m: usize) -> usize {
    let (n, m) = (n as i64, m as i64);
    (binomial(m + n - 1, n - 1) - binomial(m + n - 3, n - 1)) as usize
}

impl LinkSpectrum {
    pub fn build(kind: LinkKind, n: usize, m_max: usize) -> Result<Self> {
        if m_max < 1 {
            return Err(Error::config("m_max must be at least 1"));
        }
        match (&kind, n) {
            (LinkKind::Circle, 2) | (LinkKind::RoundSphere2, 3) => {}
            (LinkKind::RoundSphereGeneral, n) if n >= 3 => {}
            (LinkKind::Custom(_), n) if n >= 2 => {}
            (kind, n) => {
                return Err(Error::config(format!(
                    "link `{}` is inconsistent with cone dimension n = {n}",
                    kind.name()
                )))
            }
        }

        let bands: Vec<Band> = match &kind {
            LinkKind::Circle => (0..=m_max)
                .map(|m| Band {
                    lambda_sq: (m * m) as f64,
                    multiplicity: if m == 0 { 1 } else { 2 },
                })
                .collect(),
            LinkKind::RoundSphere2 => (0..=m_max)
                .map(|m| Band {
                    lambda_sq: (m * (m + 1)) as f64,
                    multiplicity: 2 * m + 1,
                })
                .collect(),
            LinkKind::RoundSphereGeneral => (0..=m_max)
                .map(|m| Band {
                    lambda_sq: (m * (m + n - 2)) as f64,
                    multiplicity: sphere_multiplicity(n, m),
                })
                .collect(),
            LinkKind::Custom(custom) => {
                validate_custom(custom)?;
                if custom.bands.len() < m_max + 1 {
                    return Err(Error::config(format!(
                        "custom spectrum has {} bands, m_max = {m_max} needs {}",
                        custom.bands.len(),
                        m_max + 1
                    )));
                }
                custom.bands[..=m_max].to_vec()
            }
        };

        let mut offsets = Vec::with_capacity(bands.len() + 1);
        let mut acc = 0;
        for b in &bands {
            offsets.push(acc);
            acc += b.multiplicity;
        }
        offsets.push(acc);

        let mut spectrum = Self {
            kind,
            n,
            m_max,
            bands,
            offsets,
            grid: None,
        };
        spectrum.grid = spectrum.build_grid()?;
        Ok(spectrum)
    }

    fn build_grid(&self) -> Result<Option<LinkGrid>> {
        let (points, weights): (Vec<LinkPoint>, Vec<f64>) = match &self.kind {
            LinkKind::Circle => {
                let count = 4 * self.m_max + 1;
                let dtheta = 2.0 * PI / count as f64;
                (
                    (0..count).map(|j| LinkPoint::Angle(j as f64 * dtheta)).collect(),
                    vec![dtheta; count],
                )
            }
            LinkKind::RoundSphere2 => {
                let (xs, wx) = gauss_legendre(2 * self.m_max + 1);
                let lon = 4 * self.m_max + 1;
                let dphi = 2.0 * PI / lon as f64;
                let mut points = Vec::with_capacity(xs.len() * lon);
                let mut weights = Vec::with_capacity(xs.len() * lon);
                // north to south
                for (x, w) in xs.iter().rev().zip(wx.iter().rev()) {
                    let theta = x.clamp(-1.0, 1.0).acos();
                    for j in 0..lon {
                        points.push(LinkPoint::Sphere {
                            theta,
                            phi: j as f64 * dphi,
                        });
                        weights.push(w * dphi);
                    }
                }
                (points, weights)
            }
            LinkKind::RoundSphereGeneral => return Ok(None),
            LinkKind::Custom(custom) => match &custom.samples {
                None => return Ok(None),
                Some(samples) => {
                    let total = self.mode_count();
                    if samples.weights.len() != samples.values.len() {
                        return Err(Error::config("eigenfunction samples: weight/row count mismatch"));
                    }
                    let mut basis = Vec::with_capacity(samples.values.len() * total);
                    for (i, row) in samples.values.iter().enumerate() {
                        if row.len() < total {
                            return Err(Error::config(format!(
                                "eigenfunction samples row {i} has {} modes, spectrum needs {total}",
                                row.len()
                            )));
                        }
                        basis.extend_from_slice(&row[..total]);
                    }
                    let points = (0..samples.values.len()).map(LinkPoint::Node).collect();
                    return Ok(Some(LinkGrid {
                        points,
                        weights: samples.weights.clone(),
                        basis,
                    }));
                }
            },
        };

        let total = self.mode_count();
        let mut basis = Vec::with_capacity(points.len() * total);
        let mut row = vec![0.0; total];
        for p in &points {
            self.eval_all_analytic(p, &mut row)?;
            basis.extend_from_slice(&row);
        }
        Ok(Some(LinkGrid { points, weights, basis }))
    }

    pub fn kind(&self) -> &LinkKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn lambda_sq(&self, m: usize) -> Result<f64> {
        self.bands
            .get(m)
            .map(|b| b.lambda_sq)
            .ok_or_else(|| Error::Index(format!("band {m} beyond m_max = {}", self.m_max)))
    }

    /// Total number of retained modes.
    pub fn mode_count(&self) -> usize {
        self.offsets[self.offsets.len() - 1]
    }

    pub fn band_range(&self, m: usize) -> std::ops::Range<usize> {
        self.offsets[m]..self.offsets[m + 1]
    }

    pub fn mode_index(&self, mode: EigenMode) -> Result<usize> {
        let band = self
            .bands
            .get(mode.m)
            .ok_or_else(|| Error::Index(format!("band {} beyond m_max = {}", mode.m, self.m_max)))?;
        if mode.k >= band.multiplicity {
            return Err(Error::Index(format!(
                "mode index k = {} out of range for band {} (multiplicity {})",
                mode.k, mode.m, band.multiplicity
            )));
        }
        Ok(self.offsets[mode.m] + mode.k)
    }

    pub fn modes(&self) -> impl Iterator<Item = EigenMode> + '_ {
        self.bands
            .iter()
            .enumerate()
            .flat_map(|(m, b)| (0..b.multiplicity).map(move |k| EigenMode::new(m, k)))
    }

    pub fn supports_evaluation(&self) -> bool {
        self.grid.is_some()
    }

    fn grid(&self) -> Result<&LinkGrid> {
        self.grid.as_ref().ok_or_else(|| {
            Error::Capability(format!(
                "link `{}` does not provide eigenfunction evaluation",
                self.kind.name()
            ))
        })
    }

    /// Quadrature nodes of the link.
    pub fn quadrature_points(&self) -> Result<&[LinkPoint]> {
        Ok(&self.grid()?.points)
    }

    pub fn quadrature_weights(&self) -> Result<&[f64]> {
        Ok(&self.grid()?.weights)
    }

    /// Value of mode `j` (flat index) at quadrature node `node`.
    pub fn node_value(&self, node: usize, j: usize) -> Result<f64> {
        let grid = self.grid()?;
        let total = self.mode_count();
        if node >= grid.points.len() || j >= total {
            return Err(Error::Index(format!("node {node} / mode {j} out of range")));
        }
        Ok(grid.basis[node * total + j])
    }

    /// `λ₁ = √(λ₁²)`.
    pub fn first_eigenvalue(&self) -> Result<f64> {
        let l1 = self.lambda_sq(1)?;
        if !(l1 > 0.0) {
            return Err(Error::validation(format!(
                "first nontrivial eigenvalue must be positive, got λ₁² = {l1}"
            )));
        }
        Ok(l1.sqrt())
    }

    /// Value of the orthonormal eigenfunction `mode` at `point`.
    pub fn eval_mode(&self, mode: EigenMode, point: &LinkPoint) -> Result<f64> {
        let j = self.mode_index(mode)?;
        if let LinkPoint::Node(i) = point {
            return self.node_value(*i, j);
        }
        self.grid()?;
        let mut row = vec![0.0; self.mode_count()];
        self.eval_all_analytic(point, &mut row)?;
        Ok(row[j])
    }

    /// Evaluates every retained mode at `point` into `out` (flat order).
    pub fn eval_all(&self, point: &LinkPoint, out: &mut [f64]) -> Result<()> {
        if out.len() != self.mode_count() {
            return Err(Error::config("output buffer length does not match mode count"));
        }
        if let LinkPoint::Node(i) = point {
            let grid = self.grid()?;
            if *i >= grid.points.len() {
                return Err(Error::Index(format!("node {i} out of range")));
            }
            let total = self.mode_count();
            out.copy_from_slice(&grid.basis[i * total..(i + 1) * total]);
            return Ok(());
        }
        self.grid()?;
        self.eval_all_analytic(point, out)
    }

    fn eval_all_analytic(&self, point: &LinkPoint, out: &mut [f64]) -> Result<()> {
        match (&self.kind, point) {
            (LinkKind::Circle, LinkPoint::Angle(theta)) => {
                out[0] = 1.0 / (2.0 * PI).sqrt();
                let norm = 1.0 / PI.sqrt();
                for m in 1..=self.m_max {
                    let (s, c) = (m as f64 * theta).sin_cos();
                    out[2 * m - 1] = norm * c;
                    out[2 * m] = norm * s;
                }
                Ok(())
            }
            (LinkKind::RoundSphere2, LinkPoint::Sphere { theta, phi }) => {
                real_spherical_harmonics(self.m_max, *theta, *phi, out);
                Ok(())
            }
            (kind, point) => Err(Error::Capability(format!(
                "cannot evaluate `{}` modes at {point:?}",
                kind.name()
            ))),
        }
    }

    /// `c_{m,k} = ⟨h, f_{m,k}⟩` by the link quadrature; `samples` are the
    /// values of `h` at [`Self::quadrature_points`].
    pub fn project(&self, samples: &[f64]) -> Result<Coefficients> {
        let grid = self.grid()?;
        if samples.len() != grid.points.len() {
            return Err(Error::config(format!(
                "boundary samples: expected {} values on the quadrature grid, got {}",
                grid.points.len(),
                samples.len()
            )));
        }
        let total = self.mode_count();
        let mut c = vec![0.0; total];
        for (i, (&h, &w)) in samples.iter().zip(&grid.weights).enumerate() {
            let wh = w * h;
            let row = &grid.basis[i * total..(i + 1) * total];
            for (cj, fj) in c.iter_mut().zip(row) {
                *cj += wh * fj;
            }
        }
        Ok(Coefficients { values: c })
    }

    /// `Σ c_{m,k} f_{m,k}` at every quadrature node.
    pub fn synthesize_on_grid(&self, coefficients: &Coefficients) -> Result<Vec<f64>> {
        let grid = self.grid()?;
        let total = self.mode_count();
        if coefficients.len() != total {
            return Err(Error::config("coefficient table does not match the spectrum"));
        }
        Ok((0..grid.points.len())
            .map(|i| {
                grid.basis[i * total..(i + 1) * total]
                    .iter()
                    .zip(&coefficients.values)
                    .map(|(f, c)| f * c)
                    .sum()
            })
            .collect())
    }

    /// `Σ c_{m,k} f_{m,k}` at an arbitrary link point.
    pub fn synthesize(&self, coefficients: &Coefficients, point: &LinkPoint) -> Result<f64> {
        let mut row = vec![0.0; self.mode_count()];
        self.eval_all(point, &mut row)?;
        Ok(row.iter().zip(&coefficients.values).map(|(f, c)| f * c).sum())
    }

    /// Gram matrix `G[i][j] = Σ w f_i f_j` of all retained modes.
    pub fn gram_matrix(&self) -> Result<Vec<Vec<f64>>> {
        let grid = self.grid()?;
        let total = self.mode_count();
        let mut gram = vec![vec![0.0; total]; total];
        for (node, &w) in grid.weights.iter().enumerate() {
            let row = &grid.basis[node * total..(node + 1) * total];
            for i in 0..total {
                let wi = w * row[i];
                for j in i..total {
                    gram[i][j] += wi * row[j];
                }
            }
        }
        for i in 1..total {
            let (upper, lower) = gram.split_at_mut(i);
            for (j, row) in upper.iter().enumerate() {
                lower[0][j] = row[i];
            }
        }
        Ok(gram)
    }

    /// A dense sampling of the link used for sup-norm estimates. Circle:
    /// `density` uniform angles from 0; sphere: `density` colatitudes from
    /// pole to pole times `density` longitudes; custom: the quadrature nodes.
    pub fn dense_points(&self, density: usize) -> Result<Vec<LinkPoint>> {
        let grid = self.grid()?;
        Ok(match self.kind {
            LinkKind::Circle => (0..density)
                .map(|j| LinkPoint::Angle(2.0 * PI * j as f64 / density as f64))
                .collect(),
            LinkKind::RoundSphere2 => {
                let rows = density.max(2);
                let mut pts = Vec::with_capacity(rows * density);
                for i in 0..rows {
                    let theta = PI * i as f64 / (rows - 1) as f64;
                    for j in 0..density {
                        pts.push(LinkPoint::Sphere {
                            theta,
                            phi: 2.0 * PI * j as f64 / density as f64,
                        });
                    }
                }
                pts
            }
            _ => grid.points.clone(),
        })
    }
}

fn validate_custom(custom: &CustomSpectrum) -> Result<()> {
    let bands = &custom.bands;
    if bands.is_empty() {
        return Err(Error::validation("custom spectrum is empty"));
    }
    if bands[0].lambda_sq != 0.0 || bands[0].multiplicity != 1 {
        return Err(Error::validation(
            "custom spectrum must start with λ₀² = 0 of multiplicity 1",
        ));
    }
    if let Some(b) = bands.iter().find(|b| !b.lambda_sq.is_finite() || b.multiplicity == 0) {
        return Err(Error::validation(format!("invalid custom band {b:?}")));
    }
    if bands.windows(2).any(|w| w[1].lambda_sq <= w[0].lambda_sq) {
        return Err(Error::validation("custom eigenvalues must be strictly increasing"));
    }
    Ok(())
}

/// Real orthonormal spherical harmonics of degree `0..=l_max` at
/// `(theta, phi)`, written in flat band order.
fn real_spherical_harmonics(l_max: usize, theta: f64, phi: f64, out: &mut [f64]) {
    let (sin_t, cos_t) = theta.sin_cos();
    // p[l][m] of the fully normalized associated Legendre functions
    // (unit norm on S² once multiplied by √2 cos/sin for m > 0).
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t;
        }
        let (s, c) = (m as f64 * phi).sin_cos();
        let mut write = |l: usize, p: f64| {
            let base = l * l;
            if m == 0 {
                out[base] = p;
            } else {
                out[base + 2 * m - 1] = std::f64::consts::SQRT_2 * p * c;
                out[base + 2 * m] = std::f64::consts::SQRT_2 * p * s;
            }
        };
        write(m, pmm);
        if m == l_max {
            break;
        }
        let mut p_prev = pmm;
        let mut p_cur = ((2 * m + 3) as f64).sqrt() * cos_t * pmm;
        write(m + 1, p_cur);
        for l in (m + 2)..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p_next = a * (cos_t * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = p_next;
            write(l, p_cur);
        }
    }
}
