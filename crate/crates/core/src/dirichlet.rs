//! Harmonic extension of boundary data on `∂M_R` into the truncated cone
//! `M_R = {r ≤ R}`:
//!
//! ```text
//! u(r, ω) = Σ_m (φ_m(r)/φ_m(R)) Σ_k c_{m,k} f_{m,k}(ω)
//! ```

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_spectrum::{Coefficients, EigenMode, LinkKind, LinkPoint, LinkSpectrum};
use crate::radial::{log_grid, profile_ratio, solve_profile, RadialProfile};
use crate::warping::WarpingFunction;

/// How a [`BoundaryData`] instance was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryDescriptor {
    Constant {
        value: f64,
    },
    Mode {
        m: usize,
        k: usize,
        amplitude: f64,
    },
    Combination {
        terms: Vec<(EigenMode, f64)>,
    },
    /// Band-limited data with coefficients uniform in `[−1, 1]` on bands
    /// `min_band..=m_max`.
    Random {
        seed: u64,
        min_band: usize,
    },
    Sampled,
}

/// Boundary values `h` sampled on the spectrum's quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    samples: Vec<f64>,
    descriptor: BoundaryDescriptor,
    /// Exact expansion for data defined spectrally; projection would add
    /// roundoff to every other mode.
    spectral: Option<Coefficients>,
}

impl BoundaryData {
    pub fn from_samples(spectrum: &LinkSpectrum, samples: Vec<f64>) -> Result<Self> {
        let nodes = spectrum.quadrature_points()?.len();
        if samples.len() != nodes {
            return Err(Error::config(format!(
                "boundary data has {} samples, the quadrature grid has {nodes} nodes",
                samples.len()
            )));
        }
        Ok(Self {
            samples,
            descriptor: BoundaryDescriptor::Sampled,
            spectral: None,
        })
    }

    pub fn from_fn<F: FnMut(&LinkPoint) -> f64>(spectrum: &LinkSpectrum, f: F) -> Result<Self> {
        let samples = spectrum.quadrature_points()?.iter().map(f).collect();
        Self::from_samples(spectrum, samples)
    }

    pub fn constant(spectrum: &LinkSpectrum, value: f64) -> Result<Self> {
        let nodes = spectrum.quadrature_points()?.len();
        let mut c = vec![0.0; spectrum.mode_count()];
        c[0] = value / spectrum.node_value(0, 0)?;
        Ok(Self {
            samples: vec![value; nodes],
            descriptor: BoundaryDescriptor::Constant { value },
            spectral: Some(Coefficients::from_vec(c)),
        })
    }

    pub fn single_mode(spectrum: &LinkSpectrum, mode: EigenMode, amplitude: f64) -> Result<Self> {
        let mut data = Self::combination(spectrum, &[(mode, amplitude)])?;
        data.descriptor = BoundaryDescriptor::Mode {
            m: mode.m,
            k: mode.k,
            amplitude,
        };
        Ok(data)
    }

    pub fn combination(spectrum: &LinkSpectrum, terms: &[(EigenMode, f64)]) -> Result<Self> {
        let mut c = vec![0.0; spectrum.mode_count()];
        for &(mode, a) in terms {
            c[spectrum.mode_index(mode)?] += a;
        }
        let c = Coefficients::from_vec(c);
        Ok(Self {
            samples: spectrum.synthesize_on_grid(&c)?,
            descriptor: BoundaryDescriptor::Combination { terms: terms.to_vec() },
            spectral: Some(c),
        })
    }

    /// Seeded band-limited random data on bands `min_band..=m_max`.
    pub fn random(spectrum: &LinkSpectrum, seed: u64, min_band: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = spectrum
            .modes()
            .map(|mode| {
                let x: f64 = rng.random_range(-1.0..=1.0);
                if mode.m >= min_band {
                    x
                } else {
                    0.0
                }
            })
            .collect();
        let c = Coefficients::from_vec(c);
        Ok(Self {
            samples: spectrum.synthesize_on_grid(&c)?,
            descriptor: BoundaryDescriptor::Random { seed, min_band },
            spectral: Some(c),
        })
    }

    /// Reads the layout written by [`Self::write_csv`]; rows may come in any
    /// order but must cover every quadrature node exactly once.
    pub fn read_csv(spectrum: &LinkSpectrum, path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(spectrum, &text)
    }

    pub fn from_csv_str(spectrum: &LinkSpectrum, text: &str) -> Result<Self> {
        let nodes = spectrum.quadrature_points()?.len();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        let h_col = match cols.as_slice() {
            ["node_index", "h"] => 1,
            ["node_index", "theta", "h"] => 2,
            ["node_index", "theta", "phi_angle", "h"] => 3,
            _ => {
                return Err(Error::config(format!(
                    "boundary data header must be `node_index[,theta[,phi_angle]],h`, got `{}`",
                    cols.join(",")
                )))
            }
        };
        let mut samples = vec![f64::NAN; nodes];
        for record in reader.records() {
            let record = record?;
            let idx: usize = record[0]
                .parse()
                .map_err(|e| Error::validation(format!("bad node index `{}`: {e}", &record[0])))?;
            let h: f64 = record[h_col]
                .parse()
                .map_err(|e| Error::validation(format!("bad value `{}`: {e}", &record[h_col])))?;
            let slot = samples
                .get_mut(idx)
                .ok_or_else(|| Error::config(format!("node index {idx} beyond the {nodes}-node grid")))?;
            if !slot.is_nan() {
                return Err(Error::config(format!("node index {idx} appears twice")));
            }
            *slot = h;
        }
        if let Some(missing) = samples.iter().position(|v| v.is_nan()) {
            return Err(Error::config(format!("boundary data is missing node {missing}")));
        }
        Self::from_samples(spectrum, samples)
    }

    /// Writes the boundary samples as `node_index,theta,h` (circle),
    /// `node_index,theta,phi_angle,h` (S²) or `node_index,h` (custom).
    pub fn write_csv<W: Write>(&self, spectrum: &LinkSpectrum, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let points = spectrum.quadrature_points()?;
        match spectrum.kind() {
            LinkKind::RoundSphere2 => w.write_record(["node_index", "theta", "phi_angle", "h"])?,
            LinkKind::Custom(_) => w.write_record(["node_index", "h"])?,
            _ => w.write_record(["node_index", "theta", "h"])?,
        }
        for (i, (p, h)) in points.iter().zip(&self.samples).enumerate() {
            match p {
                LinkPoint::Sphere { theta, phi } => {
                    w.write_record([i.to_string(), theta.to_string(), phi.to_string(), h.to_string()])?
                }
                LinkPoint::Angle(theta) => w.write_record([i.to_string(), theta.to_string(), h.to_string()])?,
                LinkPoint::Node(_) => w.write_record([i.to_string(), h.to_string()])?,
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Exact link coefficients when the data was defined spectrally.
    pub fn spectral_coefficients(&self) -> Option<&Coefficients> {
        self.spectral.as_ref()
    }

    pub fn descriptor(&self) -> &BoundaryDescriptor {
        &self.descriptor
    }

    /// `α h`, keeping the descriptor.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|h| alpha * h).collect(),
            descriptor: self.descriptor.clone(),
            spectral: self
                .spectral
                .as_ref()
                .map(|c| Coefficients::from_vec(c.as_slice().iter().map(|x| alpha * x).collect())),
        }
    }
}

/// Truncated harmonic series on `M_R`.
#[derive(Debug, Clone)]
pub struct ConeHarmonic<'a> {
    radius: f64,
    spectrum: &'a LinkSpectrum,
    profiles: Vec<RadialProfile>,
    coefficients: Coefficients,
    tail_bound: f64,
}

/// Radial grid used for the band profiles of an extension to radius `big_r`.
fn profile_grid(big_r: f64) -> Vec<f64> {
    let lo = (big_r / 10.0).min(1e-3);
    log_grid(lo, big_r, 32)
}

/// Harmonic extension of `h` from `∂M_R` into `M_R`.
pub fn extend<'a>(
    h: &BoundaryData,
    big_r: f64,
    spectrum: &'a LinkSpectrum,
    w: &WarpingFunction,
    n: usize,
) -> Result<ConeHarmonic<'a>> {
    if spectrum.n() != n {
        return Err(Error::config(format!(
            "spectrum was built for n = {}, extension requested with n = {n}",
            spectrum.n()
        )));
    }
    if !(big_r > 0.0) {
        return Err(Error::domain(format!("outer radius must be positive, got {big_r}")));
    }
    if big_r > w.r_max() {
        return Err(Error::domain(format!(
            "outer radius {big_r} exceeds r_max = {}",
            w.r_max()
        )));
    }
    let grid = profile_grid(big_r);
    let profiles = spectrum
        .bands()
        .iter()
        .map(|b| solve_profile(w, n, b.lambda_sq, &grid))
        .collect::<Result<Vec<_>>>()?;
    ConeHarmonic::from_profiles(h, big_r, spectrum, profiles)
}

impl<'a> ConeHarmonic<'a> {
    /// Assembles an extension from precomputed band profiles (one per band,
    /// each covering `[.., big_r]`).
    pub fn from_profiles(
        h: &BoundaryData,
        big_r: f64,
        spectrum: &'a LinkSpectrum,
        profiles: Vec<RadialProfile>,
    ) -> Result<Self> {
        if profiles.len() != spectrum.bands().len() {
            return Err(Error::config(format!(
                "{} profiles supplied for {} bands",
                profiles.len(),
                spectrum.bands().len()
            )));
        }
        for (p, b) in profiles.iter().zip(spectrum.bands()) {
            if p.lambda_sq() != b.lambda_sq || p.n() != spectrum.n() {
                return Err(Error::config("profile does not match its spectral band"));
            }
            if p.r_max() < big_r {
                return Err(Error::domain(format!("profile ends at {} < R = {big_r}", p.r_max())));
            }
        }
        let coefficients = match &h.spectral {
            Some(c) if c.len() == spectrum.mode_count() => c.clone(),
            _ => spectrum.project(h.samples())?,
        };
        let reconstructed = spectrum.synthesize_on_grid(&coefficients)?;
        let weights = spectrum.quadrature_weights()?;
        let tail_sq: f64 = h
            .samples()
            .iter()
            .zip(&reconstructed)
            .zip(weights)
            .map(|((a, b), w)| w * (a - b) * (a - b))
            .sum();
        Ok(Self {
            radius: big_r,
            spectrum,
            profiles,
            coefficients,
            tail_bound: tail_sq.sqrt(),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spectrum(&self) -> &LinkSpectrum {
        self.spectrum
    }

    pub fn profiles(&self) -> &[RadialProfile] {
        &self.profiles
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// `L²(N)` norm of the part of `h` outside the retained modes.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `φ_m(r)/φ_m(R)` for every band.
    pub fn band_ratios(&self, r: f64) -> Result<Vec<f64>> {
        if r.is_nan() || r < 0.0 || r > self.radius {
            return Err(Error::domain(format!("radius {r} outside [0, R = {}]", self.radius)));
        }
        self.profiles.iter().map(|p| profile_ratio(p, r, self.radius)).collect()
    }

    fn combine(&self, ratios: &[f64], basis: &[f64]) -> f64 {
        let c = self.coefficients.as_slice();
        // band sums in fixed order for bit-stable output
        let mut total = 0.0;
        for (m, ratio) in ratios.iter().enumerate() {
            if *ratio == 0.0 {
                continue;
            }
            let range = self.spectrum.band_range(m);
            let band: f64 = c[range.clone()].iter().zip(&basis[range]).map(|(c, f)| c * f).sum();
            total += ratio * band;
        }
        total
    }

    pub fn evaluate(&self, r: f64, point: &LinkPoint) -> Result<f64> {
        let ratios = self.band_ratios(r)?;
        let mut basis = vec![0.0; self.spectrum.mode_count()];
        self.spectrum.eval_all(point, &mut basis)?;
        Ok(self.combine(&ratios, &basis))
    }

    /// `u` at the cone tip: `c_{0,0} f_{0,0}`, the mean of `h` over the link.
    pub fn tip_value(&self) -> f64 {
        let mut basis = vec![0.0; self.spectrum.mode_count()];
        // constant mode is the same at every point; node 0 always exists here
        self.spectrum
            .eval_all(&LinkPoint::Node(0), &mut basis)
            .expect("spectrum with a quadrature grid");
        self.coefficients.as_slice()[0] * basis[0]
    }

    /// Maximum of `|u(r, ·)|` over the dense angular grid of `density` samples
    /// per dimension; a lower bound of the true supremum.
    pub fn sup_norm(&self, r: f64, density: usize) -> Result<f64> {
        let density = density.max(4 * self.spectrum.m_max() + 1);
        let ratios = self.band_ratios(r)?;
        let mut basis = vec![0.0; self.spectrum.mode_count()];
        let mut sup: f64 = 0.0;
        for p in self.spectrum.dense_points(density)? {
            self.spectrum.eval_all(&p, &mut basis)?;
            sup = sup.max(self.combine(&ratios, &basis).abs());
        }
        Ok(sup)
    }

    /// Writes `r,theta[,phi_angle],u` for every radius in `radii` and every
    /// point of the dense angular grid.
    pub fn write_evaluation_csv<W: Write>(&self, radii: &[f64], density: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let sphere = matches!(self.spectrum.kind(), LinkKind::RoundSphere2);
        match (sphere, self.spectrum.kind()) {
            (true, _) => w.write_record(["r", "theta", "phi_angle", "u"])?,
            (false, LinkKind::Custom(_)) => w.write_record(["r", "node_index", "u"])?,
            _ => w.write_record(["r", "theta", "u"])?,
        }
        let points = self.spectrum.dense_points(density)?;
        let mut basis = vec![0.0; self.spectrum.mode_count()];
        for &r in radii {
            let ratios = self.band_ratios(r)?;
            for p in &points {
                self.spectrum.eval_all(p, &mut basis)?;
                let u = self.combine(&ratios, &basis).to_string();
                match p {
                    LinkPoint::Angle(t) => w.write_record([r.to_string(), t.to_string(), u])?,
                    LinkPoint::Sphere { theta, phi } => {
                        w.write_record([r.to_string(), theta.to_string(), phi.to_string(), u])?
                    }
                    LinkPoint::Node(i) => w.write_record([r.to_string(), i.to_string(), u])?,
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
