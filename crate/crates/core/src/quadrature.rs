//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (7/15) and
//! Gauss–Legendre node generation.

use crate::error::{Error, Result};

// Kronrod abscissae and weights as published, beyond f64 precision
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_intervals: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Error estimate is at the roundoff floor; splitting cannot improve it.
    settled: bool,
}

impl Segment {
    fn new(a: f64, b: f64, (value, error, res_abs): (f64, f64, f64)) -> Self {
        Self {
            a,
            b,
            value,
            error,
            settled: error <= 50.0 * f64::EPSILON * res_abs * (1.0 + 1e-9),
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Single 15-point Kronrod panel on `[a, b]`; returns (value, error
/// estimate, integral of `|f|`).
pub fn gauss_kronrod_15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    (res_kronrod * half, rescale_error(err, res_abs, res_asc), res_abs)
}

/// Globally adaptive integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol * |I|)`. Reversed bounds give
/// the negated integral.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut segments = vec![Segment::new(lo, hi, gauss_kronrod_15(&mut f, lo, hi))];
    let mut evaluations = 15;

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return Err(Error::numerical(lo, "non-finite integrand"));
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: sign * total,
                error: total_err,
                evaluations,
            });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::numerical(
                lo,
                format!(
                    "adaptive quadrature on [{lo}, {hi}] did not converge: error {total_err:e} after {} panels",
                    segments.len()
                ),
            ));
        }

        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.settled)
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            // every panel is at its roundoff floor
            return Ok(QuadResult {
                value: sign * total,
                error: total_err,
                evaluations,
            });
        };
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            segments.push(Segment { settled: true, ..seg });
            continue;
        }
        segments.push(Segment::new(seg.a, mid, gauss_kronrod_15(&mut f, seg.a, mid)));
        segments.push(Segment::new(mid, seg.b, gauss_kronrod_15(&mut f, mid, seg.b)));
        evaluations += 30;
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let n = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    if count % 2 == 1 {
        nodes[count / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(degree: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if degree == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=degree {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = degree as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let opts = QuadOptions::default();
        let fwd = integrate(|s| 1.0 / s, 1.0, 10.0, &opts).unwrap().value;
        let back = integrate(|s| 1.0 / s, 10.0, 1.0, &opts).unwrap().value;
        assert!((fwd - 10f64.ln()).abs() < 1e-13);
        assert_eq!(fwd, -back);
    }

    #[test]
    fn peaked_integrand_converges() {
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, &QuadOptions::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!(((r.value - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn nan_integrand_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, &QuadOptions::default()).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_up_to_degree_2n_minus_1() {
        for count in 1..20 {
            let (x, w) = gauss_legendre(count);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * count) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "count {count} degree {deg}: {q} vs {exact}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }
}
