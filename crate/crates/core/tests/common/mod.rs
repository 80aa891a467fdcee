//! Shared oracles for integration tests: adaptive Gauss-Kronrod quadrature,
//! Kolmogorov-Smirnov statistics and small dataset builders.
#![allow(dead_code)]

use mtpgg::{log_pdf, Dataset, GgParams, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let (f1, f2) = (f(c - h * XGK[j]), f(c + h * XGK[j]));
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive integration on `[a, b]`: the interval with the largest
/// error estimate is bisected until the summed estimate drops below
/// `max(tol, 1e-14 |I|)` or 4000 intervals are in use.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut parts: Vec<(f64, f64, f64, f64)> = {
        let (v, e) = gk15(f, a, b);
        vec![(a, b, v, e)]
    };
    for _ in 0..4000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol.max(1e-14 * total.abs()) {
            break;
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// Integral over the real line via `t = c + s x / (1 - x^2)`.
pub fn integrate_line(f: &impl Fn(f64) -> f64, c: f64, s: f64, tol: f64) -> f64 {
    let g = |x: f64| {
        let d = 1.0 - x * x;
        let v = f(c + s * x / d);
        if v == 0.0 { 0.0 } else { v * s * (1.0 + x * x) / (d * d) }
    };
    integrate(&g, -1.0, 1.0, tol)
}

/// Integral over `(-inf, b]` via `t = b - s x / (1 - x)`, `x` in `[0, 1)`.
pub fn integrate_lower(f: &impl Fn(f64) -> f64, b: f64, s: f64, tol: f64) -> f64 {
    let g = |x: f64| {
        let d = 1.0 - x;
        let v = f(b - s * x / d);
        if v == 0.0 { 0.0 } else { v * s / (d * d) }
    };
    integrate(&g, 0.0, 1.0, tol)
}

/// Density of `ln Y` at `t`.
pub fn log_scale_density(p: &GgParams<f64>, t: f64) -> f64 {
    log_pdf(t.exp(), p).map(|l| (l + t).exp()).unwrap_or(0.0)
}

/// `∫ y^s f(y) dy` by quadrature on the log scale.
pub fn quad_moment(p: &GgParams<f64>, s: f64) -> f64 {
    let f = |t: f64| log_pdf(t.exp(), p).map(|l| (l + t + s * t).exp()).unwrap_or(0.0);
    integrate_line(&f, p.mu(), p.sigma(), 1e-13)
}

/// CDF values at ascending `points` built from one lower-tail integral plus
/// integrals between consecutive points.
pub fn quad_cdf_sorted(p: &GgParams<f64>, points: &[f64]) -> Vec<f64> {
    let f = |t: f64| log_scale_density(p, t);
    let mut out = Vec::with_capacity(points.len());
    let mut t_prev = points[0].ln();
    let mut acc = integrate_lower(&f, t_prev, p.sigma(), 1e-13);
    out.push(acc);
    for &y in &points[1..] {
        let t = y.ln();
        if t > t_prev {
            acc += integrate(&f, t_prev, t, 1e-13);
        }
        out.push(acc);
        t_prev = t;
    }
    out
}

/// One-sample KS distance between sorted draws and their CDF values.
pub fn ks_one_sample(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| ((i as f64 + 1.0) / n - f).max(f - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic KS coefficient `c(alpha) = sqrt(-ln(alpha / 2) / 2)`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

pub fn ks_critical_one(alpha: f64, n: usize) -> f64 {
    ks_coefficient(alpha) / (n as f64).sqrt()
}

pub fn ks_critical_two(alpha: f64, n: usize, m: usize) -> f64 {
    ks_coefficient(alpha) * ((n + m) as f64 / (n * m) as f64).sqrt()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random two-part dataset with designs `[1, x1, x2]` (continuous part) and
/// `[1, x2]` (binary part); roughly a third of the outcomes are zero.
pub fn random_dataset(rng: &mut impl Rng, n: usize) -> Dataset<f64> {
    let mut x = Vec::with_capacity(3 * n);
    let mut z = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let x1: f64 = rng.random_range(-2.0..2.0);
        let x2 = if rng.random::<bool>() { 1.0 } else { 0.0 };
        x.extend_from_slice(&[1.0, x1, x2]);
        z.extend_from_slice(&[1.0, x2]);
        // keep at least one zero and one positive row
        let zero = i == 0 || (i != 1 && rng.random::<f64>() < 0.33);
        y.push(if zero { 0.0 } else { (rng.random::<f64>() * 3.0 - 1.0).exp() });
    }
    Dataset::new(
        y,
        Matrix::from_row_major(n, 3, x).unwrap(),
        Matrix::from_row_major(n, 2, z).unwrap(),
    )
    .unwrap()
}
