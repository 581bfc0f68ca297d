//! Small numerical kernels: adaptive Gauss-Kronrod quadrature, monotone
//! root bracketing, unit-ball volumes and order-stable parallel sums.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

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

// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += w * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, err: f64, tol: f64, depth: u32) -> f64 {
    if err <= tol || depth == 0 || (b - a) <= f64::EPSILON * a.abs().max(b.abs()) * 8.0 {
        return whole;
    }
    let m = 0.5 * (a + b);
    let (left, el) = gk15(f, a, m);
    let (right, er) = gk15(f, m, b);
    adapt(f, a, m, left, el, 0.5 * tol, depth - 1) + adapt(f, m, b, right, er, 0.5 * tol, depth - 1)
}

/// Integrates `f` over `[a, b]` to the requested relative tolerance.
///
/// The Kronrod/Gauss difference used as the local error estimate is very
/// pessimistic for smooth integrands, so the achieved error is typically
/// several orders of magnitude below `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, rel_tol);
    }
    let (whole, err) = gk15(&f, a, b);
    let tol = (rel_tol * whole.abs()).max(1e-300);
    adapt(&f, a, b, whole, err, tol, 48)
}

/// Volume ω_d of the unit ball in ℝᵈ.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => {
            let h = d as f64 / 2.0;
            std::f64::consts::PI.powf(h) / gamma(h + 1.0)
        }
    }
}

/// Finds `x` in `[lo, hi]` with `f(x) ≈ target` for nondecreasing `f`.
pub fn invert_monotone<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const SUM_CHUNK: usize = 2048;

/// Parallel sum whose rounding does not depend on the thread count:
/// fixed-size chunks are reduced in parallel and the partial sums are added
/// sequentially in index order.
pub fn stable_sum<T: Sync, F: Fn(&T) -> f64 + Sync>(items: &[T], f: F) -> f64 {
    stable_sum_by(items.len(), |i| f(&items[i]))
}

/// [`stable_sum`] over the index range `0..n`.
pub fn stable_sum_by<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    let chunks = n.div_ceil(SUM_CHUNK);
    let partial: Vec<f64> =
        (0..chunks).into_par_iter().map(|c| (c * SUM_CHUNK..((c + 1) * SUM_CHUNK).min(n)).map(&f).sum::<f64>()).collect();
    partial.iter().sum()
}
