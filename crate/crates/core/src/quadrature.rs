//! Adaptive Gauss-Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-9,
            rel: 1e-7,
            max_depth: 40,
        }
    }
}

fn kronrod(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Integrates a smooth `f` over `[a, b]` by recursive bisection until each
/// piece meets its share of the tolerance.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, err) = kronrod(&mut f, a, b);
    let target = tol.abs.max(tol.rel * whole.abs());
    if err <= target {
        return Ok(whole);
    }
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = kronrod(&mut f, lo, hi);
        let share = target * (hi - lo) / (b - a);
        if err <= share || (hi - lo) <= f64::EPSILON * (b - a).abs() {
            total += value;
            continue;
        }
        if depth >= tol.max_depth {
            return Err(Error::Numeric {
                message: "adaptive quadrature did not converge".into(),
                diagnostics: format!(
                    "interval [{lo}, {hi}] error estimate {err:e} exceeds share {share:e} at depth {depth}"
                ),
            });
        }
        let mid = 0.5 * (lo + hi);
        stack.push((mid, hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    Ok(total)
}
