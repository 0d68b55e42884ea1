//! Adaptive Gauss–Kronrod quadrature (7-point Gauss, 15-point Kronrod).
//!
//! Panels are bisected in order of decreasing error estimate until the summed
//! estimate drops below the absolute tolerance or the panel cap is reached.

use alloc::vec::Vec;

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
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_panels: 4000,
        }
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = libm::fabs(res_k);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (libm::fabs(f1) + libm::fabs(f2));
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * libm::fabs(fc - mean);
    for j in 0..7 {
        res_asc += WGK[j] * (libm::fabs(fv1[j] - mean) + libm::fabs(fv2[j] - mean));
    }
    let scale = libm::fabs(half);
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;

    let mut error = libm::fabs((res_k - res_g) * half);
    if res_asc != 0.0 && error != 0.0 {
        let r = libm::pow(200.0 * error / res_asc, 1.5);
        error = res_asc * if r < 1.0 { r } else { 1.0 };
    }
    let round_off = 50.0 * f64::EPSILON * res_abs;
    if round_off > error {
        error = round_off;
    }
    Panel { a, b, value, error }
}

impl Integrator {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain("integration limits must be finite"));
        }
        if a == b {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                panels: 0,
            });
        }
        let mut panels: Vec<Panel> = Vec::with_capacity(64);
        panels.push(kronrod15(&f, a, b));
        loop {
            let (value, error) = panels
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if !value.is_finite() {
                return Err(Error::Domain("integrand is not finite on the interval"));
            }
            if error <= self.abs_tol {
                return Ok(QuadResult {
                    value,
                    error,
                    panels: panels.len(),
                });
            }
            if panels.len() >= self.max_panels {
                return Err(Error::Quadrature {
                    estimate: value,
                    error,
                });
            }
            let worst = panels
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            if mid <= p.a || mid >= p.b {
                // Panel can no longer be split in floating point.
                return Err(Error::Quadrature {
                    estimate: value,
                    error,
                });
            }
            panels.push(kronrod15(&f, p.a, mid));
            panels.push(kronrod15(&f, mid, p.b));
        }
    }
}

/// Integrates `f` over `[a, b]` to absolute error `1e-10`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<QuadResult> {
    Integrator::default().integrate(f, a, b)
}
