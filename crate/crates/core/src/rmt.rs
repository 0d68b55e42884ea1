//! Asymptotic quantities for the regularized LRT.
//!
//! With `ψ(x) = λx + (1 − λ)` and `g(x) = ψ(x) − log ψ(x) − 1`, the statistic
//! `rLRT(λ) = Σ g(l_i)` over the eigenvalues of the centered sample covariance
//! satisfies, under `Σ = I` and `p/(n−1) → γ ∈ (0,1)`,
//!
//! ```text
//! rLRT(λ) − p ∫ g dF^{γ̃′}  →  N(μ(g), v(g))
//! ```
//!
//! where `F^{γ̃′}` is the Marčenko–Pastur law at the finite-sample ratio
//! `γ̃′ = p/(n−1)`. Under a spiked covariance with distant spikes the same
//! limit holds with a shifted centering term; [`spiked_centering`] computes it.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::normal;
use crate::quadrature::Integrator;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("aspect ratio gamma must lie in (0, 1)"))
    }
}

/// Sample size, dimension and the substituted aspect ratio `p/(n−1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionSetup {
    pub n: usize,
    pub p: usize,
    /// `n − 1`, the divisor of the centered sample covariance.
    pub n_tilde: usize,
    /// `p / (n − 1)`.
    pub gamma_tilde: f64,
}

impl DimensionSetup {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObservations { n, required: 2 });
        }
        if p < 1 {
            return Err(Error::Domain("dimension p must be at least 1"));
        }
        let n_tilde = n - 1;
        Ok(Self {
            n,
            p,
            n_tilde,
            gamma_tilde: p as f64 / n_tilde as f64,
        })
    }

    /// Fails unless `γ̃′ ∈ (0,1)`, the range where the LRT calibrations apply.
    pub fn require_calibrated(&self) -> Result<()> {
        if self.gamma_tilde < 1.0 {
            Ok(())
        } else {
            Err(Error::Regime {
                gamma_tilde: self.gamma_tilde,
            })
        }
    }
}

/// Shrinkage intensity `λ ∈ (0, 1]` of `λS + (1 − λ)I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageParams {
    lambda: f64,
}

impl ShrinkageParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 && lambda <= 1.0 {
            Ok(Self { lambda })
        } else {
            Err(Error::Domain("shrinkage intensity must lie in (0, 1]"))
        }
    }

    /// `λ = 1`, i.e. the unregularized (corrected) LRT.
    pub fn unregularized() -> Self {
        Self { lambda: 1.0 }
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[inline]
    pub fn is_unregularized(&self) -> bool {
        self.lambda == 1.0
    }

    /// `ψ(x) = λx + (1 − λ)`.
    #[inline]
    pub fn psi(&self, x: f64) -> f64 {
        self.lambda * x + (1.0 - self.lambda)
    }

    /// `g(x) = ψ(x) − log ψ(x) − 1`; zero at `x = 1`.
    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        let t = self.psi(x);
        t - libm::log(t) - 1.0
    }
}

/// Marčenko–Pastur law with ratio `γ ∈ (0,1)` and identity population covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpLaw {
    pub gamma: f64,
    /// Lower support edge `(1 − √γ)²`.
    pub a: f64,
    /// Upper support edge `(1 + √γ)²`.
    pub b: f64,
}

impl MpLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let s = libm::sqrt(gamma);
        Ok(Self {
            gamma,
            a: (1.0 - s) * (1.0 - s),
            b: (1.0 + s) * (1.0 + s),
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let r = (self.b - x) * (x - self.a);
        if r <= 0.0 {
            return 0.0;
        }
        libm::sqrt(r) / (2.0 * PI * self.gamma * x)
    }

    /// `∫ f dF`, evaluated after the change of variables
    /// `x = a + (b − a) sin²t` which removes the square-root edges.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let width = self.b - self.a;
        let scale = width * width / (PI * self.gamma);
        let integrand = |t: f64| {
            let (s, c) = (libm::sin(t), libm::cos(t));
            let x = self.a + width * s * s;
            f(x) * scale * s * s * c * c / x
        };
        Ok(Integrator::default()
            .integrate(integrand, 0.0, 0.5 * PI)?
            .value)
    }
}

/// Support edges `(a, b)` of the Marčenko–Pastur law.
pub fn mp_support(gamma: f64) -> Result<(f64, f64)> {
    let law = MpLaw::new(gamma)?;
    Ok((law.a, law.b))
}

pub fn mp_density(x: f64, gamma: f64) -> Result<f64> {
    Ok(MpLaw::new(gamma)?.density(x))
}

/// The two real roots of `(1 − λ)m² + (1 − 2λ + λγ)m − λ = 0`.
///
/// `M` is the negative root and sits strictly inside
/// `(−1/(1 − √γ), −1/(1 + √γ))`; `N` is the positive root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MnRoots {
    pub m_root: f64,
    pub n_root: f64,
}

pub fn mn_roots(params: ShrinkageParams, gamma: f64) -> Result<MnRoots> {
    check_gamma(gamma)?;
    let lambda = params.lambda();
    if lambda >= 1.0 {
        return Err(Error::Domain("M and N roots require lambda < 1"));
    }
    let lead = 1.0 - lambda;
    let lin = 1.0 - 2.0 * lambda + lambda * gamma;
    let disc = libm::sqrt(lin * lin + 4.0 * lambda * lead);
    // Take the root without cancellation first, recover the other from the
    // product of roots `−λ/(1 − λ)`.
    let (m_root, n_root) = if lin >= 0.0 {
        let m = (-lin - disc) / (2.0 * lead);
        (m, -lambda / (lead * m))
    } else {
        let n = (-lin + disc) / (2.0 * lead);
        (-lambda / (lead * n), n)
    };
    let s = libm::sqrt(gamma);
    if !(m_root > -1.0 / (1.0 - s) && m_root < -1.0 / (1.0 + s) && n_root > 0.0) {
        return Err(Error::Internal("M root outside (-1/(1-sqrt g), -1/(1+sqrt g))"));
    }
    Ok(MnRoots { m_root, n_root })
}

/// `μ(g)`, the asymptotic mean of `rLRT(λ) − p ∫ g dF`.
///
/// For `λ = 1` this is `−log(1 − γ)/2`.
pub fn null_mean(params: ShrinkageParams, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if params.is_unregularized() {
        return Ok(-libm::log1p(-gamma) / 2.0);
    }
    null_mean_by_quadrature(params, gamma)
}

/// `μ(g)` through the θ-integral for any `λ ∈ (0, 1]`, without the `λ = 1` shortcut.
pub fn null_mean_by_quadrature(params: ShrinkageParams, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let lambda = params.lambda();
    let s = libm::sqrt(gamma);
    let lg = 1.0 + lambda * gamma;
    let disc = lg * lg - 4.0 * lambda * lambda * gamma;
    let theta = Integrator::default().integrate(
        |t| libm::log(lg - 2.0 * lambda * s * libm::cos(t)),
        0.0,
        2.0 * PI,
    )?;
    Ok(-0.5 * libm::log(libm::sqrt(disc)) + theta.value / (4.0 * PI))
}

/// `v(g)`, the asymptotic variance of the regularized statistic.
///
/// For `λ = 1` this is `−2γ − 2 log(1 − γ)`.
pub fn null_variance(params: ShrinkageParams, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let lambda = params.lambda();
    if params.is_unregularized() {
        return Ok(-2.0 * gamma - 2.0 * libm::log1p(-gamma));
    }
    let MnRoots { m_root: m, n_root: n } = mn_roots(params, gamma)?;
    let ratio = (m - n) / (m * (1.0 + n));
    if ratio <= 0.0 {
        return Err(Error::Internal("variance log argument is not positive"));
    }
    let v = 2.0
        * (-lambda / m - lambda * (1.0 + gamma - lambda * gamma) + lambda * gamma / (1.0 + n)
            - libm::log(ratio));
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Internal("asymptotic variance is not positive"))
    }
}

/// `∫ g dF^{γ̃′}` at the setup's ratio `γ̃′ = p/(n−1)`.
pub fn centering_integral(params: ShrinkageParams, setup: &DimensionSetup) -> Result<f64> {
    setup.require_calibrated()?;
    centering_integral_at(params, setup.gamma_tilde)
}

/// `∫ g dF^{γ}` for an explicit ratio. Uses `1 + ((1 − γ)/γ) log(1 − γ)` at `λ = 1`.
pub fn centering_integral_at(params: ShrinkageParams, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if params.is_unregularized() {
        return Ok(1.0 + (1.0 - gamma) / gamma * libm::log1p(-gamma));
    }
    centering_by_quadrature(params, gamma)
}

/// `∫ g dF^{γ}` through the substitution `x = 1 + γ − 2√γ cos θ`:
///
/// ```text
/// −(2/π) ∫_0^π log(1 + λγ − 2λ√γ cos θ) / (1 + γ − 2√γ cos θ) · sin²θ dθ
/// ```
pub fn centering_by_quadrature(params: ShrinkageParams, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let lambda = params.lambda();
    let s = libm::sqrt(gamma);
    let r = Integrator::default().integrate(
        |t| {
            let c = libm::cos(t);
            let sn = libm::sin(t);
            libm::log(1.0 + lambda * gamma - 2.0 * lambda * s * c) / (1.0 + gamma - 2.0 * s * c)
                * sn
                * sn
        },
        0.0,
        PI,
    )?;
    // g ≥ 0, so only quadrature noise can push the value below zero.
    Ok((-2.0 / PI * r.value).max(0.0))
}

/// `μ(g)`, `v(g)` and the centering integral at one `(λ, n, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullAsymptotics {
    pub mu: f64,
    pub v: f64,
    pub centering: f64,
}

impl NullAsymptotics {
    pub fn compute(params: ShrinkageParams, setup: &DimensionSetup) -> Result<Self> {
        setup.require_calibrated()?;
        let gamma = setup.gamma_tilde;
        Ok(Self {
            mu: null_mean(params, gamma)?,
            v: null_variance(params, gamma)?,
            centering: centering_integral_at(params, gamma)?,
        })
    }

    /// `(raw − p·centering − μ)/√v`.
    pub fn standardize(&self, raw: f64, p: usize) -> f64 {
        (raw - p as f64 * self.centering - self.mu) / libm::sqrt(self.v)
    }
}

/// Location `φ(a) = a + γa/(a − 1)` of the sample eigenvalue produced by a
/// distant population spike `a`.
pub fn spike_phi(a: f64, gamma: f64) -> Result<f64> {
    if !a.is_finite() || a == 1.0 {
        return Err(Error::Domain("spike value must be finite and different from 1"));
    }
    Ok(a + gamma * a / (a - 1.0))
}

/// One population spike with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    pub value: f64,
    pub multiplicity: usize,
}

/// Population eigenvalues `a_1 (×n_1), …, a_k (×n_k), 1, …, 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedModel {
    spikes: Vec<Spike>,
    k_total: usize,
}

impl SpikedModel {
    pub fn new(spikes: Vec<Spike>) -> Result<Self> {
        for s in &spikes {
            if !(s.value.is_finite() && s.value > 0.0) || s.value == 1.0 {
                return Err(Error::Domain("spikes must be positive, finite and not equal to 1"));
            }
            if s.multiplicity == 0 {
                return Err(Error::Domain("spike multiplicity must be at least 1"));
            }
        }
        let k_total = spikes.iter().map(|s| s.multiplicity).sum();
        Ok(Self { spikes, k_total })
    }

    /// No spikes: the population covariance is the identity.
    pub fn null() -> Self {
        Self {
            spikes: Vec::new(),
            k_total: 0,
        }
    }

    pub fn single(value: f64) -> Result<Self> {
        Self::new(alloc::vec![Spike {
            value,
            multiplicity: 1,
        }])
    }

    pub fn spikes(&self) -> &[Spike] {
        &self.spikes
    }

    /// `K = Σ n_i`.
    pub fn k_total(&self) -> usize {
        self.k_total
    }

    pub fn is_distant(spike: f64, gamma: f64) -> bool {
        libm::fabs(spike - 1.0) > libm::sqrt(gamma)
    }

    /// First close spike (`|a − 1| ≤ √γ`), if any.
    pub fn first_close(&self, gamma: f64) -> Option<f64> {
        self.spikes
            .iter()
            .map(|s| s.value)
            .find(|&a| !Self::is_distant(a, gamma))
    }
}

/// How spiked-model computations treat spikes inside the bulk range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpikePolicy {
    /// Refuse close spikes (the centering formula is only justified for distant ones).
    #[default]
    RequireDistant,
    /// Evaluate the distant-spike formula anyway. No accuracy is claimed.
    AllowClose,
}

/// Spike constant `C(λ, γ)` such that, for distant spikes,
/// `p ∫ g dF^{γ, H_p} = (p − K) ∫ g dF^{γ} + K·C(λ, γ) + O(1/n)`.
///
/// Returns an error for an empty model. The `λ = 1` case uses the closed
/// limit (`M → −1/(1−γ)`, `N → ∞`).
pub fn spike_constant(params: ShrinkageParams, gamma: f64, model: &SpikedModel) -> Result<f64> {
    check_gamma(gamma)?;
    let k = model.k_total();
    if k == 0 {
        return Err(Error::Domain("spike constant needs at least one spike"));
    }
    let lambda = params.lambda();
    let kf = k as f64;

    let (m, n) = if params.is_unregularized() {
        (-1.0 / (1.0 - gamma), f64::INFINITY)
    } else {
        let r = mn_roots(params, gamma)?;
        (r.m_root, r.n_root)
    };

    let mut linear = 0.0;
    let mut log_psi_phi = 0.0;
    let mut log_ratio = 0.0;
    let mut resolvent = 0.0;
    let mut contour = 0.0;
    for s in model.spikes() {
        let a = s.value;
        let w = s.multiplicity as f64;
        let phi = spike_phi(a, gamma)?;
        let one_am = 1.0 + a * m;
        linear += w * a;
        log_psi_phi += w * libm::log(params.psi(phi));
        log_ratio += w * libm::log((1.0 - a) / one_am);
        resolvent += w * (1.0 / one_am - 1.0 / (1.0 - a));

        let bulk = a * (m + 1.0) / one_am - a * gamma * m * m / (one_am * (m + 1.0)) - 1.0
            + gamma * m * m / ((m + 1.0) * (m + 1.0));
        let term = if params.is_unregularized() {
            // λ/(1−λ)·1/(M−N) → −1/(1−γ) and λ/(1−λ)·1/(N+1) → 1/(1−γ).
            let edge = a * gamma / (1.0 - a) + gamma * (2.0 * m + 1.0) / (m + 1.0);
            -(bulk + edge / (m + 1.0)) / (1.0 - gamma)
        } else {
            let edge =
                a * gamma / (1.0 - a) + gamma * (2.0 * m * n + m + n) / ((m + 1.0) * (n + 1.0));
            lambda / (1.0 - lambda)
                * (bulk / (m - n) - edge / ((m + 1.0) * (n + 1.0)))
        };
        contour += w * term;
    }

    let c = lambda * linear / kf - lambda - log_psi_phi / kf
        - (libm::log(-m) / gamma + log_ratio / kf - resolvent / kf)
        + contour / kf;
    if c.is_finite() {
        Ok(c)
    } else {
        Err(Error::Domain("spike constant is undefined for this spike configuration"))
    }
}

/// Single-spike form of `C(λ, γ)` for a spike `1 + β`, written the way the
/// compound-symmetry specialization is usually displayed. Agrees with
/// [`spike_constant`] for one spike of multiplicity one; kept as a cross-check.
pub fn spike_constant_single(params: ShrinkageParams, gamma: f64, beta: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let lambda = params.lambda();
    if params.is_unregularized() {
        return Err(Error::Domain("single-spike form requires lambda < 1"));
    }
    let a = 1.0 + beta;
    let MnRoots { m_root: m, n_root: n } = mn_roots(params, gamma)?;
    let phi = spike_phi(a, gamma)?;
    let one_am = 1.0 + a * m;
    let c = lambda * beta - libm::log(params.psi(phi))
        + (1.0 / lambda + libm::log(-1.0 / m)) / gamma
        + 1.0 / one_am
        - libm::log(-beta / one_am)
        + lambda / ((1.0 - lambda) * (m - n))
            * (a * (m + 1.0) / one_am - gamma * a * m * m / (one_am * (m + 1.0)) - 1.0
                + gamma * m * m / ((m + 1.0) * (m + 1.0)));
    if c.is_finite() {
        Ok(c)
    } else {
        Err(Error::Domain("spike constant is undefined for this spike configuration"))
    }
}

fn check_spikes(model: &SpikedModel, gamma: f64, policy: SpikePolicy) -> Result<()> {
    if policy == SpikePolicy::RequireDistant {
        if let Some(spike) = model.first_close(gamma) {
            return Err(Error::CloseSpike { spike, gamma });
        }
    }
    Ok(())
}

/// `p ∫ g dF^{γ̃′, H_p} ≈ (p − K)·∫ g dF^{γ̃′} + K·C(λ, γ̃′)`; the `O(1/n)`
/// remainder is dropped.
pub fn spiked_centering(
    params: ShrinkageParams,
    setup: &DimensionSetup,
    model: &SpikedModel,
    policy: SpikePolicy,
) -> Result<f64> {
    setup.require_calibrated()?;
    let gamma = setup.gamma_tilde;
    let k = model.k_total();
    if k > setup.p {
        return Err(Error::Domain("more spikes than dimensions"));
    }
    check_spikes(model, gamma, policy)?;
    let bulk = centering_integral_at(params, gamma)?;
    if k == 0 {
        return Ok(setup.p as f64 * bulk);
    }
    let c = spike_constant(params, gamma, model)?;
    Ok((setup.p - k) as f64 * bulk + k as f64 * c)
}

/// Asymptotic power of the one-sided level-`η` regularized LRT against
/// `Σ = I + (β/p)J` (one spike `1 + β`):
///
/// ```text
/// 1 − Φ(z_{1−η} − Δ/√v(g)),   Δ = C(λ, γ̃′) − ∫ g dF^{γ̃′}
/// ```
pub fn analytic_power_cs(
    params: ShrinkageParams,
    setup: &DimensionSetup,
    beta: f64,
    eta: f64,
    policy: SpikePolicy,
) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain("level eta must lie in (0, 1)"));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain("compound-symmetry offset beta must be positive"));
    }
    setup.require_calibrated()?;
    let gamma = setup.gamma_tilde;
    let model = SpikedModel::single(1.0 + beta)?;
    check_spikes(&model, gamma, policy)?;
    let shift = spike_constant(params, gamma, &model)? - centering_integral_at(params, gamma)?;
    let v = null_variance(params, gamma)?;
    let power = normal::sf(normal::quantile(1.0 - eta) - shift / libm::sqrt(v));
    Ok(power.clamp(0.0, 1.0))
}
