//! Gaussian machinery shared by the estimators and the bound.
//!
//! Each path gain is a stationary first-order autoregression driven by
//! circularly symmetric complex Gaussian innovations, so everything
//! here is closed form: autocovariances are geometric in the lag,
//! entropy rates follow from the one-step prediction error, and the
//! channel output conditioned on an input sequence is a zero-mean
//! complex Gaussian vector whose covariance this module assembles and
//! factorizes.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::channel::{Channel, DecayProfile, TapAssignment, TapProcess};
use crate::{seed, Error, Result};

/// log(pi * e), the differential entropy of CN(0, 1).
pub const LOG_PI_E: f64 = 2.144_729_885_849_400_2;

// ----- per-tap closed forms ---------------------------------------------

/// Autocovariance r(lag) = E[H_(k+lag) conj(H_k)] = alpha * a^lag for
/// lag >= 0, conjugated for negative lags.
pub fn autocovariance(tap: &TapProcess, lag: i64) -> Complex64 {
    let fwd = tap.alpha * tap.a.powu(lag.unsigned_abs() as u32);
    if lag >= 0 {
        fwd
    } else {
        fwd.conj()
    }
}

/// Entropy rate of one tap process,
/// `h = log(pi e alpha (1 - |a|^2))` nats per sample.
///
/// The rate is the log of the one-step prediction error times pi e;
/// for an AR(1) process that error is alpha (1 - |a|^2). A frozen tap
/// (|a| = 1) is perfectly predictable and the rate is minus infinity.
/// A zero-variance tap has no density at all, which is an error rather
/// than a limit.
pub fn entropy_rate(tap: &TapProcess) -> Result<f64> {
    if tap.alpha == 0.0 {
        return Err(Error::ZeroVarianceTap);
    }
    Ok((std::f64::consts::PI
        * std::f64::consts::E
        * tap.alpha
        * (1.0 - tap.a.norm_sqr()))
    .ln())
}

/// Regularity constant `kappa = inf over supported delays of
/// (entropy rate - log alpha)`.
///
/// For this autoregressive family the difference per delay is
/// `log(pi e (1 - |a_l|^2))`, so the infimum depends on the profile
/// only through which delays carry power:
/// `kappa = log(pi e (1 - sup_{l in support} |a_l|^2))`.
/// Always at most log(pi e), with equality for memoryless fading.
/// Plus infinity when nothing carries power (the infimum over an
/// empty set), minus infinity when some powered tap is frozen.
pub fn regularity_constant(profile: &DecayProfile, taps: &TapAssignment) -> f64 {
    match taps.sup_magnitude_on(profile) {
        None => f64::INFINITY,
        Some(sup) => {
            let kappa =
                (std::f64::consts::PI * std::f64::consts::E * (1.0 - sup * sup)).ln();
            debug_assert!(kappa <= LOG_PI_E + 1e-12);
            kappa
        }
    }
}

// ----- path sampling -----------------------------------------------------

/// One realization of all path gains over a block: `gain(p, k)` is the
/// gain of the delay-p path at time k (0-based), for p, k < n.
#[derive(Debug, Clone)]
pub struct TapPaths {
    n: usize,
    gains: Vec<Complex64>,
}

impl TapPaths {
    pub fn gain(&self, delay: usize, k: usize) -> Complex64 {
        self.gains[delay * self.n + k]
    }
}

/// Draws CN(0, var).
pub fn complex_gaussian<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws one stationary realization of every path process. Paths with
/// different delays are independent (uncorrelated scattering); within
/// a path, time k+1 is `a * H_k` plus a fresh innovation of variance
/// `alpha (1 - |a|^2)`.
pub fn draw_tap_paths<R: Rng>(channel: &Channel, n: usize, rng: &mut R) -> TapPaths {
    let mut gains = vec![Complex64::default(); n * n];
    for delay in 0..n {
        let tap = channel.tap(delay);
        let innov_var = tap.alpha * (1.0 - tap.a.norm_sqr());
        let row = delay * n;
        let mut h = complex_gaussian(rng, tap.alpha);
        gains[row] = h;
        for k in 1..n {
            h = tap.a * h + complex_gaussian(rng, innov_var);
            gains[row + k] = h;
        }
    }
    TapPaths { n, gains }
}

/// `count` independent realizations, reproducible from `seed`. Each
/// realization draws from its own derived stream, so realization i is
/// the same no matter how many others were requested.
pub fn sample_tap_paths(channel: &Channel, n: usize, count: usize, seed_value: u64) -> Vec<TapPaths> {
    (0..count)
        .map(|i| {
            let mut rng: ChaCha12Rng =
                rand::SeedableRng::seed_from_u64(seed::derive(seed_value, "taps", i as u64));
            draw_tap_paths(channel, n, &mut rng)
        })
        .collect()
}

// ----- conditional covariance --------------------------------------------

/// Covariance of the output block conditioned on the input sequence.
/// Hermitian positive definite; the diagonal is never below the noise
/// variance.
#[derive(Debug, Clone)]
pub struct CondCovariance {
    order: usize,
    data: Vec<Complex64>,
    pivot_floor: f64,
}

impl CondCovariance {
    /// Wraps an explicit Hermitian matrix (row-major, order x order).
    /// `pivot_floor` is the smallest conditional variance the
    /// factorization will accept.
    pub fn from_entries(order: usize, data: Vec<Complex64>, pivot_floor: f64) -> Self {
        assert_eq!(data.len(), order * order, "matrix shape");
        #[cfg(debug_assertions)]
        for i in 0..order {
            for j in 0..i {
                let d = (data[i * order + j] - data[j * order + i].conj()).norm();
                debug_assert!(d <= 1e-9, "not Hermitian at ({i},{j}): {d}");
            }
        }
        Self {
            order,
            data,
            pivot_floor,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.order + j]
    }
}

/// Assembles the conditional output covariance for input `x`
/// (1-based time in the model, `x[0]` is the first symbol):
///
/// ```text
/// Sigma_(k,j) = sum_{p=0}^{min(k,j)-1} r_p(k-j) x_(k-p) conj(x_(j-p))
///             + sigma^2 1{k = j}
/// ```
///
/// The sum runs over path delays short enough that both times see the
/// path over a transmitted symbol. Causality truncates the rest.
pub fn conditional_cov(channel: &Channel, x: &[Complex64]) -> CondCovariance {
    let n = x.len();
    let noise = channel.noise_var();
    let mut data = vec![Complex64::default(); n * n];
    // Cache tap processes: alpha_at on deep tails is not free.
    let taps: Vec<TapProcess> = (0..n).map(|p| channel.tap(p)).collect();
    for k in 1..=n {
        for j in 1..=k {
            let mut s = Complex64::default();
            for (p, tap) in taps.iter().enumerate().take(j.min(k)) {
                if tap.alpha == 0.0 {
                    continue;
                }
                s += autocovariance(tap, (k - j) as i64) * x[k - 1 - p] * x[j - 1 - p].conj();
            }
            if k == j {
                s += Complex64::new(noise, 0.0);
            }
            data[(k - 1) * n + (j - 1)] = s;
            data[(j - 1) * n + (k - 1)] = s.conj();
        }
    }
    let cov = CondCovariance {
        order: n,
        data,
        pivot_floor: noise * 1e-12,
    };
    debug_assert!(
        schur_conditional_entropies(&cov).is_ok(),
        "conditional covariance must be positive definite"
    );
    cov
}

// ----- entropy chain ------------------------------------------------------

/// Cholesky factorization read as a chain of conditional laws:
/// `cond_vars[k]` is Var(Y_(k+1) | Y_1..Y_k), `entropies[k]` the
/// matching conditional differential entropy, and `joint` their sum,
/// which equals `log((pi e)^n det Sigma)`.
#[derive(Debug, Clone)]
pub struct EntropyChain {
    pub cond_vars: Vec<f64>,
    pub entropies: Vec<f64>,
    pub joint: f64,
}

/// Lower-triangular Cholesky factor of a [`CondCovariance`]; row-major
/// dense storage, upper part zero.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    order: usize,
    l: Vec<Complex64>,
}

impl CholeskyFactor {
    /// Factors `cov = L L^H`. Pivots at or below the floor mean the
    /// matrix lost positive definiteness to cancellation, which the
    /// model forbids: the conditional variance of any output never
    /// drops below the additive noise.
    pub fn new(cov: &CondCovariance) -> Result<Self> {
        let n = cov.order;
        let mut l = cov.data.clone();
        for i in 0..n {
            for j in 0..=i {
                let mut s = l[i * n + j];
                for t in 0..j {
                    s -= l[i * n + t] * l[j * n + t].conj();
                }
                if i == j {
                    let pivot = s.re;
                    if pivot <= cov.pivot_floor || !pivot.is_finite() {
                        return Err(Error::NotPositiveDefinite {
                            index: i,
                            value: pivot,
                            floor: cov.pivot_floor,
                        });
                    }
                    l[i * n + j] = Complex64::new(pivot.sqrt(), 0.0);
                } else {
                    l[i * n + j] = s / l[j * n + j].re;
                }
            }
            for j in (i + 1)..n {
                l[i * n + j] = Complex64::default();
            }
        }
        Ok(Self { order: n, l })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.l[i * self.order + j]
    }

    /// Conditional variance of coordinate k given the previous ones.
    pub fn cond_var(&self, k: usize) -> f64 {
        let d = self.l[k * self.order + k].re;
        d * d
    }

    /// Solves L v = y in place of the return value. The prefix
    /// property makes one solve serve every leading block: the first
    /// k entries of v depend only on the first k entries of y.
    pub fn forward_solve(&self, y: &[Complex64], v: &mut [Complex64]) {
        let n = self.order;
        for i in 0..n {
            let mut s = y[i];
            for (lt, vt) in self.l[i * n..i * n + i].iter().zip(&v[..i]) {
                s -= lt * vt;
            }
            v[i] = s / self.l[i * n + i].re;
        }
    }
}

/// Conditional entropies of the output chain from one factorization.
pub fn schur_conditional_entropies(cov: &CondCovariance) -> Result<EntropyChain> {
    let factor = CholeskyFactor::new(cov)?;
    let cond_vars: Vec<f64> = (0..cov.order).map(|k| factor.cond_var(k)).collect();
    let entropies: Vec<f64> = cond_vars.iter().map(|s| LOG_PI_E + s.ln()).collect();
    let joint = entropies.iter().sum();
    Ok(EntropyChain {
        cond_vars,
        entropies,
        joint,
    })
}
