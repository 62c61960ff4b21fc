//! Monte Carlo mutual information lab.
//!
//! For finite input alphabets the output marginal is an exact finite
//! Gaussian mixture: conditioned on an input sequence the output block
//! is CN(0, Sigma(x)), so averaging the mixture over the at most 2^16
//! enumerated sequences gives the marginal density with no density
//! estimation anywhere. Mutual information estimates are therefore
//! unbiased Monte Carlo averages of exact log-density differences.
//!
//! The same machinery evaluates, sample by sample, the duality upper
//! bound on each late rate term, using the heavy-tailed reference
//! density on the current output given its echo one floor earlier.
//!
//! Everything is chunk-deterministic: an estimate depends on (channel,
//! input, sample count, seed) and never on the worker count.

pub mod verify;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::bound::BoundResult;
use crate::channel::Channel;
use crate::gauss::{self, CholeskyFactor};
use crate::par;
use crate::seed;
use crate::stats::{Moments, VecMoments};
use crate::{Error, Result};

/// Hard cap on enumerated input sequences.
pub const ALPHABET_CAP: u64 = 1 << 16;

/// Samples whose reference echo has squared magnitude below this are
/// dropped from duality averages (and counted); the reference density
/// degenerates there.
pub const ECHO_FLOOR: f64 = 1e-300;

// ----- input models ---------------------------------------------------------

/// Per-symbol input law, IID across time, scaled to meet the power
/// constraint with equality.
#[derive(Debug, Clone, PartialEq)]
pub enum InputModel {
    /// Off with probability 1 - p_on, else a fixed real amplitude
    /// sqrt(P / p_on).
    OnOff { p_on: f64 },
    /// Uniform phase-shift keying of the given order at radius sqrt(P).
    Psk { order: u32 },
    /// Circularly symmetric complex Gaussian of variance P.
    Gaussian,
}

impl InputModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InputModel::OnOff { p_on } => {
                if !(p_on > 0.0 && p_on <= 1.0) {
                    return Err(Error::BadInputModel(format!(
                        "on probability must lie in (0, 1], got {p_on}"
                    )));
                }
            }
            InputModel::Psk { order } => {
                if order < 2 {
                    return Err(Error::BadInputModel(format!(
                        "PSK order must be >= 2, got {order}"
                    )));
                }
            }
            InputModel::Gaussian => {}
        }
        Ok(())
    }

    /// The per-symbol atoms and probabilities at power `p`, or None
    /// for the continuous model. Mean square is exactly p.
    pub fn symbol_atoms(&self, p: f64) -> Result<Option<(Vec<Complex64>, Vec<f64>)>> {
        self.validate()?;
        match *self {
            InputModel::OnOff { p_on } => {
                let amp = (p / p_on).sqrt();
                // Zero power collapses the alphabet to the single atom
                // at the origin, making downstream estimates exactly
                // zero rather than zero up to rounding.
                if amp == 0.0 {
                    return Ok(Some((vec![Complex64::default()], vec![1.0])));
                }
                Ok(Some((
                    vec![Complex64::default(), Complex64::new(amp, 0.0)],
                    vec![1.0 - p_on, p_on],
                )))
            }
            InputModel::Psk { order } => {
                let radius = p.sqrt();
                if radius == 0.0 {
                    return Ok(Some((vec![Complex64::default()], vec![1.0])));
                }
                let atoms = (0..order)
                    .map(|j| {
                        Complex64::from_polar(
                            radius,
                            2.0 * std::f64::consts::PI * j as f64 / order as f64,
                        )
                    })
                    .collect();
                Ok(Some((atoms, vec![1.0 / order as f64; order as usize])))
            }
            InputModel::Gaussian => Ok(None),
        }
    }
}

// ----- enumerated mixture -----------------------------------------------------

struct Component {
    x: Vec<Complex64>,
    /// log prior probability of this sequence.
    logq: f64,
    factor: CholeskyFactor,
    /// cum_lognorm[j] = sum_{i<j} log(pi s_i): the log normalizer of
    /// the leading j-block density.
    cum_lognorm: Vec<f64>,
}

/// Exact finite mixture of conditional output laws.
struct Mixture {
    n: usize,
    atoms: Vec<Complex64>,
    /// Cumulative symbol distribution for sampling.
    cdf: Vec<f64>,
    comps: Vec<Component>,
}

impl Mixture {
    /// Enumerates all |atoms|^n sequences (sequence index digits run
    /// over symbols, first time slot most significant) and factors
    /// each conditional covariance once.
    fn build(channel: &Channel, input: &InputModel, n: usize) -> Result<Self> {
        let Some((atoms, probs)) = input.symbol_atoms(channel.power())? else {
            return Err(Error::ContinuousInput { op: "exact mixture" });
        };
        let base = atoms.len() as u128;
        let count = base.checked_pow(n as u32).unwrap_or(u128::MAX);
        if count > ALPHABET_CAP as u128 {
            return Err(Error::AlphabetTooLarge {
                size: count,
                cap: ALPHABET_CAP,
            });
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }

        let mut comps = Vec::with_capacity(count as usize);
        for index in 0..count as usize {
            let mut x = vec![Complex64::default(); n];
            let mut logq = 0.0;
            let mut rem = index;
            for k in (0..n).rev() {
                let digit = rem % atoms.len();
                rem /= atoms.len();
                x[k] = atoms[digit];
                logq += probs[digit].ln();
            }
            let factor = CholeskyFactor::new(&gauss::conditional_cov(channel, &x))?;
            let mut cum_lognorm = Vec::with_capacity(n + 1);
            cum_lognorm.push(0.0);
            let mut s = 0.0;
            for k in 0..n {
                s += std::f64::consts::PI.ln() + factor.cond_var(k).ln();
                cum_lognorm.push(s);
            }
            comps.push(Component {
                x,
                logq,
                factor,
                cum_lognorm,
            });
        }
        Ok(Self {
            n,
            atoms,
            cdf,
            comps,
        })
    }

    /// Draws a sequence by symbol and returns its component index.
    fn draw_index<R: Rng>(&self, rng: &mut R) -> usize {
        let mut index = 0;
        for _ in 0..self.n {
            let u: f64 = rng.gen();
            let digit = self
                .cdf
                .iter()
                .position(|&c| u < c)
                .unwrap_or(self.atoms.len() - 1);
            index = index * self.atoms.len() + digit;
        }
        index
    }

    /// Log densities of every leading block of y under component c:
    /// out[j] = log f(y_1..y_j | x_c) for j = 0..=n. One forward solve
    /// serves all prefixes.
    fn prefix_logf(&self, c: usize, y: &[Complex64], v: &mut [Complex64], out: &mut [f64]) {
        let comp = &self.comps[c];
        comp.factor.forward_solve(y, v);
        let mut quad = 0.0;
        out[0] = 0.0;
        for j in 0..self.n {
            quad += v[j].norm_sqr();
            out[j + 1] = -comp.cum_lognorm[j + 1] - quad;
        }
    }
}

// ----- channel sampling --------------------------------------------------------

/// One simulated block: the transmitted sequence and the received one.
#[derive(Debug, Clone)]
pub struct ChannelSample {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

/// Draws x from the input law, a fresh fading realization, fresh
/// noise, and runs the channel. Draw order is fixed (input, paths,
/// noise), so a seed pins the whole sample.
fn draw_sample<R: Rng>(
    channel: &Channel,
    mixture: Option<&Mixture>,
    n: usize,
    rng: &mut R,
) -> (Option<usize>, Vec<Complex64>, Vec<Complex64>) {
    let (index, x) = match mixture {
        Some(mix) => {
            let c = mix.draw_index(rng);
            (Some(c), mix.comps[c].x.clone())
        }
        None => {
            let p = channel.power();
            let x = (0..n).map(|_| gauss::complex_gaussian(rng, p)).collect();
            (None, x)
        }
    };
    let paths = gauss::draw_tap_paths(channel, n, rng);
    let noise_var = channel.noise_var();
    let mut y = vec![Complex64::default(); n];
    for k in 0..n {
        let mut s = gauss::complex_gaussian(rng, noise_var);
        for p in 0..=k {
            s += paths.gain(p, k) * x[k - p];
        }
        y[k] = s;
    }
    (index, x, y)
}

/// `count` reproducible channel samples under the given input law.
pub fn simulate_channel(
    channel: &Channel,
    input: &InputModel,
    count: usize,
    seed_value: u64,
    workers: usize,
) -> Result<Vec<ChannelSample>> {
    input.validate()?;
    let n = channel.blocklength();
    let mixture = match input {
        InputModel::Gaussian => None,
        _ => Some(Mixture::build(channel, input, n)?),
    };
    let chunks = par::map_chunks(count, workers, |chunk| {
        let mut rng: ChaCha12Rng = rand::SeedableRng::seed_from_u64(seed::derive(
            seed_value,
            "simulate",
            chunk.index as u64,
        ));
        (0..chunk.len)
            .map(|_| {
                let (_, x, y) = draw_sample(channel, mixture.as_ref(), n, &mut rng);
                ChannelSample { x, y }
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

// ----- estimates ------------------------------------------------------------------

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct MIEstimate {
    pub nats: f64,
    pub se: f64,
    pub samples: u64,
}

impl MIEstimate {
    fn from_moments(m: &Moments) -> Self {
        Self {
            nats: m.mean(),
            se: m.se(),
            samples: m.count,
        }
    }
}

/// Mutual information rate by the chain rule, one term per time slot.
#[derive(Debug, Clone)]
pub struct CondMiTerms {
    /// per_k[k-1] estimates I(X ; Y_k | Y_1..Y_(k-1)) in nats.
    pub per_k: Vec<MIEstimate>,
    /// Rate: the same samples averaged as (1/n) log-density ratio of
    /// the whole block. Sum of the terms, telescoped sample by sample.
    pub rate: MIEstimate,
}

/// Duality upper estimates on the late rate terms.
#[derive(Debug, Clone)]
pub struct DualityBound {
    /// First audited time slot, one past the floor.
    pub first_k: usize,
    /// per_k[i] bounds the term at k = first_k + i.
    pub per_k: Vec<MIEstimate>,
    /// Mean across the audited slots, correlation-aware (averaged per
    /// sample, then across samples).
    pub average: MIEstimate,
    /// Samples dropped because an echo underflowed [`ECHO_FLOOR`].
    pub discarded: u64,
}

struct PassAccum {
    rate: Moments,
    terms: Option<VecMoments>,
    duality: Option<VecMoments>,
    duality_avg: Moments,
    discarded: u64,
}

/// One Monte Carlo pass. The three public estimators share it so that
/// a common seed means common samples, which makes their outputs
/// consistent to rounding rather than to Monte Carlo noise.
fn mixture_pass(
    channel: &Channel,
    input: &InputModel,
    bound: Option<&BoundResult>,
    samples: usize,
    seed_value: u64,
    workers: usize,
    want_terms: bool,
) -> Result<PassAccum> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let n = channel.blocklength();
    let mixture = Mixture::build(channel, input, n)?;
    let ell0 = bound.map(|b| b.params.ell0);
    if let Some(l0) = ell0 {
        if n < l0 + 1 {
            return Err(Error::BlocklengthTooSmall { n, min: l0 + 1 });
        }
    }
    let late = ell0.map(|l0| n - l0);

    let chunks = par::map_chunks(samples, workers, |chunk| {
        let mut rng: ChaCha12Rng =
            rand::SeedableRng::seed_from_u64(seed::derive(seed_value, "mi", chunk.index as u64));
        let mut acc = PassAccum {
            rate: Moments::default(),
            terms: want_terms.then(|| VecMoments::new(n)),
            duality: late.map(VecMoments::new),
            duality_avg: Moments::default(),
            discarded: 0,
        };
        let comps = mixture.comps.len();
        let mut v = vec![Complex64::default(); n];
        let mut logf = vec![0.0; comps * (n + 1)];
        let mut logmix = vec![0.0; n + 1];
        let mut terms_buf = vec![0.0; n];
        let mut dual_buf = vec![0.0; late.unwrap_or(0)];
        // The rate only needs the whole-block marginal; per-slot terms
        // need it at every prefix. The logsumexp pass dominates the
        // sample cost, so skip the prefixes nobody reads.
        let prefixes: Vec<usize> = if want_terms {
            (1..=n).collect()
        } else {
            vec![n]
        };

        for _ in 0..chunk.len {
            let (index, _, y) = draw_sample(channel, Some(&mixture), n, &mut rng);
            let index = index.expect("finite mixture sample");
            for c in 0..comps {
                mixture.prefix_logf(c, &y, &mut v, &mut logf[c * (n + 1)..(c + 1) * (n + 1)]);
            }
            // Marginal log density at each needed prefix: logsumexp
            // over components of prior + conditional.
            for &j in &prefixes {
                let mut hi = f64::NEG_INFINITY;
                for c in 0..comps {
                    hi = hi.max(mixture.comps[c].logq + logf[c * (n + 1) + j]);
                }
                let mut s = 0.0;
                for c in 0..comps {
                    s += (mixture.comps[c].logq + logf[c * (n + 1) + j] - hi).exp();
                }
                logmix[j] = hi + s.ln();
            }
            let truth = &logf[index * (n + 1)..(index + 1) * (n + 1)];
            acc.rate.push((truth[n] - logmix[n]) / n as f64);
            if let Some(terms) = &mut acc.terms {
                for k in 1..=n {
                    terms_buf[k - 1] =
                        (truth[k] - truth[k - 1]) - (logmix[k] - logmix[k - 1]);
                }
                terms.push(&terms_buf);
            }
            if let (Some(dual), Some(l0)) = (&mut acc.duality, ell0) {
                let beta_tilde = bound.expect("duality needs bound params").params.beta_tilde;
                let mut ok = true;
                for k in (l0 + 1)..=n {
                    let echo = y[k - 1 - l0].norm_sqr();
                    if echo < ECHO_FLOOR {
                        ok = false;
                        break;
                    }
                    let out = y[k - 1].norm_sqr();
                    let log_ref = log_reference_density(beta_tilde, echo, out);
                    dual_buf[k - 1 - l0] = (truth[k] - truth[k - 1]) - log_ref;
                }
                if ok {
                    dual.push(&dual_buf);
                    let mean = dual_buf.iter().sum::<f64>() / dual_buf.len() as f64;
                    acc.duality_avg.push(mean);
                } else {
                    acc.discarded += 1;
                }
            }
        }
        acc
    });

    // Fixed-order reduction across chunks.
    let mut total: Option<PassAccum> = None;
    for chunk in chunks {
        match &mut total {
            None => total = Some(chunk),
            Some(t) => {
                t.rate.merge(&chunk.rate);
                if let (Some(a), Some(b)) = (&mut t.terms, &chunk.terms) {
                    a.merge(b);
                }
                if let (Some(a), Some(b)) = (&mut t.duality, &chunk.duality) {
                    a.merge(b);
                }
                t.duality_avg.merge(&chunk.duality_avg);
                t.discarded += chunk.discarded;
            }
        }
    }
    Ok(total.expect("at least one chunk"))
}

/// Log of the heavy-tailed reference density at squared output
/// magnitude `out`, scaled to the echo:
///
/// ```text
/// r(y) = sqrt(beta) / (pi^2 |y| (1 + beta |y|^2)),  beta = 1 / (beta_tilde echo)
/// ```
///
/// `beta * out` can overflow when the echo is many orders below the
/// output, so the tail branch evaluates log(1 + z) as log z in log
/// space.
fn log_reference_density(beta_tilde: f64, echo: f64, out: f64) -> f64 {
    let scaled = beta_tilde * echo;
    let z = out / scaled;
    let log1p = if z.is_finite() {
        z.ln_1p()
    } else {
        out.ln() - scaled.ln()
    };
    -0.5 * scaled.ln() - 2.0 * std::f64::consts::PI.ln() - 0.5 * out.ln() - log1p
}

/// Unbiased Monte Carlo estimate of the mutual information rate
/// `(1/n) E[log f(Y|X) - log sum_x Q(x) f(Y|x)]` in nats per channel
/// use. Finite alphabets only; the marginal is the exact mixture.
pub fn exact_mi(
    channel: &Channel,
    input: &InputModel,
    samples: usize,
    seed_value: u64,
    workers: usize,
) -> Result<MIEstimate> {
    let pass = mixture_pass(channel, input, None, samples, seed_value, workers, false)?;
    Ok(MIEstimate::from_moments(&pass.rate))
}

/// Chain rule decomposition: per-slot conditional mutual information
/// terms, plus the rate from the same samples. The terms sum to n
/// times the rate exactly (the decomposition telescopes sample by
/// sample), so disagreement beyond rounding means a bug, not noise.
pub fn conditional_mi_terms(
    channel: &Channel,
    input: &InputModel,
    samples: usize,
    seed_value: u64,
    workers: usize,
) -> Result<CondMiTerms> {
    let pass = mixture_pass(channel, input, None, samples, seed_value, workers, true)?;
    let per_k = pass
        .terms
        .expect("terms requested")
        .slots
        .iter()
        .map(MIEstimate::from_moments)
        .collect();
    Ok(CondMiTerms {
        per_k,
        rate: MIEstimate::from_moments(&pass.rate),
    })
}

/// Monte Carlo estimate of the duality upper bound on each late rate
/// term, k past the floor delay:
///
/// ```text
/// I(X ; Y_k | Y^(k-1)) <= E[ log f(Y_k | X, Y^(k-1)) - log r(Y_k ; Y_(k-l0)) ]
/// ```
///
/// with the reference density `r` heavy-tailed around the echo
/// `beta = 1 / (beta_tilde |y_(k-l0)|^2)`. Valid for any input; this
/// implementation takes the finite-alphabet route. Gaussian inputs go
/// through [`duality_upper_bound_gaussian`].
pub fn duality_upper_bound(
    channel: &Channel,
    input: &InputModel,
    bound: &BoundResult,
    samples: usize,
    seed_value: u64,
    workers: usize,
) -> Result<DualityBound> {
    let pass = mixture_pass(channel, input, Some(bound), samples, seed_value, workers, false)?;
    let ell0 = bound.params.ell0;
    Ok(DualityBound {
        first_k: ell0 + 1,
        per_k: pass
            .duality
            .expect("duality requested")
            .slots
            .iter()
            .map(MIEstimate::from_moments)
            .collect(),
        average: MIEstimate::from_moments(&pass.duality_avg),
        discarded: pass.discarded,
    })
}

/// Duality bound under the continuous Gaussian input: no enumerated
/// mixture exists, so each sample factors its own conditional
/// covariance.
pub fn duality_upper_bound_gaussian(
    channel: &Channel,
    bound: &BoundResult,
    samples: usize,
    seed_value: u64,
    workers: usize,
) -> Result<DualityBound> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let n = channel.blocklength();
    let ell0 = bound.params.ell0;
    if n < ell0 + 1 {
        return Err(Error::BlocklengthTooSmall { n, min: ell0 + 1 });
    }
    let beta_tilde = bound.params.beta_tilde;
    let late = n - ell0;

    let chunks = par::map_chunks(samples, workers, |chunk| {
        let mut rng: ChaCha12Rng =
            rand::SeedableRng::seed_from_u64(seed::derive(seed_value, "mi", chunk.index as u64));
        let mut per_k = VecMoments::new(late);
        let mut avg = Moments::default();
        let mut discarded = 0u64;
        let mut v = vec![Complex64::default(); n];
        let mut buf = vec![0.0; late];
        for _ in 0..chunk.len {
            let (_, x, y) = draw_sample(channel, None, n, &mut rng);
            let factor = CholeskyFactor::new(&gauss::conditional_cov(channel, &x))
                .expect("validated channels have positive definite covariances");
            factor.forward_solve(&y, &mut v);
            let mut ok = true;
            for k in (ell0 + 1)..=n {
                let echo = y[k - 1 - ell0].norm_sqr();
                if echo < ECHO_FLOOR {
                    ok = false;
                    break;
                }
                let cond_var = factor.cond_var(k - 1);
                let logf = -std::f64::consts::PI.ln() - cond_var.ln()
                    - v[k - 1].norm_sqr();
                let out = y[k - 1].norm_sqr();
                let log_ref = log_reference_density(beta_tilde, echo, out);
                buf[k - 1 - ell0] = logf - log_ref;
            }
            if ok {
                per_k.push(&buf);
                avg.push(buf.iter().sum::<f64>() / late as f64);
            } else {
                discarded += 1;
            }
        }
        (per_k, avg, discarded)
    });

    let mut per_k = VecMoments::new(late);
    let mut avg = Moments::default();
    let mut discarded = 0;
    for (p, a, d) in chunks {
        per_k.merge(&p);
        avg.merge(&a);
        discarded += d;
    }
    Ok(DualityBound {
        first_k: ell0 + 1,
        per_k: per_k.slots.iter().map(MIEstimate::from_moments).collect(),
        average: MIEstimate::from_moments(&avg),
        discarded,
    })
}

// ----- sweeps -----------------------------------------------------------------------

/// One SNR point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub snr_db: f64,
    /// Exact-mixture Monte Carlo rate.
    pub mi: MIEstimate,
    /// Mean duality upper estimate across the late slots; None when
    /// the profile has no geometric floor.
    pub duality: Option<MIEstimate>,
    pub duality_discarded: u64,
    /// Finite-blocklength analytic bound; None without a floor.
    pub bound: Option<f64>,
}

/// Sweeps SNR in dB. Row i runs at power sigma^2 10^(snr_i/10) with
/// its own derived seed, so adding or removing rows never changes the
/// others. The duality and bound columns appear only for
/// Bounded-class profiles.
pub fn mi_sweep(
    channel: &Channel,
    input: &InputModel,
    snr_db: &[f64],
    samples: usize,
    seed_value: u64,
    workers: usize,
    bound: Option<&BoundResult>,
) -> Result<Vec<SweepRow>> {
    let n = channel.blocklength();
    let mut rows = Vec::with_capacity(snr_db.len());
    for (i, &db) in snr_db.iter().enumerate() {
        let power = channel.noise_var() * 10f64.powf(db / 10.0);
        let at_power = channel.with_power(power)?;
        let row_seed = seed::derive(seed_value, "sweep", i as u64);
        let (mi, duality, discarded) = match bound {
            Some(b) => {
                let pass =
                    mixture_pass(&at_power, input, Some(b), samples, row_seed, workers, false)?;
                (
                    MIEstimate::from_moments(&pass.rate),
                    Some(MIEstimate::from_moments(&pass.duality_avg)),
                    pass.discarded,
                )
            }
            None => (exact_mi(&at_power, input, samples, row_seed, workers)?, None, 0),
        };
        let bound_value = match bound {
            Some(b) => Some(b.finite_n(n, at_power.snr())?),
            None => None,
        };
        rows.push(SweepRow {
            snr_db: db,
            mi,
            duality,
            duality_discarded: discarded,
            bound: bound_value,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::{self, EpsilonTerm};
    use crate::channel::{ChannelConfig, DecayProfile, TailModel, TapAssignment};

    fn reference_channel(power: f64, n: usize) -> Channel {
        ChannelConfig {
            profile: DecayProfile::new(vec![1.0], TailModel::Geometric { ratio: 0.5 }).unwrap(),
            taps: TapAssignment::Uniform {
                a: Complex64::new(0.5, 0.0),
            },
            noise_var: 1.0,
            power,
            blocklength: n,
        }
        .validate()
        .unwrap()
    }

    fn reference_bound(channel: &Channel) -> BoundResult {
        bound::evaluate(
            channel,
            EpsilonTerm::LogTail,
            &bound::default_delta_grid(),
            &bound::default_eta_grid(),
            500,
        )
        .unwrap()
        .unwrap()
    }

    #[test]
    fn input_models_meet_the_power_constraint_exactly() {
        for (input, p) in [
            (InputModel::OnOff { p_on: 0.5 }, 10.0),
            (InputModel::OnOff { p_on: 0.2 }, 3.0),
            (InputModel::Psk { order: 4 }, 7.0),
        ] {
            let (atoms, probs) = input.symbol_atoms(p).unwrap().unwrap();
            let mean_sq: f64 = atoms
                .iter()
                .zip(&probs)
                .map(|(a, q)| a.norm_sqr() * q)
                .sum();
            assert!(
                (mean_sq - p).abs() < 1e-12 * p,
                "{input:?} at power {p}: mean square {mean_sq}"
            );
            let total: f64 = probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!(InputModel::OnOff { p_on: 0.0 }.validate().is_err());
        assert!(InputModel::OnOff { p_on: 1.5 }.validate().is_err());
        assert!(InputModel::Psk { order: 1 }.validate().is_err());
    }

    #[test]
    fn alphabet_cap_is_enforced() {
        let channel = reference_channel(10.0, 6);
        // 8^6 = 262144 > 2^16.
        let err = exact_mi(&channel, &InputModel::Psk { order: 8 }, 10, 1, 1);
        assert!(matches!(err, Err(Error::AlphabetTooLarge { .. })));
        // 2^16 exactly is allowed: 2 atoms, n = 16.
        let channel = reference_channel(10.0, 16);
        assert!(exact_mi(&channel, &InputModel::OnOff { p_on: 0.5 }, 8, 1, 1).is_ok());
    }

    #[test]
    fn zero_power_means_zero_information_exactly() {
        let channel = reference_channel(0.0, 4);
        let est = exact_mi(&channel, &InputModel::OnOff { p_on: 0.5 }, 500, 3, 1).unwrap();
        assert_eq!(est.nats, 0.0);
        assert_eq!(est.se, 0.0);
    }

    #[test]
    fn estimates_do_not_depend_on_worker_count() {
        let channel = reference_channel(10.0, 5);
        let input = InputModel::OnOff { p_on: 0.5 };
        let one = exact_mi(&channel, &input, 3 * par::CHUNK + 100, 9, 1).unwrap();
        let eight = exact_mi(&channel, &input, 3 * par::CHUNK + 100, 9, 8).unwrap();
        assert_eq!(one.nats.to_bits(), eight.nats.to_bits());
        assert_eq!(one.se.to_bits(), eight.se.to_bits());
    }

    #[test]
    fn chain_rule_terms_telescope_to_the_rate() {
        let channel = reference_channel(10.0, 4);
        let input = InputModel::OnOff { p_on: 0.5 };
        let terms = conditional_mi_terms(&channel, &input, 20_000, 11, 0).unwrap();
        let total: f64 = terms.per_k.iter().map(|t| t.nats).sum();
        let rate = terms.rate.nats * 4.0;
        assert!(
            (total - rate).abs() < 1e-9,
            "per-slot terms {total} vs block rate {rate}"
        );
        // Same seed, same samples: the standalone estimator agrees.
        let solo = exact_mi(&channel, &input, 20_000, 11, 0).unwrap();
        assert_eq!(solo.nats.to_bits(), terms.rate.nats.to_bits());
        // Every conditional term is an information quantity: >= 0 up
        // to Monte Carlo noise.
        for (k, t) in terms.per_k.iter().enumerate() {
            assert!(
                t.nats >= -3.0 * t.se,
                "term {} = {} +- {}",
                k + 1,
                t.nats,
                t.se
            );
        }
    }

    #[test]
    fn more_noise_never_helps() {
        // Data processing sanity on a 3-point noise ladder at fixed
        // power.
        let input = InputModel::OnOff { p_on: 0.5 };
        let mut last: Option<MIEstimate> = None;
        for noise in [0.5, 2.0, 8.0] {
            let channel = ChannelConfig {
                profile: DecayProfile::new(vec![1.0], TailModel::Geometric { ratio: 0.5 })
                    .unwrap(),
                taps: TapAssignment::Uniform {
                    a: Complex64::new(0.5, 0.0),
                },
                noise_var: noise,
                power: 10.0,
                blocklength: 4,
            }
            .validate()
            .unwrap();
            let est = exact_mi(&channel, &input, 40_000, 17, 0).unwrap();
            if let Some(prev) = last {
                assert!(
                    est.nats <= prev.nats + 3.0 * (est.se + prev.se),
                    "noise {noise}: {} vs previous {}",
                    est.nats,
                    prev.nats
                );
            }
            last = Some(est);
        }
    }

    #[test]
    fn duality_dominates_every_conditional_term() {
        let channel = reference_channel(100.0, 5);
        let input = InputModel::OnOff { p_on: 0.5 };
        let b = reference_bound(&channel);
        let dual = duality_upper_bound(&channel, &input, &b, 30_000, 23, 0).unwrap();
        let terms = conditional_mi_terms(&channel, &input, 30_000, 23, 0).unwrap();
        assert_eq!(dual.first_k, 2);
        for (i, d) in dual.per_k.iter().enumerate() {
            let k = dual.first_k + i;
            let t = &terms.per_k[k - 1];
            assert!(
                d.nats >= t.nats - 3.0 * (d.se + t.se),
                "k = {k}: duality {} +- {} vs term {} +- {}",
                d.nats,
                d.se,
                t.nats,
                t.se
            );
        }
        assert_eq!(dual.discarded, 0);
    }

    #[test]
    fn gaussian_input_duality_runs_and_stays_positive() {
        let channel = reference_channel(10.0, 4);
        let b = reference_bound(&channel);
        let dual = duality_upper_bound_gaussian(&channel, &b, 20_000, 29, 0).unwrap();
        // Each term bounds a conditional mutual information, which is
        // nonnegative.
        assert!(dual.average.nats >= -3.0 * dual.average.se);
        // And exact_mi has no continuous-input route.
        assert!(matches!(
            exact_mi(&channel, &InputModel::Gaussian, 10, 1, 1),
            Err(Error::ContinuousInput { .. })
        ));
    }

    #[test]
    fn sweep_rows_use_independent_seeds_and_carry_the_bound() {
        let channel = reference_channel(1.0, 4);
        let input = InputModel::OnOff { p_on: 0.5 };
        let b = reference_bound(&channel);
        let rows = mi_sweep(
            &channel,
            &input,
            &[0.0, 20.0],
            10_000,
            5,
            0,
            Some(&b),
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            let bound_value = row.bound.expect("geometric profile has a bound");
            assert!(row.mi.nats <= bound_value, "MI above the analytic bound");
            assert!(row.duality.is_some());
        }
        // Prefix stability: the first row of a longer sweep is the
        // first row of a shorter one.
        let longer = mi_sweep(
            &channel,
            &input,
            &[0.0, 20.0, 40.0],
            10_000,
            5,
            0,
            Some(&b),
        )
        .unwrap();
        assert_eq!(rows[0].mi.nats.to_bits(), longer[0].mi.nats.to_bits());
    }

    #[test]
    fn dead_profile_carries_no_information() {
        // Every path variance zero: the output is pure noise whatever
        // is sent. The estimate collapses to the rounding residue of
        // the mixture prior.
        let channel = ChannelConfig {
            profile: DecayProfile::new(vec![0.0], TailModel::Zero).unwrap(),
            taps: TapAssignment::Uniform {
                a: Complex64::new(0.5, 0.0),
            },
            noise_var: 1.0,
            power: 10.0,
            blocklength: 3,
        }
        .validate()
        .unwrap();
        let est = exact_mi(&channel, &InputModel::OnOff { p_on: 0.5 }, 2000, 7, 1).unwrap();
        assert!(est.nats.abs() < 1e-12, "got {}", est.nats);
    }

    #[test]
    fn single_slot_term_is_the_rate() {
        let channel = reference_channel(10.0, 1);
        let terms =
            conditional_mi_terms(&channel, &InputModel::OnOff { p_on: 0.5 }, 5000, 13, 1)
                .unwrap();
        assert_eq!(terms.per_k.len(), 1);
        assert_eq!(terms.per_k[0].nats.to_bits(), terms.rate.nats.to_bits());
    }

    #[test]
    fn zero_power_duality_terms_stay_nonnegative() {
        let channel = reference_channel(0.0, 4);
        let b = reference_bound(&channel);
        let dual =
            duality_upper_bound(&channel, &InputModel::OnOff { p_on: 0.5 }, &b, 10_000, 19, 1)
                .unwrap();
        for (i, d) in dual.per_k.iter().enumerate() {
            assert!(
                d.nats >= -3.0 * d.se,
                "slot {}: duality {} +- {}",
                dual.first_k + i,
                d.nats,
                d.se
            );
        }
        let terms =
            conditional_mi_terms(&channel, &InputModel::OnOff { p_on: 0.5 }, 1000, 19, 1)
                .unwrap();
        for t in &terms.per_k {
            assert_eq!(t.nats, 0.0, "silent input carries nothing");
        }
    }

    #[test]
    fn duality_average_stays_under_the_analytic_bound_at_high_snr() {
        // 40 dB: the regime the offset constant was built for.
        let channel = reference_channel(10_000.0, 6);
        let input = InputModel::OnOff { p_on: 0.5 };
        let b = reference_bound(&channel);
        let dual = duality_upper_bound(&channel, &input, &b, 20_000, 31, 0).unwrap();
        let cap = b.finite_n(6, channel.snr()).unwrap();
        assert!(
            dual.average.nats <= cap + 3.0 * dual.average.se,
            "duality average {} +- {} vs bound {}",
            dual.average.nats,
            dual.average.se,
            cap
        );
    }

    #[test]
    fn empty_sweep_is_an_empty_table() {
        let channel = reference_channel(1.0, 4);
        let rows = mi_sweep(
            &channel,
            &InputModel::OnOff { p_on: 0.5 },
            &[],
            1000,
            5,
            1,
            None,
        )
        .unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn simulate_is_reproducible_and_power_faithful() {
        let channel = reference_channel(10.0, 4);
        let input = InputModel::OnOff { p_on: 0.5 };
        let a = simulate_channel(&channel, &input, 2000, 77, 1).unwrap();
        let b = simulate_channel(&channel, &input, 2000, 77, 8).unwrap();
        assert_eq!(a.len(), 2000);
        for (s, t) in a.iter().zip(&b) {
            assert_eq!(s.x, t.x);
            assert_eq!(s.y, t.y);
        }
        let mut mean_sq = Moments::default();
        let mut out_sq = Moments::default();
        for s in &a {
            for x in &s.x {
                mean_sq.push(x.norm_sqr());
            }
            out_sq.push(s.y[3].norm_sqr());
        }
        assert!(
            (mean_sq.mean() - 10.0).abs() <= 3.0 * mean_sq.se(),
            "mean input power {} +- {}",
            mean_sq.mean(),
            mean_sq.se()
        );
        // Received energy at the last slot: sigma^2 + P sum of the
        // first n path variances.
        let want = 1.0 + 10.0 * (1.0 + 0.5 + 0.25 + 0.125);
        assert!(
            (out_sq.mean() - want).abs() <= 3.0 * out_sq.se(),
            "received energy {} +- {} vs {want}",
            out_sq.mean(),
            out_sq.se()
        );
    }
}
