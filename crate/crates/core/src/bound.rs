//! The analytic capacity bound for profiles that decay no faster than
//! geometrically.
//!
//! For such profiles there is a delay `l0` past which consecutive
//! variances keep a fixed ratio `rho` alive. That floor yields a
//! constant `beta` with `beta * alpha_l <= alpha_(l+l0)` at every
//! delay, which lets the channel output at time k be compared against
//! its own echo `l0` steps earlier. The comparison caps every late
//! conditional mutual information term by an SNR-independent constant
//! K, and the whole rate by
//!
//! ```text
//! (2 l0 / n) log(1 + sup_alpha n SNR) + (1 - 2 l0 / n) K
//! ```
//!
//! which tends to K as the blocklength grows. Everything in this
//! module is deterministic arithmetic on the profile; the Monte Carlo
//! side lives in [`crate::mi`].

use crate::channel::{Channel, DecayClass, DecayProfile, TailModel};
use crate::gauss::LOG_PI_E;
use crate::{Error, Result};

// ----- geometric floor ----------------------------------------------------

/// Smallest delay from which the profile never decays faster than a
/// fixed ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFloor {
    /// First delay of the floor, always >= 1 so that the windowed
    /// normalizer below stays strictly under one.
    pub ell0: usize,
    /// Worst ratio alpha_(l+1)/alpha_l over delays at or past `ell0`,
    /// capped just under one.
    pub rho: f64,
}

/// Finds the floor, or None when the profile is not Bounded-class.
///
/// Only a geometric tail admits a positive liminf of consecutive
/// ratios. Within the head, any zero entry kills the ratio at the
/// delay before it (0/x = 0) and at itself (x/0 is infinite, 0/0 = 0),
/// so the floor starts after the last head zero, and never before
/// delay one.
pub fn detect_geometric_floor(profile: &DecayProfile) -> Option<GeometricFloor> {
    if profile.classify() != DecayClass::Bounded {
        return None;
    }
    let TailModel::Geometric { ratio } = profile.tail() else {
        unreachable!("bounded profiles have geometric tails");
    };
    let head = profile.head();
    let m = profile.last_head_index();
    let last_zero = head.iter().rposition(|&a| a == 0.0);
    let ell0 = match last_zero {
        Some(z) => z + 1, // anchor is positive, so z < m and ell0 <= m
        None => 1,
    };
    // Infimum of the ratios from ell0 on: head-to-head ratios first,
    // then the tail contributes exactly `ratio` forever.
    let mut inf = ratio;
    for ell in ell0..m {
        inf = inf.min(head[ell + 1] / head[ell]);
    }
    Some(GeometricFloor {
        ell0,
        rho: inf.min(1.0 - 1e-9),
    })
}

/// Normalizer for the echo comparison:
///
/// ```text
/// beta = min( rho^(l0-1) alpha_l0 / max_{0<=l<=l0} alpha_l,
///             alpha_l0,
///             rho^l0 )
/// ```
///
/// Strictly inside (0, 1): every factor is positive, and the last is
/// at most rho < 1 because l0 >= 1.
pub fn compute_beta_tilde(profile: &DecayProfile, floor: &GeometricFloor) -> f64 {
    let ell0 = floor.ell0;
    let alpha_l0 = profile.alpha_at(ell0);
    let head_max = (0..=ell0)
        .map(|ell| profile.alpha_at(ell))
        .fold(0.0, f64::max);
    let windowed = floor.rho.powi(ell0 as i32 - 1) * alpha_l0 / head_max;
    windowed.min(alpha_l0).min(floor.rho.powi(ell0 as i32))
}

/// Asserts `0 < beta < 1` and `beta * alpha_l <= alpha_(l+l0)` for
/// every delay: numerically out to `horizon`, analytically past the
/// head where both sides live on the geometric tail and the ratio is
/// exactly rho^l0 per construction.
pub fn check_floor_inequality(
    profile: &DecayProfile,
    floor: &GeometricFloor,
    beta: f64,
    horizon: usize,
) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::BetaOutOfRange { beta });
    }
    let m = profile.last_head_index();
    // Slack of a few ulps: the equality case beta = rho^l0 is common
    // and both sides route through powf. The absolute term covers
    // deep tails that have gone subnormal, where powf keeps only a
    // few bits and relative slack means nothing.
    for ell in 0..=horizon.max(m + 1) {
        let lhs = beta * profile.alpha_at(ell);
        let rhs = profile.alpha_at(ell + floor.ell0);
        if lhs > rhs * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::FloorViolated { ell });
        }
    }
    if let TailModel::Geometric { ratio } = profile.tail() {
        // All deeper delays: alpha_(l+l0)/alpha_l = ratio^l0 >= beta.
        if beta > ratio.powi(floor.ell0 as i32) * (1.0 + 1e-9) {
            return Err(Error::FloorViolated { ell: horizon + 1 });
        }
    }
    Ok(())
}

// ----- epsilon term ---------------------------------------------------------

/// The small-magnitude log penalty `epsilon(delta, eta)` used by the
/// offset constant.
///
/// It quantifies how much of `E[log(1/|A|)]` can hide below a
/// threshold delta for a unit-second-moment complex random variable A
/// with a density:
///
/// ```text
/// E[ log(1/|A|) 1{|A| <= delta} ] <= epsilon(delta, eta)
///                                  + (1/eta) int_{f>1} f log f
/// ```
///
/// Split the disk |a| <= delta on whether the density exceeds
/// |a|^(-eta). Below the threshold the integral is exact in polar
/// coordinates and gives the closed form used here; above it,
/// log(1/|a|) <= (1/eta) log f(a) and the density there exceeds
/// delta^(-eta) >= 1, which yields the second term.
#[derive(Debug, Clone)]
pub enum EpsilonTerm {
    /// Closed form `2 pi delta^(2-eta) (log(1/delta) + 1/(2-eta)) / (2-eta)`.
    /// Positive, increasing in delta, vanishing as delta drops to zero.
    LogTail,
    /// Explicit (delta, eta, epsilon) rows. Lookups must hit a row
    /// exactly (1e-12 tolerance); a miss is an error, never a silent
    /// fallback to the formula.
    Table(Vec<(f64, f64, f64)>),
    /// No term available. Bound evaluation refuses to run; the proof
    /// chain verifier skips the one inequality that needs it and says
    /// so in its report.
    Disabled,
}

impl EpsilonTerm {
    pub fn eval(&self, delta: f64, eta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::BadBoundParam {
                name: "delta",
                value: delta,
                want: "0 < delta <= 1",
            });
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::BadBoundParam {
                name: "eta",
                value: eta,
                want: "0 < eta < 1",
            });
        }
        match self {
            EpsilonTerm::LogTail => {
                let q = 2.0 - eta;
                Ok(2.0 * std::f64::consts::PI * delta.powf(q) * ((1.0 / delta).ln() + 1.0 / q)
                    / q)
            }
            EpsilonTerm::Table(rows) => rows
                .iter()
                .find(|(d, e, _)| (d - delta).abs() <= 1e-12 && (e - eta).abs() <= 1e-12)
                .map(|&(_, _, eps)| eps)
                .ok_or(Error::EpsilonTableMiss { delta, eta }),
            EpsilonTerm::Disabled => Err(Error::EpsilonUnavailable),
        }
    }

    /// Short label recorded in every bound output.
    pub fn describe(&self) -> String {
        match self {
            EpsilonTerm::LogTail => "log-tail formula".to_string(),
            EpsilonTerm::Table(rows) => format!("table({} rows)", rows.len()),
            EpsilonTerm::Disabled => "disabled".to_string(),
        }
    }
}

// ----- offset constant ------------------------------------------------------

/// Everything the analytic bound was evaluated with.
#[derive(Debug, Clone)]
pub struct BoundParams {
    pub ell0: usize,
    pub rho: f64,
    pub beta_tilde: f64,
    pub delta: f64,
    pub eta: f64,
    pub epsilon: EpsilonTerm,
}

/// Offset constant at one (delta, eta) point:
///
/// ```text
/// K = -(1 + 2/eta) kappa + log(2 pi^2 / (beta delta^2))
///   + 2 epsilon(delta, eta) + (2/eta) (2/e + log(pi e))
/// ```
pub fn compute_k(
    kappa: f64,
    beta_tilde: f64,
    delta: f64,
    eta: f64,
    epsilon: &EpsilonTerm,
) -> Result<f64> {
    let eps = epsilon.eval(delta, eta)?;
    let two_over_eta = 2.0 / eta;
    Ok(
        -(1.0 + two_over_eta) * kappa
            + (2.0 * std::f64::consts::PI * std::f64::consts::PI
                / (beta_tilde * delta * delta))
                .ln()
            + 2.0 * eps
            + two_over_eta * (2.0 / std::f64::consts::E + LOG_PI_E),
    )
}

/// Minimizes K over the (delta, eta) grid. Deterministic: the grid is
/// scanned in the given order and ties go to the smallest delta, then
/// the smallest eta. With a flat epsilon the -log(delta^2) term
/// dominates and the largest grid delta wins.
pub fn optimize_k(
    kappa: f64,
    beta_tilde: f64,
    deltas: &[f64],
    etas: &[f64],
    epsilon: &EpsilonTerm,
) -> Result<(f64, f64, f64)> {
    if deltas.is_empty() {
        return Err(Error::EmptyGrid { name: "delta" });
    }
    if etas.is_empty() {
        return Err(Error::EmptyGrid { name: "eta" });
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for &delta in deltas {
        for &eta in etas {
            let k = compute_k(kappa, beta_tilde, delta, eta, epsilon)?;
            let better = match best {
                None => true,
                Some((bk, bd, be)) => {
                    k < bk || (k == bk && (delta < bd || (delta == bd && eta < be)))
                }
            };
            if better {
                best = Some((k, delta, eta));
            }
        }
    }
    Ok(best.expect("nonempty grid"))
}

/// Default delta grid: 0.05 to 1.00 in steps of 0.05.
pub fn default_delta_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.05).collect()
}

/// Default eta grid: 0.05 to 0.95 in steps of 0.05.
pub fn default_eta_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// Evaluated bound for one channel.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub params: BoundParams,
    pub kappa: f64,
    /// epsilon(delta, eta) at the chosen point.
    pub epsilon_value: f64,
    /// The SNR-independent offset constant K, in nats.
    pub k_const: f64,
    pub sup_alpha: f64,
}

impl BoundResult {
    /// Rate bound at blocklength n and the given linear SNR:
    /// `(2 l0 / n) log(1 + sup_alpha n SNR) + (1 - 2 l0 / n) K`.
    /// Needs room for both boundary windows, n >= 2 l0 + 1.
    pub fn finite_n(&self, n: usize, snr: f64) -> Result<f64> {
        let min = 2 * self.params.ell0 + 1;
        if n < min {
            return Err(Error::BlocklengthTooSmall { n, min });
        }
        let l = (1.0 + self.sup_alpha * n as f64 * snr).ln();
        let frac = 2.0 * self.params.ell0 as f64 / n as f64;
        Ok(frac * l + (1.0 - frac) * self.k_const)
    }
}

/// Full pipeline: detect the floor, build beta, prove the floor
/// inequality out to `horizon`, optimize K over the grids. Returns
/// None when the profile is not Bounded-class, so no floor exists.
pub fn evaluate(
    channel: &Channel,
    epsilon: EpsilonTerm,
    deltas: &[f64],
    etas: &[f64],
    horizon: usize,
) -> Result<Option<BoundResult>> {
    let Some(floor) = detect_geometric_floor(channel.profile()) else {
        return Ok(None);
    };
    let beta_tilde = compute_beta_tilde(channel.profile(), &floor);
    check_floor_inequality(channel.profile(), &floor, beta_tilde, horizon)?;
    let (k_const, delta, eta) = optimize_k(channel.kappa(), beta_tilde, deltas, etas, &epsilon)?;
    let epsilon_value = epsilon.eval(delta, eta)?;
    Ok(Some(BoundResult {
        params: BoundParams {
            ell0: floor.ell0,
            rho: floor.rho,
            beta_tilde,
            delta,
            eta,
            epsilon,
        },
        kappa: channel.kappa(),
        epsilon_value,
        k_const,
        sup_alpha: channel.sup_alpha(),
    }))
}

/// Bound on each of the first l0 rate terms, where no echo exists yet:
/// `log(1 + sup_alpha n SNR)` nats.
pub fn first_terms_bound(channel: &Channel, n: usize) -> f64 {
    (1.0 + channel.sup_alpha() * n as f64 * channel.snr()).ln()
}

// ----- telescoping -----------------------------------------------------------

/// The two halves of the late-term sum after reindexing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelescopeSplit {
    /// sum over the last l0 times k of a_k - b_(k-n+2l0).
    pub boundary: f64,
    /// sum over interior times of a_k - b_(k+l0).
    pub bulk: f64,
}

/// Rearranges `sum_{k=l0+1..n} (a_k - b_k)` into boundary + bulk.
/// Sequences are 1-based in the model; slices are 0-based, so `a[k-1]`
/// is a_k. Exact rearrangement: each b index in l0+1..n is consumed
/// once, as is each a index.
pub fn telescoping_split(a: &[f64], b: &[f64], ell0: usize, n: usize) -> Result<TelescopeSplit> {
    if n < 2 * ell0 {
        return Err(Error::BlocklengthTooSmall { n, min: 2 * ell0 });
    }
    assert!(a.len() >= n && b.len() >= n, "sequences must cover 1..=n");
    let mut boundary = 0.0;
    for k in (n - ell0 + 1)..=n {
        boundary += a[k - 1] - b[k + 2 * ell0 - n - 1];
    }
    let mut bulk = 0.0;
    for k in (ell0 + 1)..=(n - ell0) {
        bulk += a[k - 1] - b[k + ell0 - 1];
    }
    Ok(TelescopeSplit { boundary, bulk })
}

/// The log-moment sequences the telescoping argument runs on, for a
/// deterministic input power sequence `w` (w[l-1] = |x_l|^2):
///
/// ```text
/// a_k = log(sigma^2 + sum_{l=1..k}    alpha_(k-l)    w_l)
/// b_k = log(sigma^2 + sum_{l=1..k-l0} alpha_(k-l0-l) w_l)
/// ```
///
/// so that b_(k+l0) = a_k identically and the bulk vanishes.
pub fn profile_log_moments(
    profile: &DecayProfile,
    noise_var: f64,
    w: &[f64],
    ell0: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = w.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 1..=n {
        let mut sa = noise_var;
        for l in 1..=k {
            sa += profile.alpha_at(k - l) * w[l - 1];
        }
        a.push(sa.ln());
        let mut sb = noise_var;
        for l in 1..=k.saturating_sub(ell0) {
            sb += profile.alpha_at(k - ell0 - l) * w[l - 1];
        }
        b.push(sb.ln());
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelConfig, TapAssignment};
    use num_complex::Complex64;

    fn geometric(head: &[f64], ratio: f64) -> DecayProfile {
        DecayProfile::new(head.to_vec(), TailModel::Geometric { ratio }).unwrap()
    }

    fn channel_with(head: &[f64], ratio: f64, a: f64) -> Channel {
        ChannelConfig {
            profile: geometric(head, ratio),
            taps: TapAssignment::Uniform {
                a: Complex64::new(a, 0.0),
            },
            noise_var: 1.0,
            power: 10.0,
            blocklength: 6,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn floor_detection_examples() {
        let f = detect_geometric_floor(&geometric(&[1.0], 0.5)).unwrap();
        assert_eq!((f.ell0, f.rho), (1, 0.5));

        // A head zero pushes the floor past it.
        let f = detect_geometric_floor(&geometric(&[1.0, 0.0, 1.0], 0.9)).unwrap();
        assert_eq!(f.ell0, 2);
        assert!((f.rho - 0.9).abs() < 1e-15);

        // A dip between head delays drags the infimum below the tail
        // ratio; the steeper drop into delay one is outside the floor
        // and lands on the normalizer instead.
        let p = geometric(&[1.0, 0.1, 0.05], 0.9);
        let f = detect_geometric_floor(&p).unwrap();
        assert_eq!(f.ell0, 1);
        assert!((f.rho - 0.5).abs() < 1e-12);
        assert!((compute_beta_tilde(&p, &f) - 0.1).abs() < 1e-15);
        check_floor_inequality(&p, &f, 0.1, 500).unwrap();

        let zero = DecayProfile::new(vec![1.0], TailModel::Zero).unwrap();
        assert!(detect_geometric_floor(&zero).is_none());
        let dexp = DecayProfile::new(
            vec![1.0],
            TailModel::DoubleExp {
                scale: 1.0,
                base: 2.0,
            },
        )
        .unwrap();
        assert!(detect_geometric_floor(&dexp).is_none());
    }

    #[test]
    fn beta_examples() {
        let p = geometric(&[1.0], 0.5);
        let f = detect_geometric_floor(&p).unwrap();
        assert_eq!(compute_beta_tilde(&p, &f), 0.5);

        let p = geometric(&[1.0, 1.0], 0.9);
        let f = detect_geometric_floor(&p).unwrap();
        assert_eq!(f.ell0, 1);
        assert!((compute_beta_tilde(&p, &f) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn floor_inequality_holds_on_detected_floors() {
        for (head, ratio) in [
            (vec![1.0], 0.5),
            (vec![1.0, 0.0, 1.0], 0.9),
            (vec![2.0, 0.3, 0.4, 0.1], 0.35),
            (vec![0.0, 1.0], 0.7),
        ] {
            let p = geometric(&head, ratio);
            let f = detect_geometric_floor(&p).unwrap();
            let beta = compute_beta_tilde(&p, &f);
            assert!(beta > 0.0 && beta < 1.0, "beta = {beta} for {head:?}");
            check_floor_inequality(&p, &f, beta, 500)
                .unwrap_or_else(|e| panic!("floor check failed for {head:?}: {e}"));
        }
    }

    #[test]
    fn floor_inequality_rejects_an_inflated_beta() {
        let p = geometric(&[1.0], 0.5);
        let f = detect_geometric_floor(&p).unwrap();
        assert!(matches!(
            check_floor_inequality(&p, &f, 0.9, 500),
            Err(Error::FloorViolated { ell: 0 })
        ));
        assert!(matches!(
            check_floor_inequality(&p, &f, 1.0, 500),
            Err(Error::BetaOutOfRange { .. })
        ));
    }

    #[test]
    fn offset_constant_matches_the_frozen_point() {
        // kappa = log(0.75 pi e), delta = eta = 0.5, beta = 0.5,
        // epsilon pinned to 0.1 by a table. Expected value computed
        // independently with 40-digit arithmetic.
        let kappa = (0.75 * std::f64::consts::PI * std::f64::consts::E).ln();
        let eps = EpsilonTerm::Table(vec![(0.5, 0.5, 0.1)]);
        let k = compute_k(kappa, 0.5, 0.5, 0.5, &eps).unwrap();
        assert!(
            (k - 7.498_764_499_719_625).abs() < 1e-12,
            "K = {k}, want 7.498764499719625"
        );
    }

    #[test]
    fn offset_constant_decreases_in_kappa() {
        // More regular fading (larger kappa) can only help.
        let eps = EpsilonTerm::LogTail;
        let lo = compute_k(1.0, 0.5, 0.5, 0.5, &eps).unwrap();
        let hi = compute_k(2.0, 0.5, 0.5, 0.5, &eps).unwrap();
        assert!(hi < lo);
    }

    #[test]
    fn grid_minimizer_matches_exhaustive_scan() {
        let kappa = (0.75 * std::f64::consts::PI * std::f64::consts::E).ln();
        let deltas = default_delta_grid();
        let etas = default_eta_grid();
        let (k, d, e) = optimize_k(kappa, 0.5, &deltas, &etas, &EpsilonTerm::LogTail).unwrap();
        let mut brute = f64::INFINITY;
        for &delta in &deltas {
            for &eta in &etas {
                brute =
                    brute.min(compute_k(kappa, 0.5, delta, eta, &EpsilonTerm::LogTail).unwrap());
            }
        }
        assert_eq!(k, brute);
        assert!(
            (k - compute_k(kappa, 0.5, d, e, &EpsilonTerm::LogTail).unwrap()).abs() == 0.0,
            "reported point must reproduce the reported value"
        );
    }

    #[test]
    fn flat_epsilon_pushes_delta_to_the_grid_maximum() {
        let mut rows = Vec::new();
        for &d in &default_delta_grid() {
            for &e in &default_eta_grid() {
                rows.push((d, e, 0.1));
            }
        }
        let (_, d, _) = optimize_k(1.0, 0.5, &default_delta_grid(), &default_eta_grid(),
            &EpsilonTerm::Table(rows)).unwrap();
        assert_eq!(d, 1.0, "with flat epsilon the -log(delta^2) term rules");
    }

    #[test]
    fn exact_ties_go_to_the_smallest_delta() {
        // Rig the table so K(0.5, eta) == K(1.0, eta) exactly:
        // the delta terms differ by log 4, so offset epsilon by log(4)/2.
        let eps0 = 0.1;
        let eps1 = eps0 + 4.0f64.ln() / 2.0;
        let table = EpsilonTerm::Table(vec![(0.5, 0.5, eps0), (1.0, 0.5, eps1)]);
        let k_a = compute_k(1.0, 0.5, 0.5, 0.5, &table).unwrap();
        let k_b = compute_k(1.0, 0.5, 1.0, 0.5, &table).unwrap();
        assert_eq!(k_a, k_b, "tie must be exact for this test to bite");
        let (_, d, _) = optimize_k(1.0, 0.5, &[0.5, 1.0], &[0.5], &table).unwrap();
        assert_eq!(d, 0.5);
    }

    #[test]
    fn epsilon_term_contract() {
        let eps = EpsilonTerm::LogTail;
        // Positive on the grid, monotone shrinking with delta.
        let mut last = f64::INFINITY;
        for &d in &[1.0, 0.5, 0.1, 0.01, 1e-4] {
            let v = eps.eval(d, 0.5).unwrap();
            assert!(v > 0.0 && v < last, "epsilon not shrinking at delta = {d}");
            last = v;
        }
        // delta^(2-eta) dominates the log blowup: at 1e-12 the value
        // is around 1e-16.
        assert!(eps.eval(1e-12, 0.5).unwrap() < 1e-15, "must vanish with delta");
        assert!(matches!(
            eps.eval(1.5, 0.5),
            Err(Error::BadBoundParam { name: "delta", .. })
        ));
        assert!(matches!(
            eps.eval(0.5, 1.0),
            Err(Error::BadBoundParam { name: "eta", .. })
        ));
        // Table lookups never fall through silently.
        let table = EpsilonTerm::Table(vec![(0.5, 0.5, 0.1)]);
        assert_eq!(table.eval(0.5, 0.5).unwrap(), 0.1);
        assert!(matches!(
            table.eval(0.25, 0.5),
            Err(Error::EpsilonTableMiss { .. })
        ));
        assert!(matches!(
            EpsilonTerm::Disabled.eval(0.5, 0.5),
            Err(Error::EpsilonUnavailable)
        ));
    }

    #[test]
    fn first_terms_bound_frozen_value() {
        let channel = channel_with(&[1.0], 0.5, 0.5);
        // sup_alpha = 1, n = 10, SNR = 10: log(101).
        let got = first_terms_bound(&channel, 10);
        assert!((got - 4.61512051684126).abs() < 1e-12);
    }

    #[test]
    fn finite_n_needs_room_and_limits_to_k() {
        let channel = channel_with(&[1.0], 0.5, 0.5);
        let result = evaluate(
            &channel,
            EpsilonTerm::LogTail,
            &default_delta_grid(),
            &default_eta_grid(),
            500,
        )
        .unwrap()
        .unwrap();
        assert!(matches!(
            result.finite_n(2, 10.0),
            Err(Error::BlocklengthTooSmall { n: 2, min: 3 })
        ));
        let at_million = result.finite_n(1_000_000, 10.0).unwrap();
        assert!(
            (at_million - result.k_const).abs() < 1e-3,
            "bound at n = 1e6 is {at_million}, K = {}",
            result.k_const
        );
    }

    #[test]
    fn finite_n_eventually_non_increasing() {
        let channel = channel_with(&[1.0], 0.5, 0.5);
        let result = evaluate(
            &channel,
            EpsilonTerm::LogTail,
            &default_delta_grid(),
            &default_eta_grid(),
            500,
        )
        .unwrap()
        .unwrap();
        let snr = 1000.0;
        let mut prev: Option<(f64, f64)> = None;
        let mut decreasing_seen = false;
        for n in 3..2000usize {
            let v = result.finite_n(n, snr).unwrap();
            let l = (1.0 + result.sup_alpha * n as f64 * snr).ln();
            // A step n-1 -> n can only fall once the blocklength term
            // at its left endpoint clears K + 1: the term grows by
            // under (n-1) log(n/(n-1)) < 1 nats per step, so the
            // weighted mix loses more to the shrinking 2 l0 / n weight
            // than the growth adds.
            if let Some((pv, pl)) = prev {
                if pl > result.k_const + 1.0 {
                    assert!(v <= pv + 1e-12, "bound rose at n = {n}: {pv} -> {v}");
                    assert!(v > result.k_const, "approaches K from above");
                    decreasing_seen = true;
                }
            }
            prev = Some((v, l));
        }
        assert!(decreasing_seen, "test never reached the knee");
    }

    #[test]
    fn unbounded_profiles_have_no_bound() {
        let channel = ChannelConfig {
            profile: DecayProfile::new(vec![1.0], TailModel::Zero).unwrap(),
            taps: TapAssignment::Uniform {
                a: Complex64::new(0.5, 0.0),
            },
            noise_var: 1.0,
            power: 10.0,
            blocklength: 6,
        }
        .validate()
        .unwrap();
        assert!(evaluate(
            &channel,
            EpsilonTerm::LogTail,
            &default_delta_grid(),
            &default_eta_grid(),
            500
        )
        .unwrap()
        .is_none());
    }

    #[test]
    fn disabled_epsilon_refuses_to_bound() {
        let channel = channel_with(&[1.0], 0.5, 0.5);
        assert!(matches!(
            evaluate(
                &channel,
                EpsilonTerm::Disabled,
                &default_delta_grid(),
                &default_eta_grid(),
                500
            ),
            Err(Error::EpsilonUnavailable)
        ));
    }

    #[test]
    fn telescoping_is_an_exact_rearrangement() {
        // Deterministic pseudo-random sequences; the identity is
        // algebraic and must hold to rounding.
        let n = 50;
        let ell0 = 3;
        let a: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 97) as f64 * 0.13 - 4.0).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 53 + 29) % 89) as f64 * 0.11 - 3.0).collect();
        let split = telescoping_split(&a, &b, ell0, n).unwrap();
        let direct: f64 = ((ell0 + 1)..=n).map(|k| a[k - 1] - b[k - 1]).sum();
        assert!(
            ((split.boundary + split.bulk) - direct).abs() <= 1e-12 * direct.abs().max(1.0),
            "split {} + {} vs direct {}",
            split.boundary,
            split.bulk,
            direct
        );
    }

    #[test]
    fn zero_floor_means_bulk_is_the_whole_sum() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [0.5, 0.25, 0.125, 0.0625];
        let split = telescoping_split(&a, &b, 0, 4).unwrap();
        assert_eq!(split.boundary, 0.0);
        let direct: f64 = (1..=4).map(|k| a[k - 1] - b[k - 1]).sum();
        assert_eq!(split.bulk, direct);
    }

    #[test]
    fn profile_moments_make_the_bulk_vanish() {
        let p = geometric(&[1.0, 0.4], 0.6);
        let f = detect_geometric_floor(&p).unwrap();
        let w: Vec<f64> = (0..40).map(|i| ((i * 7 + 3) % 13) as f64 * 0.5).collect();
        let (a, b) = profile_log_moments(&p, 1.0, &w, f.ell0);
        let split = telescoping_split(&a, &b, f.ell0, 40).unwrap();
        assert!(
            split.bulk.abs() < 1e-12,
            "shifted moments must telescope the interior away, got {}",
            split.bulk
        );
    }
}
