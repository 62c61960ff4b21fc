//! Power-delay profiles, their decay classification, and the channel
//! configuration that the rest of the toolkit consumes.
//!
//! A profile is a finite head of per-path variances `alpha_0..alpha_m`
//! continued by an analytic tail. The tail kind decides the asymptotic
//! decay, which is the only thing capacity behaviour at high SNR cares
//! about.

use num_complex::Complex64;

use crate::{gauss, Error, Result};

// ----- profile ---------------------------------------------------------

/// Analytic continuation of the profile past the last head entry m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// alpha_l = 0 for l > m. Finite memory.
    Zero,
    /// alpha_l = alpha_m * ratio^(l-m) for l > m, with 0 < ratio < 1.
    Geometric { ratio: f64 },
    /// alpha_l = exp(-scale * base^l) for l > m, scale > 0, base > 1.
    DoubleExp { scale: f64, base: f64 },
    /// alpha_l = exp(-exp(rate * l^2)) for l > m, rate > 0.
    SuperDoubleExp { rate: f64 },
}

/// How fast the per-path variances die out with the path delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClass {
    /// liminf alpha_(l+1)/alpha_l > 0: capacity stays bounded in SNR.
    Bounded,
    /// (1/l) loglog(1/alpha_l) -> infinity: capacity grows without limit.
    Unbounded,
    /// Neither sufficient condition applies.
    Indeterminate,
}

/// Power-delay profile: head variances plus an analytic tail.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    head: Vec<f64>,
    tail: TailModel,
}

impl DecayProfile {
    /// Builds a profile, rejecting heads with negative or non-finite
    /// entries and tails with out-of-range parameters. A geometric
    /// tail continues the last head entry, so that entry must be
    /// positive for the tail to exist at all.
    pub fn new(head: Vec<f64>, tail: TailModel) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::EmptyHead);
        }
        for (index, &value) in head.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::BadHeadEntry { index, value });
            }
        }
        match tail {
            TailModel::Zero => {}
            TailModel::Geometric { ratio } => {
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::BadTailParam {
                        name: "ratio",
                        value: ratio,
                        want: "0 < ratio < 1",
                    });
                }
                if *head.last().expect("nonempty head") == 0.0 {
                    return Err(Error::ZeroAnchor);
                }
            }
            TailModel::DoubleExp { scale, base } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::BadTailParam {
                        name: "scale",
                        value: scale,
                        want: "finite and > 0",
                    });
                }
                if !(base > 1.0 && base.is_finite()) {
                    return Err(Error::BadTailParam {
                        name: "base",
                        value: base,
                        want: "finite and > 1",
                    });
                }
            }
            TailModel::SuperDoubleExp { rate } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::BadTailParam {
                        name: "rate",
                        value: rate,
                        want: "finite and > 0",
                    });
                }
            }
        }
        Ok(Self { head, tail })
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail(&self) -> TailModel {
        self.tail
    }

    /// Index m of the last head entry.
    pub fn last_head_index(&self) -> usize {
        self.head.len() - 1
    }

    /// Variance of the path with delay `ell`. Total: never negative,
    /// NaN, or infinite, for any delay. Deep tails underflow to zero,
    /// which is the honest limit value.
    pub fn alpha_at(&self, ell: usize) -> f64 {
        if ell < self.head.len() {
            return self.head[ell];
        }
        match self.tail {
            TailModel::Zero => 0.0,
            TailModel::Geometric { ratio } => {
                let m = self.last_head_index();
                self.head[m] * ratio.powf((ell - m) as f64)
            }
            TailModel::DoubleExp { scale, base } => (-scale * base.powf(ell as f64)).exp(),
            TailModel::SuperDoubleExp { rate } => {
                let l = ell as f64;
                (-(rate * l * l).exp()).exp()
            }
        }
    }

    /// Largest variance over all delays. Every tail kind decreases
    /// monotonically past the head, so the supremum is attained at a
    /// head entry or at the first tail entry.
    pub fn sup_alpha(&self) -> f64 {
        let head_max = self.head.iter().cloned().fold(0.0, f64::max);
        head_max.max(self.alpha_at(self.head.len()))
    }

    /// True when paths with arbitrarily large delay carry power.
    pub fn support_unbounded(&self) -> bool {
        !matches!(self.tail, TailModel::Zero)
    }

    /// Decay classification.
    ///
    /// Bounded requires liminf alpha_(l+1)/alpha_l > 0 (with the
    /// conventions a/0 = infinity for a > 0 and 0/0 = 0); unbounded
    /// requires (1/l) loglog(1/alpha_l) -> infinity. Both are tail
    /// statements, so the head never matters:
    ///
    /// * geometric: ratios equal `ratio` > 0 eventually, bounded;
    /// * zero: 0/0 = 0 eventually, and loglog(1/0) = infinity at every
    ///   tail delay, unbounded;
    /// * double exponential: ratios exp(-scale*(base-1)*base^l) -> 0,
    ///   while (1/l) loglog(1/alpha_l) -> log(base), finite: neither
    ///   condition holds;
    /// * super double exponential: (1/l) loglog(1/alpha_l) = rate*l,
    ///   unbounded.
    pub fn classify(&self) -> DecayClass {
        match self.tail {
            TailModel::Geometric { .. } => DecayClass::Bounded,
            TailModel::Zero => DecayClass::Unbounded,
            TailModel::DoubleExp { .. } => DecayClass::Indeterminate,
            TailModel::SuperDoubleExp { .. } => DecayClass::Unbounded,
        }
    }

    /// Same profile with every variance multiplied by `c` > 0. The
    /// geometric tail is anchored to the head and scales with it; the
    /// other tails are already pure asymptotic statements, so the
    /// classification is invariant either way.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.head.iter().map(|a| a * c).collect(), self.tail)
    }
}

// ----- taps ------------------------------------------------------------

/// One path gain process: stationary first-order autoregression with
/// variance `alpha` and coefficient `a`, driven by circularly
/// symmetric complex Gaussian innovations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapProcess {
    pub alpha: f64,
    pub a: Complex64,
}

impl TapProcess {
    /// |a| > 1 admits no stationary law and is rejected. |a| = 1 is a
    /// frozen tap (zero innovation variance); it is constructible but
    /// fails configuration validation because its entropy rate is
    /// minus infinity.
    pub fn new(alpha: f64, a: Complex64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::BadHeadEntry {
                index: 0,
                value: alpha,
            });
        }
        let magnitude = a.norm();
        if magnitude > 1.0 || magnitude.is_nan() {
            return Err(Error::UnstableTap { magnitude });
        }
        Ok(Self { alpha, a })
    }
}

/// Autoregression coefficients per path delay.
#[derive(Debug, Clone, PartialEq)]
pub enum TapAssignment {
    /// Every path uses the same coefficient.
    Uniform { a: Complex64 },
    /// Explicit coefficients for the first delays, `default` beyond.
    PerPath {
        list: Vec<Complex64>,
        default: Complex64,
    },
}

impl TapAssignment {
    pub fn coefficient(&self, delay: usize) -> Complex64 {
        match self {
            TapAssignment::Uniform { a } => *a,
            TapAssignment::PerPath { list, default } => {
                list.get(delay).copied().unwrap_or(*default)
            }
        }
    }

    /// sup |a_l| over the profile support, None when no path carries
    /// power. Only supported delays count: a wild coefficient on a
    /// zero-variance path multiplies a process that is almost surely
    /// zero.
    pub fn sup_magnitude_on(&self, profile: &DecayProfile) -> Option<f64> {
        let mut sup: Option<f64> = None;
        let mut take = |mag: f64| sup = Some(sup.map_or(mag, |s: f64| s.max(mag)));

        let explicit = match self {
            TapAssignment::Uniform { .. } => 0,
            TapAssignment::PerPath { list, .. } => list.len(),
        };
        for ell in 0..profile.head().len().max(explicit) {
            if profile.alpha_at(ell) > 0.0 {
                take(self.coefficient(ell).norm());
            }
        }
        if profile.support_unbounded() {
            // Infinitely many supported delays fall through to the
            // default coefficient (or the uniform one).
            take(self.coefficient(usize::MAX).norm());
        }
        sup
    }
}

// ----- configuration ---------------------------------------------------

/// Raw channel description as supplied by a caller or a config file.
#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub profile: DecayProfile,
    pub taps: TapAssignment,
    /// Additive noise variance sigma^2.
    pub noise_var: f64,
    /// Average input power constraint P, met with equality.
    pub power: f64,
    /// Number of channel uses n.
    pub blocklength: usize,
}

impl ChannelConfig {
    pub fn snr(&self) -> f64 {
        self.power / self.noise_var
    }

    /// Checks every model assumption and returns the validated channel.
    /// All violations are reported together, each with the offending
    /// quantity, so one round trip fixes a config file.
    pub fn validate(self) -> Result<Channel> {
        let mut issues = Vec::new();
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            issues.push(format!(
                "noise variance must be finite and > 0, got {}",
                self.noise_var
            ));
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            issues.push(format!("power must be finite and >= 0, got {}", self.power));
        }
        if self.blocklength < 1 {
            issues.push("blocklength must be >= 1, got 0".to_string());
        }
        let sup_alpha = self.profile.sup_alpha();
        if !sup_alpha.is_finite() {
            issues.push(format!("profile supremum is {sup_alpha}, want finite"));
        }

        let check_coeff = |issues: &mut Vec<String>, what: &str, a: Complex64| {
            let magnitude = a.norm();
            if magnitude > 1.0 || magnitude.is_nan() {
                issues.push(format!("{what} has |a| = {magnitude} > 1, not stationary"));
            }
        };
        match &self.taps {
            TapAssignment::Uniform { a } => check_coeff(&mut issues, "uniform tap", *a),
            TapAssignment::PerPath { list, default } => {
                for (i, a) in list.iter().enumerate() {
                    check_coeff(&mut issues, &format!("tap for delay {i}"), *a);
                }
                check_coeff(&mut issues, "default tap", *default);
            }
        }

        let kappa = gauss::regularity_constant(&self.profile, &self.taps);
        if kappa == f64::NEG_INFINITY {
            issues.push(
                "regularity constant is -inf: some powered path has |a| = 1 \
                 (perfectly predictable fading)"
                    .to_string(),
            );
        }

        if issues.is_empty() {
            Ok(Channel {
                config: self,
                kappa,
                sup_alpha,
            })
        } else {
            Err(Error::InvalidConfig { issues })
        }
    }
}

/// Validated channel. Construction goes through
/// [`ChannelConfig::validate`], so every instance satisfies the model
/// assumptions and carries its derived constants.
#[derive(Debug, Clone)]
pub struct Channel {
    config: ChannelConfig,
    kappa: f64,
    sup_alpha: f64,
}

impl Channel {
    pub fn profile(&self) -> &DecayProfile {
        &self.config.profile
    }

    pub fn taps(&self) -> &TapAssignment {
        &self.config.taps
    }

    pub fn noise_var(&self) -> f64 {
        self.config.noise_var
    }

    pub fn power(&self) -> f64 {
        self.config.power
    }

    pub fn blocklength(&self) -> usize {
        self.config.blocklength
    }

    pub fn snr(&self) -> f64 {
        self.config.snr()
    }

    /// Regularity constant kappa = inf over supported delays of
    /// (entropy rate - log variance). Plus infinity for a pure-noise
    /// channel with empty support.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sup_alpha(&self) -> f64 {
        self.sup_alpha
    }

    /// The tap process for one path delay.
    pub fn tap(&self, delay: usize) -> TapProcess {
        TapProcess {
            alpha: self.config.profile.alpha_at(delay),
            a: self.config.taps.coefficient(delay),
        }
    }

    /// Same channel at a different transmit power (sweeps revalidate
    /// only the power, everything else is already proven).
    pub fn with_power(&self, power: f64) -> Result<Channel> {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::InvalidConfig {
                issues: vec![format!("power must be finite and >= 0, got {power}")],
            });
        }
        let mut config = self.config.clone();
        config.power = power;
        Ok(Channel {
            config,
            kappa: self.kappa,
            sup_alpha: self.sup_alpha,
        })
    }

    /// Same channel with a different blocklength.
    pub fn with_blocklength(&self, blocklength: usize) -> Result<Channel> {
        if blocklength < 1 {
            return Err(Error::InvalidConfig {
                issues: vec!["blocklength must be >= 1, got 0".to_string()],
            });
        }
        let mut config = self.config.clone();
        config.blocklength = blocklength;
        Ok(Channel {
            config,
            kappa: self.kappa,
            sup_alpha: self.sup_alpha,
        })
    }
}
