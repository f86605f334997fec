//! Bob's local certification: play the game against the supplied states for
//! n rounds, switching orbital-angular-momentum encodings, and abort when the
//! winning frequency falls below the honest expectation minus a slack.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::families::{embed_ensemble, supply_ensemble, Encoding, FamilyKind};
use crate::game::{
    closed_form_win, exact_table, exact_win_probability, ConditionalTable, GameStrategy,
    RoundSampler, NO_DETECT,
};
use crate::quantum::StateEnsemble;
use crate::{Error, Result};

/// How Bob picks his measurement encoding each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EncodingPolicy {
    FixedHMinus,
    FixedVMinus,
    RandomSwitch,
}

impl EncodingPolicy {
    pub fn name(self) -> &'static str {
        match self {
            EncodingPolicy::FixedHMinus => "fixed-hminus",
            EncodingPolicy::FixedVMinus => "fixed-vminus",
            EncodingPolicy::RandomSwitch => "random-switch",
        }
    }
}

impl std::str::FromStr for EncodingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed-hminus" | "fixed_hminus" | "hminus" => Ok(EncodingPolicy::FixedHMinus),
            "fixed-vminus" | "fixed_vminus" | "vminus" => Ok(EncodingPolicy::FixedVMinus),
            "random-switch" | "random_switch" | "random" | "switch" => {
                Ok(EncodingPolicy::RandomSwitch)
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown encoding policy '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CertifierConfig {
    pub n: usize,
    pub theta: f64,
    /// Threshold slack; `None` selects the default 3 sqrt(p(1-p)/n).
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub encoding_policy: EncodingPolicy,
}

impl CertifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if let Some(e) = self.epsilon {
            if !(0.0..1.0).contains(&e) {
                return Err(Error::InvalidParameter(format!(
                    "epsilon must lie in [0, 1), got {e}"
                )));
            }
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, pi/2], got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Slack that puts the threshold three binomial standard deviations below
/// the honest mean.
pub fn default_epsilon(theta: f64, n: usize) -> f64 {
    let p = closed_form_win(FamilyKind::SameSubspace, theta).expect("closed form exists");
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    #[serde(rename = "PROCEED")]
    Proceed,
    #[serde(rename = "ABORT")]
    Abort,
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodingStats {
    pub rounds: usize,
    pub mean_y: f64,
    pub no_detect_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub schema_version: u32,
    pub n: usize,
    pub theta: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub encoding_policy: EncodingPolicy,
    pub mean_y: f64,
    pub threshold: f64,
    pub decision: Decision,
    pub per_encoding_stats: BTreeMap<String, EncodingStats>,
}

/// Run Algorithm-style certification against a supply ensemble. The supply
/// must live in ambient Alice dimension 4; a dimension-3 supply is embedded
/// with the H-minus map first.
pub fn run_certification(cfg: &CertifierConfig, supply: &StateEnsemble) -> Result<Verdict> {
    cfg.validate()?;
    let owned;
    let supply = match supply.dim_a() {
        4 => supply,
        3 => {
            owned = embed_ensemble(supply, Encoding::HMinus);
            &owned
        }
        d => {
            return Err(Error::DimensionMismatch(format!(
                "certifier expects Alice dimension 3 or 4, got {d}"
            )))
        }
    };
    if supply.dim_b() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "certifier expects Bob dimension 2, got {}",
            supply.dim_b()
        )));
    }

    let samplers = [
        RoundSampler::new(supply, &GameStrategy::embedded(0, Encoding::HMinus))?,
        RoundSampler::new(supply, &GameStrategy::embedded(0, Encoding::VMinus))?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut wins = 0usize;
    let mut stats = [(0usize, 0usize, 0usize); 2]; // rounds, wins, no-detects
    for _ in 0..cfg.n {
        let enc = match cfg.encoding_policy {
            EncodingPolicy::FixedHMinus => 0,
            EncodingPolicy::FixedVMinus => 1,
            EncodingPolicy::RandomSwitch => usize::from(rng.gen::<bool>()),
        };
        let rec = samplers[enc].play(&mut rng);
        stats[enc].0 += 1;
        if rec.win {
            wins += 1;
            stats[enc].1 += 1;
        }
        if rec.b == NO_DETECT {
            stats[enc].2 += 1;
        }
    }

    let epsilon = cfg.epsilon.unwrap_or_else(|| default_epsilon(cfg.theta, cfg.n));
    let threshold = closed_form_win(FamilyKind::SameSubspace, cfg.theta)? - epsilon;
    let mean_y = wins as f64 / cfg.n as f64;
    let mut per_encoding_stats = BTreeMap::new();
    for (enc, (rounds, w, nd)) in [Encoding::HMinus, Encoding::VMinus].iter().zip(stats) {
        if rounds > 0 || cfg.encoding_policy == EncodingPolicy::RandomSwitch {
            per_encoding_stats.insert(
                enc.name().to_string(),
                EncodingStats {
                    rounds,
                    mean_y: if rounds > 0 { w as f64 / rounds as f64 } else { 0.0 },
                    no_detect_rate: if rounds > 0 { nd as f64 / rounds as f64 } else { 0.0 },
                },
            );
        }
    }
    Ok(Verdict {
        schema_version: 1,
        n: cfg.n,
        theta: cfg.theta,
        epsilon,
        seed: cfg.seed,
        encoding_policy: cfg.encoding_policy,
        mean_y,
        threshold,
        decision: if mean_y < threshold {
            Decision::Abort
        } else {
            Decision::Proceed
        },
        per_encoding_stats,
    })
}

/// Rounds needed so a one-sided Hoeffding test at half the gap errs with
/// probability at most alpha: ceil(ln(1/alpha) / (2 (gap/2)^2)), at least 1.
pub fn required_sample_size(gap: f64, alpha: f64) -> Result<usize> {
    if !(0.0 < gap && gap < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gap must lie in (0, 1), got {gap}"
        )));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = ((1.0 / alpha).ln() / (2.0 * (gap / 2.0).powi(2))).ceil() as usize;
    Ok(n.max(1))
}

/// Exact dim-4 statistics showing how a fixed wrong encoding blinds Bob to
/// the diff-subspace supply's third component, while random switching keeps
/// part of it visible.
#[derive(Debug, Clone, Serialize)]
pub struct BlindnessReport {
    pub theta: f64,
    pub matched_win: f64,
    pub matched_no_detect: f64,
    pub mismatched_win: f64,
    pub mismatched_no_detect: f64,
    pub switched_win: f64,
    pub switched_no_detect: f64,
}

impl BlindnessReport {
    /// (win under random switching, win with the fixed opposite encoding).
    pub fn as_pair(&self) -> (f64, f64) {
        (self.switched_win, self.mismatched_win)
    }
}

/// Charlie prepares the diff-subspace supply in the V-minus encoding; Bob
/// measures matched (V-minus), mismatched (H-minus), or an even mixture.
pub fn fixed_encoding_blindness(theta: f64) -> Result<BlindnessReport> {
    let supply = embed_ensemble(
        &supply_ensemble(FamilyKind::DiffSubspace, theta, 0)?,
        Encoding::VMinus,
    );
    let matched = exact_table(&supply, &GameStrategy::embedded(0, Encoding::VMinus))?;
    let mismatched = exact_table(&supply, &GameStrategy::embedded(0, Encoding::HMinus))?;
    let switched = ConditionalTable::mix(&[(0.5, &matched), (0.5, &mismatched)]);
    Ok(BlindnessReport {
        theta,
        matched_win: exact_win_probability(&matched),
        matched_no_detect: matched.no_detect_rate(),
        mismatched_win: exact_win_probability(&mismatched),
        mismatched_no_detect: mismatched.no_detect_rate(),
        switched_win: exact_win_probability(&switched),
        switched_no_detect: switched.no_detect_rate(),
    })
}
