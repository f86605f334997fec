//! The CHSH-like certification game. Box X measures Bob's qubit, box Y
//! measures Alice's qutrit (possibly embedded in the dim-4 photon space);
//! the game is won iff the embedded XOR of the outputs equals x AND y.

use rand::Rng;
use std::collections::BTreeMap;

use crate::families::{
    computational_basis, diagonal_basis, embed_basis, game_bases, Encoding, FamilyKind,
};
use crate::quantum::{joint_distribution, JointDistribution, MeasurementBasis, StateEnsemble};
use crate::{Error, Result};

/// Output code for box Y when no listed outcome fires (encoding mismatch).
pub const NO_DETECT: u8 = 3;

/// Measurement plan for both boxes: input bit -> basis.
#[derive(Debug, Clone)]
pub struct GameStrategy {
    x_bases: [MeasurementBasis; 2],
    y_bases: [MeasurementBasis; 2],
}

impl GameStrategy {
    /// The fixed strategy: x=0 -> {|0>,|1>}, x=1 -> {|+>,|->}; y=0 -> primed
    /// triad, y=1 -> double-primed triad, in ambient dim 3.
    pub fn standard(offset_i: usize) -> Self {
        GameStrategy {
            x_bases: [computational_basis(), diagonal_basis()],
            y_bases: [game_bases(0, offset_i), game_bases(1, offset_i)],
        }
    }

    /// Same strategy with the Y triads embedded into the dim-4 photon space
    /// under `enc`; the leftover direction is a no-detect outcome.
    pub fn embedded(offset_i: usize, enc: Encoding) -> Self {
        GameStrategy {
            x_bases: [computational_basis(), diagonal_basis()],
            y_bases: [
                embed_basis(&game_bases(0, offset_i), enc),
                embed_basis(&game_bases(1, offset_i), enc),
            ],
        }
    }

    pub fn x_basis(&self, x: u8) -> &MeasurementBasis {
        &self.x_bases[x as usize]
    }

    pub fn y_basis(&self, y: u8) -> &MeasurementBasis {
        &self.y_bases[y as usize]
    }

    /// Box Y output for a joint-distribution outcome index.
    fn y_output(&self, y: u8, outcome: usize) -> u8 {
        if outcome < self.y_basis(y).vectors().len() {
            outcome as u8
        } else {
            NO_DETECT
        }
    }
}

/// f(a,b) = [a != b] on a bit and a trit; b = 2 always differs.
pub fn embedded_xor(a: u8, b: u8) -> u8 {
    debug_assert!(a <= 1 && b <= 2);
    u8::from(a != b)
}

/// Win iff f(a,b) = x AND y. No-detect outcomes always lose.
pub fn win_predicate(x: u8, y: u8, a: u8, b: u8) -> bool {
    if b == NO_DETECT {
        return false;
    }
    embedded_xor(a, b) == (x & y)
}

/// Pr(a, b | x, y) for all input pairs. Keys are (x, y, a, b) with
/// b in {0, 1, 2, NO_DETECT}.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    entries: BTreeMap<(u8, u8, u8, u8), f64>,
}

impl ConditionalTable {
    pub fn from_entries(entries: BTreeMap<(u8, u8, u8, u8), f64>) -> Self {
        ConditionalTable { entries }
    }

    pub fn get(&self, x: u8, y: u8, a: u8, b: u8) -> f64 {
        self.entries.get(&(x, y, a, b)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> &BTreeMap<(u8, u8, u8, u8), f64> {
        &self.entries
    }

    pub fn row_sum(&self, x: u8, y: u8) -> f64 {
        self.entries
            .iter()
            .filter(|((ex, ey, _, _), _)| *ex == x && *ey == y)
            .map(|(_, p)| p)
            .sum()
    }

    /// Probability mass on no-detect outcomes under uniform inputs.
    pub fn no_detect_rate(&self) -> f64 {
        0.25 * self
            .entries
            .iter()
            .filter(|((_, _, _, b), _)| *b == NO_DETECT)
            .map(|(_, p)| p)
            .sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &ConditionalTable) -> f64 {
        let mut keys: Vec<_> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|&(x, y, a, b)| (self.get(x, y, a, b) - other.get(x, y, a, b)).abs())
            .fold(0.0, f64::max)
    }

    /// Convex mixture of tables (used for random basis/encoding switching).
    pub fn mix(tables: &[(f64, &ConditionalTable)]) -> ConditionalTable {
        let mut entries: BTreeMap<(u8, u8, u8, u8), f64> = BTreeMap::new();
        for (w, t) in tables {
            for (&k, &p) in &t.entries {
                *entries.entry(k).or_insert(0.0) += w * p;
            }
        }
        ConditionalTable { entries }
    }
}

/// Exact conditional table via inner-product Born evaluation; no sampling.
pub fn exact_table(supply: &StateEnsemble, strat: &GameStrategy) -> Result<ConditionalTable> {
    let mut entries = BTreeMap::new();
    for x in 0..2u8 {
        for y in 0..2u8 {
            let dist = joint_distribution(supply, strat.x_basis(x), strat.y_basis(y))?;
            accumulate(&mut entries, strat, x, y, &dist);
        }
    }
    Ok(ConditionalTable { entries })
}

fn accumulate(
    entries: &mut BTreeMap<(u8, u8, u8, u8), f64>,
    strat: &GameStrategy,
    x: u8,
    y: u8,
    dist: &JointDistribution,
) {
    for ob in 0..dist.labels_b().len() {
        for oa in 0..dist.labels_a().len() {
            let a = ob as u8;
            let b = strat.y_output(y, oa);
            *entries.entry((x, y, a, b)).or_insert(0.0) += dist.prob(ob, oa);
        }
    }
}

/// (1/4) sum over inputs of the winning-outcome mass.
pub fn exact_win_probability(table: &ConditionalTable) -> f64 {
    0.25 * table
        .entries()
        .iter()
        .filter(|(&(x, y, a, b), _)| win_predicate(x, y, a, b))
        .map(|(_, p)| p)
        .sum::<f64>()
}

/// The printed closed-form winning probabilities.
pub fn closed_form_win(kind: FamilyKind, theta: f64) -> Result<f64> {
    let q = 0.5 / 2f64.sqrt(); // 1/(2 sqrt 2)
    match kind {
        FamilyKind::ProductPair => Ok(0.5 * (1.0 + q * theta.sin())),
        FamilyKind::SameSubspace => Ok(0.5 * (1.0 + q + q * theta.sin())),
        FamilyKind::DiffSubspace => Ok(0.25 * (1.0 + theta.cos() * theta.cos())),
        FamilyKind::GeneralQutrit => Err(Error::InvalidParameter(
            "no printed closed form for the general family".into(),
        )),
    }
}

/// One game round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
    pub win: bool,
}

/// Precomputed per-input distributions for fast repeated rounds.
#[derive(Debug, Clone)]
pub struct RoundSampler {
    dists: Vec<JointDistribution>, // indexed x * 2 + y
    listed: [usize; 2],            // listed Y outcomes per y basis
}

impl RoundSampler {
    pub fn new(supply: &StateEnsemble, strat: &GameStrategy) -> Result<Self> {
        let mut dists = Vec::with_capacity(4);
        for x in 0..2u8 {
            for y in 0..2u8 {
                dists.push(joint_distribution(supply, strat.x_basis(x), strat.y_basis(y))?);
            }
        }
        Ok(RoundSampler {
            dists,
            listed: [
                strat.y_basis(0).vectors().len(),
                strat.y_basis(1).vectors().len(),
            ],
        })
    }

    pub fn play<R: Rng>(&self, rng: &mut R) -> RoundRecord {
        let x = rng.gen_range(0..2u8);
        let y = rng.gen_range(0..2u8);
        let (ob, oa) = self.dists[(x * 2 + y) as usize].sample(rng);
        let a = ob as u8;
        let b = if oa < self.listed[y as usize] {
            oa as u8
        } else {
            NO_DETECT
        };
        RoundRecord {
            x,
            y,
            a,
            b,
            win: win_predicate(x, y, a, b),
        }
    }
}

/// Draw x, y uniformly and sample one round from the exact joint distribution.
pub fn play_round<R: Rng>(
    supply: &StateEnsemble,
    strat: &GameStrategy,
    rng: &mut R,
) -> Result<RoundRecord> {
    Ok(RoundSampler::new(supply, strat)?.play(rng))
}
