//! Seeded Monte Carlo engine for the m-shelf shuffle.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). Trials are
//! grouped into fixed blocks of [`BLOCK_TRIALS`]; block `b` draws from the
//! generator seeded with `seed_from_u64(seed)` on stream `b`. Block contents
//! never depend on the thread count, and tallies are merged by integer
//! addition, so reports are bit-identical for any pool size.
//!
//! Per card, the shelf index is drawn first (only when `m > 1`, uniform over
//! `0..m`), then a fair bit chooses top (`true`) or bottom.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guessing::Strategy;

pub const BLOCK_TRIALS: u64 = 4096;

pub const GENERATOR: &str =
    "ChaCha8Rng::seed_from_u64(seed), stream = block index, 4096 trials per block";

/// Shelves are stacked in index order, shelf 1 on top.
pub const SHELF_ORDER: &str = "shelf 1 on top, each shelf read top to bottom";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShuffleConfig {
    pub n: usize,
    pub shelves: usize,
    pub rounds: usize,
    pub samples: u64,
    pub seed: u64,
}

impl ShuffleConfig {
    pub fn single_shelf(n: usize, rounds: usize, samples: u64, seed: u64) -> Self {
        Self {
            n,
            shelves: 1,
            rounds,
            samples,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.shelves < 1 {
            return bad("at least one shelf is required".into());
        }
        if self.rounds < 1 {
            return bad("rounds must be at least 1".into());
        }
        if self.samples < 1 {
            return bad("samples must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Top,
    Bottom,
}

/// Where one drawn card goes: a 0-based shelf and a side of its pile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub shelf: usize,
    pub side: Side,
}

impl Placement {
    pub fn top() -> Self {
        Self {
            shelf: 0,
            side: Side::Top,
        }
    }

    pub fn bottom() -> Self {
        Self {
            shelf: 0,
            side: Side::Bottom,
        }
    }
}

/// Reusable pile buffers for repeated shuffles.
#[derive(Debug, Clone)]
pub struct Shuffler {
    piles: Vec<VecDeque<usize>>,
}

impl Shuffler {
    pub fn new(shelves: usize, n: usize) -> Self {
        Self {
            piles: (0..shelves.max(1))
                .map(|_| VecDeque::with_capacity(n))
                .collect(),
        }
    }

    /// Shuffles `deck` (top to bottom) in place. `place` is called once per
    /// card in draw order, bottom card first.
    pub fn apply_with<F>(&mut self, deck: &mut [usize], mut place: F) -> Result<()>
    where
        F: FnMut(usize) -> Placement,
    {
        for pile in &mut self.piles {
            pile.clear();
        }
        for &card in deck.iter().rev() {
            let Placement { shelf, side } = place(card);
            let pile = self
                .piles
                .get_mut(shelf)
                .ok_or_else(|| Error::InvalidConfig(format!("shelf {shelf} does not exist")))?;
            match side {
                Side::Top => pile.push_front(card),
                Side::Bottom => pile.push_back(card),
            }
        }
        for (slot, card) in deck.iter_mut().zip(self.piles.iter().flatten()) {
            *slot = *card;
        }
        Ok(())
    }

    pub fn apply<R: Rng>(&mut self, deck: &mut [usize], rng: &mut R) {
        let shelves = self.piles.len();
        self.apply_with(deck, |_| {
            let shelf = if shelves > 1 {
                rng.random_range(0..shelves)
            } else {
                0
            };
            let side = if rng.random::<bool>() {
                Side::Top
            } else {
                Side::Bottom
            };
            Placement { shelf, side }
        })
        .expect("shelf index drawn in range");
    }
}

/// One m-shelf shuffle of `deck` using `rng`.
pub fn shuffle_once<R: Rng>(deck: &[usize], shelves: usize, rng: &mut R) -> Vec<usize> {
    let mut out = deck.to_vec();
    Shuffler::new(shelves, deck.len()).apply(&mut out, rng);
    out
}

/// One shuffle driven by an explicit transcript, listed in draw order
/// (the placement for the bottom card first).
pub fn shuffle_transcript(
    deck: &[usize],
    shelves: usize,
    transcript: &[Placement],
) -> Result<Vec<usize>> {
    if transcript.len() != deck.len() {
        return Err(Error::InvalidConfig(format!(
            "transcript has {} placements for {} cards",
            transcript.len(),
            deck.len()
        )));
    }
    let mut out = deck.to_vec();
    let mut steps = transcript.iter();
    Shuffler::new(shelves, deck.len())
        .apply_with(&mut out, |_| *steps.next().expect("length checked"))?;
    Ok(out)
}

pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Tally {
    /// `counts[i][j]`: trials in which card `i + 1` finished at position `j + 1`.
    Matrix {
        counts: Vec<Vec<u64>>,
        frequencies: Vec<Vec<f64>>,
    },
    /// `histogram[s]`: trials with exactly `s` correct guesses.
    Game {
        guesses: Vec<usize>,
        histogram: Vec<u64>,
        mean: f64,
        standard_error: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: ShuffleConfig,
    pub generator: String,
    pub shelf_order: String,
    #[serde(flatten)]
    pub tally: Tally,
}

fn run_blocks<T, F, M>(
    config: &ShuffleConfig,
    threads: Option<usize>,
    init: fn(usize) -> T,
    trial: F,
    merge: M,
) -> Result<T>
where
    T: Send,
    F: Fn(&[usize], &mut T) + Sync,
    M: Fn(T, T) -> T + Sync + Send,
{
    config.validate()?;
    let n = config.n;
    let blocks = config.samples.div_ceil(BLOCK_TRIALS);
    let work = || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = block_rng(config.seed, b);
                let mut shuffler = Shuffler::new(config.shelves, n);
                let mut deck: Vec<usize> = Vec::with_capacity(n);
                let mut acc = init(n);
                let end = ((b + 1) * BLOCK_TRIALS).min(config.samples);
                for _ in b * BLOCK_TRIALS..end {
                    deck.clear();
                    deck.extend(1..=n);
                    for _ in 0..config.rounds {
                        shuffler.apply(&mut deck, &mut rng);
                    }
                    trial(&deck, &mut acc);
                }
                acc
            })
            .reduce(|| init(n), &merge)
    };
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

fn add_into(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    a
}

/// Tallies where each card lands after `rounds` shuffles of the ordered deck.
pub fn estimate_position_matrix(
    config: &ShuffleConfig,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    let n = config.n;
    let flat = run_blocks(
        config,
        threads,
        |n| vec![0u64; n * n],
        |deck, acc| {
            for (pos, &card) in deck.iter().enumerate() {
                acc[(card - 1) * n + pos] += 1;
            }
        },
        add_into,
    )?;
    let samples = config.samples as f64;
    let counts: Vec<Vec<u64>> = flat.chunks(n).map(<[u64]>::to_vec).collect();
    let frequencies = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / samples).collect())
        .collect();
    Ok(SimulationReport {
        config: *config,
        generator: GENERATOR.into(),
        shelf_order: SHELF_ORDER.into(),
        tally: Tally::Matrix {
            counts,
            frequencies,
        },
    })
}

/// Plays the no-feedback game: one point per position whose card matches the guess.
pub fn simulate_guessing(
    config: &ShuffleConfig,
    strategy: &Strategy,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    if strategy.n != config.n {
        return Err(Error::InvalidStrategy(format!(
            "strategy is for {} cards, deck has {}",
            strategy.n, config.n
        )));
    }
    let guesses = &strategy.guesses;
    let histogram = run_blocks(
        config,
        threads,
        |n| vec![0u64; n + 1],
        |deck, acc| {
            let score = deck.iter().zip(guesses).filter(|(c, g)| c == g).count();
            acc[score] += 1;
        },
        add_into,
    )?;
    let samples = config.samples as f64;
    let mean = histogram
        .iter()
        .enumerate()
        .map(|(s, &c)| s as f64 * c as f64)
        .sum::<f64>()
        / samples;
    let variance = if config.samples > 1 {
        histogram
            .iter()
            .enumerate()
            .map(|(s, &c)| c as f64 * (s as f64 - mean).powi(2))
            .sum::<f64>()
            / (samples - 1.0)
    } else {
        0.0
    };
    Ok(SimulationReport {
        config: *config,
        generator: GENERATOR.into(),
        shelf_order: SHELF_ORDER.into(),
        tally: Tally::Game {
            guesses: guesses.clone(),
            histogram,
            mean,
            standard_error: (variance / samples).sqrt(),
        },
    })
}
