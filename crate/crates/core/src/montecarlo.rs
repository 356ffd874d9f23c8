//! Seeded Monte Carlo replay of the fading model.
//!
//! Trials are split into fixed-size chunks. Chunk `i` draws from a ChaCha8
//! stream keyed by `(seed, i)`, and chunk results are reduced in chunk
//! order, so estimates are bit-identical for any rayon pool size.
//!
//! `|h_rd|^2` is unit-mean exponential, sampled as `-ln(1 - u)`. Sampling
//! conditioned on the covert-opportunity condition uses memorylessness:
//! `a - ln(1 - u)` with `a` the covert threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::covert_rate::covert_rate;
use crate::power::{classify, power_no_covert, power_with_covert, PolicyBranch};
use crate::{derive_constants, DerivedConstants, Result, SystemParams};

/// Trials per independently seeded chunk.
pub const CHUNK: u64 = 1 << 16;

/// Width multiplier of the reported confidence half-width.
pub const SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// No covert transmission.
    H0,
    /// Covert transmission with power `P_delta`.
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub trials: u64,
    /// `SIGMAS` standard errors. Probabilities use the plus-four binomial
    /// estimate so the width stays positive at 0 and 1 counts.
    pub half_width: f64,
    pub seed: u64,
}

impl McEstimate {
    fn proportion(hits: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let adjusted = (hits as f64 + 2.0) / (n + 4.0);
        McEstimate {
            value: hits as f64 / n,
            trials,
            half_width: SIGMAS * (adjusted * (1.0 - adjusted) / (n + 4.0)).sqrt(),
            seed,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.half_width
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Unit-mean exponential shifted to start at `shift`.
#[inline]
fn exponential_from(rng: &mut ChaCha8Rng, shift: f64) -> f64 {
    let u: f64 = rng.gen();
    shift - (-u).ln_1p()
}

// Runs `body` over every chunk in parallel and returns per-chunk results in
// chunk order.
fn map_chunks<T, F>(trials: u64, seed: u64, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let n = CHUNK.min(trials - i * CHUNK);
            body(&mut chunk_rng(seed, i), n)
        })
        .collect()
}

/// Warden's received power for one realisation under the given hypothesis,
/// using the relay's actual power policy.
pub fn received_power(h_rd2: f64, hypothesis: Hypothesis, c: &DerivedConstants) -> Result<f64> {
    let decision = match hypothesis {
        Hypothesis::H0 => power_no_covert(h_rd2, c),
        Hypothesis::H1 => power_with_covert(h_rd2, c)?,
    };
    Ok(decision.total() * c.params.h_rs2 + c.params.sigma2_s)
}

/// Empirical false alarm rate (under `H0`: fraction with `T >= tau`) or
/// miss detection rate (under `H1`: fraction with `T < tau`), conditioned
/// on the covert-opportunity condition.
pub fn simulate_detection(
    params: &SystemParams,
    tau: f64,
    hypothesis: Hypothesis,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    assert!(trials >= 1, "at least one trial required");
    let c = derive_constants(params)?;
    let shift = c.covert_threshold();
    let counts = map_chunks(trials, seed, |rng, n| -> Result<u64> {
        let mut hits = 0;
        for _ in 0..n {
            let t = received_power(exponential_from(rng, shift), hypothesis, &c)?;
            let declared_covert = t >= tau;
            let error = match hypothesis {
                Hypothesis::H0 => declared_covert,
                Hypothesis::H1 => !declared_covert,
            };
            hits += error as u64;
        }
        Ok(hits)
    });
    let hits = counts.into_iter().sum::<Result<u64>>()?;
    Ok(McEstimate::proportion(hits, trials, seed))
}

/// Empirical effective covert rate: mean of `R_c * 1{covert branch}` over
/// unconditional unit-mean exponential `|h_rd|^2`.
pub fn simulate_effective_rate(
    params: &SystemParams,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    assert!(trials >= 1, "at least one trial required");
    let c = derive_constants(params)?;
    let sums = map_chunks(trials, seed, |rng, n| {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let r = covert_rate(exponential_from(rng, 0.0), &c);
            s += r;
            s2 += r * r;
        }
        (s, s2)
    });
    let (s, s2) = sums
        .into_iter()
        .fold((0.0, 0.0), |acc, (a, b)| (acc.0 + a, acc.1 + b));
    let n = trials as f64;
    let mean = s / n;
    let var = if trials > 1 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        value: mean,
        trials,
        half_width: SIGMAS * (var / n).sqrt(),
        seed,
    })
}

/// Empirical frequencies of the covert policy's branches, in the order
/// (covert, forward-only, outage).
pub fn simulate_branch_frequencies(
    params: &SystemParams,
    trials: u64,
    seed: u64,
) -> Result<[McEstimate; 3]> {
    assert!(trials >= 1, "at least one trial required");
    let c = derive_constants(params)?;
    let counts = map_chunks(trials, seed, |rng, n| {
        let mut k = [0u64; 3];
        for _ in 0..n {
            let idx = match classify(exponential_from(rng, 0.0), &c) {
                PolicyBranch::Covert => 0,
                PolicyBranch::ForwardOnly => 1,
                PolicyBranch::Outage => 2,
            };
            k[idx] += 1;
        }
        k
    });
    let total = counts.into_iter().fold([0u64; 3], |mut acc, k| {
        for i in 0..3 {
            acc[i] += k[i];
        }
        acc
    });
    Ok(total.map(|hits| McEstimate::proportion(hits, trials, seed)))
}
