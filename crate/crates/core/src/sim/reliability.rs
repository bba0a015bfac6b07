//! Monte Carlo mean-time-to-data-loss: replay random disk failures and
//! repairs against a layout's survivability test, or walk a continuous-time
//! chain to absorption. Serves as the independent oracle for the exact
//! reliability and chain solvers.

use crate::ctmc::MarkovModel;
use crate::exact::ratio_to_f64;
use crate::layout::{FailureSet, Layout};
use crate::sim::stats::{Estimate, Tally};
use crate::sim::{ensure, SimError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Weibull};

/// Disk lifetime distribution.
#[derive(Debug, Clone, Copy)]
pub enum Lifetime {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
}

impl Lifetime {
    fn validate(&self) -> Result<(), SimError> {
        match self {
            Lifetime::Exponential { rate } => {
                ensure(rate.is_finite() && *rate > 0.0, "failure rate must be positive")
            }
            Lifetime::Weibull { shape, scale } => {
                ensure(shape.is_finite() && *shape > 0.0, "Weibull shape must be positive")?;
                ensure(scale.is_finite() && *scale > 0.0, "Weibull scale must be positive")
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> f64 {
        match self {
            Lifetime::Exponential { rate } => Exp::new(*rate).unwrap().sample(rng),
            Lifetime::Weibull { shape, scale } => {
                Weibull::new(*scale, *shape).unwrap().sample(rng)
            }
        }
    }
}

/// Repair-time distribution for a failed disk, given a spare exists.
#[derive(Debug, Clone, Copy)]
pub enum RepairModel {
    None,
    Exponential { rate: f64 },
    Deterministic { mttr: f64 },
}

impl RepairModel {
    fn validate(&self) -> Result<(), SimError> {
        match self {
            RepairModel::None => Ok(()),
            RepairModel::Exponential { rate } => {
                ensure(rate.is_finite() && *rate > 0.0, "repair rate must be positive")
            }
            RepairModel::Deterministic { mttr } => {
                ensure(mttr.is_finite() && *mttr > 0.0, "repair time must be positive")
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha12Rng) -> Option<f64> {
        match self {
            RepairModel::None => None,
            RepairModel::Exponential { rate } => Some(Exp::new(*rate).unwrap().sample(rng)),
            RepairModel::Deterministic { mttr } => Some(*mttr),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Spares {
    Unlimited,
    Finite(u32),
}

/// What the trials run against: a layout (failures checked by rank) or a
/// chain (walked to an absorbing loss state, its own rates apply).
#[derive(Debug, Clone)]
pub enum McTarget {
    Layout(Layout),
    Markov(MarkovModel),
}

#[derive(Debug, Clone)]
pub struct McReliabilityConfig {
    pub target: McTarget,
    pub lifetime: Lifetime,
    /// Ignored for a Markov target, which carries its own repair rates.
    pub repair: RepairModel,
    /// Ignored for a Markov target.
    pub spares: Spares,
    pub trials: u64,
    pub seed: u64,
}

/// Survivability lookup shared by all trials; small arrays get a full table.
enum SurvivalOracle<'a> {
    Table(Vec<bool>),
    Direct(&'a Layout),
}

impl SurvivalOracle<'_> {
    fn build(layout: &Layout) -> Result<SurvivalOracle<'_>, SimError> {
        if layout.n <= 16 {
            let mut table = Vec::with_capacity(1usize << layout.n);
            for mask in 0..(1u64 << layout.n) {
                table.push(
                    layout
                        .survives(FailureSet(mask))
                        .map_err(|e| SimError::Model(e.to_string()))?,
                );
            }
            Ok(SurvivalOracle::Table(table))
        } else {
            Ok(SurvivalOracle::Direct(layout))
        }
    }

    fn survives(&self, mask: u64) -> bool {
        match self {
            SurvivalOracle::Table(t) => t[mask as usize],
            SurvivalOracle::Direct(l) => l.survives(FailureSet(mask)).unwrap_or(false),
        }
    }
}

/// Chain prepared for sampling: per-state exit rate and cumulative jump
/// weights.
struct JumpChain {
    initial: usize,
    loss: Vec<bool>,
    exit: Vec<f64>,
    jumps: Vec<Vec<(f64, usize)>>,
}

impl JumpChain {
    fn build(model: &MarkovModel) -> Result<JumpChain, SimError> {
        model.validate().map_err(|e| SimError::Model(e.to_string()))?;
        let n = model.states.len();
        let mut exit = vec![0.0; n];
        let mut jumps = vec![Vec::new(); n];
        for (from, row) in model.rates.iter().enumerate() {
            let mut cum = 0.0;
            for (to, r) in row.iter().enumerate() {
                let r = ratio_to_f64(r);
                if r > 0.0 {
                    cum += r;
                    jumps[from].push((cum, to));
                }
            }
            exit[from] = cum;
        }
        // every reachable state must still be able to reach a loss state,
        // or a walk could wander (or sit) forever
        let reachable = flood(n, model.initial, |s| {
            jumps[s].iter().map(|&(_, to)| to).collect()
        });
        let mut into = vec![Vec::new(); n];
        for (from, out) in jumps.iter().enumerate() {
            for &(_, to) in out {
                into[to].push(from);
            }
        }
        let mut absorbing_side = vec![false; n];
        let mut stack: Vec<usize> =
            (0..n).filter(|&s| model.loss[s]).collect();
        for &s in &stack {
            absorbing_side[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &into[s] {
                if !absorbing_side[p] {
                    absorbing_side[p] = true;
                    stack.push(p);
                }
            }
        }
        for s in 0..n {
            if reachable[s] && !absorbing_side[s] {
                return Err(SimError::Model(format!(
                    "state {:?} cannot reach any loss state",
                    model.states[s]
                )));
            }
        }
        Ok(JumpChain { initial: model.initial, loss: model.loss.clone(), exit, jumps })
    }

    fn trial(&self, rng: &mut ChaCha12Rng) -> f64 {
        let mut state = self.initial;
        let mut t = 0.0;
        while !self.loss[state] {
            t += Exp::new(self.exit[state]).unwrap().sample(rng);
            let pick = rng.gen::<f64>() * self.exit[state];
            let row = &self.jumps[state];
            state = row
                .iter()
                .find(|&&(cum, _)| pick < cum)
                .map(|&(_, to)| to)
                .unwrap_or(row.last().unwrap().1);
        }
        t
    }
}

fn flood(n: usize, start: usize, next: impl Fn(usize) -> Vec<usize>) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(s) = stack.pop() {
        for to in next(s) {
            if !seen[to] {
                seen[to] = true;
                stack.push(to);
            }
        }
    }
    seen
}

/// Estimate the mean time to data loss over independent trials.
///
/// Each trial has its own RNG substream, so results do not depend on how
/// trials are distributed over threads and replay exactly for a given seed.
pub fn mc_reliability(config: &McReliabilityConfig) -> Result<Estimate, SimError> {
    ensure(config.trials >= 1, "need at least one trial")?;
    config.lifetime.validate()?;
    config.repair.validate()?;
    let samples = match &config.target {
        McTarget::Layout(layout) => {
            ensure(layout.n >= 1, "layout has no disks")?;
            let oracle = SurvivalOracle::build(layout)?;
            run_trials(config.trials, config.seed, |rng| {
                layout_trial(layout.n, &oracle, config, rng)
            })
        }
        McTarget::Markov(model) => {
            let chain = JumpChain::build(model)?;
            run_trials(config.trials, config.seed, |rng| chain.trial(rng))
        }
    };
    let mut tally = Tally::new();
    for s in &samples {
        tally.push(*s);
    }
    Ok(tally.estimate())
}

/// Run trials on worker threads, each trial on its own RNG stream, and
/// collect per-trial outcomes in trial order.
fn run_trials<F>(trials: u64, seed: u64, trial: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha12Rng) -> f64 + Sync,
{
    let mut samples = vec![0.0f64; trials as usize];
    let threads = if trials < 2_000 {
        1
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(16)
    };
    let chunk = samples.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (i, slice) in samples.chunks_mut(chunk).enumerate() {
            let trial = &trial;
            scope.spawn(move || {
                let first = i * chunk;
                for (j, out) in slice.iter_mut().enumerate() {
                    let mut rng = ChaCha12Rng::seed_from_u64(seed);
                    rng.set_stream((first + j) as u64 + 1);
                    *out = trial(&mut rng);
                }
            });
        }
    });
    samples
}

/// One failure/repair history, ending at the first unsurvivable set.
fn layout_trial(
    n: u32,
    oracle: &SurvivalOracle<'_>,
    config: &McReliabilityConfig,
    rng: &mut ChaCha12Rng,
) -> f64 {
    let mut failed: u64 = 0;
    let mut next_fail: Vec<f64> = (0..n).map(|_| config.lifetime.sample(rng)).collect();
    let mut repairs: Vec<(f64, u32)> = Vec::new();
    let mut spares_left = match config.spares {
        Spares::Unlimited => u64::MAX,
        Spares::Finite(k) => k as u64,
    };
    loop {
        let mut fail_at = f64::INFINITY;
        let mut fail_disk = 0;
        for (d, &t) in next_fail.iter().enumerate() {
            if t < fail_at {
                fail_at = t;
                fail_disk = d as u32;
            }
        }
        let mut repair_at = f64::INFINITY;
        let mut repair_idx = usize::MAX;
        for (i, &(t, _)) in repairs.iter().enumerate() {
            if t < repair_at {
                repair_at = t;
                repair_idx = i;
            }
        }
        if repair_at < fail_at {
            let (t, disk) = repairs.swap_remove(repair_idx);
            failed &= !(1u64 << disk);
            // replacement disk is good as new
            next_fail[disk as usize] = t + config.lifetime.sample(rng);
        } else {
            let t = fail_at;
            failed |= 1u64 << fail_disk;
            next_fail[fail_disk as usize] = f64::INFINITY;
            if !oracle.survives(failed) {
                return t;
            }
            if spares_left > 0 {
                if let Some(d) = config.repair.sample(rng) {
                    repairs.push((t + d, fail_disk));
                    if spares_left != u64::MAX {
                        spares_left -= 1;
                    }
                }
            }
        }
    }
}
