//! Running-moment tallies and confidence estimates shared by the Monte
//! Carlo samplers and the discrete-event simulator.

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    /// Underlying sample (or step) count.
    pub samples: u64,
}

impl Estimate {
    /// Two-sided 95% half width. Uses the t quantile for the batch-means
    /// designs in this crate (around 30 degrees of freedom) and is mildly
    /// conservative for large iid samples.
    pub fn half_width_95(&self) -> f64 {
        2.04 * self.stderr
    }

    pub fn ci_95(&self) -> (f64, f64) {
        let h = self.half_width_95();
        (self.mean - h, self.mean + h)
    }

    /// |mean - reference| measured in standard errors.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == reference { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - reference).abs() / self.stderr
        }
    }
}

/// Streaming mean/variance accumulator (Welford update).
#[derive(Debug, Clone, Copy, Default)]
pub struct Tally {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero until two samples arrive.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate { mean: self.mean(), stderr: self.stderr(), samples: self.n }
    }
}

/// Number of batches used for correlated series.
pub const BATCHES: usize = 32;

/// Batch-means estimator for a correlated stationary series: the series is
/// cut into `BATCHES` contiguous batches and the batch averages are treated
/// as independent. `samples` in the result counts raw steps, not batches.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    batch_len: u64,
    current: Tally,
    batches: Tally,
    total: u64,
}

impl BatchMeans {
    /// Plan for a series of `total_steps` observations.
    pub fn new(total_steps: u64) -> Self {
        let batch_len = (total_steps / BATCHES as u64).max(1);
        Self { batch_len, current: Tally::new(), batches: Tally::new(), total: 0 }
    }

    pub fn push(&mut self, x: f64) {
        self.current.push(x);
        self.total += 1;
        if self.current.count() == self.batch_len {
            self.batches.push(self.current.mean());
            self.current = Tally::new();
        }
    }

    pub fn estimate(&self) -> Estimate {
        // a short trailing partial batch is dropped
        Estimate {
            mean: self.batches.mean(),
            stderr: self.batches.stderr(),
            samples: self.batches.count() * self.batch_len,
        }
    }
}

/// Proportion estimate with binomial standard error.
pub fn bernoulli_estimate(successes: u64, trials: u64) -> Estimate {
    assert!(trials > 0, "no trials");
    assert!(successes <= trials, "more successes than trials");
    let p = successes as f64 / trials as f64;
    Estimate { mean: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), samples: trials }
}
