//! Closed-form queueing models for mirrored disk pairs: M/G/1 waiting times,
//! read-priority service, per-mode utilization limits, mirrored-read routing
//! policies, fork-join writes, and vacationing-server rebuild estimates.

use crate::exact::{rat, Ratio};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueueError {
    #[error("offered load {rho} saturates the station")]
    Unstable { rho: f64 },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

fn ensure(cond: bool, msg: &str) -> Result<(), QueueError> {
    if cond {
        Ok(())
    } else {
        Err(QueueError::Invalid(msg.to_string()))
    }
}

fn ensure_stable(rho: f64) -> Result<(), QueueError> {
    if rho < 1.0 {
        Ok(())
    } else {
        Err(QueueError::Unstable { rho })
    }
}

/// First two moments of a service-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceMoments {
    /// Mean service time.
    pub mean: f64,
    /// Second moment (not the variance).
    pub second: f64,
}

impl ServiceMoments {
    pub fn new(mean: f64, second: f64) -> Result<Self, QueueError> {
        ensure(mean.is_finite() && mean > 0.0, "service mean must be positive")?;
        ensure(
            second.is_finite() && second >= mean * mean,
            "second moment below mean^2",
        )?;
        Ok(Self { mean, second })
    }

    pub fn exponential(mean: f64) -> Result<Self, QueueError> {
        Self::new(mean, 2.0 * mean * mean)
    }

    pub fn deterministic(mean: f64) -> Result<Self, QueueError> {
        Self::new(mean, mean * mean)
    }

    /// Build from mean and squared coefficient of variation.
    pub fn from_scv(mean: f64, scv: f64) -> Result<Self, QueueError> {
        ensure(scv >= 0.0, "squared coefficient of variation must be >= 0")?;
        Self::new(mean, (1.0 + scv) * mean * mean)
    }

    pub fn scv(&self) -> f64 {
        (self.second - self.mean * self.mean) / (self.mean * self.mean)
    }

    /// Mean residual service time seen by a random arrival.
    pub fn residual(&self) -> f64 {
        self.second / (2.0 * self.mean)
    }

    /// Probabilistic mixture; weights need not be normalized.
    fn mix(parts: &[(f64, ServiceMoments)]) -> Option<Self> {
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if total <= 0.0 {
            return None;
        }
        let mean = parts.iter().map(|(w, m)| w * m.mean).sum::<f64>() / total;
        let second = parts.iter().map(|(w, m)| w * m.second).sum::<f64>() / total;
        Some(Self { mean, second })
    }
}

/// Whether both disks of a mirrored pair are up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskMode {
    Normal,
    Degraded,
}

/// Array-level arrival stream split across mirrored pairs.
///
/// Reads are split over the two disks of a pair in normal mode and fall
/// entirely on the survivor in degraded mode; writes always hit both disks.
#[derive(Debug, Clone, Copy)]
pub struct WorkloadMix {
    /// Array arrival rate.
    pub array_rate: f64,
    /// Number of mirrored pairs.
    pub pairs: u32,
    /// Fraction of arrivals that are reads.
    pub read_fraction: f64,
    pub read: ServiceMoments,
    pub write: ServiceMoments,
}

impl WorkloadMix {
    pub fn new(
        array_rate: f64,
        pairs: u32,
        read_fraction: f64,
        read: ServiceMoments,
        write: ServiceMoments,
    ) -> Result<Self, QueueError> {
        ensure(array_rate.is_finite() && array_rate >= 0.0, "array rate must be >= 0")?;
        ensure(pairs >= 1, "need at least one pair")?;
        ensure(
            (0.0..=1.0).contains(&read_fraction),
            "read fraction outside [0, 1]",
        )?;
        Ok(Self { array_rate, pairs, read_fraction, read, write })
    }

    /// Per-pair arrival rate.
    pub fn pair_rate(&self) -> f64 {
        self.array_rate / self.pairs as f64
    }

    pub fn write_fraction(&self) -> f64 {
        1.0 - self.read_fraction
    }

    /// Arrival rate and service moments of the stream one disk serves.
    pub fn disk_demand(&self, mode: DiskMode) -> (f64, ServiceMoments) {
        let lambda = self.pair_rate();
        let read_share = match mode {
            DiskMode::Normal => self.read_fraction / 2.0,
            DiskMode::Degraded => self.read_fraction,
        };
        let write_share = self.write_fraction();
        let moments = ServiceMoments::mix(&[(read_share, self.read), (write_share, self.write)])
            .unwrap_or(self.read);
        (lambda * (read_share + write_share), moments)
    }

    /// Per-disk utilization.
    pub fn utilization(&self, mode: DiskMode) -> f64 {
        let (rate, moments) = self.disk_demand(mode);
        rate * moments.mean
    }

    /// Read component of the per-disk utilization.
    pub fn read_utilization(&self, mode: DiskMode) -> f64 {
        let share = match mode {
            DiskMode::Normal => self.read_fraction / 2.0,
            DiskMode::Degraded => self.read_fraction,
        };
        self.pair_rate() * share * self.read.mean
    }
}

/// Mean M/G/1 queueing delay: W = lambda * x2 / (2 (1 - rho)).
pub fn mg1_wait(lambda: f64, service: ServiceMoments) -> Result<f64, QueueError> {
    ensure(lambda.is_finite() && lambda >= 0.0, "arrival rate must be >= 0")?;
    let rho = lambda * service.mean;
    ensure_stable(rho)?;
    Ok(lambda * service.second / (2.0 * (1.0 - rho)))
}

pub fn mg1_response(lambda: f64, service: ServiceMoments) -> Result<f64, QueueError> {
    Ok(mg1_wait(lambda, service)? + service.mean)
}

/// Mean busy period of the station: x / (1 - rho).
pub fn busy_period(lambda: f64, service: ServiceMoments) -> Result<f64, QueueError> {
    ensure(lambda.is_finite() && lambda >= 0.0, "arrival rate must be >= 0")?;
    let rho = lambda * service.mean;
    ensure_stable(rho)?;
    Ok(service.mean / (1.0 - rho))
}

#[derive(Debug, Clone, Copy)]
pub struct PriorityWait {
    /// Delay of reads when they are served ahead of queued writes.
    pub read_wait: f64,
    /// Delay of the same stream under FCFS.
    pub fcfs_wait: f64,
    /// read_wait / fcfs_wait = (1 - rho) / (1 - rho_r).
    pub ratio: f64,
}

/// Queueing delay of reads given non-preemptive priority over writes.
///
/// Only the read utilization survives in the denominator, so the
/// improvement over FCFS is the factor (1 - rho) / (1 - rho_r).
pub fn priority_read_wait(mix: &WorkloadMix, mode: DiskMode) -> Result<PriorityWait, QueueError> {
    let (rate, demand) = mix.disk_demand(mode);
    let rho = mix.utilization(mode);
    let rho_r = mix.read_utilization(mode);
    ensure_stable(rho)?;
    let fcfs_wait = rate * demand.second / (2.0 * (1.0 - rho));
    let read_wait = rate * demand.second / (2.0 * (1.0 - rho_r));
    Ok(PriorityWait { read_wait, fcfs_wait, ratio: (1.0 - rho) / (1.0 - rho_r) })
}

#[derive(Debug, Clone, Copy)]
pub struct ModeMetrics {
    pub rho: f64,
    pub rho_r: f64,
    pub rho_w: f64,
    /// Largest sustainable per-pair arrival rate.
    pub pair_rate_max: f64,
    /// Largest sustainable array arrival rate.
    pub array_rate_max: f64,
}

/// Utilizations and saturation throughput of one disk in the given mode.
pub fn mode_metrics(mix: &WorkloadMix, mode: DiskMode) -> ModeMetrics {
    let read_share = match mode {
        DiskMode::Normal => mix.read_fraction / 2.0,
        DiskMode::Degraded => mix.read_fraction,
    };
    let per_arrival_work = read_share * mix.read.mean + mix.write_fraction() * mix.write.mean;
    let pair_rate_max = 1.0 / per_arrival_work;
    ModeMetrics {
        rho: mix.utilization(mode),
        rho_r: mix.read_utilization(mode),
        rho_w: mix.pair_rate() * mix.write_fraction() * mix.write.mean,
        pair_rate_max,
        array_rate_max: pair_rate_max * mix.pairs as f64,
    }
}

/// Per-survivor load multiplier when one of n cluster disks fails and its
/// reads are spread evenly over the rest: n / (n - 1).
pub fn cluster_degraded_load_factor(n: u32) -> Result<Ratio, QueueError> {
    ensure(n >= 2, "cluster needs at least two disks")?;
    Ok(rat(n as i64, (n - 1) as i64))
}

/// Array-mean read response with `failed` of `pairs` mirrors degraded.
pub fn overall_response(
    failed: u32,
    pairs: u32,
    r_degraded: f64,
    r_normal: f64,
) -> Result<f64, QueueError> {
    ensure(pairs >= 1, "need at least one pair")?;
    ensure(failed <= pairs, "more failed pairs than pairs")?;
    let frac = failed as f64 / pairs as f64;
    Ok(frac * r_degraded + (1.0 - frac) * r_normal)
}

/// How reads are routed across the two disks of a mirrored pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorPolicy {
    /// Independent random split: each disk is an M/M/1.
    Uniform,
    /// Strict alternation: each disk sees Erlang-2 interarrival times.
    RoundRobin,
    /// Single shared queue feeding both disks (M/M/2).
    Shared,
    /// Send every read to both disks and keep the first completion.
    DuplicateMin,
}

#[derive(Debug, Clone, Copy)]
pub struct MirrorResponse {
    pub response: f64,
    /// Queueing delay, when the policy has a meaningful single-queue wait.
    pub wait: Option<f64>,
    /// Root of s^2 - (1 + 4 rho) s + 4 rho^2 = 0 for the round-robin case.
    pub erlang_root: Option<f64>,
}

/// Mean read response time under the given routing policy.
///
/// `lambda` is the arrival rate one disk sees (after any split the caller
/// applies); for `DuplicateMin` every request reaches both disks, so pass
/// the full read rate. Service is exponential with mean `mean_service`.
pub fn mirrored_read_response(
    policy: MirrorPolicy,
    lambda: f64,
    mean_service: f64,
) -> Result<MirrorResponse, QueueError> {
    ensure(lambda.is_finite() && lambda >= 0.0, "arrival rate must be >= 0")?;
    ensure(mean_service.is_finite() && mean_service > 0.0, "service mean must be positive")?;
    let rho = lambda * mean_service;
    ensure_stable(rho)?;
    let resp = match policy {
        MirrorPolicy::Uniform => {
            let r = mean_service / (1.0 - rho);
            MirrorResponse { response: r, wait: Some(r - mean_service), erlang_root: None }
        }
        MirrorPolicy::RoundRobin => {
            // Smaller root of s^2 - (1 + 4 rho) s + 4 rho^2; the queue seen
            // by alternating arrivals is geometric in s.
            let sigma = (1.0 + 4.0 * rho - (1.0 + 8.0 * rho).sqrt()) / 2.0;
            let wait = sigma * mean_service / (1.0 - sigma);
            MirrorResponse {
                response: wait + mean_service,
                wait: Some(wait),
                erlang_root: Some(sigma),
            }
        }
        MirrorPolicy::Shared => {
            let r = mean_service / (1.0 - rho * rho);
            MirrorResponse { response: r, wait: Some(r - mean_service), erlang_root: None }
        }
        MirrorPolicy::DuplicateMin => {
            // Both responses are exponential with the M/M/1 mean; the first
            // completion halves it.
            let r = mean_service / (1.0 - rho);
            MirrorResponse { response: r / 2.0, wait: None, erlang_root: None }
        }
    };
    Ok(resp)
}

#[derive(Debug, Clone, Copy)]
pub struct ForkJoinWrite {
    /// Response of a single disk, x / (1 - rho).
    pub single: f64,
    /// Two-way fork-join write completion estimate.
    pub fork_join: f64,
    /// Independence bound H_2 * single = 1.5 * single.
    pub upper_bound: f64,
}

/// Completion time of a write forked to both disks of a pair, joined on the
/// slower one: R1 * (1.5 - rho / 8), never above the 1.5 * R1 bound.
pub fn forkjoin_write_response(lambda: f64, mean_service: f64) -> Result<ForkJoinWrite, QueueError> {
    ensure(lambda.is_finite() && lambda >= 0.0, "arrival rate must be >= 0")?;
    ensure(mean_service.is_finite() && mean_service > 0.0, "service mean must be positive")?;
    let rho = lambda * mean_service;
    ensure_stable(rho)?;
    let single = mean_service / (1.0 - rho);
    Ok(ForkJoinWrite {
        single,
        fork_join: single * (1.5 - rho / 8.0),
        upper_bound: 1.5 * single,
    })
}

/// Rebuild-pass parameters for a vacationing-server rebuild.
#[derive(Debug, Clone, Copy)]
pub struct RebuildParams {
    /// One disk rotation.
    pub t_rot: f64,
    /// Tracks to copy.
    pub n_track: u64,
    /// Moments of one rebuild vacation (one track copy).
    pub vacation: ServiceMoments,
}

impl RebuildParams {
    pub fn new(t_rot: f64, n_track: u64, vacation: ServiceMoments) -> Result<Self, QueueError> {
        ensure(t_rot.is_finite() && t_rot > 0.0, "rotation time must be positive")?;
        ensure(n_track >= 1, "need at least one track")?;
        Ok(Self { t_rot, n_track, vacation })
    }

    /// One full-rotation track copy per vacation, deterministic.
    pub fn deterministic_track(t_rot: f64, n_track: u64) -> Result<Self, QueueError> {
        Ok(Self { t_rot, n_track, vacation: ServiceMoments::deterministic(t_rot)? })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VsmRebuild {
    /// User-request delay including the rebuild-vacation residual.
    pub wait: f64,
    /// Delay cycle: time to drain the backlog one vacation leaves behind.
    pub delay_cycle: f64,
    /// Expected time to copy all tracks while serving user requests.
    pub rebuild_time: f64,
    /// Mean time between idle periods (infinite when no requests arrive).
    pub cycle_time: f64,
    /// Expected vacations completed per cycle (infinite at zero load).
    pub reads_per_cycle: f64,
    /// True when a vacation on average spawns at least one arrival per
    /// rotation, so idle periods stop occurring and rebuild starves.
    pub starved: bool,
}

/// Vacationing-server model of a rebuild: the survivor copies one track per
/// idle period and resumes user service on arrival.
///
/// The station is the surviving disk of a degraded pair. The wait adds the
/// vacation residual v2/(2v) to the M/G/1 delay; the rebuild time scales the
/// idle-disk copy time N_track * T_rot by (1 + lambda * delay_cycle), which
/// equals N_track * cycle_time / reads_per_cycle when lambda > 0 but stays
/// finite as the load vanishes.
pub fn vsm_rebuild(mix: &WorkloadMix, rebuild: &RebuildParams) -> Result<VsmRebuild, QueueError> {
    let (lambda, demand) = mix.disk_demand(DiskMode::Degraded);
    let rho = lambda * demand.mean;
    ensure_stable(rho)?;
    let vac_residual = rebuild.vacation.residual();
    let wait = lambda * demand.second / (2.0 * (1.0 - rho)) + vac_residual;
    let delay_cycle = (demand.mean + vac_residual) / (1.0 - rho);
    let p = lambda * rebuild.t_rot;
    let rebuild_time = rebuild.n_track as f64 * rebuild.t_rot * (1.0 + lambda * delay_cycle);
    let (cycle_time, reads_per_cycle) = if lambda > 0.0 {
        (delay_cycle + 1.0 / lambda, 1.0 / p)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(VsmRebuild { wait, delay_cycle, rebuild_time, cycle_time, reads_per_cycle, starved: p >= 1.0 })
}

/// Load-increase factor of clustered parity sparing: alpha = (g - 1) / (n - 1)
/// for parity groups of g disks out of n.
pub fn craid_alpha(n: u32, g: u32) -> Result<Ratio, QueueError> {
    ensure(n >= 2, "need at least two disks")?;
    ensure((2..=n).contains(&g), "group size outside [2, n]")?;
    Ok(rat((g - 1) as i64, (n - 1) as i64))
}
