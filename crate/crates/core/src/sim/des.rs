//! Discrete-event simulation of mirrored-pair queueing: read routing,
//! write replication, non-preemptive read priority, and the two rebuild
//! procedures (idle-time track reads vs a circulating track-read customer).
//!
//! Runs replay exactly for a given seed: the event heap breaks time ties by
//! sequence number and all randomness comes from one counter-based stream.

use crate::sim::stats::{BatchMeans, Estimate, Tally};
use crate::sim::{ensure, SimError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

/// Per-request service time model.
#[derive(Debug, Clone, Copy)]
pub enum ServiceModel {
    Exponential { mean: f64 },
    Deterministic { mean: f64 },
    /// Seek + rotational latency + transfer, tracking the head position.
    ParametricDisk(DiskTiming),
}

impl ServiceModel {
    fn validate(&self) -> Result<(), SimError> {
        match self {
            ServiceModel::Exponential { mean } | ServiceModel::Deterministic { mean } => {
                ensure(mean.is_finite() && *mean > 0.0, "service mean must be positive")
            }
            ServiceModel::ParametricDisk(d) => d.validate(),
        }
    }

    fn sample(&self, rng: &mut ChaCha12Rng, head: &mut u32) -> f64 {
        match self {
            ServiceModel::Exponential { mean } => Exp::new(1.0 / mean).unwrap().sample(rng),
            ServiceModel::Deterministic { mean } => *mean,
            ServiceModel::ParametricDisk(d) => {
                let target = rng.gen_range(0..d.cylinders);
                let dist = target.abs_diff(*head);
                *head = target;
                d.seek_time(dist) + rng.gen::<f64>() * d.t_rot + d.transfer
            }
        }
    }
}

/// Piecewise seek-time characteristic: a short-stroke plateau, a square-root
/// middle range up to one third of the stroke, then linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskTiming {
    pub cylinders: u32,
    /// Seek time for strokes up to `plateau_span` cylinders.
    pub plateau_seek: f64,
    pub plateau_span: u32,
    pub t_rot: f64,
    pub transfer: f64,
}

impl DiskTiming {
    pub fn new(cylinders: u32, plateau_seek: f64, t_rot: f64, transfer: f64) -> Result<Self, SimError> {
        let d = DiskTiming { cylinders, plateau_seek, plateau_span: 100, t_rot, transfer };
        d.validate()?;
        Ok(d)
    }

    pub fn with_plateau_span(mut self, span: u32) -> Result<Self, SimError> {
        self.plateau_span = span;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), SimError> {
        ensure(self.plateau_span >= 1, "plateau span must be >= 1")?;
        ensure(
            (self.cylinders as f64 - 1.0) / 3.0 > self.plateau_span as f64,
            "cylinder count too small for the plateau span",
        )?;
        ensure(
            self.plateau_seek.is_finite() && self.plateau_seek > 0.0,
            "plateau seek time must be positive",
        )?;
        ensure(self.t_rot.is_finite() && self.t_rot > 0.0, "rotation time must be positive")?;
        ensure(self.transfer.is_finite() && self.transfer >= 0.0, "transfer time must be >= 0")
    }

    /// Seek time over `d` cylinders; continuous across the three segments.
    pub fn seek_time(&self, d: u32) -> f64 {
        if d == 0 {
            return 0.0;
        }
        let knee = (self.cylinders as f64 - 1.0) / 3.0;
        let scale = self.plateau_seek / (self.plateau_span as f64).sqrt();
        let d = d as f64;
        if d <= self.plateau_span as f64 {
            self.plateau_seek
        } else if d <= knee {
            scale * d.sqrt()
        } else {
            scale * knee.sqrt() + scale / (2.0 * knee.sqrt()) * (d - knee)
        }
    }
}

/// How read requests pick a disk. Writes always go to every disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutePolicy {
    Uniform,
    RoundRobin,
    /// Join the shortest queue, counting the request in service.
    Jsq,
}

#[derive(Debug, Clone, Copy)]
pub enum Horizon {
    Arrivals(u64),
    Time(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct DesConfig {
    /// Poisson arrival rate of the whole request stream.
    pub arrival_rate: f64,
    pub read_fraction: f64,
    pub disks: u32,
    pub service: ServiceModel,
    pub routing: RoutePolicy,
    /// Serve queued reads ahead of queued writes (non-preemptive).
    pub read_priority: bool,
    pub horizon: Horizon,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesQueueResult {
    pub wait: Estimate,
    pub response: Estimate,
    pub read_wait: Option<Estimate>,
    pub write_wait: Option<Estimate>,
    /// Time-average number of requests in the system.
    pub time_avg_in_system: f64,
    /// The same quantity sampled by arrivals just before they join.
    pub arrival_avg_in_system: Estimate,
    /// Completed request copies.
    pub served: u64,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    t_arr: f64,
    seq: u64,
    read: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ev {
    t: f64,
    seq: u64,
    kind: EvKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EvKind {
    Arrival,
    Done { disk: u32 },
}

impl Eq for Ev {}

impl PartialOrd for Ev {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ev {
    // reversed so the std max-heap pops the earliest (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then(other.seq.cmp(&self.seq))
    }
}

struct Station {
    reads: VecDeque<Job>,
    writes: VecDeque<Job>,
    busy: bool,
    head: u32,
}

impl Station {
    fn depth(&self) -> usize {
        self.reads.len() + self.writes.len() + self.busy as usize
    }

    /// Next job to serve under the class rule; FCFS within and, without
    /// priority, across classes.
    fn take_next(&mut self, read_priority: bool) -> Option<Job> {
        let from_reads = match (self.reads.front(), self.writes.front()) {
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => return None,
            (Some(r), Some(w)) => {
                read_priority || r.t_arr < w.t_arr || (r.t_arr == w.t_arr && r.seq < w.seq)
            }
        };
        if from_reads {
            self.reads.pop_front()
        } else {
            self.writes.pop_front()
        }
    }
}

/// Simulate routed reads and replicated writes over `disks` stations.
pub fn des_queue(cfg: &DesConfig) -> Result<DesQueueResult, SimError> {
    ensure(cfg.arrival_rate.is_finite() && cfg.arrival_rate > 0.0, "arrival rate must be positive")?;
    ensure((0.0..=1.0).contains(&cfg.read_fraction), "read fraction outside [0, 1]")?;
    ensure((1..=64).contains(&cfg.disks), "disk count outside [1, 64]")?;
    cfg.service.validate()?;
    let (target_arrivals, t_end) = match cfg.horizon {
        Horizon::Arrivals(n) => {
            ensure(n >= 100, "need at least 100 arrivals")?;
            (n, f64::INFINITY)
        }
        Horizon::Time(t) => {
            ensure(t.is_finite() && t > 0.0, "horizon must be positive")?;
            (u64::MAX, t)
        }
    };

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let interarrival = Exp::new(cfg.arrival_rate).unwrap();
    let expected_arrivals = match cfg.horizon {
        Horizon::Arrivals(n) => n,
        Horizon::Time(t) => (cfg.arrival_rate * t) as u64,
    };
    let copies_per_write = cfg.disks as u64;
    let expected_copies = (expected_arrivals as f64
        * (cfg.read_fraction + (1.0 - cfg.read_fraction) * copies_per_write as f64))
        as u64;
    let warm = expected_copies / 10;

    let mut wait_all = BatchMeans::new(expected_copies.saturating_sub(warm).max(64));
    let mut resp_all = BatchMeans::new(expected_copies.saturating_sub(warm).max(64));
    let mut wait_read = BatchMeans::new(
        ((expected_copies.saturating_sub(warm)) as f64 * cfg.read_fraction).max(64.0) as u64,
    );
    let mut wait_write = BatchMeans::new(
        ((expected_copies.saturating_sub(warm)) as f64 * (1.0 - cfg.read_fraction)).max(64.0)
            as u64,
    );
    let mut arr_depth = BatchMeans::new(expected_arrivals.saturating_sub(expected_arrivals / 10).max(64));

    let mut stations: Vec<Station> = (0..cfg.disks)
        .map(|_| Station { reads: VecDeque::new(), writes: VecDeque::new(), busy: false, head: 0 })
        .collect();
    let mut heap: BinaryHeap<Ev> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut admitted = 0u64;
    let mut recorded = 0u64;
    let mut served = 0u64;
    let mut in_system = 0u64;
    let mut area = 0.0f64;
    let mut last_t = 0.0f64;
    let mut rr_next = 0u32;
    let depth_cap = 10_000 * cfg.disks as u64;

    let first = interarrival.sample(&mut rng);
    if first <= t_end {
        heap.push(Ev { t: first, seq, kind: EvKind::Arrival });
        seq += 1;
    }

    while let Some(ev) = heap.pop() {
        area += in_system as f64 * (ev.t - last_t);
        last_t = ev.t;
        match ev.kind {
            EvKind::Arrival => {
                admitted += 1;
                if admitted > expected_arrivals / 10 {
                    arr_depth.push(in_system as f64);
                }
                let read = rng.gen::<f64>() < cfg.read_fraction;
                let mut touched: Vec<u32> = Vec::with_capacity(if read { 1 } else { cfg.disks as usize });
                if read {
                    let disk = match cfg.routing {
                        RoutePolicy::Uniform => rng.gen_range(0..cfg.disks),
                        RoutePolicy::RoundRobin => {
                            let d = rr_next % cfg.disks;
                            rr_next = rr_next.wrapping_add(1);
                            d
                        }
                        RoutePolicy::Jsq => {
                            let mut best = 0u32;
                            for d in 1..cfg.disks {
                                if stations[d as usize].depth() < stations[best as usize].depth() {
                                    best = d;
                                }
                            }
                            best
                        }
                    };
                    stations[disk as usize].reads.push_back(Job { t_arr: ev.t, seq, read: true });
                    seq += 1;
                    in_system += 1;
                    touched.push(disk);
                } else {
                    for disk in 0..cfg.disks {
                        stations[disk as usize]
                            .writes
                            .push_back(Job { t_arr: ev.t, seq, read: false });
                        seq += 1;
                        in_system += 1;
                        touched.push(disk);
                    }
                }
                if in_system > depth_cap {
                    return Err(SimError::Unstable { in_system, at: ev.t });
                }
                for disk in touched {
                    start_service(
                        &mut stations[disk as usize],
                        disk,
                        ev.t,
                        cfg,
                        &mut rng,
                        &mut heap,
                        &mut seq,
                        &mut recorded,
                        warm,
                        &mut wait_all,
                        &mut resp_all,
                        &mut wait_read,
                        &mut wait_write,
                    );
                }
                if admitted < target_arrivals {
                    let next = ev.t + interarrival.sample(&mut rng);
                    if next <= t_end {
                        heap.push(Ev { t: next, seq, kind: EvKind::Arrival });
                        seq += 1;
                    }
                }
            }
            EvKind::Done { disk } => {
                in_system -= 1;
                served += 1;
                stations[disk as usize].busy = false;
                start_service(
                    &mut stations[disk as usize],
                    disk,
                    ev.t,
                    cfg,
                    &mut rng,
                    &mut heap,
                    &mut seq,
                    &mut recorded,
                    warm,
                    &mut wait_all,
                    &mut resp_all,
                    &mut wait_read,
                    &mut wait_write,
                );
            }
        }
    }

    let time_avg = if last_t > 0.0 { area / last_t } else { 0.0 };
    Ok(DesQueueResult {
        wait: wait_all.estimate(),
        response: resp_all.estimate(),
        read_wait: (cfg.read_fraction > 0.0).then(|| wait_read.estimate()),
        write_wait: (cfg.read_fraction < 1.0).then(|| wait_write.estimate()),
        time_avg_in_system: time_avg,
        arrival_avg_in_system: arr_depth.estimate(),
        served,
    })
}

#[allow(clippy::too_many_arguments)]
fn start_service(
    station: &mut Station,
    disk: u32,
    t: f64,
    cfg: &DesConfig,
    rng: &mut ChaCha12Rng,
    heap: &mut BinaryHeap<Ev>,
    seq: &mut u64,
    recorded: &mut u64,
    warm: u64,
    wait_all: &mut BatchMeans,
    resp_all: &mut BatchMeans,
    wait_read: &mut BatchMeans,
    wait_write: &mut BatchMeans,
) {
    if station.busy {
        return;
    }
    let Some(job) = station.take_next(cfg.read_priority) else {
        return;
    };
    let svc = cfg.service.sample(rng, &mut station.head);
    let wait = t - job.t_arr;
    *recorded += 1;
    if *recorded > warm {
        wait_all.push(wait);
        resp_all.push(wait + svc);
        if job.read {
            wait_read.push(wait);
        } else {
            wait_write.push(wait);
        }
    }
    station.busy = true;
    heap.push(Ev { t: t + svc, seq: *seq, kind: EvKind::Done { disk } });
    *seq += 1;
}

/// Which rebuild procedure the degraded survivor runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RebuildMode {
    /// Read one track whenever the queue empties; a started track read
    /// always completes before user service resumes.
    Vsm,
    /// A permanent track-read customer that rejoins the tail of the FCFS
    /// queue after each completed track.
    Pcm,
}

#[derive(Debug, Clone, Copy)]
pub struct RebuildSimConfig {
    /// Poisson rate of external requests at the surviving disk (0 allowed).
    pub arrival_rate: f64,
    pub service: ServiceModel,
    /// One track read takes a full rotation.
    pub t_rot: f64,
    pub n_track: u64,
    pub mode: RebuildMode,
    pub replications: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RebuildSimResult {
    /// Time until the last track is read, across replications.
    pub rebuild_time: Estimate,
    /// External-request delay (mean of per-replication means).
    pub wait: Estimate,
    pub response: Estimate,
    pub served: u64,
}

enum FifoItem {
    External(f64),
    TrackRead,
}

/// Simulate one rebuild pass per replication and pool the results.
pub fn des_rebuild(cfg: &RebuildSimConfig) -> Result<RebuildSimResult, SimError> {
    ensure(cfg.arrival_rate.is_finite() && cfg.arrival_rate >= 0.0, "arrival rate must be >= 0")?;
    cfg.service.validate()?;
    ensure(cfg.t_rot.is_finite() && cfg.t_rot > 0.0, "rotation time must be positive")?;
    ensure(cfg.n_track >= 1, "need at least one track")?;
    ensure(cfg.replications >= 1, "need at least one replication")?;

    let mut done_tally = Tally::new();
    let mut wait_tally = Tally::new();
    let mut resp_tally = Tally::new();
    let mut served = 0u64;
    for rep in 0..cfg.replications {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(rep as u64 + 1);
        let (t_done, rep_wait, rep_resp, rep_served) = rebuild_replication(cfg, &mut rng)?;
        done_tally.push(t_done);
        if rep_served > 0 {
            wait_tally.push(rep_wait);
            resp_tally.push(rep_resp);
        }
        served += rep_served;
    }
    Ok(RebuildSimResult {
        rebuild_time: done_tally.estimate(),
        wait: wait_tally.estimate(),
        response: resp_tally.estimate(),
        served,
    })
}

fn rebuild_replication(
    cfg: &RebuildSimConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(f64, f64, f64, u64), SimError> {
    let interarrival = (cfg.arrival_rate > 0.0).then(|| Exp::new(cfg.arrival_rate).unwrap());
    let mut next_arr = interarrival.map_or(f64::INFINITY, |d| d.sample(rng));
    let mut fifo: VecDeque<FifoItem> = VecDeque::new();
    if cfg.mode == RebuildMode::Pcm {
        fifo.push_back(FifoItem::TrackRead);
    }
    let mut t = 0.0f64;
    let mut tracks = 0u64;
    let mut head = 0u32;
    let mut waits = Tally::new();
    let mut resps = Tally::new();
    loop {
        while next_arr <= t {
            fifo.push_back(FifoItem::External(next_arr));
            next_arr += interarrival.unwrap().sample(rng);
            if fifo.len() > 100_000 {
                return Err(SimError::Unstable { in_system: fifo.len() as u64, at: t });
            }
        }
        if tracks == cfg.n_track {
            break;
        }
        match fifo.pop_front() {
            Some(FifoItem::External(t_arr)) => {
                let wait = t - t_arr;
                let svc = cfg.service.sample(rng, &mut head);
                waits.push(wait);
                resps.push(wait + svc);
                t += svc;
            }
            Some(FifoItem::TrackRead) => {
                t += cfg.t_rot;
                tracks += 1;
                fifo.push_back(FifoItem::TrackRead);
            }
            None => {
                // queue is idle: read a track now (never plain-idle) unless
                // an arrival lands first in the other procedure
                debug_assert_eq!(cfg.mode, RebuildMode::Vsm);
                t += cfg.t_rot;
                tracks += 1;
            }
        }
    }
    Ok((t, waits.mean(), resps.mean(), waits.count()))
}
