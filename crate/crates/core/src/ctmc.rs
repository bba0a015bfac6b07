//! Continuous-time Markov chains for repairable arrays.
//!
//! Models are small (tens of states), so both the mean time to absorption
//! and steady-state availability are solved by exact rational Gaussian
//! elimination; a float path takes over past 50 states where exact pivots
//! would explode in size.

use crate::exact::{fraction_str, parse_ratio, rat_int, ratio_to_f64, Ratio};
use crate::reliability::SurvivorProfile;
use num_traits::{FromPrimitive, One, Signed, Zero};
use std::collections::VecDeque;
use thiserror::Error;

const EXACT_STATE_LIMIT: usize = 50;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CtmcError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("no data-loss state is reachable from the initial state; MTTA is infinite")]
    NeverAbsorbs,
    #[error("state {0:?} can be entered but never reaches a loss state; MTTA diverges")]
    InfiniteMtta(String),
    #[error("chain is not ergodic: state {0:?} cannot return to the initial state")]
    NotErgodic(String),
    #[error("linear system is singular")]
    Singular,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovModel {
    pub name: String,
    pub states: Vec<String>,
    pub initial: usize,
    pub loss: Vec<bool>,
    /// rates[from][to], diagonal unused (zero)
    pub rates: Vec<Vec<Ratio>>,
}

impl MarkovModel {
    pub fn new(name: &str) -> MarkovModel {
        MarkovModel {
            name: name.to_string(),
            states: Vec::new(),
            initial: 0,
            loss: Vec::new(),
            rates: Vec::new(),
        }
    }

    pub fn add_state(&mut self, label: &str) -> usize {
        assert!(
            !self.states.iter().any(|s| s == label),
            "duplicate state label {label:?}"
        );
        self.states.push(label.to_string());
        self.loss.push(false);
        for row in &mut self.rates {
            row.push(Ratio::zero());
        }
        self.rates.push(vec![Ratio::zero(); self.states.len()]);
        self.states.len() - 1
    }

    pub fn set_initial(&mut self, idx: usize) {
        self.initial = idx;
    }

    pub fn set_loss(&mut self, idx: usize) {
        self.loss[idx] = true;
    }

    pub fn add_rate(&mut self, from: usize, to: usize, rate: Ratio) {
        assert!(from != to, "self-loop rates are meaningless in a CTMC");
        assert!(!rate.is_negative(), "negative rate");
        self.rates[from][to] += rate;
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    fn out_rate(&self, i: usize) -> Ratio {
        self.rates[i].iter().sum()
    }

    pub fn validate(&self) -> Result<(), CtmcError> {
        if self.states.is_empty() {
            return Err(CtmcError::Invalid("no states".into()));
        }
        if self.loss[self.initial] {
            return Err(CtmcError::Invalid("initial state is a loss state".into()));
        }
        for (i, row) in self.rates.iter().enumerate() {
            if self.loss[i] && row.iter().any(|r| !r.is_zero()) {
                return Err(CtmcError::Invalid(format!(
                    "loss state {:?} has outgoing rates",
                    self.states[i]
                )));
            }
        }
        Ok(())
    }

    /// Adds repair edges from every loss state back to the initial state,
    /// turning an absorbing model into one suitable for availability.
    pub fn with_loss_repair(&self, rate: Ratio) -> MarkovModel {
        let mut m = self.clone();
        for i in 0..m.states.len() {
            if m.loss[i] {
                m.rates[i][m.initial] += &rate;
            }
        }
        m
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            for j in 0..self.states.len() {
                if !seen[j] && !self.rates[i][j].is_zero() {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }

    /// Mean time from the initial state to any loss state, by first-step
    /// analysis. Exact for models up to 50 states (float fallback above,
    /// flagged in the result).
    pub fn solve_mtta(&self) -> Result<Mtta, CtmcError> {
        self.validate()?;
        let n = self.states.len();
        let reach = self.reachable_from(self.initial);
        if !(0..n).any(|i| reach[i] && self.loss[i]) {
            return Err(CtmcError::NeverAbsorbs);
        }
        // every reachable transient state must itself reach absorption,
        // or the expected time diverges
        for i in 0..n {
            if reach[i] && !self.loss[i] {
                let r2 = self.reachable_from(i);
                if !(0..n).any(|j| r2[j] && self.loss[j]) {
                    return Err(CtmcError::InfiniteMtta(self.states[i].clone()));
                }
            }
        }
        let transient: Vec<usize> = (0..n).filter(|&i| reach[i] && !self.loss[i]).collect();
        let t = transient.len();
        // q_i m_i − Σ_j r_ij m_j = 1 over transient states
        let mut a = vec![vec![Ratio::zero(); t]; t];
        let mut b = vec![Ratio::one(); t];
        for (row, &i) in transient.iter().enumerate() {
            a[row][row] = self.out_rate(i);
            for (col, &j) in transient.iter().enumerate() {
                if col != row {
                    a[row][col] = -self.rates[i][j].clone();
                } else {
                    a[row][col] -= &self.rates[i][j]; // zero in valid models
                }
            }
        }
        let pos = transient
            .iter()
            .position(|&i| i == self.initial)
            .expect("initial is transient");
        if t <= EXACT_STATE_LIMIT {
            let sol = solve_exact(&mut a, &mut b)?;
            Ok(Mtta { value: sol[pos].clone(), exact: true })
        } else {
            let sol = solve_f64(&a, &b)?;
            Ok(Mtta {
                value: Ratio::from_f64(sol[pos]).ok_or(CtmcError::Singular)?,
                exact: false,
            })
        }
    }

    /// Steady-state probability of being in a non-loss state. The chain
    /// restricted to states reachable from the initial one must be ergodic.
    pub fn availability(&self) -> Result<Ratio, CtmcError> {
        if self.states.is_empty() {
            return Err(CtmcError::Invalid("no states".into()));
        }
        let n = self.states.len();
        let reach = self.reachable_from(self.initial);
        let idx: Vec<usize> = (0..n).filter(|&i| reach[i]).collect();
        // ergodic on the reachable set ⇔ every reachable state returns
        for &i in &idx {
            let back = self.reachable_from(i);
            if !back[self.initial] {
                return Err(CtmcError::NotErgodic(self.states[i].clone()));
            }
        }
        let t = idx.len();
        if t == 1 {
            return Ok(if self.loss[idx[0]] { Ratio::zero() } else { Ratio::one() });
        }
        // global balance πQ = 0 with the last equation replaced by Σπ = 1
        let mut a = vec![vec![Ratio::zero(); t]; t];
        let mut b = vec![Ratio::zero(); t];
        for (col, &j) in idx.iter().enumerate().take(t - 1) {
            for (row, &i) in idx.iter().enumerate() {
                if i == j {
                    a[col][row] = -self.out_rate(i);
                } else {
                    a[col][row] = self.rates[i][j].clone();
                }
            }
        }
        for row in 0..t {
            a[t - 1][row] = Ratio::one();
        }
        b[t - 1] = Ratio::one();
        let pi = if t <= EXACT_STATE_LIMIT {
            solve_exact(&mut a, &mut b)?
        } else {
            solve_f64(&a, &b)?
                .into_iter()
                .map(|x| Ratio::from_f64(x).unwrap_or_else(Ratio::zero))
                .collect()
        };
        let mut avail = Ratio::zero();
        for (k, &i) in idx.iter().enumerate() {
            if !self.loss[i] {
                avail += &pi[k];
            }
        }
        Ok(avail)
    }

    /// Structured text: a `markov <name>` header, `state` lines with
    /// optional `initial`/`loss` flags, and `rate FROM TO VALUE` triples.
    pub fn to_text(&self) -> String {
        let mut out = format!("markov {}\n", self.name);
        for (i, s) in self.states.iter().enumerate() {
            let mut line = format!("state {s}");
            if i == self.initial {
                line.push_str(" initial");
            }
            if self.loss[i] {
                line.push_str(" loss");
            }
            out.push_str(&line);
            out.push('\n');
        }
        for i in 0..self.states.len() {
            for j in 0..self.states.len() {
                if !self.rates[i][j].is_zero() {
                    out.push_str(&format!(
                        "rate {} {} {}\n",
                        self.states[i],
                        self.states[j],
                        fraction_str(&self.rates[i][j])
                    ));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<MarkovModel, CtmcError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or(CtmcError::Parse("empty document".into()))?;
        let name = header
            .strip_prefix("markov")
            .map(str::trim)
            .ok_or_else(|| CtmcError::Parse("expected `markov <name>` header".into()))?;
        if name.is_empty() {
            return Err(CtmcError::Parse("missing model name".into()));
        }
        let mut m = MarkovModel::new(name);
        let mut initial: Option<usize> = None;
        for line in lines {
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("state") => {
                    let label = tok
                        .next()
                        .ok_or_else(|| CtmcError::Parse(format!("bad state line {line:?}")))?;
                    if m.state_index(label).is_some() {
                        return Err(CtmcError::Parse(format!("duplicate state {label:?}")));
                    }
                    let idx = m.add_state(label);
                    for flag in tok {
                        match flag {
                            "initial" => {
                                if initial.replace(idx).is_some() {
                                    return Err(CtmcError::Parse("two initial states".into()));
                                }
                            }
                            "loss" => m.set_loss(idx),
                            other => {
                                return Err(CtmcError::Parse(format!("unknown state flag {other:?}")))
                            }
                        }
                    }
                }
                Some("rate") => {
                    let from = tok
                        .next()
                        .and_then(|l| m.state_index(l))
                        .ok_or_else(|| CtmcError::Parse(format!("unknown source state in {line:?}")))?;
                    let to = tok
                        .next()
                        .and_then(|l| m.state_index(l))
                        .ok_or_else(|| CtmcError::Parse(format!("unknown target state in {line:?}")))?;
                    let raw = tok
                        .next()
                        .ok_or_else(|| CtmcError::Parse(format!("missing rate in {line:?}")))?;
                    let rate = parse_ratio(raw).map_err(CtmcError::Parse)?;
                    if rate.is_negative() {
                        return Err(CtmcError::Parse(format!("negative rate in {line:?}")));
                    }
                    if from == to {
                        return Err(CtmcError::Parse(format!("self-loop in {line:?}")));
                    }
                    m.add_rate(from, to, rate);
                }
                Some(other) => return Err(CtmcError::Parse(format!("unknown directive {other:?}"))),
                None => unreachable!(),
            }
        }
        let initial = initial.ok_or_else(|| CtmcError::Parse("no state marked initial".into()))?;
        m.set_initial(initial);
        m.validate().map_err(|e| CtmcError::Parse(e.to_string()))?;
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mtta {
    pub value: Ratio,
    /// false when the model exceeded the exact-arithmetic state limit
    pub exact: bool,
}

impl Mtta {
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }
}

fn solve_exact(a: &mut [Vec<Ratio>], b: &mut [Ratio]) -> Result<Vec<Ratio>, CtmcError> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(CtmcError::Singular)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &inv;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
            let sub = &factor * &b[col];
            b[r] -= sub;
        }
    }
    Ok((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn solve_f64(a: &[Vec<Ratio>], b: &[Ratio]) -> Result<Vec<f64>, CtmcError> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .map(|row| row.iter().map(ratio_to_f64).collect())
        .collect();
    let mut v: Vec<f64> = b.iter().map(ratio_to_f64).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return Err(CtmcError::Singular);
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            v[r] -= f * v[col];
        }
    }
    Ok((0..n).map(|i| v[i] / m[i][i]).collect())
}

/// Prebuilt repair chains. Rates are exact rationals so the solved MTTA can
/// be compared against closed forms without float noise.
#[derive(Clone, Debug)]
pub enum RepairTemplate {
    /// All-up / one-down / loss, with repair from the one-down state.
    Raid5Repair { n: u32, delta: Ratio, mu: Ratio },
    /// Six-state chain for the 4-data + 4-parity XOR layout: fully
    /// survivable through three failures, a 4/5–1/5 split on the fourth,
    /// loss on the fifth; repairs run at i·μ with i disks down.
    Sspiral443 { lambda: Ratio, mu: Ratio },
    /// Mirrored pair behind a single controller: controller failure is
    /// terminal from every state.
    ControllerC1 { lambda_d: Ratio, lambda_c: Ratio, mu_d: Ratio },
    /// One controller per disk; a disk-controller unit dies when either
    /// part does, and parts are repaired at their own rates.
    ControllerC2 { lambda_d: Ratio, lambda_c: Ratio, mu_d: Ratio, mu_c: Ratio },
    /// Two controllers cross-connected to both disks: service continues
    /// until both disks or both controllers are down.
    ControllerC3 { lambda_d: Ratio, lambda_c: Ratio, mu_d: Ratio, mu_c: Ratio },
}

pub fn build_model(template: &RepairTemplate) -> Result<MarkovModel, CtmcError> {
    match template {
        RepairTemplate::Raid5Repair { n, delta, mu } => {
            if *n < 2 {
                return Err(CtmcError::Invalid(format!("need n >= 2 disks (n={n})")));
            }
            ensure_positive(&[("delta", delta)])?;
            ensure_nonneg(&[("mu", mu)])?;
            let mut m = MarkovModel::new("raid5_repair");
            let up = m.add_state(&format!("S{n}"));
            let one = m.add_state(&format!("S{}", n - 1));
            let fail = m.add_state("SF");
            m.set_initial(up);
            m.set_loss(fail);
            m.add_rate(up, one, rat_int(*n as i64) * delta);
            m.add_rate(one, fail, rat_int(*n as i64 - 1) * delta);
            m.add_rate(one, up, mu.clone());
            Ok(m)
        }
        RepairTemplate::Sspiral443 { lambda, mu } => {
            ensure_positive(&[("lambda", lambda)])?;
            ensure_nonneg(&[("mu", mu)])?;
            let mut m = MarkovModel::new("sspiral_443");
            let s: Vec<usize> = (0..5).map(|i| m.add_state(&format!("S{i}"))).collect();
            let dl = m.add_state("DL");
            m.set_initial(s[0]);
            m.set_loss(dl);
            m.add_rate(s[0], s[1], rat_int(8) * lambda);
            m.add_rate(s[1], s[2], rat_int(7) * lambda);
            m.add_rate(s[2], s[3], rat_int(6) * lambda);
            // five disks left after three failures; one in five of those
            // failures is fatal
            m.add_rate(s[3], s[4], rat_int(4) * lambda);
            m.add_rate(s[3], dl, lambda.clone());
            m.add_rate(s[4], dl, rat_int(4) * lambda);
            for i in 1..=4usize {
                m.add_rate(s[i], s[i - 1], rat_int(i as i64) * mu);
            }
            Ok(m)
        }
        RepairTemplate::ControllerC1 { lambda_d, lambda_c, mu_d } => {
            ensure_positive(&[("lambda_d", lambda_d), ("lambda_c", lambda_c)])?;
            ensure_nonneg(&[("mu_d", mu_d)])?;
            let mut m = MarkovModel::new("controller_c1");
            let s0 = m.add_state("S0");
            let s1 = m.add_state("S1");
            let s2 = m.add_state("S2");
            m.set_initial(s0);
            m.set_loss(s2);
            m.add_rate(s0, s1, rat_int(2) * lambda_d);
            m.add_rate(s1, s0, mu_d.clone());
            m.add_rate(s1, s2, lambda_c + lambda_d);
            m.add_rate(s0, s2, lambda_c.clone());
            Ok(m)
        }
        RepairTemplate::ControllerC2 { lambda_d, lambda_c, mu_d, mu_c } => {
            ensure_positive(&[("lambda_d", lambda_d), ("lambda_c", lambda_c)])?;
            ensure_nonneg(&[("mu_d", mu_d), ("mu_c", mu_c)])?;
            let mut m = MarkovModel::new("controller_c2");
            let s0 = m.add_state("S0");
            let sd = m.add_state("S1d");
            let sc = m.add_state("S1c");
            let s2 = m.add_state("S2");
            m.set_initial(s0);
            m.set_loss(s2);
            m.add_rate(s0, sd, rat_int(2) * lambda_d);
            m.add_rate(s0, sc, rat_int(2) * lambda_c);
            m.add_rate(sd, s0, mu_d.clone());
            m.add_rate(sc, s0, mu_c.clone());
            // with one unit out, any failure in the other unit is terminal
            m.add_rate(sd, s2, lambda_d + lambda_c);
            m.add_rate(sc, s2, lambda_d + lambda_c);
            Ok(m)
        }
        RepairTemplate::ControllerC3 { lambda_d, lambda_c, mu_d, mu_c } => {
            ensure_positive(&[("lambda_d", lambda_d), ("lambda_c", lambda_c)])?;
            ensure_nonneg(&[("mu_d", mu_d), ("mu_c", mu_c)])?;
            let mut m = MarkovModel::new("controller_c3");
            let s00 = m.add_state("S00");
            let s10 = m.add_state("S10");
            let s01 = m.add_state("S01");
            let s11 = m.add_state("S11");
            let f = m.add_state("F");
            m.set_initial(s00);
            m.set_loss(f);
            m.add_rate(s00, s10, rat_int(2) * lambda_d);
            m.add_rate(s00, s01, rat_int(2) * lambda_c);
            m.add_rate(s10, s00, mu_d.clone());
            m.add_rate(s01, s00, mu_c.clone());
            m.add_rate(s10, f, lambda_d.clone());
            m.add_rate(s10, s11, rat_int(2) * lambda_c);
            m.add_rate(s01, f, lambda_c.clone());
            m.add_rate(s01, s11, rat_int(2) * lambda_d);
            m.add_rate(s11, f, lambda_d + lambda_c);
            m.add_rate(s11, s10, mu_c.clone());
            m.add_rate(s11, s01, mu_d.clone());
            Ok(m)
        }
    }
}

fn ensure_positive(items: &[(&str, &Ratio)]) -> Result<(), CtmcError> {
    for (name, v) in items {
        if !v.is_positive() {
            return Err(CtmcError::Invalid(format!("{name} must be positive")));
        }
    }
    Ok(())
}

fn ensure_nonneg(items: &[(&str, &Ratio)]) -> Result<(), CtmcError> {
    for (name, v) in items {
        if v.is_negative() {
            return Err(CtmcError::Invalid(format!("{name} must be nonnegative")));
        }
    }
    Ok(())
}

/// Aggregated no-repair failure chain for a survivor profile: stage i holds
/// i failed disks, moves on at rate (N−i)δ, and the fatal share of each
/// step is chosen so stage visit probabilities equal A(N,i)/C(N,i). Its
/// MTTA therefore reproduces the exact no-repair MTTDL.
pub fn death_chain(profile: &SurvivorProfile, delta: &Ratio) -> MarkovModel {
    let mut m = MarkovModel::new("death_chain");
    let top = profile.max_survivable().min(profile.n - 1);
    let states: Vec<usize> = (0..=top).map(|i| m.add_state(&format!("F{i}"))).collect();
    let dl = m.add_state("DL");
    m.set_initial(states[0]);
    m.set_loss(dl);
    for i in 0..=top {
        let total = rat_int((profile.n - i) as i64) * delta;
        let w = if i < top {
            profile.visits(i + 1) / profile.visits(i)
        } else {
            Ratio::zero()
        };
        if !w.is_zero() {
            m.add_rate(states[i as usize], states[i as usize + 1], &total * &w);
        }
        let fatal = total * (rat_int(1) - w);
        if !fatal.is_zero() {
            m.add_rate(states[i as usize], dl, fatal);
        }
    }
    m
}
