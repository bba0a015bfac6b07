//! Published closed-form MTTDL expressions for repairable arrays, evaluated
//! verbatim, plus exact multilevel (nested array) reliability composition.
//!
//! Several of the printed formulas disagree with their own derivations; the
//! policy here is to evaluate each exactly as printed and to offer a
//! separately named companion for the corrected form, never to silently fix
//! anything. `caveat()` reports which results carry such a companion.

use crate::exact::{binom, rat_int, Ratio};
use crate::poly::RatPoly;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("unknown formula id {0:?}")]
    UnknownId(String),
}

/// Closed-form MTTDL selectors. Times are in the same unit as MTTF/MTTR.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedForm {
    /// Two-term repair approximation with unlimited spares:
    /// MTTF²/(N(N−1)·MTTR).
    Raid5Inf { n: u32, mttf: Ratio, mttr: Ratio },
    /// Extension with uncorrectable-failure probability during rebuild:
    /// ((2N−1)λ+μ) / (Nλ((N−1)λ + μ·P_uf)). At P_uf = 0 this is the exact
    /// three-state repair chain solution.
    Raid5Uncorrectable { n: u32, mttf: Ratio, mttr: Ratio, p_uf: Ratio },
    /// k-fault-tolerant generalization as printed:
    /// MTTF^{k+1}·(N−k−1) / (N!·MTTR^k). The factorial denominator does not
    /// reduce to the k=2 source formula; see `RaidkCorrected`.
    RaidkPrinted { n: u32, k: u32, mttf: Ratio, mttr: Ratio },
    /// Derivation-consistent companion: MTTF^{k+1}/(N(N−1)…(N−k)·MTTR^k).
    RaidkCorrected { n: u32, k: u32, mttf: Ratio, mttr: Ratio },
    /// Unlimited-repairman analysis:
    /// MTTF^{k+1}/((N−k)·C(N,k)·MTTR^k) · Σ_{i=0..k} C(N,i)(MTTR/MTTF)^i.
    /// ≈ k! × RaidkCorrected when MTTR ≪ MTTF.
    RaidkUnlimitedRepair { n: u32, k: u32, mttf: Ratio, mttr: Ratio },
    /// One-failure-tolerant array with k cold spares:
    /// 1/(Nδ) + Σ_{i=0..k} p^i/((N−1−i)δ), p = μ/(μ+(N−1)δ).
    Spares { n: u32, k: u32, mttf: Ratio, mttr: Ratio },
    /// Mirrored pair of M-disk parity arrays, direct-path approximation:
    /// MTTF⁴/(3M(M−1)·MTTR³).
    Raid51Direct { m: u32, mttf: Ratio, mttr: Ratio },
    /// Same system, hierarchical result as printed:
    /// MTTF⁴/(4M(M−1)·MTTR³).
    Raid51HierPrinted { m: u32, mttf: Ratio, mttr: Ratio },
    /// Composing the printed per-level pieces
    /// (MTTDL_pair = MTTDL_inner²/(2·MTTR_inner)) instead gives
    /// MTTF⁴/(2M²(M−1)²·MTTR³).
    Raid51HierComposed { m: u32, mttf: Ratio, mttr: Ratio },
    /// r-way replication over n nodes of capacity c and rebuild
    /// bandwidth b, replicas kept on a fixed node group.
    /// r=2: b/(ncδ²); r=3: b²/(nc²δ³).
    ReplicaClustered { r: u32, nodes: u32, capacity: Ratio, bandwidth: Ratio, mttf: Ratio },
    /// Replicas spread over all nodes.
    /// r=2: b/(2ncδ²); r=3: (n−1)b²/(4nc²δ³).
    ReplicaDeclustered { r: u32, nodes: u32, capacity: Ratio, bandwidth: Ratio, mttf: Ratio },
    /// Expected annual fraction of data lost, two-way replication,
    /// clustered placement: δ²c/b. (A rate, not a time.)
    EafdlClustered { capacity: Ratio, bandwidth: Ratio, mttf: Ratio },
    /// Declustered counterpart, read as 2δ²c(n−1)/b; the printed form has
    /// b as a factor, which is dimensionally inconsistent.
    EafdlDeclustered { nodes: u32, capacity: Ratio, bandwidth: Ratio, mttf: Ratio },
}

impl ClosedForm {
    pub fn id(&self) -> &'static str {
        match self {
            ClosedForm::Raid5Inf { .. } => "raid5_inf",
            ClosedForm::Raid5Uncorrectable { .. } => "raid5_uncorrectable",
            ClosedForm::RaidkPrinted { .. } => "raidk",
            ClosedForm::RaidkCorrected { .. } => "raidk_corrected",
            ClosedForm::RaidkUnlimitedRepair { .. } => "raidk_unlimited_repair",
            ClosedForm::Spares { .. } => "spares",
            ClosedForm::Raid51Direct { .. } => "raid51_direct",
            ClosedForm::Raid51HierPrinted { .. } => "raid51_hier",
            ClosedForm::Raid51HierComposed { .. } => "raid51_hier_composed",
            ClosedForm::ReplicaClustered { .. } => "replica_clustered",
            ClosedForm::ReplicaDeclustered { .. } => "replica_declustered",
            ClosedForm::EafdlClustered { .. } => "eafdl_clustered",
            ClosedForm::EafdlDeclustered { .. } => "eafdl_declustered",
        }
    }

    /// A short note for results that have a corrected or alternative
    /// companion form, or whose source expression needed a reading.
    pub fn caveat(&self) -> Option<&'static str> {
        match self {
            ClosedForm::RaidkPrinted { .. } => {
                Some("as printed; companion raidk_corrected restores the k=2 base case")
            }
            ClosedForm::Raid51HierPrinted { .. } => {
                Some("as printed; composing the stated per-level forms gives raid51_hier_composed")
            }
            ClosedForm::EafdlDeclustered { .. } => {
                Some("printed with b as a factor; evaluated as 2 delta^2 c (n-1)/b")
            }
            _ => None,
        }
    }

    pub fn evaluate(&self) -> Result<Ratio, FormulaError> {
        match self {
            ClosedForm::Raid5Inf { n, mttf, mttr } => {
                check_n(*n, 2)?;
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                Ok(mttf * mttf / (rat_int((*n as i64) * (*n as i64 - 1)) * mttr))
            }
            ClosedForm::Raid5Uncorrectable { n, mttf, mttr, p_uf } => {
                check_n(*n, 2)?;
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                if p_uf.is_negative() || p_uf > &rat_int(1) {
                    return Err(FormulaError::Invalid("p_uf must be in [0,1]".into()));
                }
                let nn = rat_int(*n as i64);
                let lambda = rat_int(1) / mttf;
                let mu = rat_int(1) / mttr;
                let num = rat_int(2 * *n as i64 - 1) * &lambda + &mu;
                let den = nn * &lambda * ((rat_int(*n as i64 - 1)) * &lambda + mu * p_uf);
                Ok(num / den)
            }
            ClosedForm::RaidkPrinted { n, k, mttf, mttr } => {
                check_k(*n, *k)?;
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                let mut fact = BigInt::one();
                for i in 2..=*n as u64 {
                    fact *= i;
                }
                Ok(mttf.pow(*k as i32 + 1) * rat_int(*n as i64 - *k as i64 - 1)
                    / (Ratio::from(fact) * mttr.pow(*k as i32)))
            }
            ClosedForm::RaidkCorrected { n, k, mttf, mttr } => {
                check_k(*n, *k)?;
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                let mut den = BigInt::one();
                for i in 0..=*k as i64 {
                    den *= *n as i64 - i;
                }
                Ok(mttf.pow(*k as i32 + 1) / (Ratio::from(den) * mttr.pow(*k as i32)))
            }
            ClosedForm::RaidkUnlimitedRepair { n, k, mttf, mttr } => {
                check_k(*n, *k)?;
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                let lead = mttf.pow(*k as i32 + 1)
                    / (rat_int(*n as i64 - *k as i64)
                        * Ratio::from(binom(*n as u64, *k as u64))
                        * mttr.pow(*k as i32));
                let ratio = mttr / mttf;
                let mut sum = Ratio::zero();
                for i in 0..=*k {
                    sum += Ratio::from(binom(*n as u64, i as u64)) * ratio.pow(i as i32);
                }
                Ok(lead * sum)
            }
            ClosedForm::Spares { n, k, mttf, mttr } => {
                check_n(*n, 2)?;
                if *k + 2 > *n {
                    return Err(FormulaError::Invalid(format!(
                        "spares formula needs k <= n-2 (n={n}, k={k})"
                    )));
                }
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                let delta = rat_int(1) / mttf;
                let mu = rat_int(1) / mttr;
                let p = &mu / (&mu + rat_int(*n as i64 - 1) * &delta);
                let mut acc = rat_int(1) / (rat_int(*n as i64) * &delta);
                for i in 0..=*k as i64 {
                    acc += p.pow(i as i32) / (rat_int(*n as i64 - 1 - i) * &delta);
                }
                Ok(acc)
            }
            ClosedForm::Raid51Direct { m, mttf, mttr } => {
                check_n(*m, 2)?;
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                Ok(mttf.pow(4) / (rat_int(3 * *m as i64 * (*m as i64 - 1)) * mttr.pow(3)))
            }
            ClosedForm::Raid51HierPrinted { m, mttf, mttr } => {
                check_n(*m, 2)?;
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                Ok(mttf.pow(4) / (rat_int(4 * *m as i64 * (*m as i64 - 1)) * mttr.pow(3)))
            }
            ClosedForm::Raid51HierComposed { m, mttf, mttr } => {
                check_n(*m, 2)?;
                check_pos(&[("mttf", mttf), ("mttr", mttr)])?;
                let inner = mttf * mttf / (rat_int(*m as i64 * (*m as i64 - 1)) * mttr);
                Ok(&inner * &inner / (rat_int(2) * mttr))
            }
            ClosedForm::ReplicaClustered { r, nodes, capacity, bandwidth, mttf } => {
                check_replica(*r, *nodes, capacity, bandwidth, mttf)?;
                let delta = rat_int(1) / mttf;
                Ok(match r {
                    2 => bandwidth / (rat_int(*nodes as i64) * capacity * &delta * &delta),
                    _ => {
                        bandwidth * bandwidth
                            / (rat_int(*nodes as i64) * capacity * capacity * delta.pow(3))
                    }
                })
            }
            ClosedForm::ReplicaDeclustered { r, nodes, capacity, bandwidth, mttf } => {
                check_replica(*r, *nodes, capacity, bandwidth, mttf)?;
                let delta = rat_int(1) / mttf;
                Ok(match r {
                    2 => bandwidth / (rat_int(2 * *nodes as i64) * capacity * &delta * &delta),
                    _ => {
                        rat_int(*nodes as i64 - 1) * bandwidth * bandwidth
                            / (rat_int(4 * *nodes as i64) * capacity * capacity * delta.pow(3))
                    }
                })
            }
            ClosedForm::EafdlClustered { capacity, bandwidth, mttf } => {
                check_pos(&[("capacity", capacity), ("bandwidth", bandwidth), ("mttf", mttf)])?;
                let delta = rat_int(1) / mttf;
                Ok(&delta * &delta * capacity / bandwidth)
            }
            ClosedForm::EafdlDeclustered { nodes, capacity, bandwidth, mttf } => {
                check_n(*nodes, 2)?;
                check_pos(&[("capacity", capacity), ("bandwidth", bandwidth), ("mttf", mttf)])?;
                let delta = rat_int(1) / mttf;
                Ok(rat_int(2) * &delta * &delta * capacity * rat_int(*nodes as i64 - 1) / bandwidth)
            }
        }
    }
}

fn check_n(n: u32, min: u32) -> Result<(), FormulaError> {
    if n < min {
        return Err(FormulaError::Invalid(format!("need n >= {min} (n={n})")));
    }
    Ok(())
}

fn check_k(n: u32, k: u32) -> Result<(), FormulaError> {
    if k == 0 || k + 1 >= n {
        return Err(FormulaError::Invalid(format!("need 1 <= k <= n-2 (n={n}, k={k})")));
    }
    Ok(())
}

fn check_pos(items: &[(&str, &Ratio)]) -> Result<(), FormulaError> {
    for (name, v) in items {
        if !v.is_positive() {
            return Err(FormulaError::Invalid(format!("{name} must be positive")));
        }
    }
    Ok(())
}

fn check_replica(r: u32, nodes: u32, c: &Ratio, b: &Ratio, mttf: &Ratio) -> Result<(), FormulaError> {
    if r != 2 && r != 3 {
        return Err(FormulaError::Invalid(format!(
            "replication formulas cover r in {{2,3}} (r={r})"
        )));
    }
    check_n(nodes, r)?;
    check_pos(&[("capacity", c), ("bandwidth", b), ("mttf", mttf)])
}

// ---- multilevel (nested) arrays ----

/// One level of a two-level array: a mirrored pair, or an M-unit
/// single-parity group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelKind {
    Raid1Of2,
    Raid5OfM,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilevelReliability {
    /// exact reliability at the given unit survival probability
    pub value: Ratio,
    /// exact polynomial in the unit survival probability r
    pub poly: RatPoly,
    /// leading unreliability term (exponent, coefficient) for r = 1−ε
    pub leading: Option<(u32, BigInt)>,
}

fn level_poly(kind: LevelKind, m: u32) -> RatPoly {
    let x = RatPoly::x();
    match kind {
        // 1 − (1−x)²  =  2x − x²
        LevelKind::Raid1Of2 => RatPoly::from_coeffs(vec![rat_int(0), rat_int(2), rat_int(-1)]),
        // x^M + M x^{M−1} (1−x)
        LevelKind::Raid5OfM => {
            let one_minus = RatPoly::from_coeffs(vec![rat_int(1), rat_int(-1)]);
            x.pow(m).add(&x.pow(m - 1).scale(&rat_int(m as i64)).mul(&one_minus))
        }
    }
}

/// Reliability of `outer` built from `inner` groups of base units with
/// survival probability r, composed exactly. `m` is the parity-group size
/// wherever `Raid5OfM` appears.
pub fn multilevel_reliability(
    outer: LevelKind,
    inner: LevelKind,
    m: u32,
    r: &Ratio,
) -> Result<MultilevelReliability, FormulaError> {
    if (outer == LevelKind::Raid5OfM || inner == LevelKind::Raid5OfM) && m < 2 {
        return Err(FormulaError::Invalid(format!("parity group needs m >= 2 (m={m})")));
    }
    if r.is_negative() || r > &rat_int(1) {
        return Err(FormulaError::Invalid("r must be in [0,1]".into()));
    }
    let composed = level_poly(outer, m).compose(&level_poly(inner, m));
    let value = composed.eval(r);
    // unreliability in ε: 1 − P(1−ε)
    let one_minus_eps = RatPoly::from_coeffs(vec![rat_int(1), rat_int(-1)]);
    let u = RatPoly::constant(rat_int(1)).sub(&composed.compose(&one_minus_eps));
    let leading = u.leading_low_order().map(|(e, c)| (e as u32, c.to_integer()));
    Ok(MultilevelReliability { value, poly: composed, leading })
}
