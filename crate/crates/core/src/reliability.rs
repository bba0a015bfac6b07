//! Exact no-repair reliability: survivor profiles, reliability polynomials,
//! mean time to data loss, and small-ε unreliability expansions.
//!
//! The survivor profile A(N,i) counts the i-disk failure sets a layout
//! tolerates. Everything else here is a function of that profile:
//!
//! - reliability at disk-survival probability r:
//!   `R(r) = Σ_i A(N,i) r^(N−i) (1−r)^i`
//! - no-repair MTTDL in units of the mean disk lifetime 1/δ:
//!   each failure stage i is reached alive with probability
//!   v_i = A(N,i)/C(N,i) and lasts 1/((N−i)δ) on average
//! - unreliability for r = 1−ε as ε→0: leading term
//!   `(C(N,m) − A(N,m)) ε^m` at the first level m with failing sets

use crate::exact::{binom, rat_int, Ratio};
use crate::layout::{Layout, LayoutError, LayoutKind};
use crate::poly::RatPoly;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivorProfile {
    pub n: u32,
    /// a[i] = number of survivable i-disk failure sets, for i = 0..=n.
    pub a: Vec<BigInt>,
}

impl SurvivorProfile {
    pub fn from_counts(n: u32, a: Vec<BigInt>) -> Result<SurvivorProfile, LayoutError> {
        if a.len() != n as usize + 1 {
            return Err(LayoutError::Invalid(format!(
                "profile needs {} counts, got {}",
                n + 1,
                a.len()
            )));
        }
        if !a[0].is_one() {
            return Err(LayoutError::Invalid("A(N,0) must be 1".into()));
        }
        let mut seen_zero = false;
        for (i, ai) in a.iter().enumerate() {
            if ai.is_negative() || *ai > binom(n as u64, i as u64) {
                return Err(LayoutError::Invalid(format!("A({n},{i}) out of range: {ai}")));
            }
            // more failures can only hurt, so the counts cannot restart
            if seen_zero && !ai.is_zero() {
                return Err(LayoutError::Invalid(format!(
                    "A({n},{i}) > 0 after a zero level"
                )));
            }
            seen_zero |= ai.is_zero();
        }
        Ok(SurvivorProfile { n, a })
    }

    /// Largest i with A(N,i) > 0.
    pub fn max_survivable(&self) -> u32 {
        (0..=self.n).rev().find(|&i| !self.a[i as usize].is_zero()).unwrap_or(0)
    }

    /// Probability that i uniformly random failures are survivable.
    pub fn visits(&self, i: u32) -> Ratio {
        Ratio::new(self.a[i as usize].clone(), binom(self.n as u64, i as u64))
    }

    /// Exact counts by testing every i-subset of disks, all levels.
    pub fn enumerate(layout: &Layout) -> Result<SurvivorProfile, LayoutError> {
        let n = layout.n;
        let bound = layout.max_survivable_bound();
        let mut a = Vec::with_capacity(n as usize + 1);
        for i in 0..=n {
            if i > bound {
                a.push(BigInt::zero());
            } else {
                a.push(layout.count_survivable(i)?);
            }
        }
        SurvivorProfile::from_counts(n, a)
    }

    /// Known combinatorial closed forms; `Ok(None)` when the kind has none.
    pub fn closed_form(kind: &LayoutKind, n: u32) -> Result<Option<SurvivorProfile>, LayoutError> {
        let a = match *kind {
            LayoutKind::Bm => Some(nway_counts(n, 2)?),
            LayoutKind::Nway(w) => Some(nway_counts(n, w)?),
            LayoutKind::Grd => {
                if n < 4 || n % 2 != 0 {
                    return Err(LayoutError::Invalid(format!("grd needs even n >= 4 (n={n})")));
                }
                let m = (n / 2) as u64;
                // survivable iff all failures are on one side
                Some(
                    (0..=n as u64)
                        .map(|i| if i == 0 { BigInt::one() } else { 2 * binom(m, i) })
                        .collect(),
                )
            }
            LayoutKind::Id(c) => {
                if c == 0 || n % c != 0 || n / c < 2 {
                    return Err(LayoutError::Invalid(format!(
                        "id needs clusters of >= 2 disks (n={n}, c={c})"
                    )));
                }
                let w = (n / c) as u64;
                // survivable iff at most one failure per cluster
                Some(
                    (0..=n as u64)
                        .map(|i| binom(c as u64, i) * BigInt::from(w).pow(i as u32))
                        .collect(),
                )
            }
            LayoutKind::Cd => {
                if n < 3 {
                    return Err(LayoutError::Invalid(format!("cd needs n >= 3 (n={n})")));
                }
                // i-subsets of a ring with no two adjacent; impossible past n/2
                Some(
                    (0..=n as u64)
                        .map(|i| {
                            if i == 0 {
                                BigInt::one()
                            } else if i > n as u64 / 2 {
                                BigInt::zero()
                            } else {
                                binom(n as u64 - i - 1, i - 1) + binom(n as u64 - i, i)
                            }
                        })
                        .collect(),
                )
            }
            LayoutKind::Raidk(k) => {
                if k == 0 || k >= n {
                    return Err(LayoutError::Invalid(format!("raidk needs 1 <= k < n (n={n}, k={k})")));
                }
                Some(
                    (0..=n as u64)
                        .map(|i| if i <= k as u64 { binom(n as u64, i) } else { BigInt::zero() })
                        .collect(),
                )
            }
            _ => None,
        };
        match a {
            Some(counts) => Ok(Some(SurvivorProfile::from_counts(n, counts)?)),
            None => Ok(None),
        }
    }

    /// Closed form when one exists, enumeration otherwise.
    pub fn for_layout(layout: &Layout) -> Result<SurvivorProfile, LayoutError> {
        match SurvivorProfile::closed_form(&layout.kind, layout.n)? {
            Some(p) => Ok(p),
            None => SurvivorProfile::enumerate(layout),
        }
    }
}

fn nway_counts(n: u32, w: u32) -> Result<Vec<BigInt>, LayoutError> {
    if w < 2 || n == 0 || n % w != 0 {
        return Err(LayoutError::Invalid(format!(
            "replication needs w >= 2 dividing n (n={n}, w={w})"
        )));
    }
    let m = n / w;
    // coefficient of x^i in (sum_{j<w} C(w,j) x^j)^M: at most w-1 failures
    // per replica group
    let base: Vec<BigInt> = (0..w as u64).map(|j| binom(w as u64, j)).collect();
    let mut acc = vec![BigInt::one()];
    for _ in 0..m {
        let mut next = vec![BigInt::zero(); acc.len() + base.len() - 1];
        for (i, ai) in acc.iter().enumerate() {
            for (j, bj) in base.iter().enumerate() {
                next[i + j] += ai * bj;
            }
        }
        acc = next;
    }
    acc.resize(n as usize + 1, BigInt::zero());
    Ok(acc)
}

/// R(r) as an exact polynomial in the disk survival probability r.
pub fn reliability_poly(profile: &SurvivorProfile) -> RatPoly {
    let n = profile.n;
    let r = RatPoly::x();
    let one_minus_r = RatPoly::from_coeffs(vec![rat_int(1), rat_int(-1)]);
    let mut acc = RatPoly::zero();
    for i in 0..=n {
        if profile.a[i as usize].is_zero() {
            continue;
        }
        let term = r
            .pow(n - i)
            .mul(&one_minus_r.pow(i))
            .scale(&Ratio::from(profile.a[i as usize].clone()));
        acc = acc.add(&term);
    }
    acc
}

/// Unreliability 1 − R(1−ε) as an exact polynomial in ε.
pub fn unreliability_in_epsilon(profile: &SurvivorProfile) -> RatPoly {
    let eps = RatPoly::x();
    let one_minus_eps = RatPoly::from_coeffs(vec![rat_int(1), rat_int(-1)]);
    let mut acc = RatPoly::constant(rat_int(1));
    for i in 0..=profile.n {
        if profile.a[i as usize].is_zero() {
            continue;
        }
        let term = one_minus_eps
            .pow(profile.n - i)
            .mul(&eps.pow(i))
            .scale(&Ratio::from(profile.a[i as usize].clone()));
        acc = acc.sub(&term);
    }
    acc
}

/// Exact reliability at rational r.
pub fn reliability(profile: &SurvivorProfile, r: &Ratio) -> Ratio {
    reliability_poly(profile).eval(r)
}

/// No-repair mean time to data loss in units of 1/δ (mean disk lifetime):
/// sum over failure stages of (probability the stage is reached alive) ×
/// (mean stage duration).
pub fn mttdl_no_repair(profile: &SurvivorProfile) -> Ratio {
    mttdl_truncated(profile, profile.n)
}

/// Same sum cut off after stage `max_level`, for comparing against sources
/// that ignore deeper survivable levels.
pub fn mttdl_truncated(profile: &SurvivorProfile, max_level: u32) -> Ratio {
    let mut acc = Ratio::zero();
    for i in 0..=max_level.min(profile.n - 1) {
        if profile.a[i as usize].is_zero() {
            break;
        }
        acc += profile.visits(i) / rat_int((profile.n - i) as i64);
    }
    acc
}

/// Expected total work before data loss, in units of 1/δ: stage i
/// contributes its visit probability × throughput × mean duration.
pub fn performability(profile: &SurvivorProfile, throughput: &[Ratio]) -> Ratio {
    let top = profile.max_survivable().min(profile.n - 1);
    assert!(
        throughput.len() > top as usize,
        "need a throughput for each survivable stage 0..={top}"
    );
    let mut acc = Ratio::zero();
    for i in 0..=top {
        if profile.a[i as usize].is_zero() {
            break;
        }
        acc += profile.visits(i) * &throughput[i as usize] / rat_int((profile.n - i) as i64);
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonExpansion {
    /// exponent of the leading unreliability term
    pub m: u32,
    /// its coefficient, C(N,m) − A(N,m)
    pub coeff: BigInt,
    /// next nonzero term (exponent, coefficient), if any
    pub next: Option<(u32, BigInt)>,
}

/// Leading behavior of unreliability for highly reliable disks (r = 1−ε).
/// None when every failure level is fully survivable (no failing sets).
pub fn epsilon_expansion(profile: &SurvivorProfile) -> Option<EpsilonExpansion> {
    let u = unreliability_in_epsilon(profile);
    let (m, lead) = u.leading_low_order()?;
    debug_assert!(lead.is_integer());
    let coeff = lead.to_integer();
    let expect = binom(profile.n as u64, m as u64) - &profile.a[m];
    debug_assert_eq!(coeff, expect, "leading term must be C(N,m) − A(N,m)");
    let next = (m + 1..=u.degree().unwrap_or(0))
        .map(|e| (e, u.coeff(e)))
        .find(|(_, c)| !c.is_zero())
        .map(|(e, c)| (e as u32, c.to_integer()));
    Some(EpsilonExpansion { m: m as u32, coeff, next })
}

/// Smallest t > 0 where two reliability curves cross, with r(t) = e^{−δt},
/// searched on (0, 10/δ] and bisected to 1e−12 relative width. None when
/// the curves never change order there.
pub fn crossover_time(poly_a: &RatPoly, poly_b: &RatPoly, delta: f64) -> Option<f64> {
    assert!(delta > 0.0);
    let g = |t: f64| {
        let r = (-delta * t).exp();
        poly_a.eval_f64(r) - poly_b.eval_f64(r)
    };
    let t_max = 10.0 / delta;
    let steps = 8192;
    let mut prev_t = 0.0;
    let mut prev_sign = 0i8;
    for j in 1..=steps {
        let t = t_max * j as f64 / steps as f64;
        let v = g(t);
        let sign = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 && prev_sign != 0 && sign != prev_sign {
            // bracketed: bisect [prev_t, t]
            let (mut lo, mut hi) = (prev_t, t);
            let lo_sign = prev_sign;
            while hi - lo > 1e-12 * hi {
                let mid = 0.5 * (lo + hi);
                let vm = g(mid);
                if vm == 0.0 {
                    return Some(mid);
                }
                if (vm > 0.0) == (lo_sign > 0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        if sign != 0 {
            prev_sign = sign;
            prev_t = t;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::layout::Layout;
    use num_traits::ToPrimitive;

    fn profile(kind: LayoutKind, n: u32) -> SurvivorProfile {
        SurvivorProfile::for_layout(&Layout::build(kind, n).unwrap()).unwrap()
    }

    fn enumerated(kind: LayoutKind, n: u32) -> SurvivorProfile {
        SurvivorProfile::enumerate(&Layout::build(kind, n).unwrap()).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn cd_profile_n8() {
        let p = enumerated(LayoutKind::Cd, 8);
        assert_eq!(p.a, ints(&[1, 8, 20, 16, 2, 0, 0, 0, 0]));
        assert_eq!(p.max_survivable(), 4);
    }

    #[test]
    fn id_profile_n8_c2() {
        let p = enumerated(LayoutKind::Id(2), 8);
        assert_eq!(p.a[..4], ints(&[1, 8, 16, 0])[..]);
    }

    #[test]
    fn closed_forms_match_enumeration_n8() {
        for kind in [
            LayoutKind::Bm,
            LayoutKind::Nway(4),
            LayoutKind::Grd,
            LayoutKind::Id(2),
            LayoutKind::Cd,
            LayoutKind::Raidk(3),
        ] {
            let e = enumerated(kind.clone(), 8);
            let c = SurvivorProfile::closed_form(&kind, 8).unwrap().unwrap();
            assert_eq!(e, c, "{kind:?}");
        }
    }

    #[test]
    fn published_failure_counts() {
        let lsi = enumerated(LayoutKind::Lsi, 8);
        assert_eq!(lsi.a[3], BigInt::from(52));
        assert_eq!(lsi.visits(4), rat(45, 70)); // loses 25 of the 70 four-failure patterns
        let ssp = enumerated(LayoutKind::Sspiral443, 8);
        assert_eq!(ssp.a[4], BigInt::from(56)); // 70 − 14 losing cases
        let wv = enumerated(LayoutKind::Weaver { t: 3 }, 8);
        assert_eq!(wv.a[4], BigInt::from(62)); // fails 8 of 70
    }

    #[test]
    fn table_mttdl_fractions_n8() {
        let cases: Vec<(SurvivorProfile, Ratio)> = vec![
            (profile(LayoutKind::Raidk(1), 8), rat(15, 56)),
            (profile(LayoutKind::Bm, 8), rat(163, 280)),
            (profile(LayoutKind::Cd, 8), rat(379, 840)),
            (profile(LayoutKind::Grd, 8), rat(3, 8)),
            (profile(LayoutKind::Id(2), 8), rat(61, 168)),
            (profile(LayoutKind::Raidk(2), 8), rat(73, 168)),
            (profile(LayoutKind::Raidk(3), 8), rat(533, 840)),
            (enumerated(LayoutKind::Sspiral443, 8), rat(701, 840)),
            (profile(LayoutKind::Raidk(4), 8), rat(743, 840)),
            (enumerated(LayoutKind::Weaver { t: 3 }, 8), rat(719, 840)),
        ];
        for (p, want) in cases {
            assert_eq!(mttdl_no_repair(&p), want);
        }
        let lsi = enumerated(LayoutKind::Lsi, 8);
        assert_eq!(mttdl_truncated(&lsi, 3), rat(521, 840));
        assert_eq!(mttdl_no_repair(&lsi), rat(656, 840));
    }

    #[test]
    fn epsilon_leading_terms_n8() {
        let cases = vec![
            (profile(LayoutKind::Bm, 8), 2u32, 4i64),
            (profile(LayoutKind::Cd, 8), 2, 8),
            (profile(LayoutKind::Id(2), 8), 2, 12),
            (profile(LayoutKind::Grd, 8), 2, 16),
            (enumerated(LayoutKind::Lsi, 8), 3, 4),
            (enumerated(LayoutKind::Sspiral443, 8), 4, 14),
            (enumerated(LayoutKind::Weaver { t: 3 }, 8), 4, 8),
            (profile(LayoutKind::Raidk(2), 8), 3, 56),
        ];
        for (p, m, c) in cases {
            let e = epsilon_expansion(&p).unwrap();
            assert_eq!((e.m, e.coeff.clone()), (m, BigInt::from(c)));
        }
        // raidk leading coefficient is C(N,k+1)
        for k in 1..=4u32 {
            let p = profile(LayoutKind::Raidk(k), 8);
            let e = epsilon_expansion(&p).unwrap();
            assert_eq!(e.m, k + 1);
            assert_eq!(e.coeff, binom(8, k as u64 + 1));
        }
    }

    #[test]
    fn bm_epsilon_next_term() {
        // 1 − (1−ε²)^4 = 4ε² − 6ε⁴ + 4ε⁶ − ε⁸
        let e = epsilon_expansion(&profile(LayoutKind::Bm, 8)).unwrap();
        assert_eq!(e.next, Some((4, BigInt::from(-6))));
    }

    #[test]
    fn reliability_poly_basics() {
        let p = profile(LayoutKind::Bm, 8);
        let poly = reliability_poly(&p);
        assert_eq!(poly.eval(&rat_int(1)), rat_int(1));
        assert_eq!(poly.eval(&rat_int(0)), rat_int(0));
        // monotone on a grid
        let mut prev = rat_int(0);
        for j in 1..=20 {
            let v = poly.eval(&rat(j, 20));
            assert!(v >= prev);
            prev = v;
        }
        // raid5 at r = 0.975: r^8 + 8 r^7 (1−r)
        let r5 = profile(LayoutKind::Raidk(1), 8);
        let r = rat(39, 40);
        let want = r.pow(8) + rat_int(8) * r.pow(7) * (rat_int(1) - &r);
        assert_eq!(reliability(&r5, &r), want);
    }

    #[test]
    fn small_eps_ordering_of_mirrored_layouts() {
        // more failing pairs ⇒ lower reliability near r = 1
        let r = rat(99, 100);
        let bm = reliability(&profile(LayoutKind::Bm, 8), &r);
        let cd = reliability(&profile(LayoutKind::Cd, 8), &r);
        let id = reliability(&profile(LayoutKind::Id(2), 8), &r);
        let grd = reliability(&profile(LayoutKind::Grd, 8), &r);
        assert!(bm > cd && cd > id && id > grd);
    }

    #[test]
    fn performability_reduces_to_mttdl() {
        let p = profile(LayoutKind::Bm, 8);
        let ones = vec![rat_int(1); 9];
        assert_eq!(performability(&p, &ones), mttdl_no_repair(&p));
        // single disk: T/δ
        let single = SurvivorProfile::from_counts(1, ints(&[1, 0])).unwrap();
        assert_eq!(performability(&single, &[rat_int(7)]), rat_int(7));
    }

    #[test]
    fn mttdl_matches_time_quadrature() {
        // ∫ R(e^{−δt}) dt, Simpson in t, must reproduce the visit sum
        for kind in [
            LayoutKind::Bm,
            LayoutKind::Cd,
            LayoutKind::Grd,
            LayoutKind::Id(2),
            LayoutKind::Lsi,
            LayoutKind::Sspiral443,
            LayoutKind::Raidk(2),
            LayoutKind::Weaver { t: 3 },
        ] {
            let p = SurvivorProfile::for_layout(&Layout::build(kind.clone(), 8).unwrap()).unwrap();
            let poly = reliability_poly(&p);
            let exact = mttdl_no_repair(&p).to_f64().unwrap();
            let delta = 1.0;
            let decay = (p.n - p.max_survivable()) as f64 * delta;
            let t_max = 45.0 / decay;
            let steps = 200_000usize; // even
            let h = t_max / steps as f64;
            let f = |t: f64| poly.eval_f64((-delta * t).exp());
            let mut acc = f(0.0) + f(t_max);
            for j in 1..steps {
                acc += f(j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = acc * h / 3.0;
            assert!(
                (integral - exact).abs() <= 1e-9 * exact,
                "{kind:?}: {integral} vs {exact}"
            );
        }
    }

    #[test]
    fn tmr_crossover_at_ln2() {
        // triple-modular redundancy beats a single component only while
        // r > 1/2, i.e. until t = ln2/δ
        let tmr = SurvivorProfile::from_counts(3, ints(&[1, 3, 0, 0])).unwrap();
        let single = SurvivorProfile::from_counts(1, ints(&[1, 0])).unwrap();
        let delta = 2.5;
        let t = crossover_time(&reliability_poly(&tmr), &reliability_poly(&single), delta).unwrap();
        let want = 2f64.ln() / delta;
        assert!((t - want).abs() < 1e-9 * want, "{t} vs {want}");
        // identical curves never cross
        assert_eq!(
            crossover_time(&reliability_poly(&tmr), &reliability_poly(&tmr), delta),
            None
        );
    }

    #[test]
    fn bm_raid6_crossover_exists() {
        let bm = reliability_poly(&profile(LayoutKind::Bm, 8));
        let raid6 = reliability_poly(&profile(LayoutKind::Raidk(2), 8));
        let t = crossover_time(&bm, &raid6, 1.0).unwrap();
        assert!(t > 0.0 && t < 10.0);
    }

    #[test]
    fn profile_validation() {
        assert!(SurvivorProfile::from_counts(3, ints(&[1, 3, 0, 1])).is_err());
        assert!(SurvivorProfile::from_counts(3, ints(&[1, 4, 0, 0])).is_err());
        assert!(SurvivorProfile::from_counts(3, ints(&[0, 3, 0, 0])).is_err());
    }
}
