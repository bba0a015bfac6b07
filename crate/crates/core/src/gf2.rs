//! Dense GF(2) linear algebra on bit-packed rows.
//!
//! Every stored cell of a layout is a vector over the data-symbol basis,
//! packed into a u64 (at most 64 data symbols per layout). Rank and
//! expression queries drive both the survivability test and recovery
//! planning.

/// Rank of a set of GF(2) row vectors.
pub fn rank(rows: &[u64]) -> u32 {
    let mut basis: Vec<u64> = Vec::with_capacity(64);
    let mut r = 0;
    for &row in rows {
        let mut v = row;
        for &b in &basis {
            let pivot = 1u64 << (63 - b.leading_zeros());
            if v & pivot != 0 {
                v ^= b;
            }
        }
        if v != 0 {
            basis.push(v);
            r += 1;
        }
    }
    r
}

/// Expresses each target vector as an XOR of the given basis rows.
///
/// Returns, per target, `Some(combination)` where bit i of the combination
/// selects `rows[i]`, or `None` when the target is outside the span.
/// Supports up to 128 input rows.
pub fn express(rows: &[u64], targets: &[u64]) -> Vec<Option<u128>> {
    assert!(rows.len() <= 128, "too many rows for combination tracking");
    // (vector, combination-of-input-rows) pairs kept in echelon form.
    let mut basis: Vec<(u64, u128)> = Vec::with_capacity(rows.len());
    for (i, &row) in rows.iter().enumerate() {
        let mut v = row;
        let mut c: u128 = 1 << i;
        for &(bv, bc) in &basis {
            let pivot = 1u64 << (63 - bv.leading_zeros());
            if v & pivot != 0 {
                v ^= bv;
                c ^= bc;
            }
        }
        if v != 0 {
            basis.push((v, c));
        }
    }
    targets
        .iter()
        .map(|&t| {
            let mut v = t;
            let mut c: u128 = 0;
            for &(bv, bc) in &basis {
                let pivot = 1u64 << (63 - bv.leading_zeros());
                if v & pivot != 0 {
                    v ^= bv;
                    c ^= bc;
                }
            }
            if v == 0 {
                Some(c)
            } else {
                None
            }
        })
        .collect()
}
