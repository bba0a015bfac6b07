//! GF(16) arithmetic for the Cauchy-matrix MDS construction.
//!
//! k-fault-tolerant RAID layouts need a code where any k erasures are
//! recoverable. Plain per-disk XOR parity cannot do that for k >= 2, so
//! those layouts are built from a Cauchy matrix over GF(16) and expanded
//! to GF(2): each disk symbol becomes four bit cells and each GF(16)
//! multiplication a 4x4 bit matrix. Field modulus: x^4 + x + 1.

const POLY: u8 = 0b1_0011;

pub fn mul(a: u8, b: u8) -> u8 {
    debug_assert!(a < 16 && b < 16);
    let mut acc: u8 = 0;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a <<= 1;
        if a & 0x10 != 0 {
            a ^= POLY;
        }
        b >>= 1;
    }
    acc
}

pub fn inv(a: u8) -> u8 {
    assert!(a != 0 && a < 16, "no inverse for {a}");
    // a^14 = a^-1 in GF(16)
    let mut acc = 1u8;
    for _ in 0..14 {
        acc = mul(acc, a);
    }
    acc
}

pub fn add(a: u8, b: u8) -> u8 {
    a ^ b
}

/// The 4x4 GF(2) matrix of "multiply by c": row b gives the bits of c*x
/// contributed by bit a of x. Returned as four row masks.
pub fn mul_bit_matrix(c: u8) -> [u8; 4] {
    let mut rows = [0u8; 4];
    for a in 0..4 {
        let prod = mul(c, 1 << a);
        for (b, row) in rows.iter_mut().enumerate() {
            if prod >> b & 1 == 1 {
                *row |= 1 << a;
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms() {
        for a in 1..16u8 {
            assert_eq!(mul(a, inv(a)), 1, "a={a}");
            assert_eq!(mul(a, 1), a);
            for b in 0..16u8 {
                assert_eq!(mul(a, b), mul(b, a));
                for c in 0..16u8 {
                    assert_eq!(mul(a, add(b, c)), add(mul(a, b), mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn bit_matrix_matches_mul() {
        for c in 0..16u8 {
            let m = mul_bit_matrix(c);
            for x in 0..16u8 {
                let mut y = 0u8;
                for (b, row) in m.iter().enumerate() {
                    if (row & x).count_ones() % 2 == 1 {
                        y |= 1 << b;
                    }
                }
                assert_eq!(y, mul(c, x), "c={c} x={x}");
            }
        }
    }
}
